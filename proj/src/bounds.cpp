#include "zenohl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace zenohl {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e

double norm_for(const PauliHamiltonian& h, bool exact_norm) {
  return exact_norm ? op_norm_exact(h) : op_norm_upper(h);
}

}  // namespace

double lambert_w_minus1(double x) {
  if (!(x < 0.0) || x < -kInvE - 1e-12)
    throw InputError("lambert_w_minus1 needs x in [-1/e, 0)");
  const double offset = 1.0 + std::numbers::e * x;
  if (offset <= 1e-12) return -1.0;  // branch point; Halley loses its footing here

  // Seed: branch-point series when close to -1/e, log-log asymptotic otherwise.
  double w;
  if (offset < 0.25) {
    const double s = -std::sqrt(2.0 * offset);
    w = -1.0 + s - s * s / 3.0;
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }

  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double fp = ew * (w + 1.0);
    const double step = f / (fp - (w + 2.0) * f / (2.0 * (w + 1.0)));
    w -= step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(w))) break;
  }
  return w;
}

double zeno_constant(const PauliHamiltonian& h, const KickSpec& kick, double time,
                     bool exact_norm) {
  if (time < 0.0) throw InputError("evolution time must be nonnegative");
  if (h.n_qubits() != kick.n_qubits) throw InputError("Hamiltonian/kick size mismatch");
  const double norm = norm_for(h, exact_norm);
  return 3.0 * kick.xi * std::sqrt(double(kick.m())) * norm * norm * time * time;
}

KickCount required_kicks(double zeno_c, double eps_z, double inflation) {
  if (zeno_c < 0.0) throw InputError("sequence constant must be nonnegative");
  if (!(eps_z > 0.0)) throw InputError("eps_z must be positive");
  if (!(inflation >= 1.0)) throw InputError("inflation must be >= 1");

  KickCount out;
  const double k = inflation * zeno_c;
  const double ratio = k > 0.0 ? eps_z / k : std::numeric_limits<double>::infinity();
  if (ratio >= kInvE) {
    out.vacuous = true;
    return out;
  }

  out.threshold = -(k / eps_z) * lambert_w_minus1(-ratio);
  out.kicks = std::uint64_t(std::ceil(out.threshold));
  // Guard the ceiling against roundoff in the W evaluation.
  while (k * std::log(double(out.kicks)) / double(out.kicks) > eps_z * (1.0 + 1e-12))
    ++out.kicks;

  const double inv = 1.0 / ratio;  // K / eps
  if (std::log(inv) > 1.0) out.approximation = inv * (std::log(inv) + std::log(std::log(inv)));
  return out;
}

double qpt_constant(int n_qubits) {
  if (n_qubits < 1) throw InputError("register must have at least 1 qubit");
  return (8.0 / 3.0) * std::pow(3.0, 2 * n_qubits) * std::pow(2.0, 4 * n_qubits);
}

std::uint64_t required_copies(int n_qubits, double eps_qpt, double delta) {
  return required_copies_aggregate(n_qubits, eps_qpt, delta, 1, 1);
}

std::uint64_t required_copies_aggregate(int n_qubits, double eps_qpt, double delta,
                                        int n_configs, int n_patches) {
  if (!(eps_qpt > 0.0 && eps_qpt < 1.0)) throw InputError("eps_qpt must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must be in (0,1)");
  if (n_configs < 1 || n_patches < 1) throw InputError("aggregate counts must be >= 1");
  const double c = qpt_constant(n_qubits) * double(n_configs) * double(n_configs);
  const double dim_term = std::pow(2.0, 4 * n_qubits) * double(n_patches);
  const double copies = c / (eps_qpt * eps_qpt) * std::log(dim_term / delta);
  return std::uint64_t(std::ceil(copies));
}

double corollary_bound(double time, double diamond_gap_upper, double eps,
                       bool norm_precondition_ok) {
  if (!(time > 0.0)) throw InputError("evolution time must be positive");
  if (diamond_gap_upper < 0.0) throw InputError("diamond gap must be nonnegative");
  if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
  if (!norm_precondition_ok)
    throw InputError("coefficient bound needs T ||H|| <= 1/pi; precondition not met");
  return std::numbers::pi / time * (diamond_gap_upper + eps);
}

bool corollary_time_valid(const PauliHamiltonian& h_patch, double time, bool exact_norm) {
  if (!(time > 0.0)) throw InputError("evolution time must be positive");
  return time * norm_for(h_patch, exact_norm) <= 1.0 / std::numbers::pi;
}

ErrorBudget ErrorBudget::split(double epsilon, double delta, double zeno_fraction) {
  if (!(zeno_fraction > 0.0 && zeno_fraction < 1.0))
    throw InputError("zeno_fraction must be in (0,1)");
  ErrorBudget b;
  b.epsilon = epsilon;
  b.epsilon_z = epsilon * zeno_fraction;
  b.epsilon_qpt = epsilon - b.epsilon_z;
  b.delta = delta;
  b.validate();
  return b;
}

void ErrorBudget::validate() const {
  for (double v : {epsilon, epsilon_z, epsilon_qpt, delta})
    if (!(v > 0.0 && v < 1.0)) throw InputError("budget values must be in (0,1)");
  if (epsilon_z + epsilon_qpt != epsilon)
    throw InputError("budget must split exactly: epsilon_z + epsilon_qpt == epsilon");
}

BoundReport bound_report(const PauliHamiltonian& h, const KickSpec& kick, double time,
                         int patch_qubits, const ErrorBudget& budget, int n_configs,
                         int n_patches, bool exact_norm) {
  budget.validate();
  if (n_configs < 1 || n_patches < n_configs)
    throw InputError("need at least one patch per configuration");

  BoundReport report;
  report.zeno_c = zeno_constant(h, kick, time, exact_norm);
  report.qpt_c = qpt_constant(patch_qubits);

  const KickCount single = required_kicks(report.zeno_c, budget.epsilon_z, 2.0);
  report.kicks = single.kicks;
  report.kicks_vacuous = single.vacuous;
  report.copies = required_copies(patch_qubits, budget.epsilon_qpt, budget.delta);

  report.corollary_applicable = corollary_time_valid(h, time, exact_norm);
  if (report.corollary_applicable)
    report.coeff_bound = corollary_bound(time, 0.0, budget.epsilon, true);

  report.aggregate.n_configs = n_configs;
  report.aggregate.n_patches = n_patches;
  report.aggregate.kicks =
      required_kicks(report.zeno_c, budget.epsilon_z, 2.0 * n_configs).kicks;
  report.aggregate.copies = required_copies_aggregate(patch_qubits, budget.epsilon_qpt,
                                                      budget.delta, n_configs, n_patches);
  return report;
}

}  // namespace zenohl
