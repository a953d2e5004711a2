#pragma once

#include <cstdint>

#include "zenohl/pauli.hpp"
#include "zenohl/zeno_plan.hpp"

namespace zenohl {

// Lower real branch of the Lambert W function on [-1/e, 0), solved by Halley
// iteration from the log-log asymptotic seed. Relative accuracy 1e-12.
double lambert_w_minus1(double x);

// Kick-sequence error constant 3 xi sqrt(m) ||H||^2 T^2. Uses the certified
// coefficient-sum norm bound by default; the exact spectral norm is available
// for small systems and only tightens the result.
double zeno_constant(const PauliHamiltonian& h, const KickSpec& kick, double time,
                     bool exact_norm = false);

// Minimal kick count r with inflation * C_Z * ln(r) / r <= eps on the
// decaying branch, i.e. the ceiling of -(K/eps) W_{-1}(-eps/K) with
// K = inflation * C_Z. Callers pass inflation 1 for the plain sequence bound,
// 2 for the full-budget guarantee, 2 * n_configs when one budget covers every
// configuration. When eps >= K/e the requirement holds for every r; that
// comes back as kicks = 1 with the vacuous marker instead of an error so
// sweeps stay total.
struct KickCount {
  std::uint64_t kicks = 1;
  bool vacuous = false;
  // Real solution of K ln(r) / r = eps (1.0 when vacuous).
  double threshold = 1.0;
  // The closed-form comparison value (K/eps)(ln(K/eps) + ln ln(K/eps));
  // reported for context, never used for guarantees. 0 when undefined.
  double approximation = 0.0;
};
KickCount required_kicks(double zeno_c, double eps_z, double inflation = 1.0);

// Tomography sample-complexity constant (8/3) 3^(2n) 2^(4n).
double qpt_constant(int n_qubits);

// Copies needed for a diamond-norm-eps, confidence-delta channel estimate:
// ceil((C_QPT / eps^2) ln(2^(4n) / delta)). The aggregate form covers
// n_patches estimates across n_configs configurations from one budget,
// inflating the leading factor by n_configs^2 and the log by n_patches.
std::uint64_t required_copies(int n_qubits, double eps_qpt, double delta);
std::uint64_t required_copies_aggregate(int n_qubits, double eps_qpt, double delta,
                                        int n_configs, int n_patches);

// Coefficient-error bound (pi/T)(gap + eps) from a measured diamond gap and
// the channel budget. Only applicable when T ||H_patch|| <= 1/pi; callers
// verify that upstream and pass the flag.
double corollary_bound(double time, double diamond_gap_upper, double eps,
                       bool norm_precondition_ok = true);
bool corollary_time_valid(const PauliHamiltonian& h_patch, double time,
                          bool exact_norm = false);

// Channel-error budget split between the kick sequence and tomography.
struct ErrorBudget {
  double epsilon = 0.1;
  double epsilon_z = 0.05;
  double epsilon_qpt = 0.05;
  double delta = 0.01;

  static ErrorBudget split(double epsilon, double delta, double zeno_fraction = 0.5);
  void validate() const;  // epsilon_z + epsilon_qpt == epsilon exactly, all in (0,1)
};

// Resource summary for one run: sequence constant, kick and copy
// requirements, and the planning-time coefficient bound (gap term zero).
// Aggregate fields budget all patches of all configurations at once and
// dominate the single-patch numbers.
struct BoundReport {
  double zeno_c = 0.0;
  double qpt_c = 0.0;
  std::uint64_t kicks = 1;
  bool kicks_vacuous = false;
  std::uint64_t copies = 0;
  double coeff_bound = 0.0;
  bool corollary_applicable = false;
  struct Aggregate {
    int n_configs = 1;
    int n_patches = 1;
    std::uint64_t kicks = 1;
    std::uint64_t copies = 0;
  } aggregate;
};

BoundReport bound_report(const PauliHamiltonian& h, const KickSpec& kick, double time,
                         int patch_qubits, const ErrorBudget& budget, int n_configs,
                         int n_patches, bool exact_norm = false);

}  // namespace zenohl
