#include "zenohl/zeno_plan.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>

#include "zenohl/errors.hpp"

namespace zenohl {

KickSpec::KickSpec(int n, std::set<int> frozen_qubits, double xi_value)
    : n_qubits(n), frozen(std::move(frozen_qubits)), xi(xi_value) {
  if (n < 1) throw InputError("n_qubits must be >= 1");
  if (xi <= 0) throw InputError("xi must be positive");
  for (int q : frozen) {
    if (q < 0 || q >= n) throw InputError("frozen qubit out of range");
    mask_ |= std::uint64_t(1) << (n - 1 - q);
  }
}

double KickSpec::sign(std::uint64_t index) const {
  return (std::popcount(index & mask_) & 1) ? -1.0 : 1.0;
}

RealVector KickSpec::diagonal() const {
  RealVector d(dim_of(n_qubits));
  for (std::uint64_t i = 0; i < dim_of(n_qubits); ++i) d[i] = sign(i);
  return d;
}

std::vector<ReshapingConfig> plan_configurations(int n_qubits, double xi) {
  if (n_qubits < 2) throw InputError("reshaping needs a chain of at least 2 qubits");
  std::vector<ReshapingConfig> configs;
  for (int offset = 0; offset < 3; ++offset) {
    ReshapingConfig cfg;
    cfg.offset = offset;
    std::set<int> frozen;
    for (int q = 0; q < n_qubits; ++q)
      if (q % 3 == (offset + 2) % 3) frozen.insert(q);
    std::vector<int> run;
    bool has_pair = false;
    auto close_run = [&] {
      if (!run.empty()) {
        has_pair |= run.size() == 2;
        cfg.patches.push_back(run);
        run.clear();
      }
    };
    for (int q = 0; q < n_qubits; ++q) {
      if (frozen.count(q)) {
        close_run();
      } else {
        run.push_back(q);
      }
    }
    close_run();
    // Offsets whose patches are all singletons add no edge coverage; this
    // only happens for n <= 3.
    if (!has_pair) continue;
    cfg.frozen.assign(frozen.begin(), frozen.end());
    cfg.kick = KickSpec(n_qubits, frozen, xi);
    configs.push_back(std::move(cfg));
  }
  return configs;
}

PauliHamiltonian zeno_project(const PauliHamiltonian& h, const KickSpec& kick) {
  if (h.n_qubits() != kick.n_qubits) throw InputError("Hamiltonian/kick size mismatch");
  PauliHamiltonian out(h.n_qubits());
  for (const auto& [p, c] : h.terms())
    if (commutes_with_kick(p, kick.frozen)) out.add(p, c);
  return out;
}

PauliHamiltonian expected_patch_hamiltonian(const PauliHamiltonian& h,
                                            const ReshapingConfig& config,
                                            const std::vector<int>& patch) {
  if (std::find(config.patches.begin(), config.patches.end(), patch) == config.patches.end())
    throw InputError("patch does not belong to the configuration");
  const std::set<int> frozen(config.frozen.begin(), config.frozen.end());
  const int np = static_cast<int>(patch.size());
  PauliHamiltonian out(np);
  for (const auto& [p, c] : h.terms()) {
    if (!commutes_with_kick(p, config.kick.frozen)) continue;
    std::string local(np, 'I');
    bool in_patch = false;
    bool killed = false;
    for (int q : p.support()) {
      const auto it = std::find(patch.begin(), patch.end(), q);
      if (it != patch.end()) {
        local[it - patch.begin()] = p.op(q);
        in_patch = true;
      } else if (frozen.count(q)) {
        // Frozen qubits are prepared in |0>: Z contributes a factor +1, X/Y
        // average to zero in that sector.
        if (p.op(q) != 'Z') killed = true;
      } else {
        // Support on another patch: the term contributes nothing here.
        in_patch = false;
        break;
      }
    }
    if (in_patch && !killed) out.add(PauliString(local), c);
  }
  return out;
}

std::vector<PauliString> local_patch_basis(int patch_size) {
  if (patch_size < 1 || patch_size > 2) throw InputError("patches have 1 or 2 qubits");
  std::vector<PauliString> basis;
  const char L[4] = {'I', 'X', 'Y', 'Z'};
  if (patch_size == 1) {
    for (int a = 1; a < 4; ++a) basis.emplace_back(std::string(1, L[a]));
    return basis;
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == 0 && b == 0) continue;
      basis.emplace_back(std::string{L[a], L[b]});
    }
  return basis;
}

ContaminationModel build_contamination_model(int n_qubits,
                                             const std::vector<ReshapingConfig>& configs) {
  ContaminationModel model;
  model.n_qubits = n_qubits;
  model.global_basis = two_local_basis(n_qubits);

  for (int ci = 0; ci < static_cast<int>(configs.size()); ++ci)
    for (int pi = 0; pi < static_cast<int>(configs[ci].patches.size()); ++pi) {
      const int nl = static_cast<int>(local_patch_basis(
          static_cast<int>(configs[ci].patches[pi].size())).size());
      for (int li = 0; li < nl; ++li) model.rows.push_back({ci, pi, li});
    }

  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < static_cast<int>(model.global_basis.size()); ++col) {
    PauliHamiltonian unit(n_qubits);
    unit.add(model.global_basis[col], 1.0);
    int row = 0;
    for (const auto& cfg : configs)
      for (const auto& patch : cfg.patches) {
        const auto local = local_patch_basis(static_cast<int>(patch.size()));
        const auto expected = expected_patch_hamiltonian(unit, cfg, patch);
        for (const auto& word : local) {
          const double v = expected.coefficient(word);
          if (v != 0.0) triplets.emplace_back(row, col, v);
          ++row;
        }
      }
  }
  model.matrix.resize(static_cast<int>(model.rows.size()),
                      static_cast<int>(model.global_basis.size()));
  model.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return model;
}

RealVector combine_patches(const ContaminationModel& model, const RealVector& learned) {
  if (learned.size() != model.matrix.rows())
    throw InputError("learned vector length does not match model rows");
  const RealMatrix dense = RealMatrix(model.matrix);
  Eigen::ColPivHouseholderQR<RealMatrix> qr(dense);
  if (qr.rank() < dense.cols())
    throw InternalError("contamination model is rank deficient");
  return qr.solve(learned);
}

}  // namespace zenohl
