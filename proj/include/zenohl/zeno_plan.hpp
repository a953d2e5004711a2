#pragma once

#include <Eigen/Sparse>

#include <cstdint>
#include <set>
#include <vector>

#include "zenohl/pauli.hpp"
#include "zenohl/types.hpp"

namespace zenohl {

// Parity kick: tensor product of Z over the frozen qubits. Its two spectral
// sectors (frozen-parity even/odd) are the subspaces the repeated kicks
// protect. xi is the inverse spectral gap entering the kick-count constant;
// the kick eigenvalues are +-1 (gap 2 on the unit circle), hence the 1/2
// default. m is the number of protected sectors.
struct KickSpec {
  int n_qubits = 0;
  std::set<int> frozen;
  double xi = 0.5;

  KickSpec() = default;
  KickSpec(int n, std::set<int> frozen_qubits, double xi_value = 0.5);

  int m() const { return frozen.empty() ? 1 : 2; }
  std::uint64_t mask() const { return mask_; }
  // Diagonal entry (+-1) of the kick at a computational basis index.
  double sign(std::uint64_t index) const;
  RealVector diagonal() const;

 private:
  std::uint64_t mask_ = 0;
};

// One reshaping configuration: which qubits are frozen and which contiguous
// groups (size 1 or 2) are tomography targets.
struct ReshapingConfig {
  int offset = 0;
  std::vector<std::vector<int>> patches;
  std::vector<int> frozen;
  KickSpec kick;
};

// The chain is covered by configurations at offsets 0, 1, 2; offsets without
// any two-qubit patch (possible only for n <= 3) are dropped. Across the kept
// configurations every edge (i, i+1) is a target patch exactly once and every
// qubit is a target at least twice for n > 3.
std::vector<ReshapingConfig> plan_configurations(int n_qubits, double xi = 0.5);

// Projection onto the kick-commuting part: sum_k P_k H P_k equals the sum of
// the terms of h that commute with the kick.
PauliHamiltonian zeno_project(const PauliHamiltonian& h, const KickSpec& kick);

// Effective Hamiltonian the protocol learns on one patch of one
// configuration: kick-commuting terms supported inside the patch, plus the
// cross terms sigma_a (x) Z_f (a in patch, f frozen neighbour) collapsed onto
// sigma_a by the frozen |0> preparation. Terms with no patch support drop.
PauliHamiltonian expected_patch_hamiltonian(const PauliHamiltonian& h,
                                            const ReshapingConfig& config,
                                            const std::vector<int>& patch);

// Linear map from global two_local_basis coefficients to the stacked ideal
// learned patch coefficients, one row per (configuration, patch, local basis
// word). Entries are 0/1; full column rank for every n >= 2.
struct ContaminationModel {
  int n_qubits = 0;
  Eigen::SparseMatrix<double> matrix;  // rows: stacked learned coords, cols: global basis
  std::vector<PauliString> global_basis;
  // Row bookkeeping: (config index, patch index, local word index).
  struct RowKey {
    int config;
    int patch;
    int local;
  };
  std::vector<RowKey> rows;
};

ContaminationModel build_contamination_model(int n_qubits,
                                             const std::vector<ReshapingConfig>& configs);

// Local operator basis the per-patch estimates are expressed in: X,Y,Z for a
// single qubit; the 15 non-identity two-letter words (lexicographic, I<X<Y<Z)
// for a pair.
std::vector<PauliString> local_patch_basis(int patch_size);

// Least-squares combination of stacked learned coefficients into global chain
// coefficients.
RealVector combine_patches(const ContaminationModel& model, const RealVector& learned);

}  // namespace zenohl
