#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zenohl/bounds.hpp"
#include "zenohl/dynamics.hpp"
#include "zenohl/pauli.hpp"
#include "zenohl/qpt.hpp"
#include "zenohl/zeno_plan.hpp"

namespace zenohl {

// How the global state evolves between preparation and measurement:
//   exact_kicked      certified Taylor propagation of the kicked sequence
//   trotter_kicked    product steps with one kick per step (coupling chains)
//   exact_zeno_oracle evolution directly under the kick-commuting projection,
//                     removing all sequence error; the pipeline's self-check
enum class EvolutionMode { exact_kicked, trotter_kicked, exact_zeno_oracle };

struct ProtocolSpec {
  int n_qubits = 6;
  double time = 0.01;
  int kicks = 10;
  std::uint64_t shots_per_setting = 0;  // 0 = exact outcome probabilities
  EvolutionMode mode = EvolutionMode::exact_kicked;
  double noise_lambda = 0.0;  // depolarizing strength per patch channel, [0,1)
  std::uint64_t seed = 1;
  // Channel-error budget feeding the bound report and per-patch checks.
  double epsilon = 0.1;
  double delta = 0.01;
  double zeno_fraction = 0.5;
  double xi = 0.5;
  double evolve_tol = 1e-10;
  std::optional<IsingParams> ising;  // required by trotter_kicked

  void validate() const;
};

// One patch channel after the full estimation chain.
struct ChannelEstimate {
  int config_index = 0;
  int patch_index = 0;
  std::vector<int> patch;
  Matrix transfer;  // raw linear inversion
  Matrix choi;      // Hermitian trace-one projection of the estimate
  Matrix unitary;   // closest-unitary fit
  double lambda_raw = 0.0;
  double lambda_debiased = 0.0;
  RealVector local_coeffs;     // estimated, local_patch_basis order
  RealVector expected_coeffs;  // contamination-collapsed truth, same order
  double coeff_error = 0.0;    // l2 distance of the two
  // Diamond bracket between the fitted unitary channel and the inversion
  // estimate, the measurable half of the coefficient bound.
  DiamondBracket gap;
  // Channel-error term entering the bound: twice the sequence constant times
  // ln(r)/r in kicked mode (zero for the oracle mode), plus the tomography
  // budget when sampling. Trotter splitting error is not budgeted.
  double eps_channel = 0.0;
  bool corollary_applicable = false;  // T ||H_patch|| <= 1/pi
  double corollary_value = 0.0;
};

struct RunMetrics {
  double l2 = 0.0;
  RealVector abs_errors;            // per global basis word
  std::vector<int> nonzero_terms;   // basis indices with a nonzero true value
  RealVector rel_errors;            // aligned with nonzero_terms
  double mean_abs = 0.0;
  double max_abs = 0.0;
  double median_rel = 0.0;
  // shots_per_setting x 324 settings x configurations; 0 in exact mode
  std::uint64_t total_copies = 0;
};

struct RunResult {
  ProtocolSpec spec;
  ContaminationModel model;
  std::vector<ChannelEstimate> estimates;  // configuration-major, patch-minor
  std::vector<TomographyRecord> records;   // aligned with estimates
  RealVector c_true;  // model.global_basis order
  RealVector c_hat;
  RunMetrics metrics;
  BoundReport bounds;
};

// (1 - lambda) p + lambda / 2^n on a stacked probability column.
RealVector inject_depolarizing(const RealVector& probs, double lambda, int n_qubits);

// Product state for one configuration: the given fiducial on each patch
// (base-6 digits, first patch qubit most significant), |0> on frozen qubits.
StateVector prepare_fiducials(const ReshapingConfig& config, int n_qubits,
                              const std::vector<int>& patch_fiducials);

// The full protocol: for every configuration the 36 x 9 lockstep
// preparation/measurement grid drives all patches simultaneously (single
// qubit patches pool the grid 18-fold onto their 6 x 3 local cells), each
// patch channel is estimated by inversion, unitary projection and the matrix
// logarithm, and the per-patch coefficients are least-squares combined into
// the global chain estimate.
RunResult run_protocol(const PauliHamiltonian& h_true, const ProtocolSpec& spec);

enum class SweepAxis { copies, kicks, qubits };

struct SweepPoint {
  double x = 0.0;
  int completed = 0;
  double mean_l2 = 0.0;
  double std_l2 = 0.0;
  double mean_abs = 0.0;
  double std_abs = 0.0;
  std::vector<std::string> failures;
};

// Repeats run_protocol over the grid with fresh random chain instances
// (shared across grid points through the repeat index) and derived seeds;
// per-point failures are recorded and the sweep continues.
std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& grid,
                              const ProtocolSpec& base, int repeats = 10);

struct IsingEstimate {
  RunResult run;
  double h_hat = 0.0;       // median over single-site Z estimates
  double j_hat = 0.0;       // median over nearest-neighbour XX estimates
  double lambda_hat = 0.0;  // median debiased depolarization over patches
  double median_rel = 0.0;
};

// Coupling-chain experiment: Trotterized kicked evolution of
// h sum Z_j + J sum X_j X_{j+1} with one kick per step.
IsingEstimate ising_experiment(const ProtocolSpec& spec);

}  // namespace zenohl
