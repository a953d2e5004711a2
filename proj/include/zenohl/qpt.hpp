#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zenohl/errors.hpp"
#include "zenohl/types.hpp"

namespace zenohl {

// Process tomography on a small register (1 or 2 qubits in the protocol,
// supported up to 5). Conventions, fixed across the library:
//   - fiducial inputs are products of the six single-qubit states in the
//     order Z+, Z-, X+, X-, Y+, Y-; fiducial index digits are base 6 with
//     qubit 0 as the most significant digit;
//   - measurement settings are products of the three axes in the order
//     X, Y, Z; setting index digits are base 3, qubit 0 most significant;
//   - outcome index bit (n-1-q) is 0 for the + eigenvalue on qubit q;
//   - probability columns stack settings-major, outcomes-minor;
//   - vec() is column stacking, so vec(AXB) = (B^T (x) A) vec(X) and a
//     unitary V acts on vec space as conj(V) (x) V.

int n_fiducials(int n_qubits);       // 6^n
int n_settings(int n_qubits);        // 3^n
int n_outcome_rows(int n_qubits);    // 3^n * 2^n

Vector fiducial_state(int n_qubits, int fiducial);
Matrix fiducial_density(int n_qubits, int fiducial);

// Rank-one projector measured by (setting, outcome).
Matrix povm_effect(int n_qubits, int setting, int outcome);

// Exact outcome probabilities of one output density, stacked settings-major.
// Entries are clipped into [0, 1]; anything further than 1e-12 outside is a
// NumericError.
RealVector outcome_probabilities(const Matrix& rho_out);

// Draws one multinomial sample of `shots` per setting block (conditional
// binomial chain, deterministic for a fixed engine state). `probs` is a
// stacked column as produced by outcome_probabilities.
std::vector<std::uint64_t> sample_outcomes(const RealVector& probs, int n_qubits,
                                           std::uint64_t shots, std::mt19937_64& gen);

// Raw data of one patch tomography run. `data` holds one column per fiducial
// (3^n 2^n rows): exact probabilities when shots_per_setting is 0, otherwise
// outcome counts. For single-qubit patches inside a longer chain several
// global settings collapse onto the same local cell; settings_per_cell
// records how many were pooled.
struct TomographyRecord {
  std::vector<int> patch;
  int n_qubits = 0;
  std::uint64_t shots_per_setting = 0;
  std::uint64_t seed = 0;
  double time = 0.0;
  int kicks = 0;
  int config_offset = 0;
  int settings_per_cell = 1;
  RealMatrix data;

  bool exact() const { return shots_per_setting == 0; }
  // Estimated probability matrix: exact data divided by the pool size,
  // counts divided by shots_per_setting * settings_per_cell.
  RealMatrix probabilities() const;

  std::string to_json() const;
  static TomographyRecord from_json(const std::string& text);
};

// Least-squares transfer-matrix estimate from a probability matrix with one
// column per fiducial. Solves prob = M Y S for Y via pseudoinverses of the
// known fiducial and effect matrices.
Matrix linear_inversion(const RealMatrix& probabilities, int n_qubits);

// Reshuffle between the transfer matrix and the trace-one Choi matrix
// (choi = reshuffle / d). Both directions are exact linear bijections.
Matrix transfer_to_choi(const Matrix& transfer);
Matrix choi_to_transfer(const Matrix& choi);

// Projects a noisy Choi estimate onto Hermitian trace-one form.
Matrix physical_choi(const Matrix& choi);

struct UnitaryFitOptions {
  int max_iter = 200;
  double tol = 1e-10;
  // Stop after the spectral initialization instead of iterating the
  // fixed-point map. The two agree on clean data; the iteration is the
  // robust default on noisy estimates.
  bool rank1_only = false;
  Matrix init;  // optional unitary starting point
};

struct UnitaryFit {
  Matrix unitary;
  // 1 - <vec U| choi |vec U> / d, the unitarity deficit. A depolarizing
  // channel of strength lambda lands at lambda (1 - 1/d^2); debiased divides
  // that factor back out.
  double lambda_raw = 0.0;
  double lambda_debiased = 0.0;
  int iterations = 0;
};

// Closest-unitary fit of a Choi matrix: maximizes <vec U| C |vec U> by
// alternating the Choi action with a polar projection. The returned unitary
// carries the library's global-phase convention (real nonnegative trace
// whenever the trace is not numerically zero).
UnitaryFit closest_unitary(const Matrix& choi, const UnitaryFitOptions& opts = {});

// Hermitian generator H with u = exp(-i T H), via the principal matrix
// logarithm. Eigenphases must stay 0.1 away from the branch cut at +-pi or
// the result would alias; violations raise NumericError naming the phase.
// The identity component is removed.
Matrix hamiltonian_from_unitary(const Matrix& u, double time);

double trace_norm(const Matrix& m);

// Diamond-distance bracket from trace-one Choi matrices:
// ||A - B||_1 <= d_diamond <= d * ||A - B||_1.
struct DiamondBracket {
  double lower = 0.0;
  double upper = 0.0;
};
DiamondBracket diamond_bracket(const Matrix& choi_a, const Matrix& choi_b);

// Exact diamond distance between two unitary channels, 2 sqrt(1 - nu^2)
// where nu is the distance from the origin to the convex hull of the
// eigenvalues of u^dagger v.
double diamond_unitary(const Matrix& u, const Matrix& v);

}  // namespace zenohl
