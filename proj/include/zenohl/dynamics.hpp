#pragma once

#include <cstdint>
#include <vector>

#include "zenohl/pauli.hpp"
#include "zenohl/types.hpp"
#include "zenohl/zeno_plan.hpp"

namespace zenohl {

// Exact statevector on n_qubits qubits, 2^n amplitudes, qubit 0 most
// significant. Simulation is capped at n_qubits <= 14.
struct StateVector {
  int n_qubits = 0;
  Vector amps;

  static StateVector basis_state(int n_qubits, std::uint64_t index);
  static StateVector from_amplitudes(int n_qubits, Vector a);

  double norm() const { return amps.norm(); }
};

inline constexpr int kMaxQubits = 14;

// H |psi>.
StateVector apply_hamiltonian(const PauliHamiltonian& h, const StateVector& psi);

// exp(-i t H) |psi> by adaptive truncated Taylor series: the time interval is
// split so that ||H||_1 * dt <= 0.9 per segment and each segment's series is
// truncated once the analytic remainder bound drops below its share of `tol`.
// Total error is certified <= tol; norm drift beyond 10*tol raises
// NumericError.
StateVector evolve(const PauliHamiltonian& h, double t, const StateVector& psi,
                   double tol = 1e-10);

// r rounds of [exp(-i H T/r) then kick], followed by the closing (kick^dag)^r,
// which for the parity kick is the identity when r is even. Setting
// elide_back_kick skips that closing factor and therefore requires even r.
StateVector kicked_evolve(const PauliHamiltonian& h, const KickSpec& kick, double t, int r,
                          const StateVector& psi, double tol = 1e-10,
                          bool elide_back_kick = false);

// Transverse-coupling chain H = h * sum_j Z_j + J * sum_j X_j X_{j+1}.
struct IsingParams {
  double h = 0.0;
  double j = 0.0;
};

PauliHamiltonian ising_chain(int n_qubits, const IsingParams& params);

// r first-order product steps (Z-rotation layer, then the layer of exact
// two-qubit XX rotations), one kick after each step, closing (kick^dag)^r.
// All rotations are applied exactly, so the only approximation is the product
// splitting itself.
StateVector trotter_kicked_evolve(const IsingParams& params, const KickSpec& kick, double t,
                                  int r, const StateVector& psi);

struct ReducedDensity {
  std::vector<int> qubits;  // ascending global indices
  Matrix rho;
};

ReducedDensity reduced_density(const StateVector& psi, const std::vector<int>& qubits);

// Dense references for validating the statevector paths (n_qubits <= 10).
Matrix dense_unitary(const PauliHamiltonian& h, double t);
Matrix dense_kicked_unitary(const PauliHamiltonian& h, const KickSpec& kick, double t, int r);

}  // namespace zenohl
