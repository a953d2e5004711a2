#include "zenohl/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "zenohl/errors.hpp"

namespace zenohl {

namespace {

struct CompiledTerm {
  std::uint64_t flip;
  std::uint64_t yz;
  Complex base;
};

constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

std::vector<CompiledTerm> compile_terms(const PauliHamiltonian& h) {
  const int n = h.n_qubits();
  std::vector<CompiledTerm> out;
  out.reserve(h.n_terms());
  for (const auto& [p, c] : h.terms()) {
    CompiledTerm t{0, 0, Complex(c, 0)};
    int n_y = 0;
    for (int q = 0; q < n; ++q) {
      const std::uint64_t bit = std::uint64_t(1) << (n - 1 - q);
      switch (p.op(q)) {
        case 'X': t.flip |= bit; break;
        case 'Y': t.flip |= bit; t.yz |= bit; ++n_y; break;
        case 'Z': t.yz |= bit; break;
        default: break;
      }
    }
    t.base *= kIPow[n_y & 3];
    out.push_back(t);
  }
  return out;
}

void matvec(const std::vector<CompiledTerm>& terms, std::uint64_t dim, const Complex* in,
            Complex* out) {
  std::fill(out, out + dim, Complex(0, 0));
  for (const auto& t : terms) {
    for (std::uint64_t i = 0; i < dim; ++i) {
      const Complex v = (std::popcount(i & t.yz) & 1) ? -in[i] : in[i];
      out[i ^ t.flip] += t.base * v;
    }
  }
}

// psi <- exp(-i dt H) psi with truncation controlled by the analytic
// remainder bound sum_{j>k} (rho dt)^j / j!.
void taylor_segment(const std::vector<CompiledTerm>& terms, double rho, double dt, Vector& psi,
                    double tol) {
  const std::uint64_t dim = psi.size();
  const double x = rho * std::abs(dt);
  Vector term = psi;
  Vector tmp(psi.size());
  double running = 1.0;  // x^k / k!
  for (int k = 1; k <= 60; ++k) {
    matvec(terms, dim, term.data(), tmp.data());
    term = (Complex(0, -dt) / double(k)) * tmp;
    psi += term;
    running *= x / k;
    const double tail = running * (x / (k + 1)) / (1.0 - x / (k + 2));
    if (tail <= tol) return;
  }
  throw NumericError("propagator series failed to converge on a segment");
}

void check_state(const PauliHamiltonian& h, const StateVector& psi) {
  if (h.n_qubits() != psi.n_qubits) throw InputError("Hamiltonian/state size mismatch");
  if (psi.n_qubits > kMaxQubits) throw InputError("statevector simulation capped at 14 qubits");
}

void apply_kick_inplace(const KickSpec& kick, Vector& amps) {
  const std::uint64_t mask = kick.mask();
  const std::uint64_t dim = amps.size();
  for (std::uint64_t i = 0; i < dim; ++i)
    if (std::popcount(i & mask) & 1) amps[i] = -amps[i];
}

}  // namespace

StateVector StateVector::basis_state(int n_qubits, std::uint64_t index) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw InputError("n_qubits out of range");
  if (index >= dim_of(n_qubits)) throw InputError("basis index out of range");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amps = Vector::Zero(dim_of(n_qubits));
  s.amps[index] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(int n_qubits, Vector a) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw InputError("n_qubits out of range");
  if (static_cast<std::uint64_t>(a.size()) != dim_of(n_qubits))
    throw InputError("amplitude vector has wrong dimension");
  const double nrm = a.norm();
  if (std::abs(nrm - 1.0) > 1e-9) throw InputError("state must be normalized");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amps = std::move(a);
  s.amps /= nrm;
  return s;
}

StateVector apply_hamiltonian(const PauliHamiltonian& h, const StateVector& psi) {
  check_state(h, psi);
  StateVector out;
  out.n_qubits = psi.n_qubits;
  out.amps = Vector::Zero(psi.amps.size());
  const auto terms = compile_terms(h);
  matvec(terms, psi.amps.size(), psi.amps.data(), out.amps.data());
  return out;
}

StateVector evolve(const PauliHamiltonian& h, double t, const StateVector& psi, double tol) {
  check_state(h, psi);
  if (tol <= 0) throw InputError("tolerance must be positive");
  StateVector out = psi;
  if (t == 0.0 || h.terms().empty()) return out;
  const double rho = op_norm_upper(h);
  const auto nseg = static_cast<std::uint64_t>(std::ceil(rho * std::abs(t) / 0.9));
  const std::uint64_t segments = std::max<std::uint64_t>(1, nseg);
  if (segments > 100000000ULL) throw NumericError("evolution interval too long to segment");
  const double dt = t / double(segments);
  const double tol_seg = tol / double(segments);
  const auto terms = compile_terms(h);
  for (std::uint64_t s = 0; s < segments; ++s)
    taylor_segment(terms, rho, dt, out.amps, tol_seg);
  const double drift = std::abs(out.amps.norm() - 1.0);
  if (drift > std::max(10.0 * tol, 1e-12))
    throw NumericError("propagator norm drift " + std::to_string(drift));
  out.amps /= out.amps.norm();
  return out;
}

StateVector kicked_evolve(const PauliHamiltonian& h, const KickSpec& kick, double t, int r,
                          const StateVector& psi, double tol, bool elide_back_kick) {
  check_state(h, psi);
  if (kick.n_qubits != psi.n_qubits) throw InputError("kick/state size mismatch");
  if (r < 1) throw InputError("kick count must be >= 1");
  if (elide_back_kick && (r & 1)) throw InputError("back-kick elision requires even r");
  StateVector out = psi;
  const double slice_tol = tol / double(r);
  for (int j = 0; j < r; ++j) {
    out = evolve(h, t / double(r), out, slice_tol);
    apply_kick_inplace(kick, out.amps);
  }
  // (kick^dag)^r = kick^(r mod 2) for the involutive parity kick.
  if (!elide_back_kick && (r & 1)) apply_kick_inplace(kick, out.amps);
  return out;
}

PauliHamiltonian ising_chain(int n_qubits, const IsingParams& params) {
  PauliHamiltonian h(n_qubits);
  for (int q = 0; q < n_qubits; ++q) h.add(PauliString::single(n_qubits, q, 'Z'), params.h);
  for (int q = 0; q + 1 < n_qubits; ++q)
    h.add(PauliString::pair(n_qubits, q, 'X', q + 1, 'X'), params.j);
  return h;
}

StateVector trotter_kicked_evolve(const IsingParams& params, const KickSpec& kick, double t,
                                  int r, const StateVector& psi) {
  if (kick.n_qubits != psi.n_qubits) throw InputError("kick/state size mismatch");
  if (psi.n_qubits > kMaxQubits) throw InputError("statevector simulation capped at 14 qubits");
  if (r < 1) throw InputError("step count must be >= 1");
  const int n = psi.n_qubits;
  const std::uint64_t dim = dim_of(n);
  const double tau = t / double(r);
  StateVector out = psi;

  // Z layer: basis index i picks up exp(-i h tau (n - 2 popcount(i))).
  std::vector<Complex> zfac(n + 1);
  for (int k = 0; k <= n; ++k) zfac[k] = std::exp(Complex(0, -params.h * tau * (n - 2 * k)));
  const double c = std::cos(params.j * tau);
  const double s = std::sin(params.j * tau);

  for (int step = 0; step < r; ++step) {
    for (std::uint64_t i = 0; i < dim; ++i) out.amps[i] *= zfac[std::popcount(i)];
    for (int q = 0; q + 1 < n; ++q) {
      const std::uint64_t mask =
          (std::uint64_t(1) << (n - 1 - q)) | (std::uint64_t(1) << (n - 2 - q));
      for (std::uint64_t i = 0; i < dim; ++i) {
        const std::uint64_t p = i ^ mask;
        if (i < p) {
          const Complex a = out.amps[i];
          const Complex b = out.amps[p];
          out.amps[i] = c * a - kImag * s * b;
          out.amps[p] = c * b - kImag * s * a;
        }
      }
    }
    apply_kick_inplace(kick, out.amps);
  }
  if (r & 1) apply_kick_inplace(kick, out.amps);
  return out;
}

ReducedDensity reduced_density(const StateVector& psi, const std::vector<int>& qubits) {
  const int n = psi.n_qubits;
  if (qubits.empty()) throw InputError("patch must be non-empty");
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    if (qubits[j] < 0 || qubits[j] >= n) throw InputError("patch qubit out of range");
    if (j > 0 && qubits[j] <= qubits[j - 1]) throw InputError("patch qubits must be ascending");
  }
  const int k = static_cast<int>(qubits.size());
  const std::uint64_t dk = dim_of(k);
  const std::uint64_t dim = dim_of(n);
  Matrix grouped = Matrix::Zero(dk, dim >> k);
  for (std::uint64_t i = 0; i < dim; ++i) {
    std::uint64_t kept = 0, rest = 0;
    int kj = 0, rj = 0;
    for (int q = 0; q < n; ++q) {
      const std::uint64_t bit = (i >> (n - 1 - q)) & 1;
      if (kj < k && q == qubits[kj])
        kept |= bit << (k - 1 - kj++);
      else
        rest |= bit << rj++;
    }
    grouped(kept, rest) = psi.amps[i];
  }
  ReducedDensity rd;
  rd.qubits = qubits;
  rd.rho = grouped * grouped.adjoint();
  return rd;
}

Matrix dense_unitary(const PauliHamiltonian& h, double t) {
  if (h.n_qubits() > 10) throw InputError("dense unitary limited to 10 qubits");
  Eigen::SelfAdjointEigenSolver<Matrix> es(to_dense(h));
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(Complex(0, -t * es.eigenvalues()[i]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix dense_kicked_unitary(const PauliHamiltonian& h, const KickSpec& kick, double t, int r) {
  if (h.n_qubits() != kick.n_qubits) throw InputError("Hamiltonian/kick size mismatch");
  if (r < 1) throw InputError("kick count must be >= 1");
  const Matrix step = kick.diagonal().cast<Complex>().asDiagonal() * dense_unitary(h, t / r);
  Matrix v = Matrix::Identity(step.rows(), step.cols());
  for (int j = 0; j < r; ++j) v = step * v;
  if (r & 1) v = kick.diagonal().cast<Complex>().asDiagonal() * v;
  return v;
}

}  // namespace zenohl
