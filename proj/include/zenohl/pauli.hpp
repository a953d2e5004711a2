#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zenohl/errors.hpp"
#include "zenohl/types.hpp"

namespace zenohl {

// Tensor-product Pauli word on a fixed number of qubits, stored as a string of
// letters from {I, X, Y, Z}. Qubit 0 is the FIRST letter and the MOST
// significant factor in every dense/Kronecker construction in this library.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::string letters);

  static PauliString identity(int n_qubits);
  static PauliString single(int n_qubits, int qubit, char op);
  static PauliString pair(int n_qubits, int qubit_a, char op_a, int qubit_b, char op_b);

  int n_qubits() const { return static_cast<int>(letters_.size()); }
  char op(int qubit) const;
  const std::string& str() const { return letters_; }

  bool is_identity() const;
  // Qubits carrying a non-identity letter, ascending.
  std::vector<int> support() const;
  int weight() const;

  friend bool operator==(const PauliString& a, const PauliString& b) = default;
  friend auto operator<=>(const PauliString& a, const PauliString& b) = default;

 private:
  std::string letters_;
};

// Product of two Pauli words: a * b = phase * word, phase in {1, -1, i, -i}.
std::pair<Complex, PauliString> multiply(const PauliString& a, const PauliString& b);

// True iff the words commute (Pauli words either commute or anticommute).
bool commutes(const PauliString& a, const PauliString& b);

// True iff p commutes with the tensor product of Z over `frozen`.
bool commutes_with_kick(const PauliString& p, const std::set<int>& frozen);

// Dense 2^n x 2^n matrix of the word (qubit 0 = most significant factor).
Matrix to_dense(const PauliString& p);

// Applies the word times `coeff` to a statevector, accumulating into `out`
// (both of length 2^n). This is the kernel the dynamics module is built on.
void accumulate_term(const PauliString& p, Complex coeff, const Vector& in, Vector& out);

// Real 2-local Hamiltonian H = sum_j c_j P_j. Identity terms are excluded and
// stored coefficients are nonzero; the map keeps term iteration deterministic.
class PauliHamiltonian {
 public:
  PauliHamiltonian() = default;
  explicit PauliHamiltonian(int n_qubits) : n_qubits_(n_qubits) {}

  int n_qubits() const { return n_qubits_; }
  const std::map<PauliString, double>& terms() const { return terms_; }
  std::size_t n_terms() const { return terms_.size(); }

  // Accumulates c onto the coefficient of p; erases the term if it cancels to
  // exactly zero. Identity words are rejected.
  void add(const PauliString& p, double c);
  double coefficient(const PauliString& p) const;

 private:
  int n_qubits_ = 0;
  std::map<PauliString, double> terms_;
};

Matrix to_dense(const PauliHamiltonian& h);

// Triangle-inequality bound sum_j |c_j| >= ||H||_op. Cheap at any size.
double op_norm_upper(const PauliHamiltonian& h);

// Spectral norm. Dense eigensolve for small n, Lanczos on the term kernel
// above it; requires n_qubits <= 14.
double op_norm_exact(const PauliHamiltonian& h);

// Normalized Hilbert-Schmidt projection Re Tr(P H) / 2^n, the coefficient of
// the word P in the Pauli expansion of a Hermitian H.
double coeff_inner(const Matrix& h_dense, const PauliString& p);

// Canonical ordered basis of the geometrically 2-local chain families:
// single-site words (site-major, letters X,Y,Z) followed by nearest-neighbour
// pair words (edge-major, letter pairs XX,XY,...,ZZ). Size 3n + 9(n-1).
std::vector<PauliString> two_local_basis(int n_qubits);

// Random chain Hamiltonian with every coefficient of two_local_basis drawn
// uniformly from [-1, 1]. Deterministic in (n_qubits, seed).
PauliHamiltonian random_2local_chain(int n_qubits, std::uint64_t seed);

// True iff every term is single-site or nearest-neighbour on the chain.
bool is_2local_chain(const PauliHamiltonian& h);

// Text (JSON) serialization; load(save(h)) reproduces the exact term map,
// coefficients bit-identical.
std::string save_hamiltonian(const PauliHamiltonian& h);
PauliHamiltonian load_hamiltonian(const std::string& text);

}  // namespace zenohl
