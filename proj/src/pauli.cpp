#include "zenohl/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "zenohl/rng.hpp"
#include <json.hpp>

namespace zenohl {

namespace {

int letter_index(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    case 'Z': return 3;
    default: throw InputError(std::string("invalid Pauli letter '") + c + "'");
  }
}

constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};

// Single-qubit products a*b: resulting letter and phase exponent k (phase =
// i^k). Rows/columns ordered I, X, Y, Z.
constexpr int kProdLetter[4][4] = {
    {0, 1, 2, 3},
    {1, 0, 3, 2},
    {2, 3, 0, 1},
    {3, 2, 1, 0},
};
constexpr int kProdPhase[4][4] = {
    {0, 0, 0, 0},
    {0, 0, 1, 3},
    {0, 3, 0, 1},
    {0, 1, 3, 0},
};

constexpr Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

struct TermMasks {
  std::uint64_t flip = 0;  // bits at X/Y positions
  std::uint64_t yz = 0;    // bits at Y/Z positions
  int n_y = 0;
};

// Qubit q occupies bit (n-1-q) so that qubit 0 is the most significant factor.
TermMasks masks_of(const PauliString& p) {
  TermMasks m;
  const int n = p.n_qubits();
  for (int q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t(1) << (n - 1 - q);
    switch (p.op(q)) {
      case 'X': m.flip |= bit; break;
      case 'Y': m.flip |= bit; m.yz |= bit; ++m.n_y; break;
      case 'Z': m.yz |= bit; break;
      default: break;
    }
  }
  return m;
}

void check_qubit(int n, int q) {
  if (q < 0 || q >= n) throw InputError("qubit index out of range");
}

}  // namespace

PauliString::PauliString(std::string letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw InputError("empty Pauli string");
  for (char c : letters_) letter_index(c);
}

PauliString PauliString::identity(int n_qubits) {
  if (n_qubits < 1) throw InputError("n_qubits must be >= 1");
  return PauliString(std::string(n_qubits, 'I'));
}

PauliString PauliString::single(int n_qubits, int qubit, char op) {
  check_qubit(n_qubits, qubit);
  std::string s(n_qubits, 'I');
  s[qubit] = op;
  return PauliString(std::move(s));
}

PauliString PauliString::pair(int n_qubits, int qubit_a, char op_a, int qubit_b, char op_b) {
  check_qubit(n_qubits, qubit_a);
  check_qubit(n_qubits, qubit_b);
  if (qubit_a == qubit_b) throw InputError("pair qubits must differ");
  std::string s(n_qubits, 'I');
  s[qubit_a] = op_a;
  s[qubit_b] = op_b;
  return PauliString(std::move(s));
}

char PauliString::op(int qubit) const {
  check_qubit(n_qubits(), qubit);
  return letters_[qubit];
}

bool PauliString::is_identity() const {
  return letters_.find_first_not_of('I') == std::string::npos;
}

std::vector<int> PauliString::support() const {
  std::vector<int> s;
  for (int q = 0; q < n_qubits(); ++q)
    if (letters_[q] != 'I') s.push_back(q);
  return s;
}

int PauliString::weight() const { return static_cast<int>(support().size()); }

std::pair<Complex, PauliString> multiply(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits()) throw InputError("Pauli string lengths differ");
  std::string out(a.n_qubits(), 'I');
  int phase = 0;
  for (int q = 0; q < a.n_qubits(); ++q) {
    const int ia = letter_index(a.op(q));
    const int ib = letter_index(b.op(q));
    out[q] = kLetters[kProdLetter[ia][ib]];
    phase = (phase + kProdPhase[ia][ib]) & 3;
  }
  return {kPhases[phase], PauliString(std::move(out))};
}

bool commutes(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits()) throw InputError("Pauli string lengths differ");
  int anti = 0;
  for (int q = 0; q < a.n_qubits(); ++q) {
    const char ca = a.op(q);
    const char cb = b.op(q);
    if (ca != 'I' && cb != 'I' && ca != cb) ++anti;
  }
  return (anti & 1) == 0;
}

bool commutes_with_kick(const PauliString& p, const std::set<int>& frozen) {
  int anti = 0;
  for (int q : frozen) {
    check_qubit(p.n_qubits(), q);
    const char c = p.op(q);
    if (c == 'X' || c == 'Y') ++anti;
  }
  return (anti & 1) == 0;
}

void accumulate_term(const PauliString& p, Complex coeff, const Vector& in, Vector& out) {
  const std::uint64_t dim = dim_of(p.n_qubits());
  if (static_cast<std::uint64_t>(in.size()) != dim ||
      static_cast<std::uint64_t>(out.size()) != dim)
    throw InputError("state dimension does not match Pauli string");
  const TermMasks m = masks_of(p);
  const Complex base = coeff * kPhases[m.n_y & 3];
  for (std::uint64_t i = 0; i < dim; ++i) {
    const double sign = (std::popcount(i & m.yz) & 1) ? -1.0 : 1.0;
    out[i ^ m.flip] += base * sign * in[i];
  }
}

Matrix to_dense(const PauliString& p) {
  const std::uint64_t dim = dim_of(p.n_qubits());
  Matrix out = Matrix::Zero(dim, dim);
  const TermMasks m = masks_of(p);
  const Complex base = kPhases[m.n_y & 3];
  for (std::uint64_t i = 0; i < dim; ++i) {
    const double sign = (std::popcount(i & m.yz) & 1) ? -1.0 : 1.0;
    out(i ^ m.flip, i) = base * sign;
  }
  return out;
}

void PauliHamiltonian::add(const PauliString& p, double c) {
  if (n_qubits_ == 0) n_qubits_ = p.n_qubits();
  if (p.n_qubits() != n_qubits_) throw InputError("term length does not match Hamiltonian");
  if (p.is_identity()) throw InputError("identity term not representable");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(p, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double PauliHamiltonian::coefficient(const PauliString& p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? 0.0 : it->second;
}

Matrix to_dense(const PauliHamiltonian& h) {
  if (h.n_qubits() == 0) throw InputError("empty Hamiltonian has no dimension");
  const std::uint64_t dim = dim_of(h.n_qubits());
  Matrix out = Matrix::Zero(dim, dim);
  Vector col = Vector::Zero(dim);
  Vector acc = Vector::Zero(dim);
  for (std::uint64_t j = 0; j < dim; ++j) {
    col.setZero();
    col[j] = 1.0;
    acc.setZero();
    for (const auto& [p, c] : h.terms()) accumulate_term(p, c, col, acc);
    out.col(j) = acc;
  }
  return out;
}

double op_norm_upper(const PauliHamiltonian& h) {
  double s = 0.0;
  for (const auto& [p, c] : h.terms()) s += std::abs(c);
  return s;
}

namespace {

// Extremal eigenvalues by Lanczos with full reorthogonalization. Fine for the
// sizes allowed here (n <= 14, dimension 16384).
double lanczos_extremal_abs(const PauliHamiltonian& h) {
  const std::uint64_t dim = dim_of(h.n_qubits());
  const int max_steps = std::min<std::uint64_t>(dim, 220);
  std::vector<Vector> basis;
  basis.reserve(max_steps);

  auto g = rng::engine(0x5EED5EEDULL);
  Vector v(dim);
  for (std::uint64_t i = 0; i < dim; ++i) v[i] = Complex(rng::uniform_pm1(g), rng::uniform_pm1(g));
  v /= v.norm();
  basis.push_back(v);

  std::vector<double> alpha, beta;
  Vector w(dim);
  double lo_prev = 0.0, hi_prev = 0.0;
  for (int j = 0; j < max_steps; ++j) {
    w.setZero();
    for (const auto& [p, c] : h.terms()) accumulate_term(p, c, basis[j], w);
    alpha.push_back(std::real(basis[j].dot(w)));
    for (std::size_t k = 0; k < basis.size(); ++k) w -= basis[k].dot(w) * basis[k];
    for (std::size_t k = 0; k < basis.size(); ++k) w -= basis[k].dot(w) * basis[k];
    const double b = w.norm();

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (int i = 0; i <= j; ++i) {
      tri(i, i) = alpha[i];
      if (i > 0) tri(i, i - 1) = tri(i - 1, i) = beta[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(j);
    const bool settled = j > 4 && std::abs(lo - lo_prev) < 1e-12 * (1 + std::abs(lo)) &&
                         std::abs(hi - hi_prev) < 1e-12 * (1 + std::abs(hi));
    if (b < 1e-13 || settled) return std::max(std::abs(lo), std::abs(hi));
    lo_prev = lo;
    hi_prev = hi;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return std::max(std::abs(lo_prev), std::abs(hi_prev));
}

}  // namespace

double op_norm_exact(const PauliHamiltonian& h) {
  if (h.n_qubits() > 14) throw InputError("exact operator norm limited to n_qubits <= 14");
  if (h.terms().empty()) return 0.0;
  if (h.n_qubits() <= 8) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(to_dense(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return lanczos_extremal_abs(h);
}

double coeff_inner(const Matrix& h_dense, const PauliString& p) {
  const std::uint64_t dim = dim_of(p.n_qubits());
  if (static_cast<std::uint64_t>(h_dense.rows()) != dim ||
      static_cast<std::uint64_t>(h_dense.cols()) != dim)
    throw InputError("matrix dimension does not match Pauli string");
  const TermMasks m = masks_of(p);
  const Complex base = kPhases[m.n_y & 3];
  // Tr(P H) = sum_i phase(i) H(i ^ flip, i) since P has one entry per column.
  Complex tr = 0.0;
  for (std::uint64_t i = 0; i < dim; ++i) {
    const double sign = (std::popcount(i & m.yz) & 1) ? -1.0 : 1.0;
    tr += base * sign * h_dense(i, i ^ m.flip);
  }
  return std::real(tr) / static_cast<double>(dim);
}

std::vector<PauliString> two_local_basis(int n_qubits) {
  if (n_qubits < 1) throw InputError("n_qubits must be >= 1");
  static const char kNonId[3] = {'X', 'Y', 'Z'};
  std::vector<PauliString> basis;
  for (int q = 0; q < n_qubits; ++q)
    for (char a : kNonId) basis.push_back(PauliString::single(n_qubits, q, a));
  for (int q = 0; q + 1 < n_qubits; ++q)
    for (char a : kNonId)
      for (char b : kNonId) basis.push_back(PauliString::pair(n_qubits, q, a, q + 1, b));
  return basis;
}

PauliHamiltonian random_2local_chain(int n_qubits, std::uint64_t seed) {
  auto g = rng::engine(rng::derive_seed(seed, {0x210CA1ULL}));
  PauliHamiltonian h(n_qubits);
  for (const PauliString& p : two_local_basis(n_qubits)) h.add(p, rng::uniform_pm1(g));
  return h;
}

bool is_2local_chain(const PauliHamiltonian& h) {
  for (const auto& [p, c] : h.terms()) {
    const auto s = p.support();
    if (s.size() > 2) return false;
    if (s.size() == 2 && s[1] - s[0] != 1) return false;
  }
  return true;
}

std::string save_hamiltonian(const PauliHamiltonian& h) {
  nlohmann::json j;
  j["n_qubits"] = h.n_qubits();
  j["terms"] = nlohmann::json::array();
  for (const auto& [p, c] : h.terms()) j["terms"].push_back({{"pauli", p.str()}, {"coeff", c}});
  return j.dump(2);
}

PauliHamiltonian load_hamiltonian(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("hamiltonian parse error: ") + e.what());
  }
  if (!j.contains("n_qubits") || !j.contains("terms"))
    throw InputError("hamiltonian file needs n_qubits and terms");
  const int n = j["n_qubits"].get<int>();
  if (n < 1) throw InputError("n_qubits must be >= 1");
  PauliHamiltonian h(n);
  for (const auto& t : j["terms"]) {
    const PauliString p{t.at("pauli").get<std::string>()};
    if (p.n_qubits() != n) throw InputError("term length does not match n_qubits");
    if (h.coefficient(p) != 0.0) throw InputError("duplicate term " + p.str());
    h.add(p, t.at("coeff").get<double>());
  }
  return h;
}

}  // namespace zenohl
