#include "zenohl/qpt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

namespace zenohl {

namespace {

constexpr int kMaxRegister = 5;

void check_register(int n) {
  if (n < 1 || n > kMaxRegister)
    throw InputError("tomography register must have between 1 and 5 qubits");
}

int pow_int(int base, int exp) {
  int out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

// Register size from a density/effect dimension.
int qubits_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index(1) << n) < dim) ++n;
  if ((Eigen::Index(1) << n) != dim) throw InputError("dimension is not a power of two");
  check_register(n);
  return n;
}

Vector fiducial_ket_1q(int which) {
  const double s = std::numbers::sqrt2 / 2.0;
  Vector v(2);
  switch (which) {
    case 0: v << 1, 0; break;                      // Z+
    case 1: v << 0, 1; break;                      // Z-
    case 2: v << s, s; break;                      // X+
    case 3: v << s, -s; break;                     // X-
    case 4: v << s, Complex(0, s); break;          // Y+
    case 5: v << s, Complex(0, -s); break;         // Y-
    default: throw InternalError("fiducial digit out of range");
  }
  return v;
}

// Measurement eigenvector on one qubit; axis 0,1,2 = X,Y,Z, sign 0 = +.
Vector axis_ket_1q(int axis, int sign) {
  const double s = std::numbers::sqrt2 / 2.0;
  Vector v(2);
  switch (axis) {
    case 0: v << s, (sign ? -s : s); break;
    case 1: v << s, Complex(0, sign ? -s : s); break;
    case 2:
      if (sign)
        v << 0, 1;
      else
        v << 1, 0;
      break;
    default: throw InternalError("axis digit out of range");
  }
  return v;
}

Vector kron_vec(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

Vector measurement_ket(int n, int setting, int outcome) {
  Vector v = Vector::Ones(1);
  for (int q = 0; q < n; ++q) {
    const int axis = setting / pow_int(3, n - 1 - q) % 3;
    const int sign = int(outcome >> (n - 1 - q)) & 1;
    v = kron_vec(v, axis_ket_1q(axis, sign));
  }
  return v;
}

Matrix pseudoinverse(const Matrix& a, Eigen::Index required_rank) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = sv.size() ? sv[0] * 1e-12 : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  if (rank < required_rank)
    throw InternalError("tomography design matrix is rank deficient");
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index k = 0; k < rank; ++k) inv[k] = 1.0 / sv[k];
  return svd.matrixV() * inv.cast<Complex>().asDiagonal() * svd.matrixU().adjoint();
}

Vector vec_of(const Matrix& m) {
  Vector w(m.rows() * m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) w.segment(j * m.rows(), m.rows()) = m.col(j);
  return w;
}

Matrix unvec(const Vector& w, Eigen::Index d) {
  Matrix m(d, d);
  for (Eigen::Index j = 0; j < d; ++j) m.col(j) = w.segment(j * d, d);
  return m;
}

Matrix polar_unitary(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Eigen::Index choi_side(const Matrix& choi, const char* what) {
  if (choi.rows() != choi.cols()) throw InputError(std::string(what) + " must be square");
  const auto d = Eigen::Index(std::llround(std::sqrt(double(choi.rows()))));
  if (d * d != choi.rows())
    throw InputError(std::string(what) + " dimension must be a perfect square");
  return d;
}

void check_unitary_input(const Matrix& u, const char* what) {
  if (u.rows() != u.cols() || u.rows() < 1) throw InputError(std::string(what) + " must be square");
  const double residual =
      (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (residual > 1e-8)
    throw NumericError(std::string(what) + " is not unitary (residual " +
                       std::to_string(residual) + ")");
}

}  // namespace

int n_fiducials(int n_qubits) {
  check_register(n_qubits);
  return pow_int(6, n_qubits);
}

int n_settings(int n_qubits) {
  check_register(n_qubits);
  return pow_int(3, n_qubits);
}

int n_outcome_rows(int n_qubits) { return n_settings(n_qubits) * (1 << n_qubits); }

Vector fiducial_state(int n_qubits, int fiducial) {
  check_register(n_qubits);
  if (fiducial < 0 || fiducial >= n_fiducials(n_qubits))
    throw InputError("fiducial index out of range");
  Vector v = Vector::Ones(1);
  for (int q = 0; q < n_qubits; ++q)
    v = kron_vec(v, fiducial_ket_1q(fiducial / pow_int(6, n_qubits - 1 - q) % 6));
  return v;
}

Matrix fiducial_density(int n_qubits, int fiducial) {
  const Vector v = fiducial_state(n_qubits, fiducial);
  return v * v.adjoint();
}

Matrix povm_effect(int n_qubits, int setting, int outcome) {
  check_register(n_qubits);
  if (setting < 0 || setting >= n_settings(n_qubits))
    throw InputError("setting index out of range");
  if (outcome < 0 || outcome >= (1 << n_qubits)) throw InputError("outcome index out of range");
  const Vector v = measurement_ket(n_qubits, setting, outcome);
  return v * v.adjoint();
}

RealVector outcome_probabilities(const Matrix& rho_out) {
  if (rho_out.rows() != rho_out.cols()) throw InputError("density matrix must be square");
  const int n = qubits_of_dim(rho_out.rows());
  const int ns = n_settings(n);
  const int no = 1 << n;
  RealVector probs(Eigen::Index(ns) * no);
  for (int s = 0; s < ns; ++s)
    for (int o = 0; o < no; ++o) {
      const Vector v = measurement_ket(n, s, o);
      const double p = (v.adjoint() * rho_out * v).value().real();
      if (p < -1e-12 || p > 1.0 + 1e-12)
        throw NumericError("outcome probability " + std::to_string(p) + " outside [0, 1]");
      probs[Eigen::Index(s) * no + o] = std::clamp(p, 0.0, 1.0);
    }
  return probs;
}

std::vector<std::uint64_t> sample_outcomes(const RealVector& probs, int n_qubits,
                                           std::uint64_t shots, std::mt19937_64& gen) {
  check_register(n_qubits);
  const int ns = n_settings(n_qubits);
  const int no = 1 << n_qubits;
  if (probs.size() != Eigen::Index(ns) * no)
    throw InputError("probability column has the wrong length");
  std::vector<std::uint64_t> counts(probs.size(), 0);
  for (int s = 0; s < ns; ++s) {
    std::uint64_t remaining = shots;
    double tail = 1.0;
    for (int o = 0; o + 1 < no && remaining > 0; ++o) {
      const double p = probs[Eigen::Index(s) * no + o];
      const double q = tail > 0 ? std::clamp(p / tail, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::uint64_t> bin(remaining, q);
      const std::uint64_t c = bin(gen);
      counts[Eigen::Index(s) * no + o] = c;
      remaining -= c;
      tail -= p;
    }
    counts[Eigen::Index(s) * no + no - 1] = remaining;
  }
  return counts;
}

RealMatrix TomographyRecord::probabilities() const {
  if (settings_per_cell < 1) throw InputError("settings_per_cell must be >= 1");
  const double scale =
      exact() ? double(settings_per_cell) : double(shots_per_setting) * settings_per_cell;
  return data / scale;
}

std::string TomographyRecord::to_json() const {
  nlohmann::json j;
  j["format"] = "zenohl-tomography-v1";
  j["patch"] = patch;
  j["n_qubits"] = n_qubits;
  j["shots_per_setting"] = shots_per_setting;
  j["seed"] = seed;
  j["time"] = time;
  j["kicks"] = kicks;
  j["config_offset"] = config_offset;
  j["settings_per_cell"] = settings_per_cell;
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < data.cols(); ++c) row.push_back(data(r, c));
    rows.push_back(std::move(row));
  }
  j["data"] = std::move(rows);
  return j.dump(2);
}

TomographyRecord TomographyRecord::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("tomography record parse error: ") + e.what());
  }
  const std::vector<std::string> keys = {"format",      "patch", "n_qubits",
                                         "shots_per_setting", "seed",  "time",
                                         "kicks",       "config_offset", "settings_per_cell",
                                         "data"};
  for (const auto& key : keys)
    if (!j.contains(key)) throw InputError("tomography record is missing key " + key);
  for (const auto& [key, value] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw InputError("tomography record has unknown key " + key);
  if (j["format"].get<std::string>() != "zenohl-tomography-v1")
    throw InputError("unsupported tomography record format");

  TomographyRecord rec;
  rec.patch = j["patch"].get<std::vector<int>>();
  rec.n_qubits = j["n_qubits"].get<int>();
  check_register(rec.n_qubits);
  rec.shots_per_setting = j["shots_per_setting"].get<std::uint64_t>();
  rec.seed = j["seed"].get<std::uint64_t>();
  rec.time = j["time"].get<double>();
  rec.kicks = j["kicks"].get<int>();
  rec.config_offset = j["config_offset"].get<int>();
  rec.settings_per_cell = j["settings_per_cell"].get<int>();
  if (rec.settings_per_cell < 1) throw InputError("settings_per_cell must be >= 1");

  const auto& rows = j["data"];
  const Eigen::Index want_rows = n_outcome_rows(rec.n_qubits);
  const Eigen::Index want_cols = n_fiducials(rec.n_qubits);
  if (!rows.is_array() || Eigen::Index(rows.size()) != want_rows)
    throw InputError("tomography record data has the wrong number of rows");
  rec.data.resize(want_rows, want_cols);
  for (Eigen::Index r = 0; r < want_rows; ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || Eigen::Index(row.size()) != want_cols)
      throw InputError("tomography record data has the wrong number of columns");
    for (Eigen::Index c = 0; c < want_cols; ++c) rec.data(r, c) = row[c].get<double>();
  }
  return rec;
}

Matrix linear_inversion(const RealMatrix& probabilities, int n_qubits) {
  check_register(n_qubits);
  const Eigen::Index d = Eigen::Index(1) << n_qubits;
  const Eigen::Index d2 = d * d;
  const Eigen::Index rows = n_outcome_rows(n_qubits);
  const Eigen::Index cols = n_fiducials(n_qubits);
  if (probabilities.rows() != rows || probabilities.cols() != cols)
    throw InputError("probability matrix has the wrong shape");

  Matrix effects(rows, d2);
  for (int s = 0; s < n_settings(n_qubits); ++s)
    for (Eigen::Index o = 0; o < d; ++o) {
      const Matrix e = povm_effect(n_qubits, s, int(o));
      effects.row(Eigen::Index(s) * d + o) = vec_of(e).conjugate().transpose();
    }
  Matrix states(d2, cols);
  for (Eigen::Index f = 0; f < cols; ++f)
    states.col(f) = vec_of(fiducial_density(n_qubits, int(f)));

  return pseudoinverse(effects, d2) * probabilities.cast<Complex>() * pseudoinverse(states, d2);
}

Matrix transfer_to_choi(const Matrix& transfer) {
  const Eigen::Index d = choi_side(transfer, "transfer matrix");
  Matrix choi(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index m = 0; m < d; ++m)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index n = 0; n < d; ++n)
          choi(i * d + m, j * d + n) = transfer(n * d + m, j * d + i);
  return choi / double(d);
}

Matrix choi_to_transfer(const Matrix& choi) {
  const Eigen::Index d = choi_side(choi, "Choi matrix");
  Matrix transfer(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index m = 0; m < d; ++m)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index n = 0; n < d; ++n)
          transfer(n * d + m, j * d + i) = choi(i * d + m, j * d + n);
  return transfer * double(d);
}

Matrix physical_choi(const Matrix& choi) {
  choi_side(choi, "Choi matrix");
  Matrix h = (choi + choi.adjoint()) / 2.0;
  const double tr = h.trace().real();
  if (tr < 1e-9) throw NumericError("Choi estimate has nonpositive trace");
  return h / tr;
}

UnitaryFit closest_unitary(const Matrix& choi, const UnitaryFitOptions& opts) {
  const Eigen::Index d = choi_side(choi, "Choi matrix");
  const Matrix c = (choi + choi.adjoint()) / 2.0;

  Matrix u;
  if (opts.init.size()) {
    if (opts.init.rows() != d || opts.init.cols() != d)
      throw InputError("initial unitary has the wrong dimension");
    u = opts.init;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    if (es.info() != Eigen::Success) throw NumericError("Choi eigendecomposition failed");
    u = polar_unitary(unvec(es.eigenvectors().col(d * d - 1), d));
  }

  int iterations = 0;
  if (!opts.rank1_only) {
    for (; iterations < opts.max_iter; ++iterations) {
      const Matrix next = polar_unitary(unvec(c * vec_of(u), d));
      const double step = (next - u).norm();
      u = next;
      if (step < opts.tol) {
        ++iterations;
        break;
      }
    }
  }

  const Complex tr = u.trace();
  if (std::abs(tr) > 1e-9) u *= std::conj(tr) / std::abs(tr);

  const Vector w = vec_of(u);
  const double overlap = (w.adjoint() * c * w).value().real() / double(d);
  UnitaryFit fit;
  fit.unitary = u;
  fit.lambda_raw = 1.0 - overlap;
  fit.lambda_debiased = fit.lambda_raw / (1.0 - 1.0 / double(d * d));
  fit.iterations = iterations;
  return fit;
}

Matrix hamiltonian_from_unitary(const Matrix& u, double time) {
  check_unitary_input(u, "propagator");
  if (time == 0.0) throw InputError("evolution time must be nonzero");
  const Eigen::Index d = u.rows();

  Eigen::ComplexSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success) throw NumericError("Schur decomposition failed");
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();
  double offdiag = 0.0;
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = r + 1; c < d; ++c) offdiag = std::max(offdiag, std::abs(t(r, c)));
  if (offdiag > 1e-8)
    throw NumericError("propagator is not normal enough for a spectral logarithm");

  constexpr double kBranchMargin = 0.1;
  RealVector theta(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    theta[k] = std::arg(t(k, k));
    if (std::abs(theta[k]) >= std::numbers::pi - kBranchMargin)
      throw NumericError("eigenphase " + std::to_string(theta[k]) +
                         " is too close to the logarithm branch cut");
  }

  Matrix h = -(1.0 / time) * (q * theta.cast<Complex>().asDiagonal() * q.adjoint());
  h = (h + h.adjoint()) / 2.0;
  const double trace_part = h.trace().real() / double(d);
  h -= trace_part * Matrix::Identity(d, d);
  return h;
}

double trace_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

DiamondBracket diamond_bracket(const Matrix& choi_a, const Matrix& choi_b) {
  const Eigen::Index d = choi_side(choi_a, "Choi matrix");
  if (choi_b.rows() != choi_a.rows() || choi_b.cols() != choi_a.cols())
    throw InputError("Choi matrices must have matching dimensions");
  DiamondBracket bracket;
  bracket.lower = trace_norm(choi_a - choi_b);
  bracket.upper = double(d) * bracket.lower;
  return bracket;
}

double diamond_unitary(const Matrix& u, const Matrix& v) {
  check_unitary_input(u, "first unitary");
  check_unitary_input(v, "second unitary");
  if (u.rows() != v.rows()) throw InputError("unitaries must have matching dimensions");

  Eigen::ComplexEigenSolver<Matrix> es(u.adjoint() * v, false);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  std::vector<double> angles(u.rows());
  for (Eigen::Index k = 0; k < u.rows(); ++k) angles[k] = std::arg(es.eigenvalues()[k]);
  std::sort(angles.begin(), angles.end());

  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t k = 1; k < angles.size(); ++k)
    max_gap = std::max(max_gap, angles[k] - angles[k - 1]);

  // Eigenvalue hull: a gap of at most pi means the hull contains the origin.
  if (max_gap <= std::numbers::pi) return 2.0;
  const double spread = 2.0 * std::numbers::pi - max_gap;
  const double nu = std::clamp(std::cos(spread / 2.0), 0.0, 1.0);
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - nu * nu));
}

}  // namespace zenohl
