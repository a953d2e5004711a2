#include "zenohl/qpt.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "oracles.hpp"
#include "zenohl/pauli.hpp"
#include "zenohl/rng.hpp"

using namespace zenohl;

namespace {

// Fiducial density digit -> (I + sign * sigma_axis) / 2, assembled by
// Kronecker products only.
oracle::Matrix oracle_fiducial(int n, int f) {
  static const char axis[6] = {'Z', 'Z', 'X', 'X', 'Y', 'Y'};
  oracle::Matrix rho = oracle::Matrix::Ones(1, 1);
  int rest = f;
  std::vector<int> digits(n);
  for (int q = n - 1; q >= 0; --q) {
    digits[q] = rest % 6;
    rest /= 6;
  }
  for (int q = 0; q < n; ++q) {
    const int d = digits[q];
    const double sign = (d % 2 == 0) ? 1.0 : -1.0;
    const oracle::Matrix one =
        0.5 * (oracle::pauli_matrix('I') + sign * oracle::pauli_matrix(axis[d]));
    rho = oracle::kron(rho, one);
  }
  return rho;
}

oracle::Matrix oracle_effect(int n, int setting, int outcome) {
  static const char axis[3] = {'X', 'Y', 'Z'};
  oracle::Matrix e = oracle::Matrix::Ones(1, 1);
  int rest = setting;
  std::vector<int> digits(n);
  for (int q = n - 1; q >= 0; --q) {
    digits[q] = rest % 3;
    rest /= 3;
  }
  for (int q = 0; q < n; ++q) {
    const double sign = ((outcome >> (n - 1 - q)) & 1) ? -1.0 : 1.0;
    const oracle::Matrix one =
        0.5 * (oracle::pauli_matrix('I') + sign * oracle::pauli_matrix(axis[digits[q]]));
    e = oracle::kron(e, one);
  }
  return e;
}

Matrix random_hermitian(int dim, std::uint64_t seed) {
  auto g = rng::engine(seed);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng::uniform_pm1(g), rng::uniform_pm1(g));
  return (a + a.adjoint()) / 2.0;
}

Matrix random_density(int dim, std::uint64_t seed) {
  auto g = rng::engine(seed);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng::uniform_pm1(g), rng::uniform_pm1(g));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Transfer matrix of rho -> sum_k A rho A^dagger, as conj(A) (x) A.
Matrix kraus_transfer(const std::vector<Matrix>& kraus) {
  const auto d = kraus[0].rows();
  Matrix t = Matrix::Zero(d * d, d * d);
  for (const auto& a : kraus) t += oracle::kron(a.conjugate(), a);
  return t;
}

RealMatrix exact_prob_matrix(int n, const std::function<Matrix(const Matrix&)>& channel) {
  RealMatrix probs(n_outcome_rows(n), n_fiducials(n));
  for (int f = 0; f < n_fiducials(n); ++f)
    probs.col(f) = outcome_probabilities(channel(fiducial_density(n, f)));
  return probs;
}

Matrix rephased(const Matrix& u) {
  const Complex tr = u.trace();
  return u * (std::conj(tr) / std::abs(tr));
}

}  // namespace

TEST_SUITE("qpt") {

TEST_CASE("fiducials and effects match the projector construction") {
  for (int n : {1, 2}) {
    for (int f = 0; f < n_fiducials(n); ++f) {
      const Matrix rho = fiducial_density(n, f);
      REQUIRE((rho - oracle_fiducial(n, f)).cwiseAbs().maxCoeff() < 1e-15);
      REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-14);
    }
    for (int s = 0; s < n_settings(n); ++s) {
      Matrix sum = Matrix::Zero(1 << n, 1 << n);
      for (int o = 0; o < (1 << n); ++o) {
        const Matrix e = povm_effect(n, s, o);
        REQUIRE((e - oracle_effect(n, s, o)).cwiseAbs().maxCoeff() < 1e-15);
        sum += e;
      }
      REQUIRE((sum - Matrix::Identity(1 << n, 1 << n)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  CHECK(n_fiducials(2) == 36);
  CHECK(n_settings(2) == 9);
  CHECK(n_outcome_rows(2) == 36);
  CHECK_THROWS_AS(fiducial_state(1, 6), InputError);
  CHECK_THROWS_AS(povm_effect(6, 0, 0), InputError);
}

TEST_CASE("outcome probabilities stack settings-major and sum to one") {
  const RealVector p = outcome_probabilities(fiducial_density(1, 0));  // |0>
  REQUIRE(p.size() == 6);
  CHECK(p[0] == doctest::Approx(0.5));  // X setting
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == doctest::Approx(0.5));  // Y setting
  CHECK(p[4] == doctest::Approx(1.0));  // Z setting, + outcome first
  CHECK(p[5] == doctest::Approx(0.0));

  for (int n : {1, 2}) {
    const Matrix rho = random_density(1 << n, 7000 + n);
    const RealVector probs = outcome_probabilities(rho);
    for (int s = 0; s < n_settings(n); ++s) {
      double sum = 0.0;
      for (int o = 0; o < (1 << n); ++o) {
        const double v = probs[Eigen::Index(s) * (1 << n) + o];
        const double want =
            (oracle_effect(n, s, o) * rho).trace().real();
        REQUIRE(v == doctest::Approx(want).epsilon(1e-12));
        sum += v;
      }
      REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  Matrix bad = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(outcome_probabilities(bad * 3.0), NumericError);
}

TEST_CASE("linear inversion recovers unitary and Kraus channels exactly") {
  for (int n : {1, 2}) {
    const int d = 1 << n;
    const Matrix v = oracle::expm_minus_i(random_hermitian(d, 4100 + n), 0.7);
    const Matrix want = kraus_transfer({v});
    const RealMatrix probs =
        exact_prob_matrix(n, [&](const Matrix& rho) { return Matrix(v * rho * v.adjoint()); });
    const Matrix got = linear_inversion(probs, n);
    REQUIRE((got - want).cwiseAbs().maxCoeff() < 1e-10);
  }

  // amplitude damping, a non-unitary sanity point
  const double gamma = 0.35;
  Matrix a0(2, 2), a1(2, 2);
  a0 << 1, 0, 0, std::sqrt(1 - gamma);
  a1 << 0, std::sqrt(gamma), 0, 0;
  const Matrix want = kraus_transfer({a0, a1});
  const RealMatrix probs = exact_prob_matrix(1, [&](const Matrix& rho) {
    return Matrix(a0 * rho * a0.adjoint() + a1 * rho * a1.adjoint());
  });
  CHECK((linear_inversion(probs, 1) - want).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(linear_inversion(RealMatrix::Zero(3, 3), 1), InputError);
}

TEST_CASE("transfer/Choi reshuffle is an exact bijection") {
  for (int n : {1, 2}) {
    const int d = 1 << n;
    auto g = rng::engine(52 + n);
    Matrix t(d * d, d * d);
    for (int i = 0; i < d * d; ++i)
      for (int j = 0; j < d * d; ++j) t(i, j) = Complex(rng::uniform_pm1(g), rng::uniform_pm1(g));
    const Matrix back = choi_to_transfer(transfer_to_choi(t));
    REQUIRE((back - t).cwiseAbs().maxCoeff() < 1e-14);
  }

  // Choi of a unitary channel is the normalized outer product of
  // sum_j |j> (x) V |j>.
  const Matrix v = oracle::expm_minus_i(random_hermitian(2, 4300), 0.5);
  Vector w(4);
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 2; ++m) w[2 * i + m] = v(m, i);
  const Matrix choi = transfer_to_choi(kraus_transfer({v}));
  CHECK((choi - w * w.adjoint() / 2.0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(choi.trace().real() - 1.0) < 1e-14);

  // trace preservation shows up as partial trace = I/d
  Matrix in_marginal = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < 2; ++m) in_marginal(i, j) += choi(2 * i + m, 2 * j + m);
  CHECK((in_marginal - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closest unitary on a depolarized channel") {
  const int d = 4;
  const Matrix v = oracle::expm_minus_i(random_hermitian(d, 4500), 0.4);
  const Matrix t_unitary = kraus_transfer({v});
  Matrix eye_vec = Matrix::Zero(d * d, 1);
  for (int i = 0; i < d; ++i) eye_vec(i * d + i, 0) = 1.0;
  const Matrix t_dep = eye_vec * eye_vec.transpose() / double(d);

  for (double lambda : {0.0, 0.3, 0.6}) {
    const Matrix t = (1.0 - lambda) * t_unitary + lambda * t_dep;
    const auto fit = closest_unitary(transfer_to_choi(t));
    CHECK(fit.lambda_raw ==
          doctest::Approx(lambda * (1.0 - 1.0 / double(d * d))).epsilon(1e-9));
    CHECK(fit.lambda_debiased == doctest::Approx(lambda).epsilon(1e-9));
    const double fidelity = std::abs((fit.unitary.adjoint() * v).trace()) / d;
    CHECK(fidelity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((fit.unitary.adjoint() * fit.unitary - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  CHECK(closest_unitary(transfer_to_choi(t_unitary)).unitary.trace().imag() ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("spectral initialization and fixed-point iteration agree on clean data") {
  const Matrix v = oracle::expm_minus_i(random_hermitian(4, 4700), 0.3);
  const Matrix choi = transfer_to_choi(kraus_transfer({v}));
  UnitaryFitOptions rank1;
  rank1.rank1_only = true;
  const auto direct = closest_unitary(choi, rank1);
  const auto iterated = closest_unitary(choi);
  CHECK(direct.iterations == 0);
  CHECK(iterated.iterations >= 1);
  CHECK((direct.unitary - iterated.unitary).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((direct.unitary - rephased(v)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("generator recovery from a propagator") {
  PauliHamiltonian zz(2);
  zz.add(PauliString("ZZ"), 0.2);
  const Matrix u = oracle::expm_minus_i(to_dense(zz), 1.0);
  const Matrix h = hamiltonian_from_unitary(u, 1.0);
  CHECK(coeff_inner(h, PauliString("ZZ")) == doctest::Approx(0.2).epsilon(1e-12));
  for (const auto& word : two_local_basis(2))
    if (!(word == PauliString("ZZ")))
      CHECK(std::abs(coeff_inner(h, word)) < 1e-12);

  // scaled time
  const Matrix h5 = hamiltonian_from_unitary(u, 0.5);
  CHECK(coeff_inner(h5, PauliString("ZZ")) == doctest::Approx(0.4).epsilon(1e-12));

  // traceless random round trip
  Matrix g = random_hermitian(4, 4900);
  g -= (g.trace() / 4.0) * Matrix::Identity(4, 4);
  g *= 0.3 / g.cwiseAbs().maxCoeff();
  const Matrix ug = oracle::expm_minus_i(g, 0.7);
  CHECK((hamiltonian_from_unitary(ug, 0.7) - g).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("generator recovery refuses the branch cut") {
  PauliHamiltonian z(1);
  z.add(PauliString("Z"), 1.0);
  const Matrix safe = oracle::expm_minus_i(to_dense(z), 3.0);
  PauliHamiltonian recovered(1);
  CHECK(coeff_inner(hamiltonian_from_unitary(safe, 1.0), PauliString("Z")) ==
        doctest::Approx(3.0).epsilon(1e-12));
  const Matrix aliasing = oracle::expm_minus_i(to_dense(z), 3.1);
  CHECK_THROWS_AS(hamiltonian_from_unitary(aliasing, 1.0), NumericError);
  CHECK_THROWS_AS(hamiltonian_from_unitary(Matrix::Identity(2, 2) * 2.0, 1.0), NumericError);
  CHECK_THROWS_AS(hamiltonian_from_unitary(Matrix::Identity(2, 2), 0.0), InputError);
}

TEST_CASE("sampling is deterministic and concentrates") {
  const RealVector probs = outcome_probabilities(fiducial_density(1, 2));  // |+>
  auto g1 = rng::engine(61);
  auto g2 = rng::engine(61);
  const auto c1 = sample_outcomes(probs, 1, 100000, g1);
  const auto c2 = sample_outcomes(probs, 1, 100000, g2);
  CHECK(c1 == c2);
  for (int s = 0; s < 3; ++s) REQUIRE(c1[2 * s] + c1[2 * s + 1] == 100000);
  CHECK(c1[0] == 100000);  // X setting on |+> is deterministic
  // Z setting: p(+) = 1/2, expect mean within 4 standard errors
  CHECK(std::abs(double(c1[4]) / 100000 - 0.5) < 4.0 * std::sqrt(0.25 / 100000));
  CHECK_THROWS_AS(sample_outcomes(RealVector::Zero(5), 1, 10, g1), InputError);
}

TEST_CASE("transfer estimate error scales like one over root shots") {
  const Matrix v = oracle::expm_minus_i(random_hermitian(2, 5100), 0.6);
  const Matrix want = kraus_transfer({v});
  const RealMatrix exact =
      exact_prob_matrix(1, [&](const Matrix& rho) { return Matrix(v * rho * v.adjoint()); });

  std::vector<double> log_shots, log_err;
  for (const std::uint64_t shots : {1000ULL, 10000ULL, 100000ULL, 1000000ULL}) {
    double mean = 0.0;
    const int repeats = 20;
    for (int rep = 0; rep < repeats; ++rep) {
      auto g = rng::engine(rng::derive_seed(5200, {shots, std::uint64_t(rep)}));
      RealMatrix est(exact.rows(), exact.cols());
      for (int f = 0; f < exact.cols(); ++f) {
        const auto counts = sample_outcomes(exact.col(f), 1, shots, g);
        for (int r = 0; r < exact.rows(); ++r) est(r, f) = double(counts[r]) / double(shots);
      }
      mean += (linear_inversion(est, 1) - want).norm();
    }
    log_shots.push_back(std::log(double(shots)));
    log_err.push_back(std::log(mean / repeats));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = double(log_shots.size());
  for (std::size_t k = 0; k < log_shots.size(); ++k) {
    sx += log_shots[k];
    sy += log_err[k];
    sxx += log_shots[k] * log_shots[k];
    sxy += log_shots[k] * log_err[k];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(std::abs(slope + 0.5) < 0.1);
}

TEST_CASE("depolarization strength survives shot noise after debiasing") {
  const double lambda = 0.3;
  const Matrix v = oracle::expm_minus_i(random_hermitian(2, 5300), 0.5);
  const RealMatrix exact = exact_prob_matrix(1, [&](const Matrix& rho) {
    return Matrix((1.0 - lambda) * v * rho * v.adjoint() +
                  lambda * Matrix::Identity(2, 2) / 2.0);
  });
  double mean = 0.0;
  const int repeats = 10;
  for (int rep = 0; rep < repeats; ++rep) {
    auto g = rng::engine(rng::derive_seed(5400, {std::uint64_t(rep)}));
    RealMatrix est(exact.rows(), exact.cols());
    for (int f = 0; f < exact.cols(); ++f) {
      const auto counts = sample_outcomes(exact.col(f), 1, 100000, g);
      for (int r = 0; r < exact.rows(); ++r) est(r, f) = double(counts[r]) / 100000.0;
    }
    const auto fit = closest_unitary(physical_choi(transfer_to_choi(linear_inversion(est, 1))));
    mean += fit.lambda_debiased;
  }
  CHECK(std::abs(mean / repeats - lambda) < 0.02);
}

TEST_CASE("tomography record round trip is bit exact") {
  TomographyRecord rec;
  rec.patch = {3, 4};
  rec.n_qubits = 2;
  rec.shots_per_setting = 900;
  rec.seed = 1234567890123ULL;
  rec.time = 0.1 + 0.2;  // deliberately not representable exactly
  rec.kicks = 10;
  rec.config_offset = 1;
  rec.settings_per_cell = 1;
  auto g = rng::engine(71);
  rec.data.resize(n_outcome_rows(2), n_fiducials(2));
  for (Eigen::Index r = 0; r < rec.data.rows(); ++r)
    for (Eigen::Index c = 0; c < rec.data.cols(); ++c)
      rec.data(r, c) = rng::uniform01(g) * 900;

  const auto back = TomographyRecord::from_json(rec.to_json());
  CHECK(back.patch == rec.patch);
  CHECK(back.n_qubits == rec.n_qubits);
  CHECK(back.shots_per_setting == rec.shots_per_setting);
  CHECK(back.seed == rec.seed);
  CHECK(back.time == rec.time);
  CHECK(back.kicks == rec.kicks);
  CHECK(back.config_offset == rec.config_offset);
  CHECK(back.settings_per_cell == rec.settings_per_cell);
  REQUIRE(back.data.rows() == rec.data.rows());
  CHECK((back.data.array() == rec.data.array()).all());

  CHECK_THROWS_AS(TomographyRecord::from_json("{"), InputError);
  CHECK_THROWS_AS(TomographyRecord::from_json("{}"), InputError);
  auto j = rec.to_json();
  j.insert(1, "\"extra\": 1,");
  CHECK_THROWS_AS(TomographyRecord::from_json(j), InputError);
}

TEST_CASE("exact record probabilities average pooled settings") {
  TomographyRecord rec;
  rec.n_qubits = 1;
  rec.shots_per_setting = 0;
  rec.settings_per_cell = 18;
  rec.data = RealMatrix::Constant(6, 6, 9.0);  // sums of 18 pooled probabilities
  CHECK(rec.probabilities()(0, 0) == doctest::Approx(0.5));
  rec.shots_per_setting = 100;
  CHECK(rec.probabilities()(0, 0) == doctest::Approx(0.005));
}

TEST_CASE("diamond distance of unitary pairs") {
  PauliHamiltonian z(1);
  z.add(PauliString("Z"), 1.0);
  const Matrix zd = to_dense(z);
  const Matrix eye = Matrix::Identity(2, 2);

  CHECK(diamond_unitary(eye, zd) == doctest::Approx(2.0));
  CHECK(diamond_unitary(eye, oracle::expm_minus_i(zd, 0.1)) ==
        doctest::Approx(2.0 * std::sin(0.1)).epsilon(1e-12));
  const Matrix v = oracle::expm_minus_i(random_hermitian(4, 5500), 0.8);
  CHECK(diamond_unitary(v, v) == doctest::Approx(0.0));
  CHECK(diamond_unitary(v, Matrix(v * Complex(std::cos(1.0), std::sin(1.0)))) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(diamond_unitary(eye * 2.0, eye), NumericError);
}

TEST_CASE("Choi bracket contains the exact unitary diamond distance") {
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + rep % 2;
    const int d = 1 << n;
    const Matrix a = oracle::expm_minus_i(random_hermitian(d, 6000 + 2 * rep), 0.5);
    const Matrix b = oracle::expm_minus_i(random_hermitian(d, 6001 + 2 * rep), 0.5);
    const auto bracket =
        diamond_bracket(transfer_to_choi(kraus_transfer({a})), transfer_to_choi(kraus_transfer({b})));
    const double exact = diamond_unitary(a, b);
    REQUIRE(bracket.lower <= bracket.upper + 1e-12);
    REQUIRE(bracket.lower <= exact + 1e-9);
    REQUIRE(exact <= bracket.upper + 1e-9);
  }
  const Matrix c = transfer_to_choi(kraus_transfer({Matrix::Identity(2, 2)}));
  CHECK(diamond_bracket(c, c).lower == doctest::Approx(0.0));
}

TEST_CASE("physical projection normalizes a noisy Choi") {
  Matrix c = transfer_to_choi(kraus_transfer({Matrix::Identity(2, 2)}));
  c *= 1.7;
  c(0, 1) += Complex(0.0, 0.05);  // break Hermiticity
  const Matrix p = physical_choi(c);
  CHECK(std::abs(p.trace().real() - 1.0) < 1e-14);
  CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(physical_choi(Matrix(-c)), NumericError);
}

}  // TEST_SUITE
