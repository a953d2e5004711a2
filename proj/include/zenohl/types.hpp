#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace zenohl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kImag{0.0, 1.0};

inline std::uint64_t dim_of(int n_qubits) { return std::uint64_t(1) << n_qubits; }

}  // namespace zenohl
