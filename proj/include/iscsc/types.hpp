// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace iscsc {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718056994530942;

/// Invalid scenario or argument. `field()` names the offending input.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Argument outside the mathematical domain of an operation (angle, ratio, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The optimization problem (or a sub-step) has no feasible point.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown: singular FIM, solver stall, non-PSD input, ...
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relative Hermitian residual ||M - M^H||_F / (1 + ||M||_F).
inline double hermitian_residual(const CMat& m) {
    return (m - m.adjoint()).norm() / (1.0 + m.norm());
}

inline void require_hermitian(const CMat& m, const char* what, double tol = 1e-9) {
    if (m.rows() != m.cols())
        throw DomainError(std::string(what) + " is not square");
    if (hermitian_residual(m) > tol)
        throw DomainError(std::string(what) + " is not Hermitian");
}

}  // namespace iscsc
