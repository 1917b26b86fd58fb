#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ql {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;
using Vec2 = std::array<double, 2>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// bad input (exit 2 in the CLI)
struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string k, const std::string& msg) : std::runtime_error(msg), key(std::move(k)) {}
};

// a structural hypothesis of the model does not hold (exit 3 in the CLI)
struct AssumptionError : std::runtime_error {
    std::string assumption;
    AssumptionError(std::string which, const std::string& msg)
        : std::runtime_error(msg), assumption(std::move(which)) {}
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }

}  // namespace ql
