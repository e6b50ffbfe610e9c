#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pspin {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Thrown when a computation degenerates numerically (quadrature overflow,
// covariance factorization outside the jitter floor, ...). The CLI maps it
// to exit status 3; validation errors (std::invalid_argument,
// std::domain_error) map to 2.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// log cosh(x), safe for large |x|.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

// log(2 cosh(x)) = log sum over one Ising spin.
inline double log_2cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

inline double logsumexp(const ArrayXd& a) {
  const double m = a.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf, or a NaN propagates
  return m + std::log((a - m).exp().sum());
}

// Streaming log-sum-exp accumulator; merge order does not change the result
// beyond normal floating-point rounding.
class LogSumExpAcc {
 public:
  void add(double term) {
    if (term == -std::numeric_limits<double>::infinity()) return;
    if (term <= max_) {
      sum_ += std::exp(term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - term) + 1.0;
      max_ = term;
    }
  }
  // adds every entry of a batch at once (vectorized exp)
  void add(const ArrayXd& terms) {
    if (terms.size() == 0) return;
    const double m = terms.maxCoeff();
    double s;
    if (m <= max_) {
      s = (terms - max_).exp().sum();
      sum_ += s;
    } else {
      s = (terms - m).exp().sum();
      sum_ = sum_ * std::exp(max_ - m) + s;
      max_ = m;
    }
  }
  double value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

inline int popcount64(std::uint64_t x) { return __builtin_popcountll(x); }

}  // namespace pspin
