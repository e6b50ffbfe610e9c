#pragma once

#include "pspin/common.hpp"

#include <sstream>
#include <utility>
#include <vector>

namespace pspin {

// Mixed p-spin mixture. betas[p-1] holds beta_p >= 0; the covariance profile
// of the energy per site is xi(x) = sum_p beta_p^2 x^p.
//
// Immutable value type; every operation on it is pure.
class MixtureSpec {
 public:
  explicit MixtureSpec(ArrayXd betas) : betas_(std::move(betas)) { validate(); }

  static MixtureSpec from_pairs(const std::vector<std::pair<int, double>>& pairs) {
    int p_max = 1;
    for (auto& [p, b] : pairs) {
      if (p < 1) throw std::invalid_argument("mixture: p must be >= 1");
      p_max = std::max(p_max, p);
    }
    ArrayXd betas = ArrayXd::Zero(p_max);
    for (auto& [p, b] : pairs) betas[p - 1] += b;
    return MixtureSpec(std::move(betas));
  }

  static MixtureSpec zero(int p_max = 2) { return MixtureSpec(ArrayXd::Zero(p_max)); }

  const ArrayXd& betas() const { return betas_; }
  int p_max() const { return int(betas_.size()); }
  double beta(int p) const { return p >= 1 && p <= p_max() ? betas_[p - 1] : 0.0; }
  bool is_zero() const { return (betas_ == 0.0).all(); }

  // has no p-spin term for odd p >= 3 (beta_1 is allowed: a linear xi term
  // keeps xi convex on [-1,1])
  bool even_only() const {
    for (int p = 3; p <= p_max(); p += 2)
      if (betas_[p - 1] != 0.0) return false;
    return true;
  }

  std::string to_string() const {
    std::ostringstream os;
    bool first = true;
    for (int p = 1; p <= p_max(); ++p) {
      if (betas_[p - 1] == 0.0) continue;
      if (!first) os << ";";
      os << p << ":" << betas_[p - 1];
      first = false;
    }
    if (first) os << "zero";
    return os.str();
  }

 private:
  void validate() const {
    if (betas_.size() < 1) throw std::invalid_argument("mixture: p_max must be >= 1");
    double weighted = 0.0;
    for (int p = 1; p <= p_max(); ++p) {
      const double b = betas_[p - 1];
      if (!(b >= 0.0) || !std::isfinite(b))
        throw std::invalid_argument("mixture: beta_p must be finite and >= 0");
      weighted += std::pow(2.0, p) * b * b;
    }
    // guards configs that declare huge p_max with large coefficients; the
    // coupled Gaussian field would not be numerically meaningful
    if (!(weighted <= 1e6))
      throw std::invalid_argument("mixture: sum_p 2^p beta_p^2 exceeds 1e6");
  }

  ArrayXd betas_;
};

namespace detail {
inline void check_unit_interval(double x, const char* fn) {
  if (!(std::abs(x) <= 1.0))
    throw std::domain_error(std::string(fn) + ": |x| must be <= 1 (overlap range)");
}
}  // namespace detail

// xi(x) = sum_p beta_p^2 x^p on [-1,1]
inline double xi(const MixtureSpec& spec, double x) {
  detail::check_unit_interval(x, "xi");
  double acc = 0.0;
  for (int p = spec.p_max(); p >= 1; --p) {
    const double b = spec.beta(p);
    acc = acc * x + b * b;
  }
  return acc * x;
}

// xi'(x) = sum_p p beta_p^2 x^(p-1)
inline double xi_prime(const MixtureSpec& spec, double x) {
  detail::check_unit_interval(x, "xi_prime");
  double acc = 0.0;
  for (int p = spec.p_max(); p >= 1; --p) {
    const double b = spec.beta(p);
    acc = acc * x + double(p) * b * b;
  }
  return acc;
}

// xi''(x) = sum_p p(p-1) beta_p^2 x^(p-2)
inline double xi_second(const MixtureSpec& spec, double x) {
  detail::check_unit_interval(x, "xi_second");
  double acc = 0.0;
  for (int p = spec.p_max(); p >= 2; --p) {
    const double b = spec.beta(p);
    acc = acc * x + double(p) * double(p - 1) * b * b;
  }
  return acc;
}

// theta(q) = q xi'(q) - xi(q), nonnegative and nondecreasing on [0,1]
inline double theta(const MixtureSpec& spec, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("theta: q must be in [0,1]");
  return q * xi_prime(spec, q) - xi(spec, q);
}

namespace detail {
// theta's polynomial sum_p (p-1) beta_p^2 x^p evaluated on the whole overlap
// range [-1,1]; the cavity-field covariance needs it at negative overlaps.
inline double theta_ext(const MixtureSpec& spec, double x) {
  check_unit_interval(x, "theta_ext");
  double acc = 0.0;
  for (int p = spec.p_max(); p >= 1; --p) {
    const double b = spec.beta(p);
    acc = acc * x + double(p - 1) * b * b;
  }
  return acc * x;
}
}  // namespace detail

}  // namespace pspin
