#pragma once

#include "pspin/mixture.hpp"
#include "pspin/quadrature.hpp"
#include "pspin/rsb.hpp"

#include <vector>

namespace pspin {

// Variances of the independent Gaussians z_0..z_k driving the recursion:
// Var z_j = xi'(q_{j+1}) - xi'(q_j) for j >= 1 and Var z_0 = xi'(q_1).
// The base level carries the full cavity variance: a p=1 term makes
// xi'(0) = beta_1^2 > 0, and that common random-field component belongs to
// the outermost (m_0 = 0) expectation -- dropping it would give a functional
// blind to the field (and would break the ultrametric field construction,
// whose root edge must carry covariance xi'(q_1) for every leaf pair).
// Entries are nonnegative and telescope to xi'(1).
inline VectorXd variance_increments(const MixtureSpec& spec, const RSBParams& params) {
  params.validate();
  VectorXd v(params.k + 1);
  for (int j = 0; j <= params.k; ++j) {
    const double lo = j == 0 ? 0.0 : xi_prime(spec, params.q_at(j));
    v[j] = std::max(0.0, xi_prime(spec, params.q_at(j + 1)) - lo);
  }
  return v;
}

namespace detail {

// m below this is treated as the m=0 expectation branch; removes the 0/0
// ambiguity at the boundary of (1/m) log E exp(m X).
constexpr double kMinLevelExponent = 1e-8;

struct X0Evaluator {
  const RSBParams& params;
  const QuadratureGrid& grid;
  VectorXd sd;  // per-level standard deviations of z_l
  std::vector<ArrayXd> scratch;

  X0Evaluator(const MixtureSpec& spec, const RSBParams& p, const QuadratureGrid& g)
      : params(p), grid(g) {
    sd = variance_increments(spec, p).array().sqrt();
    scratch.assign(std::size_t(p.k) + 1, ArrayXd(g.size()));
  }

  // X_l evaluated at y = z_0 + ... + z_{l-1}
  double eval(int l, double y) {
    if (l == params.k + 1) return log_2cosh(y);
    if (sd[l] == 0.0) return eval(l + 1, y);  // zero-variance level passes through
    ArrayXd& vals = scratch[std::size_t(l)];
    const int n = grid.size();
    for (int i = 0; i < n; ++i) vals[i] = eval(l + 1, y + sd[l] * grid.nodes[i]);
    const double ml = params.m_at(l);
    double out;
    if (ml < kMinLevelExponent) {
      out = (grid.weights.array() * vals).sum();
    } else {
      const double mx = (ml * vals).maxCoeff();
      out = (mx + std::log((grid.weights.array() * (ml * vals - mx).exp()).sum())) / ml;
    }
    if (!std::isfinite(out))
      throw numerical_error("evaluate_x0: quadrature overflow at level " + std::to_string(l));
    return out;
  }
};

}  // namespace detail

// Root of the recursion
//   X_{k+1} = log 2 + log ch(z_0 + ... + z_k),
//   X_l     = (1/m_l) log E_l exp(m_l X_{l+1})   (expectation when m_l = 0),
// with each E_l replaced by the Gauss-Hermite rule scaled by the level's
// standard deviation. The additive log 2 makes the zero mixture evaluate to
// log 2, matching the 2^N configurations of the finite-size free energy.
// Deterministic for a fixed grid; cost is grid.size()^(#levels with positive
// variance).
inline double evaluate_x0(const MixtureSpec& spec, const RSBParams& params,
                          const QuadratureGrid& grid) {
  detail::X0Evaluator ev(spec, params, grid);
  return ev.eval(0, 0.0);
}

// Parisi functional P_k(m,q) = X_0 - (1/2) sum_j m_j (theta(q_{j+1}) - theta(q_j)).
inline double evaluate_parisi(const MixtureSpec& spec, const RSBParams& params,
                              const QuadratureGrid& grid) {
  const double x0 = evaluate_x0(spec, params, grid);
  double corr = 0.0;
  for (int j = 1; j <= params.k; ++j)
    corr += params.m_at(j) * (theta(spec, params.q_at(j + 1)) - theta(spec, params.q_at(j)));
  return x0 - 0.5 * corr;
}

}  // namespace pspin
