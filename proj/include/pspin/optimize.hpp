#pragma once

#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"

#include <functional>
#include <ostream>
#include <vector>

namespace pspin {

struct OptimizerOptions {
  int k_max = 6;            // quadrature cost grows like nodes^(k+1)
  int restarts = 16;
  double tolerance = 1e-6;  // k-selection improvement threshold
  int max_iterations = 600; // per simplex descent
  std::uint64_t seed = 0;
};

struct Optimum {
  double value = 0.0;
  RSBParams params;
  int k_used = 0;
  bool converged = false;
  long evaluations = 0;
  bool flat = false;  // coordinate curvature below 1e-8 at the optimum
};

namespace detail {

// Monotone sequences from unconstrained coordinates: k+1 squared increments
// normalized by their total. The last increment is the headroom to the upper
// boundary, so m_k = 1 (u_last = 0) and q_1 = 0 are exactly reachable.
inline RSBParams decode_params(int k, const VectorXd& u) {
  auto cumulative = [k](const VectorXd& w) {
    VectorXd out(k);
    double total = 0.0;
    for (int i = 0; i <= k; ++i) total += w[i] * w[i];
    if (total < 1e-300) {
      out.setZero();
      return out;
    }
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
      acc += w[j] * w[j];
      out[j] = std::min(1.0, acc / total);
    }
    return out;
  };
  VectorXd m = cumulative(u.head(k + 1));
  VectorXd q = cumulative(u.tail(k + 1));
  return RSBParams(std::move(m), std::move(q));
}

inline VectorXd encode_params(const RSBParams& p) {
  VectorXd u(2 * (p.k + 1));
  for (int j = 0; j <= p.k; ++j) {
    const double hi = j == p.k ? 1.0 : p.m[j];
    const double lo = j == 0 ? 0.0 : p.m[j - 1];
    u[j] = std::sqrt(std::max(0.0, hi - lo));
  }
  for (int j = 0; j <= p.k; ++j) {
    const double hi = j == p.k ? 1.0 : p.q[j];
    const double lo = j == 0 ? 0.0 : p.q[j - 1];
    u[p.k + 1 + j] = std::sqrt(std::max(0.0, hi - lo));
  }
  return u;
}

struct NelderMeadResult {
  VectorXd x;
  double fx = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Standard simplex descent (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2); stops when the value spread falls below ftol.
inline NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f,
                                    const VectorXd& x0, int max_iter, double ftol = 1e-11,
                                    double step = 0.5) {
  const int n = int(x0.size());
  std::vector<VectorXd> xs(std::size_t(n) + 1, x0);
  std::vector<double> fs(std::size_t(n) + 1);
  for (int i = 1; i <= n; ++i) xs[std::size_t(i)][i - 1] += step;
  for (int i = 0; i <= n; ++i) fs[std::size_t(i)] = f(xs[std::size_t(i)]);

  auto order = [&] {
    for (int i = 1; i <= n; ++i) {  // insertion sort, simplex is small
      VectorXd x = xs[std::size_t(i)];
      double fx = fs[std::size_t(i)];
      int j = i - 1;
      for (; j >= 0 && fs[std::size_t(j)] > fx; --j) {
        xs[std::size_t(j + 1)] = xs[std::size_t(j)];
        fs[std::size_t(j + 1)] = fs[std::size_t(j)];
      }
      xs[std::size_t(j + 1)] = std::move(x);
      fs[std::size_t(j + 1)] = fx;
    }
  };

  NelderMeadResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    order();
    if (fs[std::size_t(n)] - fs[0] < ftol) {
      res.converged = true;
      break;
    }
    VectorXd centroid = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[std::size_t(i)];
    centroid /= double(n);

    VectorXd xr = centroid + (centroid - xs[std::size_t(n)]);
    const double fr = f(xr);
    if (fr < fs[0]) {
      VectorXd xe = centroid + 2.0 * (centroid - xs[std::size_t(n)]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[std::size_t(n)] = xe;
        fs[std::size_t(n)] = fe;
      } else {
        xs[std::size_t(n)] = xr;
        fs[std::size_t(n)] = fr;
      }
    } else if (fr < fs[std::size_t(n - 1)]) {
      xs[std::size_t(n)] = xr;
      fs[std::size_t(n)] = fr;
    } else {
      const bool outside = fr < fs[std::size_t(n)];
      VectorXd xc;
      if (outside)
        xc = centroid + 0.5 * (xr - centroid);
      else
        xc = centroid - 0.5 * (centroid - xs[std::size_t(n)]);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[std::size_t(n)])) {
        xs[std::size_t(n)] = xc;
        fs[std::size_t(n)] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          xs[std::size_t(i)] = xs[0] + 0.5 * (xs[std::size_t(i)] - xs[0]);
          fs[std::size_t(i)] = f(xs[std::size_t(i)]);
        }
      }
    }
  }
  order();
  res.x = xs[0];
  res.fx = fs[0];
  res.iterations = it;
  return res;
}

}  // namespace detail

// Best (m,q) found for fixed k by multi-start simplex descent over the
// unconstrained coordinates. extra_inits seeds additional restarts (the
// level-duplication embedding of a previous optimum guarantees monotone
// improvement in k).
inline Optimum optimize_at_k(const MixtureSpec& spec, int k, const QuadratureGrid& grid,
                             const OptimizerOptions& opts,
                             const std::vector<RSBParams>& extra_inits = {},
                             std::ostream* trace = nullptr) {
  if (k < 1 || k > opts.k_max)
    throw std::invalid_argument("optimize_at_k: k must lie in [1, k_max]");
  long evals = 0;
  double best_f = std::numeric_limits<double>::infinity();
  VectorXd best_u;
  bool best_converged = false;

  auto objective = [&](const VectorXd& u) {
    const double v = evaluate_parisi(spec, detail::decode_params(k, u), grid);
    ++evals;
    if (v < best_f) {
      best_f = v;
      best_u = u;
    }
    return v;
  };

  std::vector<VectorXd> inits;
  for (const auto& p : extra_inits) {
    if (p.k != k) throw std::invalid_argument("optimize_at_k: extra init has wrong k");
    inits.push_back(detail::encode_params(p));
  }
  const int dim = 2 * (k + 1);
  for (int r = 0; r < opts.restarts; ++r) {
    SplitMix64 g(derive_seed(opts.seed, 0x9e3779b9ull, std::uint64_t(k), std::uint64_t(r)));
    VectorXd u(dim);
    for (int i = 0; i < dim; ++i) u[i] = sample_normal(g);
    inits.push_back(std::move(u));
  }

  for (std::size_t r = 0; r < inits.size(); ++r) {
    const double before = best_f;
    detail::NelderMeadResult nm = detail::nelder_mead(objective, inits[r], opts.max_iterations);
    if (trace)
      (*trace) << "restart=" << r << " iterations=" << nm.iterations << " value=" << nm.fx
               << "\n";
    if (nm.fx < before || !std::isfinite(before)) best_converged = nm.converged;
  }

  Optimum out;
  out.params = detail::decode_params(k, best_u);
  out.value = evaluate_parisi(spec, out.params, grid);
  out.k_used = k;
  out.converged = best_converged;
  out.evaluations = evals;

  // coordinate curvature proxy for plateau detection
  const double h = 1e-3;
  double min_curv = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) {
    VectorXd up = best_u, dn = best_u;
    up[i] += h;
    dn[i] -= h;
    const double c = (evaluate_parisi(spec, detail::decode_params(k, up), grid) +
                      evaluate_parisi(spec, detail::decode_params(k, dn), grid) -
                      2.0 * out.value) /
                     (h * h);
    min_curv = std::min(min_curv, c);
    evals += 2;
  }
  out.evaluations = evals;
  out.flat = min_curv < 1e-8;
  return out;
}

// Minimum over k = 1..k_max with early stopping once an extra level improves
// by less than the tolerance; k_used is the smallest k within tolerance of
// the best value found.
inline Optimum optimize_full(const MixtureSpec& spec, const QuadratureGrid& grid,
                             const OptimizerOptions& opts, std::ostream* trace = nullptr) {
  std::vector<Optimum> by_k;
  long total_evals = 0;
  for (int k = 1; k <= opts.k_max; ++k) {
    std::vector<RSBParams> inits;
    if (!by_k.empty()) inits.push_back(duplicate_level(by_k.back().params, by_k.back().params.k));
    Optimum o = optimize_at_k(spec, k, grid, opts, inits, trace);
    total_evals += o.evaluations;
    by_k.push_back(o);
    if (k > 1 && by_k[std::size_t(k - 2)].value - o.value < opts.tolerance) break;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : by_k) best = std::min(best, o.value);
  for (const auto& o : by_k) {
    if (o.value <= best + opts.tolerance) {
      Optimum out = o;
      out.evaluations = total_evals;
      return out;
    }
  }
  return by_k.back();  // unreachable
}

}  // namespace pspin
