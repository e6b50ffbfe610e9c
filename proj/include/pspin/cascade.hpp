#pragma once

#include "pspin/mixture.hpp"
#include "pspin/overlap.hpp"
#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"
#include "pspin/stats.hpp"

#include <cstdint>
#include <vector>

namespace pspin {

namespace detail {
// zeta outside these bounds degenerates the truncated Poisson-Dirichlet
// construction: below, the top atom carries all mass (use a deterministic
// single-atom node); above, the rank-M tail mass no longer decays and the
// truncation bias blows up (reject).
constexpr double kZetaSingleAtom = 0.01;
constexpr double kZetaReject = 0.99;

constexpr std::uint64_t kAtomTag = 0x243f6a8885a308d3ull;
constexpr std::uint64_t kFieldTag = 0x13198a2e03707344ull;
constexpr std::uint64_t kRootFieldTag = 0xa4093822299f31d0ull;

inline std::uint64_t child_hash(std::uint64_t parent, int child) {
  return mix64(parent ^ (std::uint64_t(child) + 1));
}

inline int cascade_branching(double zeta, int M) {
  if (zeta >= kZetaReject)
    throw std::invalid_argument("cascade: m_l >= 0.99 not sampleable (truncation bias)");
  return zeta <= kZetaSingleAtom ? 1 : M;
}
}  // namespace detail

// Truncated Ruelle probability cascade: at every node the M largest atoms of
// a Poisson-Dirichlet process PD(zeta_l), zeta_l = m_l, are kept
// (u_i = Gamma_i^{-1/zeta_l} for Poisson arrival times Gamma_i), multiplied
// down the tree and normalized across the leaves.
struct CascadeTree {
  int k = 0;
  int M = 0;
  VectorXd zeta;               // zeta_1..zeta_k
  std::vector<int> branching;  // per level; 1 where zeta_l <= 0.01
  VectorXd q_level;            // q_1..q_{k+1}: overlap value by splitting level
  ArrayXd log_leaf_w;          // normalized, size prod(branching)

  std::int64_t leaves() const { return log_leaf_w.size(); }

  // digit of the leaf path at a level (1-based level)
  int digit(std::int64_t leaf, int level) const {
    std::int64_t stride = 1;
    for (int l = level + 1; l <= k; ++l) stride *= branching[std::size_t(l - 1)];
    return int((leaf / stride) % branching[std::size_t(level - 1)]);
  }

  // min{l >= 1 : paths differ at l}, or k+1 for identical leaves
  int overlap_level(std::int64_t a, std::int64_t b) const {
    if (a == b) return k + 1;
    for (int l = 1; l <= k; ++l)
      if (digit(a, l) != digit(b, l)) return l;
    return k + 1;
  }

  double overlap_value(std::int64_t a, std::int64_t b) const {
    return q_level[overlap_level(a, b) - 1];
  }
};

inline CascadeTree sample_cascade(const RSBParams& params, int M, std::uint64_t seed,
                                  std::int64_t leaf_budget = std::int64_t(1) << 22) {
  params.validate();
  if (M < 2) throw std::invalid_argument("cascade: M must be >= 2");
  CascadeTree t;
  t.k = params.k;
  t.M = M;
  t.zeta = params.m;
  t.branching.resize(std::size_t(t.k));
  std::int64_t leaves = 1;
  for (int l = 1; l <= t.k; ++l) {
    t.branching[std::size_t(l - 1)] = detail::cascade_branching(t.zeta[l - 1], M);
    leaves *= t.branching[std::size_t(l - 1)];
    if (leaves > leaf_budget)
      throw std::invalid_argument("cascade: leaf count M^k exceeds the leaf budget");
  }
  t.q_level.resize(t.k + 1);
  for (int l = 1; l <= t.k + 1; ++l) t.q_level[l - 1] = params.q_at(l);

  ArrayXd level_logw = ArrayXd::Zero(1);  // root
  for (int l = 1; l <= t.k; ++l) {
    const int b = t.branching[std::size_t(l - 1)];
    const std::int64_t parents = level_logw.size();
    ArrayXd next(parents * b);
    if (b == 1) {
      next = level_logw;  // deterministic unit atom
    } else {
      SplitMix64 g(derive_seed(seed, detail::kAtomTag, std::uint64_t(l)));
      const double inv_zeta = 1.0 / t.zeta[l - 1];
      ArrayXd gaps(b);
      for (std::int64_t par = 0; par < parents; ++par) {
        fill_exponential(gaps, g);
        double gamma = 0.0;
        for (int i = 0; i < b; ++i) {
          gamma += gaps[i];
          next[par * b + i] = level_logw[par] - inv_zeta * std::log(gamma);
        }
      }
    }
    level_logw.swap(next);
  }
  t.log_leaf_w = level_logw - logsumexp(level_logw);
  return t;
}

// Hierarchical Gaussian field on the leaves:
//   z_alpha = sum_{l=0..k} eta(prefix of length l) * sqrt(xi'(q_{l+1}) - xi'(q_l)),
// one independent standard Gaussian per tree edge, so
//   E z_a z_b = xi'(q_{a^b}) exactly by telescoping.
struct LeafField {
  ArrayXd z;
};

inline LeafField sample_field(const CascadeTree& tree, const MixtureSpec& spec,
                              const RSBParams& params, std::uint64_t seed) {
  if (params.k != tree.k) throw std::invalid_argument("sample_field: level mismatch");
  const VectorXd sd = variance_increments(spec, params).array().sqrt();
  SplitMix64 root_g(derive_seed(seed, detail::kRootFieldTag));
  ArrayXd z = ArrayXd::Constant(1, sd[0] == 0.0 ? 0.0 : sd[0] * sample_normal(root_g));
  for (int l = 1; l <= tree.k; ++l) {
    const int b = tree.branching[std::size_t(l - 1)];
    const std::int64_t parents = z.size();
    ArrayXd next(parents * b);
    if (sd[l] == 0.0) {
      for (std::int64_t par = 0; par < parents; ++par)
        next.segment(par * b, b).setConstant(z[par]);
    } else {
      SplitMix64 g(derive_seed(seed, detail::kFieldTag, std::uint64_t(l)));
      ArrayXd eta(b);
      for (std::int64_t par = 0; par < parents; ++par) {
        fill_normal(eta, g);
        next.segment(par * b, b) = z[par] + sd[l] * eta;
      }
    }
    z.swap(next);
  }
  return {std::move(z)};
}

namespace detail {
inline std::vector<double> leaf_cdf(const CascadeTree& tree) {
  std::vector<double> cdf(static_cast<std::size_t>(tree.leaves()));
  double acc = 0.0;
  for (std::int64_t i = 0; i < tree.leaves(); ++i) {
    acc += std::exp(tree.log_leaf_w[i]);
    cdf[std::size_t(i)] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

inline std::int64_t draw_leaf(const std::vector<double>& cdf, SplitMix64& g) {
  const double u = g.next_double();
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return it == cdf.end() ? std::int64_t(cdf.size()) - 1 : std::int64_t(it - cdf.begin());
}
}  // namespace detail

// n i.i.d. leaves drawn from the leaf weights; entries are the q values of
// the pairwise splitting levels. The result is exactly ultrametric.
inline OverlapArray sample_overlap_array(const CascadeTree& tree, int n_replicas,
                                         std::uint64_t seed) {
  if (n_replicas < 2) throw std::invalid_argument("sample_overlap_array: need >= 2 replicas");
  const auto cdf = detail::leaf_cdf(tree);
  SplitMix64 g(derive_seed(seed, 0x082efa98ec4e6c89ull));
  std::vector<std::int64_t> leaf(static_cast<std::size_t>(n_replicas));
  for (auto& s : leaf) s = detail::draw_leaf(cdf, g);
  MatrixXd r = MatrixXd::Identity(n_replicas, n_replicas);
  for (int i = 0; i < n_replicas; ++i)
    for (int j = i + 1; j < n_replicas; ++j)
      r(i, j) = r(j, i) = tree.overlap_value(leaf[std::size_t(i)], leaf[std::size_t(j)]);
  return OverlapArray(std::move(r));
}

// One array per fresh cascade realization: the estimator of E<.> over the
// random weights, which is what the Ghirlanda-Guerra statistic averages.
inline std::vector<OverlapArray> sample_rpc_overlap_arrays(const RSBParams& params, int M,
                                                           int n_arrays, int n_replicas,
                                                           std::uint64_t seed,
                                                           std::int64_t leaf_budget = std::int64_t(1)
                                                                                      << 22) {
  std::vector<OverlapArray> out;
  out.reserve(std::size_t(n_arrays));
  for (int a = 0; a < n_arrays; ++a) {
    const std::uint64_t s = derive_seed(seed, 0x3c6ef372fe94f82bull, std::uint64_t(a));
    CascadeTree tree = sample_cascade(params, M, s, leaf_budget);
    out.push_back(sample_overlap_array(tree, n_replicas, derive_seed(s, 23)));
  }
  return out;
}

// Bulk variant sharing one tree; arrays are i.i.d. replica tuples from that
// single realization (conditional law, suitable for ultrametricity checks).
inline std::vector<OverlapArray> sample_overlap_arrays(const CascadeTree& tree, int n_arrays,
                                                       int n_replicas, std::uint64_t seed) {
  const auto cdf = detail::leaf_cdf(tree);
  std::vector<OverlapArray> out;
  out.reserve(std::size_t(n_arrays));
  for (int a = 0; a < n_arrays; ++a) {
    SplitMix64 g(derive_seed(seed, 0x082efa98ec4e6c89ull, std::uint64_t(a)));
    std::vector<std::int64_t> leaf(static_cast<std::size_t>(n_replicas));
    for (auto& s : leaf) s = detail::draw_leaf(cdf, g);
    MatrixXd r = MatrixXd::Identity(n_replicas, n_replicas);
    for (int i = 0; i < n_replicas; ++i)
      for (int j = i + 1; j < n_replicas; ++j)
        r(i, j) = r(j, i) = tree.overlap_value(leaf[std::size_t(i)], leaf[std::size_t(j)]);
    out.emplace_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo representation of X_0: E log sum_alpha w_alpha 2 ch(z_alpha)
// over fresh (cascade, field) draws. Streams the tree depth-first instead of
// materializing it, so memory stays O(k M). Node random streams are keyed by
// the path digits, which keeps the first M atoms and field draws of every
// node identical when M is doubled -- the internal pilot compares M against
// 2M with common random numbers and raises the truncation warning when the
// shift is not below the projected standard error.
// ---------------------------------------------------------------------------

struct X0RpcResult {
  Estimate est;
  bool truncation_warning = false;
  int M = 0;
};

struct X0RpcOptions {
  long n_pilot = 48;       // CRN samples for the doubling check
  bool run_pilot = true;
  int workers = 1;
};

namespace detail {
// The rank-M tail of PD(zeta) decays like M^(1-1/zeta), so the shift from
// doubling M understates the remaining truncation bias by
// 1/(1 - 2^(1-1/zeta)); the pilot extrapolates with the worst level.
inline double doubling_extrapolation_factor(const RSBParams& params) {
  double r = 1.0;
  for (int l = 0; l < params.k; ++l) {
    const double zeta = params.m[l];
    if (zeta <= kZetaSingleAtom) continue;
    r = std::max(r, 1.0 / (1.0 - std::exp2(1.0 - 1.0 / zeta)));
  }
  return r;
}
}  // namespace detail

namespace detail {

struct RpcSampler {
  int k;
  VectorXd sd;      // increment standard deviations, levels 0..k
  VectorXd inv_zeta;  // 1/zeta per level 1..k (unused where branching==1)
  std::vector<int> branching;
  std::vector<ArrayXd> logu_scr, eta_scr, gap_scr;
  LogSumExpAcc num, den;

  RpcSampler(const MixtureSpec& spec, const RSBParams& params, int M) {
    params.validate();
    if (M < 2) throw std::invalid_argument("cascade: M must be >= 2");
    k = params.k;
    sd = variance_increments(spec, params).array().sqrt();
    inv_zeta.resize(k);
    branching.resize(std::size_t(k));
    for (int l = 1; l <= k; ++l) {
      branching[std::size_t(l - 1)] = cascade_branching(params.m[l - 1], M);
      inv_zeta[l - 1] = 1.0 / std::max(params.m[l - 1], kZetaSingleAtom);
    }
    logu_scr.resize(std::size_t(k));
    eta_scr.resize(std::size_t(k));
    gap_scr.resize(std::size_t(k));
    for (int l = 0; l < k; ++l) {
      logu_scr[std::size_t(l)].resize(branching[std::size_t(l)]);
      eta_scr[std::size_t(l)].resize(branching[std::size_t(l)]);
      gap_scr[std::size_t(l)].resize(branching[std::size_t(l)]);
    }
  }

  // expand children at depth d+1 below a node at depth d
  void expand(int d, std::uint64_t h, double logw, double z) {
    const int lvl = d + 1;  // 1-based level of the children
    const int b = branching[std::size_t(d)];
    ArrayXd& logu = logu_scr[std::size_t(d)];
    ArrayXd& eta = eta_scr[std::size_t(d)];
    if (b == 1) {
      logu[0] = 0.0;
    } else {
      SplitMix64 ga(h ^ kAtomTag);
      ArrayXd& gaps = gap_scr[std::size_t(d)];
      for (int i = 0; i < b; ++i) gaps[i] = ga.next_double();
      gaps = -gaps.log();
      double gamma = 0.0;
      for (int i = 0; i < b; ++i) {
        gamma += gaps[i];
        logu[i] = gamma;
      }
      logu = -inv_zeta[lvl - 1] * logu.log();
    }
    if (sd[lvl] == 0.0) {
      eta.head(b).setZero();
    } else {
      SplitMix64 gf(h ^ kFieldTag);
      for (int i = 0; i < b; ++i) eta[i] = sample_normal(gf);
    }
    if (lvl == k) {
      ArrayXd zc = z + sd[lvl] * eta.head(b);
      ArrayXd lw = logw + logu.head(b);
      den.add(lw);
      // log 2ch(z) = |z| + log1p(exp(-2|z|))
      zc = zc.abs();
      num.add(lw + zc + (-2.0 * zc).exp().log1p());
    } else {
      for (int i = 0; i < b; ++i)
        expand(lvl, child_hash(h, i), logw + logu[i], z + sd[lvl] * eta[i]);
    }
  }

  double run(std::uint64_t sample_hash) {
    num = LogSumExpAcc();
    den = LogSumExpAcc();
    double z0 = 0.0;
    if (sd[0] != 0.0) {
      SplitMix64 g(sample_hash ^ kRootFieldTag);
      z0 = sd[0] * sample_normal(g);
    }
    expand(0, sample_hash, 0.0, z0);
    return num.value() - den.value();
  }
};

}  // namespace detail

inline X0RpcResult evaluate_x0_rpc(const MixtureSpec& spec, const RSBParams& params, int M,
                                   long n_samples, std::uint64_t seed,
                                   const X0RpcOptions& opts = {}) {
  if (n_samples < 2) throw std::invalid_argument("evaluate_x0_rpc: need >= 2 samples");
  if (xi_prime(spec, 1.0) == 0.0) {
    // all field increments vanish: every sample is exactly log 2
    return {{M_LN2, 0.0, n_samples}, false, M};
  }
  auto sample_hash = [&](long i) { return derive_seed(seed, 0x452821e638d01377ull, std::uint64_t(i)); };
  std::vector<double> vals = parallel_map(n_samples, opts.workers, [&](long i) {
    detail::RpcSampler s(spec, params, M);
    return s.run(sample_hash(i));
  });
  X0RpcResult res;
  res.est = estimate_from(vals);
  res.M = M;
  if (opts.run_pilot) {
    const long np = std::min<long>(opts.n_pilot, n_samples);
    RunningStat diff;
    for (long i = 0; i < np; ++i) {
      detail::RpcSampler s2(spec, params, 2 * M);
      diff.add(s2.run(sample_hash(i)) - vals[std::size_t(i)]);
    }
    const double projected_se = std::max(res.est.se, 1e-12);
    const double move = std::abs(diff.mean()) + 2.0 * diff.stderror();
    res.truncation_warning =
        move * detail::doubling_extrapolation_factor(params) >= projected_se;
  }
  return res;
}

}  // namespace pspin
