#pragma once

#include "pspin/gibbs.hpp"
#include "pspin/overlap.hpp"
#include "pspin/stats.hpp"

#include <span>
#include <string>
#include <vector>

namespace pspin {

// Bounded test function of an n x n overlap array for the Ghirlanda-Guerra
// statistic. Restricted to a builtin family so |f| <= 1 holds by
// construction: the constant 1, a power of one entry, or a product of two
// entries.
struct GGQuery {
  enum class Kind { One, Monomial, Product };
  Kind kind = Kind::One;
  int n = 2;
  int p = 1;
  int a = 0, b = 0, r = 1;  // monomial R_{a,b}^r
  int c = 0, d = 0;         // second factor of a product

  void validate() const {
    if (n < 2) throw std::invalid_argument("gg: need n >= 2 replicas");
    if (p < 1) throw std::invalid_argument("gg: power p must be >= 1");
    auto in_range = [this](int i) { return i >= 1 && i <= n; };
    if (kind != Kind::One) {
      if (!in_range(a) || !in_range(b) || a == b)
        throw std::invalid_argument("gg: monomial indices must be distinct replicas in 1..n");
      if (r < 1) throw std::invalid_argument("gg: monomial power must be >= 1");
    }
    if (kind == Kind::Product && (!in_range(c) || !in_range(d) || c == d))
      throw std::invalid_argument("gg: product indices must be distinct replicas in 1..n");
  }

  double eval(const OverlapArray& arr) const {
    switch (kind) {
      case Kind::One:
        return 1.0;
      case Kind::Monomial:
        return std::pow(arr(a - 1, b - 1), r);
      case Kind::Product:
        return arr(a - 1, b - 1) * arr(c - 1, d - 1);
    }
    return 1.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::One:
        return "one(n=" + std::to_string(n) + ",p=" + std::to_string(p) + ")";
      case Kind::Monomial:
        return "R" + std::to_string(a) + std::to_string(b) + "^" + std::to_string(r) +
               "(n=" + std::to_string(n) + ",p=" + std::to_string(p) + ")";
      case Kind::Product:
        return "R" + std::to_string(a) + std::to_string(b) + "*R" + std::to_string(c) +
               std::to_string(d) + "(n=" + std::to_string(n) + ",p=" + std::to_string(p) + ")";
    }
    return "";
  }
};

inline GGQuery gg_const(int n, int p) {
  GGQuery q;
  q.kind = GGQuery::Kind::One;
  q.n = n;
  q.p = p;
  q.validate();
  return q;
}

inline GGQuery gg_monomial(int a, int b, int r, int n, int p) {
  GGQuery q;
  q.kind = GGQuery::Kind::Monomial;
  q.a = a;
  q.b = b;
  q.r = r;
  q.n = n;
  q.p = p;
  q.validate();
  return q;
}

inline GGQuery gg_product(int a, int b, int c, int d, int n, int p) {
  GGQuery q;
  q.kind = GGQuery::Kind::Product;
  q.a = a;
  q.b = b;
  q.c = c;
  q.d = d;
  q.n = n;
  q.p = p;
  q.validate();
  return q;
}

// Plug-in estimate of
//   phi(f,n,p) = |E<f R_{1,n+1}^p> - (1/n) E<f> E<R_{1,2}^p>
//                - (1/n) sum_{l=2..n} E<f R_{1,l}^p>|
// with a delta-method standard error through the product term. Works on any
// stream of overlap arrays of size >= n+1 (simulator or cascade generated).
inline Estimate gg_statistic(std::span<const OverlapArray> samples, const GGQuery& q) {
  q.validate();
  const long S = long(samples.size());
  if (S < 100) throw std::invalid_argument("gg_statistic: need at least 100 samples");
  ArrayXd fs(S), as(S), rs(S), ds(S);
  for (long i = 0; i < S; ++i) {
    const OverlapArray& arr = samples[std::size_t(i)];
    if (arr.n() < q.n + 1)
      throw std::invalid_argument("gg_statistic: arrays must hold at least n+1 replicas");
    const double f = q.eval(arr);
    fs[i] = f;
    as[i] = f * std::pow(arr(0, q.n), q.p);
    rs[i] = std::pow(arr(0, 1), q.p);
    double acc = 0.0;
    for (int l = 2; l <= q.n; ++l) acc += f * std::pow(arr(0, l - 1), q.p);
    ds[i] = acc;
  }
  const double fbar = fs.mean(), rbar = rs.mean();
  const ArrayXd u = as - (rbar * fs + fbar * rs - fbar * rbar) / double(q.n) - ds / double(q.n);
  const double t = u.mean();
  const double var = (u - t).square().sum() / double(S - 1);
  return {std::abs(t), std::sqrt(var / double(S)), S};
}

// Fraction of replica triples whose two smallest overlaps coincide -- the
// labeling-free form of the ultrametric inequality (all three rotations of
// R_{1,2} >= min(R_{1,3}, R_{2,3}) hold iff the two smallest entries are
// equal). Exact equality is the right test: tree-generated overlaps repeat
// the q values bit for bit and spin overlaps share the same dot-product
// arithmetic. Standard error is clustered by array.
inline Estimate ultrametricity_fraction(std::span<const OverlapArray> samples) {
  long triples = 0;
  RunningStat per_array;
  for (const auto& arr : samples) {
    if (arr.n() < 3) throw std::invalid_argument("ultrametricity: arrays must hold >= 3 replicas");
    long pass = 0, total = 0;
    for (int i = 0; i < arr.n(); ++i)
      for (int j = i + 1; j < arr.n(); ++j)
        for (int k = j + 1; k < arr.n(); ++k) {
          double v[3] = {arr(i, j), arr(i, k), arr(j, k)};
          std::sort(v, v + 3);
          pass += (v[0] == v[1]) ? 1 : 0;
          ++total;
        }
    triples += total;
    per_array.add(double(pass) / double(total));
  }
  if (triples < 100) throw std::invalid_argument("ultrametricity: need at least 100 triples");
  return per_array.estimate();
}

// P(R_{1,2} <= -eps) under two independent Gibbs replicas, averaged over
// disorder. The inner probability is computed exactly per realization: the
// XOR self-convolution of the Gibbs weights (two Walsh-Hadamard transforms)
// gives the mass at every Hamming distance.
inline Estimate positivity_probability(int N, const MixtureSpec& spec, bool pert, double epsilon,
                                       long n_samples, std::uint64_t seed,
                                       int cap = kDefaultEnumerationCap) {
  detail::check_enum_cap(N, cap, "positivity_probability");
  if (!(epsilon > 0.0 && epsilon < 2.0))
    throw std::invalid_argument("positivity_probability: epsilon must lie in (0,2)");
  if (n_samples < 2) throw std::invalid_argument("positivity_probability: need >= 2 samples");
  const std::uint32_t states = 1u << N;
  ArrayXd mass_by_distance(N + 1);
  RunningStat acc;
  for (long i = 0; i < n_samples; ++i) {
    DisorderRealization d =
        sample_disorder(N, spec, pert, derive_seed(seed, 0x27220a95ull, std::uint64_t(i)));
    ArrayXd w = gibbs_log_weights(d, spec, false, cap).exp();
    walsh_hadamard(w);
    w = w.square();
    walsh_hadamard(w);
    w /= double(states);  // w[u] = sum_s G(s) G(s xor u)
    mass_by_distance.setZero();
    for (std::uint32_t u = 0; u < states; ++u) mass_by_distance[popcount64(u)] += w[u];
    double prob = 0.0;
    for (int c = 0; c <= N; ++c)
      if (double(N - 2 * c) / double(N) <= -epsilon) prob += mass_by_distance[c];
    acc.add(std::max(0.0, prob));
  }
  return acc.estimate();
}

// kappa(q) = j/k for j/k <= q < (j+1)/k, kappa(1) = 1: the largest grid
// point not exceeding q, computed against representable grid values so the
// map is idempotent on its own output.
inline double kappa_discretize(double q, int k) {
  if (k < 1) throw std::invalid_argument("kappa_discretize: k must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("kappa_discretize: q must be in [0,1]");
  int j = std::min(k, int(std::floor(q * k)));
  while (j + 1 <= k && double(j + 1) / double(k) <= q) ++j;
  while (j > 0 && double(j) / double(k) > q) --j;
  return double(j) / double(k);
}

// entrywise map; requires nonnegative entries (tree-generated overlaps)
inline OverlapArray kappa_discretize(const OverlapArray& arr, int k) {
  MatrixXd m(arr.n(), arr.n());
  for (int i = 0; i < arr.n(); ++i)
    for (int j = 0; j < arr.n(); ++j) m(i, j) = kappa_discretize(arr(i, j), k);
  return OverlapArray(std::move(m));
}

}  // namespace pspin
