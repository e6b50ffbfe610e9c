#include "pspin/diagnostics.hpp"

#include "pspin/cascade.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

using namespace pspin;

TEST_SUITE_BEGIN("diagnostics");

namespace {
RSBParams params2(double m1, double m2, double q1, double q2) {
  Eigen::VectorXd m(2), q(2);
  m << m1, m2;
  q << q1, q2;
  return RSBParams(std::move(m), std::move(q));
}

std::vector<OverlapArray> random_arrays(int n_arrays, int n, std::uint64_t seed) {
  SplitMix64 g(seed);
  std::vector<OverlapArray> out;
  for (int i = 0; i < n_arrays; ++i) {
    MatrixXd m = MatrixXd::Identity(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) m(a, b) = m(b, a) = 2.0 * g.next_double() - 1.0;
    out.emplace_back(std::move(m));
  }
  return out;
}
}  // namespace

TEST_CASE("query validation and bounds") {
  CHECK_THROWS_AS(gg_const(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gg_const(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(gg_monomial(1, 1, 1, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(gg_monomial(1, 4, 1, 3, 1), std::invalid_argument);
  auto arrays = random_arrays(200, 4, 1);
  for (const auto& a : arrays) {
    CHECK(std::abs(gg_monomial(2, 3, 2, 3, 1).eval(a)) <= 1.0);
    CHECK(std::abs(gg_product(1, 2, 2, 3, 3, 1).eval(a)) <= 1.0);
  }
}

TEST_CASE("exchangeability alone kills the constant query") {
  // f = 1, n = 2: phi = |E R_{1,3}^p - E R_{1,2}^p| for any exchangeable
  // source, here the simulator with perturbation
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.8}});
  auto arrays = sample_gibbs_overlap_arrays(5, s, 3000, 3, true, 2);
  for (int p : {1, 2}) {
    Estimate e = gg_statistic(arrays, gg_const(2, p));
    CHECK(e.mean < 3.0 * e.se);
  }
}

TEST_CASE("cascade samples satisfy the identities") {
  RSBParams p = params2(0.35, 0.65, 0.3, 0.7);
  auto arrays = sample_rpc_overlap_arrays(p, 128, 6000, 4, 3);
  for (const GGQuery& q : {gg_const(2, 1), gg_monomial(2, 3, 1, 3, 1), gg_monomial(2, 3, 1, 3, 2),
                           gg_product(1, 2, 2, 3, 3, 1)}) {
    Estimate e = gg_statistic(arrays, q);
    CHECK(e.mean < 3.0 * e.se);
  }
}

TEST_CASE("statistic is invariant under permuting replicas 2..n") {
  // swapping replicas 3 and 4 (n=4) relabels f and the correction sum but
  // leaves every estimator term in place, so the plug-in value is identical
  auto arrays = random_arrays(500, 5, 4);
  std::vector<OverlapArray> permuted;
  for (const auto& a : arrays) {
    MatrixXd m = a.r;
    m.row(2).swap(m.row(3));
    m.col(2).swap(m.col(3));
    permuted.emplace_back(std::move(m));
  }
  Estimate e1 = gg_statistic(arrays, gg_monomial(3, 4, 1, 4, 1));
  Estimate e2 = gg_statistic(permuted, gg_monomial(4, 3, 1, 4, 1));
  CHECK(e1.mean == doctest::Approx(e2.mean).epsilon(1e-12));
  CHECK(e1.se == doctest::Approx(e2.se).epsilon(1e-12));
  // a swap that moves replica 2 changes only which samples estimate each
  // term: the two statistics agree in distribution, here within noise
  std::vector<OverlapArray> perm2;
  for (const auto& a : arrays) {
    MatrixXd m = a.r;
    m.row(1).swap(m.row(2));
    m.col(1).swap(m.col(2));
    perm2.emplace_back(std::move(m));
  }
  Estimate e3 = gg_statistic(arrays, gg_monomial(2, 3, 1, 3, 1));
  Estimate e4 = gg_statistic(perm2, gg_monomial(3, 2, 1, 3, 1));
  CHECK(std::abs(e3.mean - e4.mean) < 3.0 * std::hypot(e3.se, e4.se));
}

TEST_CASE("insufficient samples are rejected") {
  auto arrays = random_arrays(50, 3, 5);
  CHECK_THROWS_AS(gg_statistic(arrays, gg_const(2, 1)), std::invalid_argument);
  std::vector<OverlapArray> few = random_arrays(10, 3, 6);
  CHECK_THROWS_AS(ultrametricity_fraction(few), std::invalid_argument);
}

TEST_CASE("tree-generated overlaps are exactly ultrametric, noise is not") {
  RSBParams p = params2(0.3, 0.6, 0.25, 0.75);
  CascadeTree t = sample_cascade(p, 64, 7);
  auto tree_arrays = sample_overlap_arrays(t, 500, 4, 8);
  Estimate u = ultrametricity_fraction(tree_arrays);
  CHECK(u.mean == 1.0);
  CHECK(u.se == 0.0);

  auto noise = random_arrays(500, 4, 9);
  Estimate v = ultrametricity_fraction(noise);
  CHECK(v.mean < 1.0);
}

TEST_CASE("positivity probability: exact zero beyond the overlap range") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.5}});
  Estimate e = positivity_probability(4, s, true, 1.0 + 2.0 / 4.0, 50, 10);
  CHECK(e.mean == 0.0);
  CHECK(e.se == 0.0);
}

TEST_CASE("flip symmetry balances the two overlap tails") {
  // even mixture, no perturbation: P(R <= -t) = P(R >= t) exactly, so the
  // positivity probability at eps equals the upper-tail mass
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.7}});
  const int N = 6;
  const double eps = 2.0 / N;
  RunningStat below, above;
  for (int rep = 0; rep < 40; ++rep) {
    DisorderRealization d = sample_disorder(N, s, false, 600 + std::uint64_t(rep));
    ArrayXd w = gibbs_log_weights(d, s).exp();
    double lo = 0.0, hi = 0.0;
    for (std::uint32_t a = 0; a < (1u << N); ++a)
      for (std::uint32_t b = 0; b < (1u << N); ++b) {
        const double r = overlap_of_states(a, b, N);
        if (r <= -eps) lo += w[a] * w[b];
        if (r >= eps) hi += w[a] * w[b];
      }
    below.add(lo);
    above.add(hi);
  }
  CHECK(std::abs(below.mean() - above.mean()) < 1e-12);
  // and the transform-based estimator reproduces the same expectation
  Estimate e = positivity_probability(N, s, false, eps, 40, 600);
  // seeds 600.. in the loop above and the derived stream differ; compare
  // against the direct pair enumeration only in distribution
  CHECK(std::abs(e.mean - below.mean()) < 3.0 * std::hypot(e.se, below.stderror()));
}

TEST_CASE("perturbed negative-overlap mass shrinks with N") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.5}});
  Estimate small_n = positivity_probability(6, s, true, 0.2, 400, 11);
  Estimate large_n = positivity_probability(12, s, true, 0.2, 400, 12);
  CHECK(large_n.mean < small_n.mean + 3.0 * std::hypot(small_n.se, large_n.se));
}

TEST_CASE("kappa discretization") {
  CHECK(kappa_discretize(0.37, 10) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(kappa_discretize(1.0, 7) == 1.0);
  CHECK(kappa_discretize(0.0, 5) == 0.0);
  CHECK_THROWS_AS(kappa_discretize(-0.1, 5), std::domain_error);
  CHECK_THROWS_AS(kappa_discretize(1.1, 5), std::domain_error);
  SplitMix64 g(13);
  for (int rep = 0; rep < 2000; ++rep) {
    const int k = 1 + int(g() % 12);
    const double q1 = g.next_double(), q2 = g.next_double();
    const double k1 = kappa_discretize(q1, k), k2 = kappa_discretize(q2, k);
    if (q1 <= q2) CHECK(k1 <= k2);
    CHECK(kappa_discretize(k1, k) == k1);  // idempotent on the grid
    CHECK(k1 <= q1);
  }
}

TEST_CASE("kappa preserves ultrametricity and positive semidefiniteness") {
  RSBParams p = params2(0.3, 0.6, 0.2, 0.8);
  CascadeTree t = sample_cascade(p, 64, 14);
  auto arrays = sample_overlap_arrays(t, 300, 4, 15);
  std::vector<OverlapArray> mapped;
  for (const auto& a : arrays) mapped.push_back(kappa_discretize(a, 3));
  Estimate u = ultrametricity_fraction(mapped);
  CHECK(u.mean == 1.0);
  for (const auto& a : mapped) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a.r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_SUITE_END();
