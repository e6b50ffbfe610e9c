#include "pspin/optimize.hpp"

#include "test_util.hpp"

#include <doctest.h>
#include <sstream>

using namespace pspin;

TEST_SUITE_BEGIN("optimizer");

namespace {
const QuadratureGrid& grid40() {
  static QuadratureGrid g = QuadratureGrid::gauss_hermite(40);
  return g;
}
OptimizerOptions fast_opts(std::uint64_t seed = 0) {
  OptimizerOptions o;
  o.restarts = 6;
  o.max_iterations = 500;
  o.seed = seed;
  return o;
}
}  // namespace

TEST_CASE("coordinate decoding always yields feasible monotone sequences") {
  SplitMix64 g(21);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 1 + int(g() % 4);
    VectorXd u(2 * (k + 1));
    for (int i = 0; i < u.size(); ++i) u[i] = 3.0 * (g.next_double() - 0.5);
    RSBParams p = detail::decode_params(k, u);
    CHECK_NOTHROW(p.validate());
  }
  // encoding inverts decoding on feasible points
  for (int rep = 0; rep < 50; ++rep) {
    const int k = 1 + int(g() % 3);
    RSBParams p = pspin_test::random_params(g, k);
    RSBParams q = detail::decode_params(k, detail::encode_params(p));
    CHECK((q.m - p.m).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((q.q - p.q).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("boundary points m=1 and q=0 are exactly representable") {
  VectorXd m(1), q(1);
  m << 1.0;
  q << 0.0;
  RSBParams p(std::move(m), std::move(q));
  RSBParams rt = detail::decode_params(1, detail::encode_params(p));
  CHECK(rt.m[0] == 1.0);
  CHECK(rt.q[0] == 0.0);
}

TEST_CASE("nelder-mead minimizes a smooth quadratic") {
  auto f = [](const VectorXd& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 2.0) * (x[1] + 2.0);
  };
  detail::NelderMeadResult r = detail::nelder_mead(f, VectorXd::Zero(2), 500);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-5);
  CHECK(std::abs(r.x[1] + 2.0) < 1e-5);
}

TEST_CASE("zero mixture optimizes to log 2 at any k") {
  Optimum o = optimize_at_k(MixtureSpec::zero(), 2, grid40(), fast_opts());
  CHECK(std::abs(o.value - M_LN2) < 1e-12);
  CHECK(o.converged);
  CHECK(o.flat);  // the functional is constant in the parameters
}

TEST_CASE("high-temperature 2-spin model is replica symmetric") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.5}});
  Optimum o = optimize_full(s, grid40(), fast_opts(3));
  CHECK(std::abs(o.value - (M_LN2 + 0.125)) < 1e-3);
  CHECK(o.params.q[0] <= 0.01);
  CHECK(o.k_used == 1);
}

TEST_CASE("one extra level never increases the value") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.9}});
  OptimizerOptions opts = fast_opts(5);
  Optimum o1 = optimize_at_k(s, 1, grid40(), opts);
  Optimum o2 = optimize_at_k(s, 2, grid40(), opts,
                             {duplicate_level(o1.params, 1)});
  CHECK(o2.value <= o1.value + 1e-9);
}

TEST_CASE("invariants of the returned optimum") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.8}, {4, 0.2}});
  Optimum o = optimize_at_k(s, 1, grid40(), fast_opts(7));
  CHECK_NOTHROW(o.params.validate());
  CHECK(std::abs(o.value - evaluate_parisi(s, o.params, grid40())) < 1e-10);
  CHECK(o.evaluations > 0);
}

TEST_CASE("restart determinism: identical seeds give identical optima") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.7}});
  Optimum a = optimize_full(s, grid40(), fast_opts(11));
  Optimum b = optimize_full(s, grid40(), fast_opts(11));
  CHECK(a.value == b.value);
  CHECK((a.params.m.array() == b.params.m.array()).all());
  CHECK((a.params.q.array() == b.params.q.array()).all());
  CHECK(a.k_used == b.k_used);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("k guard and trace output") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.5}});
  OptimizerOptions o = fast_opts();
  o.k_max = 2;
  CHECK_THROWS_AS(optimize_at_k(s, 3, grid40(), o), std::invalid_argument);
  std::ostringstream trace;
  o.restarts = 2;
  optimize_at_k(s, 1, grid40(), o, {}, &trace);
  CHECK(trace.str().find("restart=0") != std::string::npos);
  CHECK(trace.str().find("value=") != std::string::npos);
}

TEST_SUITE_END();
