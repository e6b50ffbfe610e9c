#include "pspin/quadrature.hpp"

#include <doctest.h>

using namespace pspin;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("normalized Gauss-Hermite rule integrates Gaussian moments") {
  for (int n : {8, 20, 40, 80}) {
    QuadratureGrid g = QuadratureGrid::gauss_hermite(n);
    REQUIRE(g.size() == n);
    CHECK((g.weights.array() > 0.0).all());
    CHECK(std::abs(g.weights.sum() - 1.0) < 1e-12);
    const ArrayXd x = g.nodes.array();
    const ArrayXd w = g.weights.array();
    CHECK(std::abs((w * x).sum()) < 1e-12);
    CHECK(std::abs((w * x.square()).sum() - 1.0) < 1e-10);
    CHECK(std::abs((w * x.pow(4)).sum() - 3.0) < 1e-10);
    if (n >= 20) CHECK(std::abs((w * x.pow(6)).sum() - 15.0) < 1e-9);
  }
}

TEST_CASE("matches the lognormal moment E exp(s Z) = exp(s^2/2)") {
  QuadratureGrid g = QuadratureGrid::gauss_hermite(40);
  for (double s : {0.3, 1.0, 2.0}) {
    const double got = (g.weights.array() * (s * g.nodes.array()).exp()).sum();
    CHECK(got == doctest::Approx(std::exp(0.5 * s * s)).epsilon(1e-10));
  }
}

TEST_CASE("rejects empty rules") {
  CHECK_THROWS_AS(QuadratureGrid::gauss_hermite(0), std::invalid_argument);
}

TEST_SUITE_END();
