#include "pspin/disorder.hpp"

#include "pspin/stats.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace pspin;

TEST_SUITE_BEGIN("disorder");

TEST_CASE("tensor sizes follow N^p") {
  MixtureSpec s2 = MixtureSpec::from_pairs({{2, 1.0}});
  DisorderRealization d = sample_disorder(2, s2, false, 1);
  REQUIRE(d.tensors.size() == 1);
  CHECK(d.tensors[0].g.size() == 4);
  MixtureSpec s13 = MixtureSpec::from_pairs({{1, 0.5}, {3, 0.5}});
  DisorderRealization d2 = sample_disorder(3, s13, false, 2);
  REQUIRE(d2.tensors.size() == 2);
  CHECK(d2.tensor_for(1)->g.size() == 3);
  CHECK(d2.tensor_for(3)->g.size() == 27);
}

TEST_CASE("memory budget rejects oversized tensors") {
  MixtureSpec s = MixtureSpec::from_pairs({{3, 0.5}});
  CHECK_THROWS_AS(sample_disorder(8, s, false, 1, /*tensor_budget=*/100), std::invalid_argument);
}

TEST_CASE("fixed seed reproduces couplings bitwise") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.7}, {3, 0.2}});
  DisorderRealization a = sample_disorder(4, s, true, 99);
  DisorderRealization b = sample_disorder(4, s, true, 99);
  for (std::size_t i = 0; i < a.tensors.size(); ++i)
    CHECK((a.tensors[i].g == b.tensors[i].g).all());
  CHECK((a.pert->x == b.pert->x).all());
  for (int p = 0; p < a.pert->p_max; ++p)
    CHECK((a.pert->coeffs[std::size_t(p)] == b.pert->coeffs[std::size_t(p)]).all());
}

TEST_CASE("coupling entries are standard Gaussians") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 1.0}});
  RunningStat mean, var;
  for (int rep = 0; rep < 1200; ++rep) {
    DisorderRealization d = sample_disorder(3, s, false, 5000 + std::uint64_t(rep));
    for (int i = 0; i < d.tensors[0].g.size(); ++i) {
      mean.add(d.tensors[0].g[i]);
      var.add(d.tensors[0].g[i] * d.tensors[0].g[i]);
    }
  }
  CHECK(std::abs(mean.mean()) < 3.0 * mean.stderror());
  CHECK(std::abs(var.mean() - 1.0) < 3.0 * var.stderror());
}

TEST_CASE("odd-tuple counts: closed forms and total mass") {
  for (int N : {2, 5, 12}) {
    CHECK(count_odd_tuples(1, N, 1) == 1.0);
    CHECK(count_odd_tuples(2, N, 0) == double(N));
    CHECK(count_odd_tuples(2, N, 2) == 2.0);
    CHECK(count_odd_tuples(3, N, 1) == 3.0 * N - 2.0);
    for (int p = 1; p <= 8; ++p) {
      double total = 0.0, binom = 1.0;
      for (int sz = 0; sz <= std::min(p, N); ++sz) {
        total += binom * count_odd_tuples(p, N, sz);
        binom *= double(N - sz) / double(sz + 1);
      }
      CHECK(total == doctest::Approx(std::pow(double(N), p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("p=1 Hamiltonian is the plain field sum") {
  MixtureSpec s = MixtureSpec::from_pairs({{1, 1.0}});
  DisorderRealization d = sample_disorder(5, s, false, 7);
  SpinConfig sigma(5);
  sigma << 1, -1, 1, 1, -1;
  double want = 0.0;
  for (int i = 0; i < 5; ++i) want += d.tensors[0].g[i] * sigma[i];
  CHECK(hamiltonian(d, s, sigma) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("even mixtures are flip symmetric") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 0.8}, {4, 0.3}});
  DisorderRealization d = sample_disorder(4, s, false, 8);
  SpinConfig sigma(4);
  sigma << 1, -1, -1, 1;
  CHECK(hamiltonian(d, s, sigma) == doctest::Approx(hamiltonian(d, s, -sigma)).epsilon(1e-12));
}

TEST_CASE("disorder covariance is N xi(R)") {
  MixtureSpec s = MixtureSpec::from_pairs({{1, 0.4}, {2, 0.7}, {3, 0.3}});
  const int N = 6;
  SpinConfig s1 = spin_state(0b010110, N), s2 = spin_state(0b100110, N);
  const double r = overlap_of_states(0b010110, 0b100110, N);
  RunningStat prod;
  for (int rep = 0; rep < 4000; ++rep) {
    DisorderRealization d = sample_disorder(N, s, false, 11000 + std::uint64_t(rep));
    prod.add(hamiltonian(d, s, s1) * hamiltonian(d, s, s2));
  }
  CHECK(std::abs(prod.mean() - N * xi(s, r)) < 3.0 * prod.stderror());
}

TEST_CASE("minus variant shares couplings with the (N+1) scaling") {
  MixtureSpec s1 = MixtureSpec::from_pairs({{1, 0.6}});
  DisorderRealization d1 = sample_disorder(4, s1, false, 21);
  SpinConfig sig(4);
  sig << -1, 1, 1, -1;
  CHECK(hamiltonian(d1, s1, sig) == doctest::Approx(hamiltonian_minus(d1, s1, sig)).epsilon(1e-14));

  MixtureSpec s2 = MixtureSpec::from_pairs({{2, 0.5}});
  DisorderRealization d2 = sample_disorder(4, s2, false, 22);
  const double ratio = hamiltonian(d2, s2, sig) / hamiltonian_minus(d2, s2, sig);
  CHECK(ratio == doctest::Approx(std::sqrt(5.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("minus covariance is N^2 R^2 / (N+1) for p=2") {
  MixtureSpec s = MixtureSpec::from_pairs({{2, 1.0}});
  const int N = 4;
  SpinConfig s1 = spin_state(0b0110, N), s2 = spin_state(0b1100, N);
  const double r = overlap_of_states(0b0110, 0b1100, N);
  RunningStat prod;
  for (int rep = 0; rep < 4000; ++rep) {
    DisorderRealization d = sample_disorder(N, s, false, 23000 + std::uint64_t(rep));
    prod.add(hamiltonian_minus(d, s, s1) * hamiltonian_minus(d, s, s2));
  }
  CHECK(std::abs(prod.mean() - N * N * r * r / (N + 1)) < 3.0 * prod.stderror());
}

TEST_CASE("all-states evaluation matches the per-configuration path") {
  MixtureSpec s = MixtureSpec::from_pairs({{1, 0.3}, {2, 0.6}, {3, 0.2}});
  DisorderRealization d = sample_disorder(5, s, true, 31);
  ArrayXd h = hamiltonian_mixture_all(d, s) + hamiltonian_pert_all(d);
  ArrayXd hm = hamiltonian_mixture_all(d, s, /*minus=*/true);
  DisorderRealization no_pert = d;
  no_pert.pert.reset();
  for (std::uint32_t st = 0; st < 32; ++st) {
    SpinConfig sigma = spin_state(st, 5);
    CHECK(h[st] == doctest::Approx(hamiltonian(d, s, sigma)).epsilon(1e-10));
    CHECK(hm[st] == doctest::Approx(hamiltonian_minus(no_pert, s, sigma)).epsilon(1e-10));
  }
}

TEST_CASE("perturbation covariance law") {
  // E_g Hpert(s1) Hpert(s2) = N^{-1/4} sum_p 4^{-p} x_p^2 N R^p for fixed x;
  // averaging x_p^2 over U[1,2] gives a 7/3 factor
  const int N = 4;
  MixtureSpec s = MixtureSpec::zero();
  const std::uint32_t a = 0b0011, b = 0b0110;
  const double r = overlap_of_states(a, b, N);
  RunningStat prod;
  for (int rep = 0; rep < 6000; ++rep) {
    DisorderRealization d = sample_disorder(N, s, true, 47000 + std::uint64_t(rep));
    ArrayXd hp = hamiltonian_pert_all(d);
    prod.add(hp[a] * hp[b]);
  }
  double want = 0.0;
  for (int p = 1; p <= kDefaultPertPMax; ++p)
    want += std::pow(4.0, -p) * (7.0 / 3.0) * N * std::pow(r, p);
  want *= std::pow(double(N), -0.25);
  CHECK(std::abs(prod.mean() - want) < 3.0 * prod.stderror());
}

TEST_CASE("x_p parameters are uniform on [1,2]") {
  RunningStat m;
  for (int rep = 0; rep < 500; ++rep) {
    DisorderRealization d =
        sample_disorder(2, MixtureSpec::zero(), true, 91000 + std::uint64_t(rep));
    for (int p = 0; p < d.pert->p_max; ++p) {
      CHECK(d.pert->x[p] >= 1.0);
      CHECK(d.pert->x[p] <= 2.0);
      m.add(d.pert->x[p]);
    }
  }
  CHECK(std::abs(m.mean() - 1.5) < 3.0 * m.stderror());
}

TEST_CASE("Walsh-Hadamard transform is a scaled involution") {
  SplitMix64 g(55);
  ArrayXd x(16);
  for (int i = 0; i < 16; ++i) x[i] = g.next_double() - 0.5;
  ArrayXd y = x;
  walsh_hadamard(y);
  walsh_hadamard(y);
  CHECK(((y / 16.0) - x).abs().maxCoeff() < 1e-14);
}

TEST_SUITE_END();
