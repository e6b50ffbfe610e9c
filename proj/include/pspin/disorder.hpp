#pragma once

#include "pspin/mixture.hpp"
#include "pspin/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pspin {

using SpinConfig = Eigen::VectorXi;  // entries in {-1,+1}

// Enumeration convention: state s in [0, 2^N) has sigma_i = +1 when bit i of
// s is clear. chi_S(sigma(s)) = (-1)^popcount(s & S).
inline SpinConfig spin_state(std::uint32_t s, int N) {
  SpinConfig sigma(N);
  for (int i = 0; i < N; ++i) sigma[i] = (s >> i) & 1u ? -1 : +1;
  return sigma;
}

inline double overlap_of_states(std::uint32_t s1, std::uint32_t s2, int N) {
  return double(N - 2 * popcount64(s1 ^ s2)) / double(N);
}

// In-place Walsh-Hadamard transform: a[s] <- sum_S a[S] (-1)^popcount(s & S).
inline void walsh_hadamard(ArrayXd& a) {
  const Eigen::Index n = a.size();
  for (Eigen::Index h = 1; h < n; h <<= 1)
    for (Eigen::Index i = 0; i < n; i += h << 1)
      for (Eigen::Index j = i; j < i + h; ++j) {
        const double x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
}

// #{ordered p-tuples over [N] whose odd-multiplicity index set has size s}
//  = p! [x^p] sinh(x)^s cosh(x)^{N-s}; exact in double for N <= 16, p <= 16.
inline double count_odd_tuples(int p, int N, int s) {
  if (s > p || s > N || (p - s) % 2 != 0) return 0.0;
  std::vector<double> poly(std::size_t(p) + 1, 0.0);
  poly[0] = 1.0;
  auto mul_series = [&](bool odd) {
    std::vector<double> factor(std::size_t(p) + 1, 0.0);
    double fact = 1.0;
    for (int j = 0; j <= p; ++j) {
      if (j > 0) fact *= double(j);
      if ((j % 2 == 1) == odd) factor[std::size_t(j)] = 1.0 / fact;
    }
    std::vector<double> out(std::size_t(p) + 1, 0.0);
    for (int a = 0; a <= p; ++a)
      for (int b = 0; a + b <= p; ++b) out[std::size_t(a + b)] += poly[std::size_t(a)] * factor[std::size_t(b)];
    poly.swap(out);
  };
  for (int i = 0; i < s; ++i) mul_series(true);
  for (int i = 0; i < N - s; ++i) mul_series(false);
  double fact = 1.0;
  for (int j = 2; j <= p; ++j) fact *= double(j);
  return poly[std::size_t(p)] * fact;
}

// Dense coupling tensor for one pure p-spin term: N^p i.i.d. standard
// Gaussians over all ordered index tuples, row-major (i_1 slowest).
struct CouplingTensor {
  int p = 0;
  ArrayXd g;
};

// The perturbation field sum_p 2^-p x_p H'_p is sampled in its exact parity
// representation: H'_p(sigma) = N^{-(p-1)/2} sum_S G_S chi_S(sigma) with
// independent G_S ~ N(0, count_odd_tuples(p,N,|S|)). Identical in law to a
// dense tensor draw while needing 2^N coefficients per order instead of N^p.
struct PerturbationProcess {
  int p_max = 0;
  ArrayXd x;                    // x_p ~ U[1,2], i.i.d.
  std::vector<ArrayXd> coeffs;  // per p: 2^N values G_S (unscaled)
};

struct DisorderRealization {
  int N = 0;
  std::vector<CouplingTensor> tensors;  // one per p with beta_p > 0
  std::optional<PerturbationProcess> pert;
  std::uint64_t seed = 0;

  const CouplingTensor* tensor_for(int p) const {
    for (const auto& t : tensors)
      if (t.p == p) return &t;
    return nullptr;
  }
};

inline constexpr int kDefaultPertPMax = 8;
inline constexpr std::int64_t kDefaultTensorBudget = std::int64_t(1) << 24;

inline DisorderRealization sample_disorder(int N, const MixtureSpec& spec, bool pert,
                                           std::uint64_t seed,
                                           std::int64_t tensor_budget = kDefaultTensorBudget,
                                           int pert_p_max = kDefaultPertPMax) {
  if (N < 1) throw std::invalid_argument("sample_disorder: N must be >= 1");
  DisorderRealization d;
  d.N = N;
  d.seed = seed;
  for (int p = 1; p <= spec.p_max(); ++p) {
    if (spec.beta(p) == 0.0) continue;
    double entries = std::pow(double(N), p);
    if (entries > double(tensor_budget))
      throw std::invalid_argument("sample_disorder: N^p exceeds the tensor memory budget");
    CouplingTensor t;
    t.p = p;
    t.g.resize(Eigen::Index(entries));
    SplitMix64 g(derive_seed(seed, 0xc0ac29b7c97c50ddull, std::uint64_t(p)));
    fill_normal(t.g, g);
    d.tensors.push_back(std::move(t));
  }
  if (pert) {
    if (N > 24) throw std::invalid_argument("sample_disorder: perturbation needs N <= 24");
    PerturbationProcess pp;
    pp.p_max = pert_p_max;
    pp.x.resize(pert_p_max);
    SplitMix64 gx(derive_seed(seed, 0x3f84d5b5b5470917ull));
    for (int p = 1; p <= pert_p_max; ++p) pp.x[p - 1] = 1.0 + gx.next_double();
    const std::uint32_t states = 1u << N;
    pp.coeffs.resize(std::size_t(pert_p_max));
    for (int p = 1; p <= pert_p_max; ++p) {
      ArrayXd c = ArrayXd::Zero(states);
      SplitMix64 g(derive_seed(seed, 0x9216d5d98979fb1bull, std::uint64_t(p)));
      std::vector<double> sd_by_size(std::size_t(std::min(p, N)) + 1, 0.0);
      for (int s = 0; s <= std::min(p, N); ++s)
        sd_by_size[std::size_t(s)] = std::sqrt(count_odd_tuples(p, N, s));
      for (std::uint32_t mask = 0; mask < states; ++mask) {
        const int s = popcount64(mask);
        if (s > p || (p - s) % 2 != 0) continue;
        c[mask] = sd_by_size[std::size_t(s)] * sample_normal(g);
      }
      pp.coeffs[std::size_t(p - 1)] = std::move(c);
    }
    d.pert = std::move(pp);
  }
  return d;
}

namespace detail {

// applies fn(mask, g_t) over all ordered tuples of a tensor
template <typename Fn>
inline void for_each_tuple(const CouplingTensor& t, int N, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(t.p), 0);
  std::uint32_t mask = (t.p % 2 == 0) ? 0u : 1u;  // all indices start at 0
  for (Eigen::Index lin = 0;; ++lin) {
    fn(mask, t.g[lin]);
    int j = t.p - 1;
    for (; j >= 0; --j) {
      mask ^= 1u << idx[std::size_t(j)];
      if (++idx[std::size_t(j)] < N) {
        mask ^= 1u << idx[std::size_t(j)];
        break;
      }
      idx[std::size_t(j)] = 0;
      mask ^= 1u;
    }
    if (j < 0) break;
  }
}

inline double pure_term_scale(int p, int N_eff) {
  return std::pow(double(N_eff), -0.5 * double(p - 1));
}

}  // namespace detail

// H_{N,p}(sigma) = N^{-(p-1)/2} sum g sigma... for one configuration, summed
// over the mixture; the minus variant uses the (N+1) scaling with the same
// coupling tensors. The perturbation term N^{-1/8} sum_p 2^-p x_p H'_p is
// added when the realization carries one.
inline double hamiltonian_impl(const DisorderRealization& d, const MixtureSpec& spec,
                               const SpinConfig& sigma, bool minus) {
  if (sigma.size() != d.N) throw std::invalid_argument("hamiltonian: sigma has wrong dimension");
  for (int i = 0; i < d.N; ++i)
    if (sigma[i] != 1 && sigma[i] != -1)
      throw std::invalid_argument("hamiltonian: sigma entries must be +-1");
  std::uint32_t state = 0;
  for (int i = 0; i < d.N; ++i)
    if (sigma[i] < 0) state |= 1u << i;
  const int scale_N = minus ? d.N + 1 : d.N;
  double h = 0.0;
  for (int p = 1; p <= spec.p_max(); ++p) {
    if (spec.beta(p) == 0.0) continue;
    const CouplingTensor* t = d.tensor_for(p);
    if (!t) throw std::invalid_argument("hamiltonian: realization lacks tensor for p with beta_p > 0");
    double acc = 0.0;
    detail::for_each_tuple(*t, d.N, [&](std::uint32_t mask, double g) {
      acc += (popcount64(mask & state) % 2 ? -g : g);
    });
    h += spec.beta(p) * detail::pure_term_scale(p, scale_N) * acc;
  }
  if (d.pert) {
    const auto& pp = *d.pert;
    double hp = 0.0;
    for (int p = 1; p <= pp.p_max; ++p) {
      const ArrayXd& c = pp.coeffs[std::size_t(p - 1)];
      double acc = 0.0;
      for (std::uint32_t mask = 0; mask < std::uint32_t(c.size()); ++mask) {
        if (c[mask] == 0.0) continue;
        acc += (popcount64(mask & state) % 2 ? -c[mask] : c[mask]);
      }
      hp += std::exp2(-p) * pp.x[p - 1] * detail::pure_term_scale(p, d.N) * acc;
    }
    h += std::pow(double(d.N), -0.125) * hp;
  }
  return h;
}

inline double hamiltonian(const DisorderRealization& d, const MixtureSpec& spec,
                          const SpinConfig& sigma) {
  return hamiltonian_impl(d, spec, sigma, false);
}

inline double hamiltonian_minus(const DisorderRealization& d, const MixtureSpec& spec,
                                const SpinConfig& sigma) {
  return hamiltonian_impl(d, spec, sigma, true);
}

// Mixture Hamiltonian on all 2^N states at once: coupling tensors are folded
// into parity coefficients and one Walsh-Hadamard transform evaluates every
// configuration. O(sum_p N^p + N 2^N).
inline ArrayXd hamiltonian_mixture_all(const DisorderRealization& d, const MixtureSpec& spec,
                                       bool minus = false) {
  const std::uint32_t states = 1u << d.N;
  ArrayXd coef = ArrayXd::Zero(states);
  const int scale_N = minus ? d.N + 1 : d.N;
  for (int p = 1; p <= spec.p_max(); ++p) {
    if (spec.beta(p) == 0.0) continue;
    const CouplingTensor* t = d.tensor_for(p);
    if (!t) throw std::invalid_argument("hamiltonian: realization lacks tensor for p with beta_p > 0");
    const double scale = spec.beta(p) * detail::pure_term_scale(p, scale_N);
    detail::for_each_tuple(*t, d.N, [&](std::uint32_t mask, double g) { coef[mask] += scale * g; });
  }
  walsh_hadamard(coef);
  return coef;
}

// Perturbation Hamiltonian on all states (zeros when the realization has none).
inline ArrayXd hamiltonian_pert_all(const DisorderRealization& d) {
  const std::uint32_t states = 1u << d.N;
  ArrayXd coef = ArrayXd::Zero(states);
  if (!d.pert) return coef;
  const auto& pp = *d.pert;
  const double outer = std::pow(double(d.N), -0.125);
  for (int p = 1; p <= pp.p_max; ++p) {
    const double scale = outer * std::exp2(-p) * pp.x[p - 1] * detail::pure_term_scale(p, d.N);
    coef += scale * pp.coeffs[std::size_t(p - 1)];
  }
  walsh_hadamard(coef);
  return coef;
}

}  // namespace pspin
