#pragma once

#include "pspin/disorder.hpp"
#include "pspin/overlap.hpp"
#include "pspin/stats.hpp"

#include <vector>

namespace pspin {

inline constexpr int kDefaultEnumerationCap = 16;

namespace detail {
inline void check_enum_cap(int N, int cap, const char* fn) {
  if (N > cap || N > 24)
    throw std::invalid_argument(std::string(fn) + ": N exceeds the enumeration cap");
}
}  // namespace detail

struct FreeEnergyEstimate {
  Estimate est;
  int N = 0;
  long n_disorder = 0;
  bool pert = false;
  bool minus = false;
};

// (1/N) log sum_sigma exp H(sigma) for one realization, exact over all 2^N
// configurations (max-subtracted). Includes the perturbation term when the
// realization carries one.
inline double free_energy_exact(const DisorderRealization& d, const MixtureSpec& spec,
                                bool minus = false, int cap = kDefaultEnumerationCap) {
  detail::check_enum_cap(d.N, cap, "free_energy_exact");
  ArrayXd h = hamiltonian_mixture_all(d, spec, minus);
  if (d.pert) h += hamiltonian_pert_all(d);
  return logsumexp(h) / double(d.N);
}

// Disorder average of free_energy_exact over n i.i.d. realizations.
inline FreeEnergyEstimate free_energy_mc(int N, const MixtureSpec& spec, long n_disorder,
                                         bool pert, bool minus, std::uint64_t seed,
                                         int cap = kDefaultEnumerationCap, int workers = 1) {
  detail::check_enum_cap(N, cap, "free_energy_mc");
  if (n_disorder < 2) throw std::invalid_argument("free_energy_mc: need n_disorder >= 2");
  std::vector<double> vals = parallel_map(n_disorder, workers, [&](long i) {
    DisorderRealization d = sample_disorder(N, spec, pert, derive_seed(seed, 0xb5470917ull, std::uint64_t(i)));
    return free_energy_exact(d, spec, minus, cap);
  });
  return {estimate_from(vals), N, n_disorder, pert, minus};
}

// Normalized Gibbs log-weights over all states for H (+ pert) of one
// realization.
inline ArrayXd gibbs_log_weights(const DisorderRealization& d, const MixtureSpec& spec,
                                 bool minus = false, int cap = kDefaultEnumerationCap) {
  detail::check_enum_cap(d.N, cap, "gibbs_log_weights");
  ArrayXd h = hamiltonian_mixture_all(d, spec, minus);
  if (d.pert) h += hamiltonian_pert_all(d);
  return h - logsumexp(h);
}

namespace detail {
inline std::vector<double> weight_cdf(const ArrayXd& logw) {
  std::vector<double> cdf(static_cast<std::size_t>(logw.size()));
  double acc = 0.0;
  for (Eigen::Index s = 0; s < logw.size(); ++s) {
    acc += std::exp(logw[s]);
    cdf[std::size_t(s)] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

inline std::uint32_t draw_state(const std::vector<double>& cdf, SplitMix64& g) {
  const double u = g.next_double();
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return it == cdf.end() ? std::uint32_t(cdf.size() - 1) : std::uint32_t(it - cdf.begin());
}

inline OverlapArray overlap_from_states(const std::vector<std::uint32_t>& states, int N) {
  const int n = int(states.size());
  MatrixXd r = MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      r(i, j) = r(j, i) = overlap_of_states(states[std::size_t(i)], states[std::size_t(j)], N);
  return OverlapArray(std::move(r));
}
}  // namespace detail

// n i.i.d. replicas from the exact Gibbs measure (categorical sampling over
// the enumerated weights); returns their overlap array.
inline OverlapArray gibbs_sample_replicas(const DisorderRealization& d, const MixtureSpec& spec,
                                          int n_replicas, std::uint64_t seed,
                                          bool minus = false, int cap = kDefaultEnumerationCap) {
  if (n_replicas < 2) throw std::invalid_argument("gibbs_sample_replicas: need >= 2 replicas");
  const ArrayXd logw = gibbs_log_weights(d, spec, minus, cap);
  const auto cdf = detail::weight_cdf(logw);
  SplitMix64 g(derive_seed(seed, 0xbe5466cf34e90c6cull));
  std::vector<std::uint32_t> states(static_cast<std::size_t>(n_replicas));
  for (auto& s : states) s = detail::draw_state(cdf, g);
  return detail::overlap_from_states(states, d.N);
}

// One overlap array per disorder realization: the estimator of E<.> used by
// the diagnostics (fresh couplings, and fresh x_p when pert is on).
inline std::vector<OverlapArray> sample_gibbs_overlap_arrays(int N, const MixtureSpec& spec,
                                                             int n_arrays, int n_replicas,
                                                             bool pert, std::uint64_t seed,
                                                             int cap = kDefaultEnumerationCap) {
  detail::check_enum_cap(N, cap, "sample_gibbs_overlap_arrays");
  std::vector<OverlapArray> out;
  out.reserve(std::size_t(n_arrays));
  for (int a = 0; a < n_arrays; ++a) {
    const std::uint64_t s = derive_seed(seed, 0xf00f9b3c553ull, std::uint64_t(a));
    DisorderRealization d = sample_disorder(N, spec, pert, s);
    out.push_back(gibbs_sample_replicas(d, spec, n_replicas, derive_seed(s, 17), false, cap));
  }
  return out;
}

}  // namespace pspin
