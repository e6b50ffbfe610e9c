#pragma once

#include "pspin/common.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace pspin {

// Monte Carlo scalar estimate.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  long n = 0;
};

// Welford accumulator with Chan's parallel merge.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / double(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStat& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) { *this = o; return; }
    const double d = o.mean_ - mean_;
    const long n = n_ + o.n_;
    m2_ += o.m2_ + d * d * double(n_) * double(o.n_) / double(n);
    mean_ += d * double(o.n_) / double(n);
    n_ = n;
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
  double stderror() const { return n_ > 1 ? std::sqrt(variance() / double(n_)) : 0.0; }
  Estimate estimate() const { return {mean(), stderror(), n_}; }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline Estimate estimate_from(const std::vector<double>& vals) {
  RunningStat s;
  for (double v : vals) s.add(v);
  return s.estimate();
}

// Runs fn(i) for i in [0,n) on up to `workers` threads and returns the values
// in index order. Each item must seed its own randomness from its index, so
// the result is independent of the worker count.
inline std::vector<double> parallel_map(long n, int workers,
                                        const std::function<double(long)>& fn) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) out[std::size_t(i)] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  const int nt = std::min<long>(workers, n);
  pool.reserve(std::size_t(nt));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        out[std::size_t(i)] = fn(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace pspin
