#pragma once

#include "pspin/common.hpp"

#include <utility>

namespace pspin {

// Replica-symmetry-breaking parameters: k levels with
//   0 = m_0 <= m_1 <= ... <= m_k <= 1
//   0 = q_0 <= q_1 <= ... <= q_k <= q_{k+1} = 1.
// The boundary values m_0, q_0, q_{k+1} are implicit.
struct RSBParams {
  int k = 0;
  VectorXd m;  // m_1..m_k
  VectorXd q;  // q_1..q_k

  RSBParams() = default;
  RSBParams(VectorXd m_in, VectorXd q_in)
      : k(int(m_in.size())), m(std::move(m_in)), q(std::move(q_in)) {
    validate();
  }

  void validate() const {
    if (k < 1) throw std::invalid_argument("rsb: k must be >= 1");
    if (m.size() != k || q.size() != k)
      throw std::invalid_argument("rsb: m and q must both have k entries");
    double prev = 0.0;
    for (int j = 0; j < k; ++j) {
      if (!(m[j] >= prev && m[j] <= 1.0))
        throw std::invalid_argument("rsb: m must be nondecreasing in [0,1]");
      prev = m[j];
    }
    prev = 0.0;
    for (int j = 0; j < k; ++j) {
      if (!(q[j] >= prev && q[j] <= 1.0))
        throw std::invalid_argument("rsb: q must be nondecreasing in [0,1]");
      prev = q[j];
    }
  }

  // m_l with the m_0 = 0 convention, l in [0,k]
  double m_at(int l) const { return l == 0 ? 0.0 : m[l - 1]; }
  // q_j with q_0 = 0, q_{k+1} = 1, j in [0,k+1]
  double q_at(int j) const {
    if (j == 0) return 0.0;
    if (j == k + 1) return 1.0;
    return q[j - 1];
  }
};

// Inserts a copy of level j (1-based): both m_j and q_j are repeated. The new
// level has zero variance increment, so every evaluation collapses it and the
// embedded point has identical value at k+1 levels.
inline RSBParams duplicate_level(const RSBParams& p, int j) {
  if (j < 1 || j > p.k) throw std::invalid_argument("duplicate_level: j out of range");
  VectorXd m(p.k + 1), q(p.k + 1);
  for (int i = 0, o = 0; i < p.k; ++i) {
    m[o] = p.m[i];
    q[o] = p.q[i];
    ++o;
    if (i == j - 1) {
      m[o] = p.m[i];
      q[o] = p.q[i];
      ++o;
    }
  }
  return RSBParams(std::move(m), std::move(q));
}

// Splits the variance increment of level j by inserting q_new in
// [q_j, q_{j+1}] while repeating m_j; Gaussian additivity makes this a
// value-preserving embedding as well.
inline RSBParams split_level(const RSBParams& p, int j, double q_new) {
  if (j < 1 || j > p.k) throw std::invalid_argument("split_level: j out of range");
  if (!(q_new >= p.q_at(j) && q_new <= p.q_at(j + 1)))
    throw std::invalid_argument("split_level: q_new outside [q_j, q_{j+1}]");
  VectorXd m(p.k + 1), q(p.k + 1);
  for (int i = 0, o = 0; i < p.k; ++i) {
    m[o] = p.m[i];
    q[o] = p.q[i];
    ++o;
    if (i == j - 1) {  // insert (m_j, q_new) after level j
      m[o] = p.m[i];
      q[o] = q_new;
      ++o;
    }
  }
  return RSBParams(std::move(m), std::move(q));
}

}  // namespace pspin
