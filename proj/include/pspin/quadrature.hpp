#pragma once

#include "pspin/common.hpp"

#include <Eigen/Eigenvalues>

namespace pspin {

// Gauss-Hermite rule normalized against the standard Gaussian density:
//   sum_i w_i f(x_i) ~ E f(Z), Z ~ N(0,1),
// exact for polynomials of degree < 2n. Built by Golub-Welsch on the
// probabilists' Hermite three-term recurrence.
struct QuadratureGrid {
  VectorXd nodes;
  VectorXd weights;

  int size() const { return int(nodes.size()); }

  static QuadratureGrid gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
    VectorXd diag = VectorXd::Zero(n);
    VectorXd sub(std::max(0, n - 1));
    for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(double(i));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
      throw numerical_error("gauss_hermite: tridiagonal eigensolve failed");
    QuadratureGrid g;
    g.nodes = es.eigenvalues();
    // weights are squared first components of the orthonormal eigenvectors;
    // they sum to 1 exactly (row of an orthogonal matrix)
    g.weights = es.eigenvectors().row(0).transpose().array().square();
    return g;
  }
};

}  // namespace pspin
