#pragma once

#include <Eigen/Dense>

#include <vector>

#include "afrf/basis.hpp"

namespace afrf {

/// Functional principal components of the r-th derivative of a sample.
///
/// Everything lives in coefficient space of `basis` (the order-reduced
/// derivative basis): row k of `eigen_coeffs` is xi_k^(r), and inner products
/// go through the Gram matrix `gram`.
struct FpcaModel {
  int deriv_order = 0;
  BasisSystem basis;
  Eigen::VectorXd mean_coeffs;
  Eigen::MatrixXd eigen_coeffs;  // K x S'
  Eigen::VectorXd eigenvalues;   // K, non-increasing
  Eigen::VectorXd spectrum;      // all S' eigenvalues, clamped at 0
  Eigen::MatrixXd gram;

  int n_components() const { return static_cast<int>(eigenvalues.size()); }

  // Trace of the sample covariance operator.
  double total_variance() const { return spectrum.sum(); }

  // grid x K values of xi_1 .. xi_K.
  Eigen::MatrixXd eigenfunctions(const Eigen::VectorXd& grid) const;

  Eigen::VectorXd mean_function(const Eigen::VectorXd& grid) const;
};

/// Scores nu_ik^(r) for one derivative order.
struct ScoreMatrix {
  Eigen::MatrixXd scores;  // N x K
  int deriv_order = 0;
};

// Fits the FPCA of the r-th derivative of `set`; keeps
// K = min(k_max, N - 1, S') components.
FpcaModel fit_fpca(const SmoothedSet& set, int deriv, int k_max);

// Centers by the model's mean and projects onto its eigenfunctions. `set` is
// either in the model's base basis (it is differentiated first) or already in
// the model's derivative basis.
ScoreMatrix score(const FpcaModel& model, const SmoothedSet& set);

// Sum of the first p eigenvalues.
double explained_variance(const FpcaModel& model, int p);

// explained_variance / total_variance.
double explained_variance_fraction(const FpcaModel& model, int p);

}  // namespace afrf
