#include "afrf/fpca.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "afrf/error.hpp"

namespace afrf {
namespace {

constexpr double kNegativeEigenvalueTolerance = 1e-10;

// Coefficients of the r-th derivative of `set` in model.basis.
Eigen::MatrixXd coeffs_in_model_basis(const FpcaModel& model, const SmoothedSet& set) {
  if (set.basis == model.basis) return set.coeffs;
  if (model.deriv_order >= 1 && set.basis.order() - model.deriv_order >= 2 &&
      set.basis.derivative(model.deriv_order) == model.basis) {
    return derivative_coeffs(set.basis, set.coeffs, model.deriv_order);
  }
  throw ValidationError("curves use a basis incompatible with the FPCA model");
}

}  // namespace

Eigen::MatrixXd FpcaModel::eigenfunctions(const Eigen::VectorXd& grid) const {
  return basis.evaluate(grid, 0) * eigen_coeffs.transpose();
}

Eigen::VectorXd FpcaModel::mean_function(const Eigen::VectorXd& grid) const {
  return basis.evaluate(grid, 0) * mean_coeffs;
}

FpcaModel fit_fpca(const SmoothedSet& set, int deriv, int k_max) {
  if (k_max < 1) throw ValidationError("number of components must be >= 1");
  if (set.size() < 2) throw ValidationError("FPCA needs at least 2 curves");

  FpcaModel model;
  model.deriv_order = deriv;
  model.basis = set.basis.derivative(deriv);
  const Eigen::MatrixXd coeffs =
      deriv == 0 ? set.coeffs : derivative_coeffs(set.basis, set.coeffs, deriv);
  const Eigen::Index n = coeffs.rows();
  const Eigen::Index s = coeffs.cols();

  model.mean_coeffs = coeffs.colwise().mean().transpose();
  const Eigen::MatrixXd centered = coeffs.rowwise() - model.mean_coeffs.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  model.gram = model.basis.gram(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(model.gram);
  if (gram_eig.info() != Eigen::Success ||
      gram_eig.eigenvalues().minCoeff() <= 1e-14 * gram_eig.eigenvalues().maxCoeff()) {
    throw NumericError("Gram matrix is numerically singular");
  }
  const Eigen::VectorXd root = gram_eig.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd& q = gram_eig.eigenvectors();
  const Eigen::MatrixXd w_half = q * root.asDiagonal() * q.transpose();
  const Eigen::MatrixXd w_inv_half = q * root.cwiseInverse().asDiagonal() * q.transpose();

  // Variance maximization under the L2 constraint: with b = W^{-1/2} u the
  // problem becomes the ordinary symmetric eigenproblem below.
  Eigen::MatrixXd operator_matrix = w_half * cov * w_half;
  operator_matrix = 0.5 * (operator_matrix + operator_matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(operator_matrix);
  if (eig.info() != Eigen::Success) throw NumericError("FPCA eigensolver failed");

  // Eigen returns ascending order.
  const Eigen::VectorXd ascending = eig.eigenvalues();
  if (ascending.minCoeff() < -kNegativeEigenvalueTolerance * std::max(1.0, ascending.maxCoeff())) {
    throw NumericError("covariance operator has a negative eigenvalue");
  }
  model.spectrum = ascending.reverse().cwiseMax(0.0);

  const Eigen::Index k = std::min<Eigen::Index>({k_max, n - 1, s});
  model.eigenvalues = model.spectrum.head(k);
  model.eigen_coeffs.resize(k, s);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd b = w_inv_half * eig.eigenvectors().col(s - 1 - c);
    Eigen::Index arg = 0;
    b.cwiseAbs().maxCoeff(&arg);
    if (b[arg] < 0) b = -b;
    model.eigen_coeffs.row(c) = b.transpose();
  }
  return model;
}

ScoreMatrix score(const FpcaModel& model, const SmoothedSet& set) {
  const Eigen::MatrixXd coeffs = coeffs_in_model_basis(model, set);
  const Eigen::MatrixXd centered = coeffs.rowwise() - model.mean_coeffs.transpose();
  return ScoreMatrix{centered * model.gram * model.eigen_coeffs.transpose(), model.deriv_order};
}

double explained_variance(const FpcaModel& model, int p) {
  if (p < 1 || p > model.n_components()) {
    throw ValidationError("component count " + std::to_string(p) + " outside 1.." +
                          std::to_string(model.n_components()));
  }
  return model.eigenvalues.head(p).sum();
}

double explained_variance_fraction(const FpcaModel& model, int p) {
  const double total = model.total_variance();
  const double part = explained_variance(model, p);
  return total > 0.0 ? part / total : 0.0;
}

}  // namespace afrf
