#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "afrf/dataio.hpp"

namespace afrf {

/// B-spline basis of a given order (degree + 1) over a knot vector on [0, 1].
///
/// Built either as a clamped basis with equally spaced interior knots, or as
/// the derivative space of another basis (same interior knots, lower order).
class BasisSystem {
 public:
  // Empty placeholder (no functions); assign a real basis before use.
  BasisSystem() = default;

  // General constructor; knots must be non-decreasing on [0, 1] with
  // endpoint multiplicity == order.
  BasisSystem(int order, std::vector<double> knots);

  // Clamped basis with n_basis - order equally spaced interior knots.
  static BasisSystem clamped(int n_basis, int order);

  int order() const { return order_; }
  int size() const { return order_ == 0 ? 0 : static_cast<int>(knots_.size()) - order_; }
  std::span<const double> knots() const { return knots_; }
  int interior_knots() const { return size() - order_; }

  // Space holding the r-th derivative: order - r over knots trimmed by r.
  BasisSystem derivative(int r) const;

  // grid.size() x size() matrix of phi_s^(deriv)(t_j); t must lie in [0, 1].
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& grid, int deriv = 0) const;

  // W_jl = integral of phi_j^(deriv) phi_l^(deriv) over [0, 1], by
  // Gauss-Legendre quadrature exact for the span-wise polynomial product.
  Eigen::MatrixXd gram(int deriv = 0) const;

  bool operator==(const BasisSystem& other) const = default;

 private:
  int find_span(double t) const;
  // ders(d, j) = d-th derivative of the j-th nonzero function at t.
  void basis_derivatives(int span, double t, int n_derivs, Eigen::MatrixXd& ders) const;

  int order_ = 0;
  std::vector<double> knots_;
};

BasisSystem build_basis(int n_basis, int order = 4);

Eigen::MatrixXd eval_basis(const BasisSystem& basis, const Eigen::VectorXd& grid,
                           int deriv = 0);

Eigen::MatrixXd gram_matrix(const BasisSystem& basis, int deriv = 0);

// min(20, T - order), never below order.
int default_n_basis(Eigen::Index series_length, int order = 4);

/// Curves expressed as spline coefficients: x_i(t) = sum_s coeffs(i, s) phi_s(t).
struct SmoothedSet {
  BasisSystem basis;
  Eigen::MatrixXd coeffs;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  Eigen::Index size() const { return coeffs.rows(); }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  // Fitted curves on `grid`, one row per curve.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& grid, int deriv = 0) const;
};

/// Least-squares projection onto a basis for one sampling grid. The QR
/// factorization of the design matrix is computed once and reused for every
/// curve smoothed through this object.
class Smoother {
 public:
  Smoother(BasisSystem basis, Eigen::VectorXd domain);

  const BasisSystem& basis() const { return basis_; }
  const Eigen::VectorXd& domain() const { return domain_; }

  // N x T observations -> N x S coefficients.
  Eigen::MatrixXd fit(const Eigen::MatrixXd& values) const;

  SmoothedSet smooth(const CurveSet& curves) const;

 private:
  BasisSystem basis_;
  Eigen::VectorXd domain_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

SmoothedSet smooth(const CurveSet& curves, const BasisSystem& basis);

// Exact coefficients of the r-th derivative in basis.derivative(r).
Eigen::MatrixXd derivative_coeffs(const BasisSystem& basis,
                                  const Eigen::MatrixXd& coeffs, int r);

// The r-th derivatives of the curves in `set` as a SmoothedSet over the
// reduced-order basis; r == 0 returns a copy.
SmoothedSet derive_coeffs(const SmoothedSet& set, int r);

}  // namespace afrf
