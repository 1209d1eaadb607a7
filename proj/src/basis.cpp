#include "afrf/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afrf/error.hpp"

namespace afrf {
namespace {

struct QuadratureRule {
  std::vector<double> nodes;  // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n.
QuadratureRule gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

}  // namespace

BasisSystem::BasisSystem(int order, std::vector<double> knots)
    : order_(order), knots_(std::move(knots)) {
  if (order_ < 1) throw ValidationError("spline order must be >= 1");
  if (static_cast<int>(knots_.size()) < 2 * order_) {
    throw ValidationError("knot vector too short for order " + std::to_string(order_));
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i] < knots_[i - 1]) throw ValidationError("knots must be non-decreasing");
  }
  for (int i = 0; i < order_; ++i) {
    if (knots_[static_cast<std::size_t>(i)] != 0.0 ||
        knots_[knots_.size() - 1 - static_cast<std::size_t>(i)] != 1.0) {
      throw ValidationError("knot vector must be clamped on [0, 1]");
    }
  }
}

BasisSystem BasisSystem::clamped(int n_basis, int order) {
  if (order < 1) throw ValidationError("spline order must be >= 1");
  if (n_basis < order) {
    throw ValidationError("n_basis (" + std::to_string(n_basis) +
                          ") must be >= order (" + std::to_string(order) + ")");
  }
  const int interior = n_basis - order;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(n_basis + order));
  knots.insert(knots.end(), static_cast<std::size_t>(order), 0.0);
  for (int i = 1; i <= interior; ++i) {
    knots.push_back(static_cast<double>(i) / (interior + 1));
  }
  knots.insert(knots.end(), static_cast<std::size_t>(order), 1.0);
  return BasisSystem(order, std::move(knots));
}

BasisSystem BasisSystem::derivative(int r) const {
  if (r < 0 || r > order_ - 1) {
    throw ValidationError("derivative order " + std::to_string(r) +
                          " not representable by an order-" + std::to_string(order_) +
                          " spline");
  }
  if (r == 0) return *this;
  std::vector<double> knots(knots_.begin() + r, knots_.end() - r);
  return BasisSystem(order_ - r, std::move(knots));
}

int BasisSystem::find_span(double t) const {
  const int n = size() - 1;
  if (t >= knots_[static_cast<std::size_t>(n + 1)]) return n;
  // Last index i with knots[i] <= t, restricted to [order - 1, n].
  const auto it = std::upper_bound(knots_.begin() + (order_ - 1),
                                   knots_.begin() + (n + 1), t);
  return static_cast<int>(it - knots_.begin()) - 1;
}

void BasisSystem::basis_derivatives(int span, double t, int n_derivs,
                                    Eigen::MatrixXd& ders) const {
  // Cox-de Boor triangle plus the derivative recurrence (Piegl & Tiller A2.3).
  const int p = order_ - 1;
  const auto U = [this](int i) { return knots_[static_cast<std::size_t>(i)]; };

  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1);
  Eigen::VectorXd right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - U(span + 1 - j);
    right[j] = U(span + j) - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  ders = Eigen::MatrixXd::Zero(n_derivs + 1, p + 1);
  ders.row(0) = ndu.col(p).transpose();
  const int top = std::min(n_derivs, p);
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= top; ++k) {
    ders.row(k) *= factor;
    factor *= (p - k);
  }
}

Eigen::MatrixXd BasisSystem::evaluate(const Eigen::VectorXd& grid, int deriv) const {
  if (deriv < 0) throw ValidationError("derivative order must be >= 0");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(grid.size(), size());
  if (deriv >= order_) return out;
  Eigen::MatrixXd ders;
  const int p = order_ - 1;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ValidationError("evaluation point " + format_double(t) + " outside [0, 1]");
    }
    const int span = find_span(t);
    basis_derivatives(span, t, deriv, ders);
    out.block(j, span - p, 1, p + 1) = ders.row(deriv);
  }
  return out;
}

Eigen::MatrixXd BasisSystem::gram(int deriv) const {
  const int S = size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(S, S);
  if (deriv >= order_) return w;
  const auto rule = gauss_legendre(order_);
  const int p = order_ - 1;
  Eigen::MatrixXd ders;
  for (int span = p; span < S; ++span) {
    const double lo = knots_[static_cast<std::size_t>(span)];
    const double hi = knots_[static_cast<std::size_t>(span + 1)];
    if (hi <= lo) continue;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = mid + half * rule.nodes[q];
      basis_derivatives(span, t, deriv, ders);
      const Eigen::RowVectorXd v = ders.row(deriv);
      w.block(span - p, span - p, p + 1, p + 1) +=
          (half * rule.weights[q]) * (v.transpose() * v);
    }
  }
  return 0.5 * (w + w.transpose());
}

BasisSystem build_basis(int n_basis, int order) {
  return BasisSystem::clamped(n_basis, order);
}

Eigen::MatrixXd eval_basis(const BasisSystem& basis, const Eigen::VectorXd& grid,
                           int deriv) {
  return basis.evaluate(grid, deriv);
}

Eigen::MatrixXd gram_matrix(const BasisSystem& basis, int deriv) {
  return basis.gram(deriv);
}

int default_n_basis(Eigen::Index series_length, int order) {
  const auto s = std::min<Eigen::Index>(20, series_length - order);
  return static_cast<int>(std::max<Eigen::Index>(s, order));
}

Eigen::MatrixXd SmoothedSet::evaluate(const Eigen::VectorXd& grid, int deriv) const {
  return coeffs * basis.evaluate(grid, deriv).transpose();
}

Smoother::Smoother(BasisSystem basis, Eigen::VectorXd domain)
    : basis_(std::move(basis)), domain_(std::move(domain)) {
  if (domain_.size() < basis_.size()) {
    throw ValidationError("series length " + std::to_string(domain_.size()) +
                          " is below n_basis " + std::to_string(basis_.size()) +
                          "; lower n_basis");
  }
  qr_.compute(basis_.evaluate(domain_, 0));
  if (qr_.rank() < basis_.size()) {
    throw ValidationError("smoothing design matrix has rank " + std::to_string(qr_.rank()) +
                          " < n_basis " + std::to_string(basis_.size()) +
                          "; lower n_basis");
  }
}

Eigen::MatrixXd Smoother::fit(const Eigen::MatrixXd& values) const {
  if (values.cols() != domain_.size()) {
    throw ValidationError("curve length does not match the smoother's grid");
  }
  return qr_.solve(values.transpose()).transpose();
}

SmoothedSet Smoother::smooth(const CurveSet& curves) const {
  if (curves.domain.size() != domain_.size() || curves.domain != domain_) {
    throw ValidationError("curves are sampled on a different grid than the smoother");
  }
  return SmoothedSet{basis_, fit(curves.values), curves.labels, curves.class_names};
}

SmoothedSet smooth(const CurveSet& curves, const BasisSystem& basis) {
  curves.validate();
  return Smoother(basis, curves.domain).smooth(curves);
}

Eigen::MatrixXd derivative_coeffs(const BasisSystem& basis, const Eigen::MatrixXd& coeffs,
                                  int r) {
  if (r < 0 || r > basis.order() - 2) {
    throw ValidationError("derivative order " + std::to_string(r) +
                          " requires spline order >= " + std::to_string(r + 2));
  }
  if (coeffs.cols() != basis.size()) {
    throw ValidationError("coefficient width does not match the basis");
  }
  Eigen::MatrixXd current = coeffs;
  const auto knots = basis.knots();
  for (int step = 0; step < r; ++step) {
    // Knots of the current space are knots[step .. end - step).
    const int p = basis.order() - 1 - step;
    const Eigen::Index n = current.cols();
    Eigen::MatrixXd next(current.rows(), n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double span = knots[static_cast<std::size_t>(step + i + p + 1)] -
                          knots[static_cast<std::size_t>(step + i + 1)];
      if (span > 0.0) {
        next.col(i) = (p / span) * (current.col(i + 1) - current.col(i));
      } else {
        next.col(i).setZero();
      }
    }
    current = std::move(next);
  }
  return current;
}

SmoothedSet derive_coeffs(const SmoothedSet& set, int r) {
  return SmoothedSet{set.basis.derivative(r), derivative_coeffs(set.basis, set.coeffs, r),
                     set.labels, set.class_names};
}

}  // namespace afrf
