#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "afrf/augment.hpp"
#include "afrf/basis.hpp"
#include "afrf/cart.hpp"
#include "afrf/dataio.hpp"
#include "afrf/random.hpp"

namespace oracle {

inline std::string data_path(const std::string& name) {
  return std::string(AFRF_DATA_DIR) + "/ECG200/" + name;
}

inline afrf::CurveSet ecg_train() { return afrf::load_ucr(data_path("ECG200_TRAIN.tsv")); }

inline afrf::CurveSet ecg_test() {
  const auto train = ecg_train();
  return afrf::load_ucr(data_path("ECG200_TEST.tsv"), train.class_names);
}

// Adaptive-free 61-point Gauss-Kronrod on each [breaks[i], breaks[i+1]].
inline double integrate(const std::function<double(double)>& f, std::span<const double> breaks) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, breaks[i],
                                                                          breaks[i + 1], 0);
  }
  return total;
}

// Distinct knot values: breakpoints where splines lose smoothness.
inline std::vector<double> breakpoints(const afrf::BasisSystem& basis) {
  std::set<double> s(basis.knots().begin(), basis.knots().end());
  return {s.begin(), s.end()};
}

// Value of sum_s coeffs[s] phi_s^(deriv)(t).
inline double spline_at(const afrf::BasisSystem& basis, const Eigen::VectorXd& coeffs, double t,
                        int deriv = 0) {
  Eigen::VectorXd grid(1);
  grid[0] = t;
  return (basis.evaluate(grid, deriv) * coeffs)(0);
}

// Curves: random smooth mixtures of sines plus noise, labels in round robin.
inline afrf::CurveSet random_curves(int n, int t, std::uint64_t seed, int classes = 2) {
  afrf::Rng rng(seed);
  afrf::CurveSet out;
  out.domain = afrf::unit_grid(t);
  out.values.resize(n, t);
  for (int i = 0; i < n; ++i) {
    const double a = afrf::standard_normal(rng);
    const double b = afrf::standard_normal(rng);
    const double c = afrf::uniform_real(rng, 0.5, 3.0);
    for (int j = 0; j < t; ++j) {
      const double x = out.domain[j];
      out.values(i, j) = a * std::sin(c * x * 3.0) + b * x * x + 0.1 * afrf::standard_normal(rng);
    }
    out.labels.push_back(i % classes);
  }
  for (int c = 0; c < classes; ++c) out.class_names.push_back(std::to_string(c));
  return out;
}

// Plain features: column j is component j + 1 at order 0 (singleton groups).
inline afrf::AugmentedFeatures plain_features(const Eigen::MatrixXd& x, std::vector<int> labels,
                                              int n_classes) {
  afrf::AugmentedFeatures f;
  f.matrix = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    f.columns.push_back({static_cast<int>(j) + 1, 0, afrf::FeatureSource::Fpc});
  }
  f.labels = std::move(labels);
  f.n_classes = n_classes;
  f.groups = afrf::component_groups(f.columns);
  return f;
}

inline std::vector<int> all_rows(Eigen::Index n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return rows;
}

struct SplitInstance {
  Eigen::MatrixXd x;
  std::vector<int> y;
  int n_classes = 2;
};

// Random instance of at most 10 rows x 6 columns; values on a coarse lattice
// so that ties and duplicate rows are common.
inline SplitInstance random_split_instance(afrf::Rng& rng) {
  const int n = 2 + static_cast<int>(afrf::uniform_index(rng, 9));
  const int p = 1 + static_cast<int>(afrf::uniform_index(rng, 6));
  SplitInstance inst{Eigen::MatrixXd(n, p), std::vector<int>(static_cast<std::size_t>(n)),
                     2 + static_cast<int>(afrf::uniform_index(rng, 2))};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      inst.x(i, j) = static_cast<double>(afrf::uniform_index(rng, 5)) * 0.5;
    }
    inst.y[static_cast<std::size_t>(i)] =
        static_cast<int>(afrf::uniform_index(rng, static_cast<std::size_t>(inst.n_classes)));
  }
  return inst;
}

// Exhaustive split search: every (column, midpoint) pair partitioned from
// scratch. Same tie rule as the implementation: scan columns and thresholds
// ascending and keep the first maximum.
inline std::optional<afrf::Split> brute_force_split(const Eigen::MatrixXd& x,
                                                    const std::vector<int>& y, int n_classes,
                                                    const std::vector<int>& rows,
                                                    std::vector<int> cols, afrf::Impurity kind,
                                                    int min_leaf) {
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  std::vector<int> parent(static_cast<std::size_t>(n_classes), 0);
  for (const int r : rows) ++parent[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  if (rows.size() < 2 || *std::max_element(parent.begin(), parent.end()) ==
                             static_cast<int>(rows.size())) {
    return std::nullopt;
  }
  const double parent_imp = afrf::impurity(parent, kind);
  const double n = static_cast<double>(rows.size());
  std::optional<afrf::Split> best;
  double best_gain = 1e-12;
  for (const int c : cols) {
    std::set<double> distinct;
    for (const int r : rows) distinct.insert(x(r, c));
    std::vector<double> v(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      double thr = 0.5 * (v[i] + v[i + 1]);
      if (!(thr > v[i])) thr = v[i + 1];
      std::vector<int> left(static_cast<std::size_t>(n_classes), 0);
      std::vector<int> right(static_cast<std::size_t>(n_classes), 0);
      int nl = 0;
      for (const int r : rows) {
        if (x(r, c) < thr) {
          ++left[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
          ++nl;
        } else {
          ++right[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
        }
      }
      const int nr = static_cast<int>(rows.size()) - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double gain =
          parent_imp - (nl * afrf::impurity(left, kind) + nr * afrf::impurity(right, kind)) / n;
      if (gain > best_gain) {
        best_gain = gain;
        best = afrf::Split{c, thr, gain};
      }
    }
  }
  return best;
}

}  // namespace oracle
