#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "afrf/augment.hpp"
#include "afrf/basis.hpp"
#include "afrf/dataio.hpp"
#include "afrf/fpca.hpp"

namespace afrf {

struct FeatureOptions {
  int n_basis = 0;  // 0 selects resolve_n_basis
  int order = 4;
  int k = 10;
  int r_max = 2;
  FeatureSource source = FeatureSource::Fpc;

  void validate() const;
};

// Explicit n_basis, or max(20, K + r_max) for FPC features (20 for spline
// features) so every derivative space holds K functions, capped at T - order.
int resolve_n_basis(const FeatureOptions& options, Eigen::Index series_length);

/// Train-fitted curve-to-feature transform: smoothing basis and FPCA models
/// per derivative order, applied unchanged to new curves.
struct FeatureMap {
  FeatureOptions options;  // n_basis resolved
  BasisSystem basis;
  Eigen::VectorXd domain;
  std::vector<FpcaModel> models;  // models[r] for r = 0..r_max (empty for splines)
  std::vector<std::string> class_names;

  static FeatureMap fit(const CurveSet& train, const FeatureOptions& options);

  SmoothedSet smooth(const CurveSet& curves) const;

  // Uses the first k components of orders 0..r_max, both bounded by the fit.
  AugmentedFeatures transform(const CurveSet& curves, int k, int r_max) const;
  AugmentedFeatures transform(const CurveSet& curves) const {
    return transform(curves, options.k, options.r_max);
  }
};

}  // namespace afrf
