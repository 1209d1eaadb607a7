#include "afrf/features.hpp"

#include <algorithm>

#include "afrf/error.hpp"

namespace afrf {

void FeatureOptions::validate() const {
  if (order < 2) throw ValidationError("spline order must be >= 2");
  if (r_max < 0) throw ValidationError("r_max must be >= 0");
  if (r_max > order - 2) {
    throw ValidationError("r_max = " + std::to_string(r_max) + " needs spline order >= " +
                          std::to_string(r_max + 2));
  }
  if (k < 1) throw ValidationError("K must be >= 1");
  if (n_basis != 0 && n_basis < order) {
    throw ValidationError("n_basis must be >= spline order (" + std::to_string(order) + ")");
  }
}

int resolve_n_basis(const FeatureOptions& options, Eigen::Index series_length) {
  if (options.n_basis > 0) return options.n_basis;
  int n = options.source == FeatureSource::Fpc ? std::max(20, options.k + options.r_max) : 20;
  n = std::min(n, static_cast<int>(series_length) - options.order);
  return std::max(n, options.order);
}

FeatureMap FeatureMap::fit(const CurveSet& train, const FeatureOptions& options) {
  options.validate();
  train.validate();
  FeatureMap map;
  map.options = options;
  map.options.n_basis = resolve_n_basis(options, train.length());
  map.basis = BasisSystem::clamped(map.options.n_basis, options.order);
  map.domain = train.domain;
  map.class_names = train.class_names;
  if (options.source == FeatureSource::Fpc) {
    const SmoothedSet set = map.smooth(train);
    for (int r = 0; r <= options.r_max; ++r) map.models.push_back(fit_fpca(set, r, options.k));
  }
  return map;
}

SmoothedSet FeatureMap::smooth(const CurveSet& curves) const {
  if (curves.class_names != class_names) {
    throw ValidationError("curves use a different class dictionary than the training set");
  }
  return Smoother(basis, domain).smooth(curves);
}

AugmentedFeatures FeatureMap::transform(const CurveSet& curves, int k, int r_max) const {
  if (r_max < 0 || r_max > options.r_max) {
    throw ValidationError("r_max = " + std::to_string(r_max) + " exceeds the fitted " +
                          std::to_string(options.r_max));
  }
  const SmoothedSet set = smooth(curves);
  if (options.source == FeatureSource::Spline) return build_augmented_spline(set, r_max);
  if (k < 1 || k > options.k) {
    throw ValidationError("K = " + std::to_string(k) + " exceeds the fitted " +
                          std::to_string(options.k));
  }
  return build_augmented(models, set, k, r_max);
}

}  // namespace afrf
