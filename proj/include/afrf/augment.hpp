#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "afrf/basis.hpp"
#include "afrf/dataio.hpp"
#include "afrf/fpca.hpp"

namespace afrf {

enum class FeatureSource { Fpc, Spline };

/// Provenance of one feature column: component (FPC index or spline index,
/// 1-based) and derivative order.
struct ColumnMeta {
  int component = 1;
  int deriv = 0;
  FeatureSource source = FeatureSource::Fpc;

  // FPC_k / FPCd_k / FPCd2_k for scores, B_k / Bd_k / Bd2_k for splines.
  std::string name() const;

  bool operator==(const ColumnMeta&) const = default;
};

/// Feature matrix fed to trees, with column provenance and the correlated
/// groups G_k (same component across derivative orders).
struct AugmentedFeatures {
  Eigen::MatrixXd matrix;
  std::vector<ColumnMeta> columns;
  std::vector<int> labels;
  int n_classes = 0;
  std::vector<std::vector<int>> groups;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }

  // Columns of derivative order r, in component order.
  std::vector<int> block(int r) const;

  // Index of the group containing `column`.
  int group_of(int column) const;

  // Throws ValidationError when layout, metadata or groups disagree.
  void validate() const;
};

// Groups columns by component; every column lands in exactly one group.
std::vector<std::vector<int>> component_groups(std::span<const ColumnMeta> columns);

/// Score blocks r = 0..r_max, K columns each, from per-order FPCA models
/// (models[r] has deriv_order r). r_max = 0 gives the plain score matrix.
AugmentedFeatures build_augmented(std::span<const FpcaModel> models, const SmoothedSet& set,
                                  int k, int r_max);

// Spline-coefficient blocks C^(0) .. C^(r_max); block r has S - r columns.
AugmentedFeatures build_augmented_spline(const SmoothedSet& set, int r_max);

// Features as a table with one column per feature, then the label.
Table features_table(const AugmentedFeatures& features,
                     std::span<const std::string> class_names = {});

}  // namespace afrf
