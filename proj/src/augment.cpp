#include "afrf/augment.hpp"

#include <algorithm>
#include <map>

#include "afrf/error.hpp"

namespace afrf {

std::string ColumnMeta::name() const {
  const std::string prefix = source == FeatureSource::Fpc ? "FPC" : "B";
  std::string suffix;
  if (deriv == 1) suffix = "d";
  if (deriv >= 2) suffix = "d" + std::to_string(deriv);
  return prefix + suffix + "_" + std::to_string(component);
}

std::vector<int> AugmentedFeatures::block(int r) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].deriv == r) out.push_back(static_cast<int>(j));
  }
  return out;
}

int AugmentedFeatures::group_of(int column) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::find(groups[g].begin(), groups[g].end(), column) != groups[g].end()) {
      return static_cast<int>(g);
    }
  }
  throw ValidationError("column " + std::to_string(column) + " belongs to no group");
}

void AugmentedFeatures::validate() const {
  if (static_cast<Eigen::Index>(columns.size()) != matrix.cols()) {
    throw ValidationError("column metadata does not match feature width");
  }
  if (static_cast<Eigen::Index>(labels.size()) != matrix.rows()) {
    throw ValidationError("label count does not match feature rows");
  }
  std::vector<int> seen(columns.size(), 0);
  for (const auto& group : groups) {
    for (const int c : group) {
      if (c < 0 || c >= static_cast<int>(columns.size())) {
        throw ValidationError("group references column " + std::to_string(c));
      }
      ++seen[static_cast<std::size_t>(c)];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int n) { return n != 1; })) {
    throw ValidationError("groups must partition the feature columns");
  }
}

std::vector<std::vector<int>> component_groups(std::span<const ColumnMeta> columns) {
  std::map<int, std::vector<int>> by_component;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    by_component[columns[j].component].push_back(static_cast<int>(j));
  }
  std::vector<std::vector<int>> groups;
  groups.reserve(by_component.size());
  for (auto& entry : by_component) groups.push_back(std::move(entry.second));
  return groups;
}

AugmentedFeatures build_augmented(std::span<const FpcaModel> models, const SmoothedSet& set,
                                  int k, int r_max) {
  if (r_max < 0) throw ValidationError("r_max must be >= 0");
  if (k < 1) throw ValidationError("K must be >= 1");
  std::vector<const FpcaModel*> by_order(static_cast<std::size_t>(r_max + 1), nullptr);
  for (const auto& m : models) {
    if (m.deriv_order >= 0 && m.deriv_order <= r_max) {
      by_order[static_cast<std::size_t>(m.deriv_order)] = &m;
    }
  }
  AugmentedFeatures out;
  out.matrix.resize(set.size(), static_cast<Eigen::Index>(k) * (r_max + 1));
  for (int r = 0; r <= r_max; ++r) {
    const FpcaModel* model = by_order[static_cast<std::size_t>(r)];
    if (model == nullptr) {
      throw ValidationError("no FPCA model for derivative order " + std::to_string(r));
    }
    if (model->n_components() < k) {
      throw ValidationError("K = " + std::to_string(k) + " exceeds the " +
                            std::to_string(model->n_components()) +
                            " components available at derivative order " + std::to_string(r));
    }
    const ScoreMatrix scores = score(*model, set);
    out.matrix.middleCols(static_cast<Eigen::Index>(r) * k, k) = scores.scores.leftCols(k);
    for (int c = 1; c <= k; ++c) out.columns.push_back({c, r, FeatureSource::Fpc});
  }
  out.labels = set.labels;
  out.n_classes = set.n_classes();
  out.groups = component_groups(out.columns);
  return out;
}

AugmentedFeatures build_augmented_spline(const SmoothedSet& set, int r_max) {
  if (r_max < 0) throw ValidationError("r_max must be >= 0");
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index width = 0;
  for (int r = 0; r <= r_max; ++r) {
    blocks.push_back(r == 0 ? set.coeffs : derivative_coeffs(set.basis, set.coeffs, r));
    width += blocks.back().cols();
  }
  AugmentedFeatures out;
  out.matrix.resize(set.size(), width);
  Eigen::Index offset = 0;
  for (int r = 0; r <= r_max; ++r) {
    const auto& b = blocks[static_cast<std::size_t>(r)];
    out.matrix.middleCols(offset, b.cols()) = b;
    offset += b.cols();
    for (Eigen::Index c = 1; c <= b.cols(); ++c) {
      out.columns.push_back({static_cast<int>(c), r, FeatureSource::Spline});
    }
  }
  out.labels = set.labels;
  out.n_classes = set.n_classes();
  out.groups = component_groups(out.columns);
  return out;
}

Table features_table(const AugmentedFeatures& features,
                     std::span<const std::string> class_names) {
  std::vector<std::string> header;
  for (const auto& c : features.columns) header.push_back(c.name());
  header.push_back("label");
  Table table(std::move(header));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    std::vector<Table::Cell> row;
    row.reserve(features.columns.size() + 1);
    for (Eigen::Index j = 0; j < features.cols(); ++j) row.emplace_back(features.matrix(i, j));
    const int y = features.labels[static_cast<std::size_t>(i)];
    if (!class_names.empty()) {
      row.emplace_back(class_names[static_cast<std::size_t>(y)]);
    } else {
      row.emplace_back(static_cast<std::int64_t>(y));
    }
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace afrf
