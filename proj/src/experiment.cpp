#include "afrf/experiment.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "afrf/error.hpp"
#include "afrf/random.hpp"
#include "afrf/simgen.hpp"

namespace afrf {
namespace {

double quantile7(std::vector<double> sorted, double p) {
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

bool matches(const GridRecord& r, const std::string& method, const std::string& dataset) {
  return r.method == method && (dataset.empty() || r.dataset == dataset);
}

}  // namespace

void GridConfig::validate() const {
  if (trees.empty() || ks.empty()) throw ValidationError("benchmark grid is empty");
  if (std::any_of(trees.begin(), trees.end(), [](int h) { return h < 1; })) {
    throw ValidationError("forest sizes must be >= 1");
  }
  if (std::any_of(ks.begin(), ks.end(), [](int k) { return k < 1; })) {
    throw ValidationError("component counts must be >= 1");
  }
  if (replicates < 1) throw ValidationError("replicate count must be >= 1");
  if (afrf_r_max < 1) throw ValidationError("augmented r_max must be >= 1");
}

std::vector<GridRecord> run_grid(const CurveSet& train, const CurveSet& test,
                                 const GridConfig& config, const std::string& dataset,
                                 int replicate, std::uint64_t seed) {
  config.validate();
  FeatureOptions fo;
  fo.n_basis = config.n_basis;
  fo.order = config.order;
  fo.k = *std::max_element(config.ks.begin(), config.ks.end());
  fo.r_max = config.afrf_r_max;
  const FeatureMap map = FeatureMap::fit(train, fo);

  std::vector<GridRecord> out;
  for (const int k : config.ks) {
    for (const int r_max : {0, config.afrf_r_max}) {
      const AugmentedFeatures ftrain = map.transform(train, k, r_max);
      const AugmentedFeatures ftest = map.transform(test, k, r_max);
      for (const int h : config.trees) {
        ForestOptions options;
        options.trees = h;
        options.mtry = config.mtry;
        options.seed = derive_seed(seed, h, k);
        options.threads = config.threads;
        const Forest forest = train_forest(ftrain, options);
        const auto pred = predict(forest, ftest);
        out.push_back({dataset, replicate, r_max == 0 ? "FRF" : "AFRF", r_max, h, k,
                       accuracy(ftest.labels, pred)});
      }
    }
  }
  return out;
}

std::vector<GridRecord> dataset_benchmark(const CurveSet& train, const CurveSet& test,
                                          const GridConfig& config, const std::string& dataset) {
  config.validate();
  std::vector<GridRecord> out;
  for (int rep = 0; rep < config.replicates; ++rep) {
    auto cells = run_grid(train, test, config, dataset, rep, derive_seed(config.seed, rep));
    out.insert(out.end(), cells.begin(), cells.end());
  }
  return out;
}

std::vector<GridRecord> simulation_benchmark(int scenario_id, const GridConfig& config) {
  config.validate();
  std::vector<GridRecord> out;
  const std::string dataset = "sim" + std::to_string(scenario_id);
  for (int rep = 0; rep < config.replicates; ++rep) {
    const std::uint64_t seed = derive_seed(config.seed, scenario_id, rep);
    const CurveSet curves = generate(scenario(scenario_id, seed));
    const auto [train, test] = split_half(curves, seed);
    auto cells = run_grid(train, test, config, dataset, rep, seed);
    out.insert(out.end(), cells.begin(), cells.end());
  }
  return out;
}

Table grid_table(const std::vector<GridRecord>& records) {
  Table t({"dataset", "replicate", "method", "r_max", "trees", "k", "accuracy"});
  for (const auto& r : records) {
    t.add_row({r.dataset, static_cast<std::int64_t>(r.replicate), r.method,
               static_cast<std::int64_t>(r.r_max), static_cast<std::int64_t>(r.trees),
               static_cast<std::int64_t>(r.k), r.accuracy});
  }
  return t;
}

std::vector<CellSummary> summarize(const std::vector<GridRecord>& records, bool pool_k) {
  using Key = std::tuple<std::string, std::string, int, int>;
  std::map<Key, std::vector<double>> cells;
  for (const auto& r : records) {
    cells[{r.dataset, r.method, r.trees, pool_k ? 0 : r.k}].push_back(r.accuracy);
  }
  std::vector<CellSummary> out;
  for (const auto& [key, values] : cells) {
    CellSummary s;
    std::tie(s.dataset, s.method, s.trees, s.k) = key;
    s.n = static_cast<int>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.q1 = quantile7(values, 0.25);
    s.median = quantile7(values, 0.5);
    s.q3 = quantile7(values, 0.75);
    out.push_back(s);
  }
  return out;
}

Table summary_table(const std::vector<CellSummary>& cells) {
  Table t({"dataset", "method", "trees", "k", "n", "mean", "min", "q1", "median", "q3", "max"});
  for (const auto& s : cells) {
    t.add_row({s.dataset, s.method, static_cast<std::int64_t>(s.trees),
               static_cast<std::int64_t>(s.k), static_cast<std::int64_t>(s.n), s.mean, s.min,
               s.q1, s.median, s.q3, s.max});
  }
  return t;
}

double overall_mean(const std::vector<GridRecord>& records, const std::string& method,
                    const std::string& dataset) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (!matches(r, method, dataset)) continue;
    sum += r.accuracy;
    ++n;
  }
  if (n == 0) throw ValidationError("no benchmark records for " + method);
  return sum / n;
}

double peak_cell_mean(const std::vector<GridRecord>& records, const std::string& method,
                      const std::string& dataset) {
  double peak = -1.0;
  for (const auto& cell : summarize(records, false)) {
    if (cell.method == method && (dataset.empty() || cell.dataset == dataset)) {
      peak = std::max(peak, cell.mean);
    }
  }
  if (peak < 0.0) throw ValidationError("no benchmark records for " + method);
  return peak;
}

bool same_curves(const CurveSet& a, const CurveSet& b) {
  return a.values.rows() == b.values.rows() && a.values.cols() == b.values.cols() &&
         a.values == b.values && a.labels == b.labels;
}

PipelineResult run_pipeline(const CurveSet& train, const CurveSet& test,
                            const PipelineConfig& config) {
  PipelineResult res;
  res.map = FeatureMap::fit(train, config.features);
  const AugmentedFeatures ftrain = res.map.transform(train);
  const AugmentedFeatures ftest = res.map.transform(test);
  res.apparent = same_curves(train, test);
  res.test_labels = ftest.labels;

  res.tree = prune(grow(ftrain, config.tree), ftrain, config.prune);
  res.tree_train_accuracy = accuracy(ftrain.labels, predict(res.tree, ftrain));
  res.tree_test_pred = predict(res.tree, ftest);
  res.tree_test_accuracy = accuracy(ftest.labels, res.tree_test_pred);

  res.forest = train_forest(ftrain, config.forest);
  res.forest_test_pred = predict(res.forest, ftest);
  res.forest_test_accuracy = accuracy(ftest.labels, res.forest_test_pred);
  res.forest_oob = oob_error(res.forest, ftrain);

  if (config.run_importance) {
    const auto& eval = config.importance.eval_set == EvalSet::Holdout ? ftest : ftrain;
    res.importance = importance_report(res.forest, eval, config.importance);
  }
  if (config.features.source == FeatureSource::Fpc) {
    res.separation = separation_curves(res.tree, res.map.models, unit_grid(config.psi_points));
  }
  return res;
}

Table confusion_table(std::span<const int> truth, std::span<const int> predicted,
                      std::span<const std::string> class_names) {
  std::vector<std::string> header{"true"};
  for (const auto& name : class_names) header.push_back("pred_" + name);
  Table t(std::move(header));
  const std::size_t u = class_names.size();
  std::vector<std::vector<std::int64_t>> counts(u, std::vector<std::int64_t>(u, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  for (std::size_t c = 0; c < u; ++c) {
    std::vector<Table::Cell> row{class_names[c]};
    for (const auto v : counts[c]) row.emplace_back(v);
    t.add_row(std::move(row));
  }
  return t;
}

Table separation_table(const std::vector<SeparationCurve>& curves) {
  std::vector<std::string> header{"t"};
  for (const auto& c : curves) header.push_back("psi_node" + std::to_string(c.node));
  Table t(std::move(header));
  if (curves.empty()) return t;
  const auto& grid = curves.front().grid;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    std::vector<Table::Cell> row{grid[j]};
    for (const auto& c : curves) row.emplace_back(c.values[j]);
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace afrf
