#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afrf/cart.hpp"
#include "afrf/dataio.hpp"
#include "afrf/features.hpp"
#include "afrf/forest.hpp"
#include "afrf/importance.hpp"

namespace afrf {

/// FRF (r_max = 0) versus AFRF (r_max = afrf_r_max) over a forest-size by
/// component-count grid. Both methods share features, seeds and splits.
struct GridConfig {
  std::vector<int> trees{10, 25, 50, 100, 200, 500};
  std::vector<int> ks{5, 10, 15, 20};
  int replicates = 10;
  std::uint64_t seed = 1;
  int n_basis = 0;
  int order = 4;
  int mtry = 0;
  int afrf_r_max = 2;
  unsigned threads = 1;

  void validate() const;
};

struct GridRecord {
  std::string dataset;
  int replicate = 0;
  std::string method;  // "FRF" or "AFRF"
  int r_max = 0;
  int trees = 0;
  int k = 0;
  double accuracy = 0.0;
};

// One replicate on fixed train/test data; forest seeds derive from `seed`.
std::vector<GridRecord> run_grid(const CurveSet& train, const CurveSet& test,
                                 const GridConfig& config, const std::string& dataset,
                                 int replicate, std::uint64_t seed);

// Fixed split, replicates differ in forest seeds only.
std::vector<GridRecord> dataset_benchmark(const CurveSet& train, const CurveSet& test,
                                          const GridConfig& config, const std::string& dataset);

// Each replicate regenerates the scenario and its half split.
std::vector<GridRecord> simulation_benchmark(int scenario_id, const GridConfig& config);

Table grid_table(const std::vector<GridRecord>& records);

struct CellSummary {
  std::string dataset;
  std::string method;
  int trees = 0;
  int k = 0;  // 0 when pooled over K
  int n = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Per (dataset, method, trees, k) cell, or pooled over k when pool_k.
std::vector<CellSummary> summarize(const std::vector<GridRecord>& records, bool pool_k);

Table summary_table(const std::vector<CellSummary>& cells);

// Mean accuracy over all records of `method` (optionally one dataset).
double overall_mean(const std::vector<GridRecord>& records, const std::string& method,
                    const std::string& dataset = "");

// Largest (trees, k) cell mean of `method`.
double peak_cell_mean(const std::vector<GridRecord>& records, const std::string& method,
                      const std::string& dataset = "");

struct PipelineConfig {
  FeatureOptions features;
  GrowOptions tree = GrowOptions::standalone();
  PruneOptions prune;
  ForestOptions forest;
  ImportanceOptions importance;
  int psi_points = 101;
  bool run_importance = true;
};

struct PipelineResult {
  FeatureMap map;
  Tree tree;
  Forest forest;
  double tree_train_accuracy = 0.0;
  double tree_test_accuracy = 0.0;
  double forest_test_accuracy = 0.0;
  OobEstimate forest_oob;
  bool apparent = false;  // test set identical to the training set
  std::vector<int> tree_test_pred;
  std::vector<int> forest_test_pred;
  std::vector<int> test_labels;
  ImportanceReport importance;
  std::vector<SeparationCurve> separation;
};

PipelineResult run_pipeline(const CurveSet& train, const CurveSet& test,
                            const PipelineConfig& config);

// Rows: true class, columns: predicted class.
Table confusion_table(std::span<const int> truth, std::span<const int> predicted,
                      std::span<const std::string> class_names);

// t followed by one psi column per internal node.
Table separation_table(const std::vector<SeparationCurve>& curves);

bool same_curves(const CurveSet& a, const CurveSet& b);

}  // namespace afrf
