#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "afrf/augment.hpp"
#include "afrf/dataio.hpp"
#include "afrf/forest.hpp"
#include "afrf/random.hpp"

namespace afrf {

// Rows on which prediction error is measured.
//  Oob:      `features` are the training rows; tree h is scored on its OOB rows.
//  Holdout:  `features` are unseen rows; every tree scores every row.
//  InSample: `features` are the training rows; every tree scores every row.
enum class EvalSet { Oob, Holdout, InSample };

std::string to_string(EvalSet set);
EvalSet parse_eval_set(const std::string& name);

// PerTree: mean over trees of each tree's error increase on its evaluation
// rows. Ensemble: error increase of the forest vote.
enum class Aggregation { PerTree, Ensemble };

struct ImportanceOptions {
  int reps = 30;
  int bins = 4;
  std::uint64_t seed = 1;
  EvalSet eval_set = EvalSet::Oob;
  Aggregation aggregation = Aggregation::PerTree;
  unsigned threads = 1;

  void validate() const;
};

// Cut points at the 1/bins, ..., (bins-1)/bins sample quantiles (type 7).
std::vector<double> quantile_edges(std::span<const double> values, int bins);

// Bin of `value` given sorted cut points: number of edges <= value.
int bin_of(std::span<const double> edges, double value);

/// Strata of `pool` rows sharing the same quantile bin in every other column
/// of `column`'s group. A singleton group yields one stratum holding `pool`.
/// Strata are listed in lexicographic bin order, rows ascending within each.
std::vector<std::vector<int>> conditioning_strata(const AugmentedFeatures& features, int column,
                                                  std::span<const int> pool, int bins);

// Returns a copy of `values` with entries shuffled within each stratum.
std::vector<double> permute_within_strata(std::span<const double> values,
                                          const std::vector<std::vector<int>>& strata, Rng& rng);

// Error increase (after - before) per column; rows: columns, cols: reps.
struct ImportanceRuns {
  std::vector<double> mean;
  std::vector<std::vector<double>> reps;
};

ImportanceRuns unconditional_importance(const Forest& forest, const AugmentedFeatures& features,
                                        const ImportanceOptions& options);

ImportanceRuns conditional_importance(const Forest& forest, const AugmentedFeatures& features,
                                      const ImportanceOptions& options);

struct ImportanceReport {
  std::vector<ColumnMeta> columns;
  ImportanceRuns conditional;
  ImportanceRuns unconditional;
  int reps = 0;
  int bins = 0;
  EvalSet eval_set = EvalSet::Oob;

  // feature, k, r, conditional, unconditional, reps, eval_set
  Table table() const;
  // feature, rep, conditional, unconditional
  Table raw_table() const;
};

ImportanceReport importance_report(const Forest& forest, const AugmentedFeatures& features,
                                   const ImportanceOptions& options);

}  // namespace afrf
