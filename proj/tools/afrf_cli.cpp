// afrf: augmented functional classification trees and random forests.
//
// Every subcommand writes CSV/JSON outputs plus manifest.txt (the resolved
// configuration) into --out. Exit status: 0 ok, 1 usage, 2 parse,
// 3 validation, 4 numeric, 5 I/O, 10 internal.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "afrf/augment.hpp"
#include "afrf/basis.hpp"
#include "afrf/cart.hpp"
#include "afrf/dataio.hpp"
#include "afrf/error.hpp"
#include "afrf/experiment.hpp"
#include "afrf/features.hpp"
#include "afrf/forest.hpp"
#include "afrf/fpca.hpp"
#include "afrf/importance.hpp"
#include "afrf/serialize.hpp"
#include "afrf/simgen.hpp"

namespace fs = std::filesystem;
using namespace afrf;

namespace {

struct FeatureArgs {
  int n_basis = 0;
  int order = 4;
  int k = 10;
  int r_max = 2;
  std::string source = "fpc";

  void add(CLI::App* app) {
    app->add_option("--n-basis", n_basis, "B-spline basis size (0 = automatic)");
    app->add_option("--order", order, "B-spline order (degree + 1)");
    app->add_option("--k", k, "principal components per derivative order");
    app->add_option("--r-max", r_max, "highest derivative order");
    app->add_option("--features", source, "feature source")
        ->check(CLI::IsMember({"fpc", "spline"}));
  }

  FeatureOptions resolve() const {
    FeatureOptions o;
    o.n_basis = n_basis;
    o.order = order;
    o.k = k;
    o.r_max = r_max;
    o.source = source == "spline" ? FeatureSource::Spline : FeatureSource::Fpc;
    return o;
  }
};

struct TreeArgs {
  std::string impurity = "gini";
  int min_split = 20;
  int min_leaf = 7;
  int max_depth = 30;
  int folds = 10;
  std::string prune = "min";

  void add(CLI::App* app) {
    app->add_option("--impurity", impurity, "split criterion")
        ->check(CLI::IsMember({"gini", "entropy"}));
    app->add_option("--min-split", min_split, "smallest node considered for splitting");
    app->add_option("--min-leaf", min_leaf, "smallest allowed leaf");
    app->add_option("--max-depth", max_depth, "depth limit");
    app->add_option("--folds", folds, "cross-validation folds for pruning");
    app->add_option("--prune", prune, "subtree selection rule")
        ->check(CLI::IsMember({"min", "1se", "none"}));
  }

  GrowOptions grow() const {
    return {parse_impurity(impurity), min_split, min_leaf, max_depth};
  }
};

struct ForestArgs {
  int trees = 100;
  int mtry = 0;
  bool no_bootstrap = false;
  unsigned threads = 1;

  void add(CLI::App* app) {
    app->add_option("--trees", trees, "forest size H");
    app->add_option("--mtry", mtry, "candidate columns per split (0 = round(sqrt(p)))");
    app->add_flag("--no-bootstrap", no_bootstrap, "train every tree on all rows (diagnostic)");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  ForestOptions resolve(std::uint64_t seed) const {
    ForestOptions o;
    o.trees = trees;
    o.mtry = mtry;
    o.seed = seed;
    o.bootstrap = !no_bootstrap;
    o.threads = threads;
    return o;
  }
};

struct ImportanceArgs {
  int reps = 30;
  int bins = 4;
  std::string eval = "oob";
  std::string aggregation = "tree";

  void add(CLI::App* app) {
    app->add_option("--reps", reps, "permutation repetitions");
    app->add_option("--bins", bins, "quantile bins per conditioning feature");
    app->add_option("--eval", eval, "evaluation rows")
        ->check(CLI::IsMember({"oob", "holdout", "insample"}));
    app->add_option("--aggregation", aggregation, "error aggregation")
        ->check(CLI::IsMember({"tree", "ensemble"}));
  }

  ImportanceOptions resolve(std::uint64_t seed, unsigned threads) const {
    ImportanceOptions o;
    o.reps = reps;
    o.bins = bins;
    o.seed = seed;
    o.eval_set = parse_eval_set(eval);
    o.aggregation = aggregation == "ensemble" ? Aggregation::Ensemble : Aggregation::PerTree;
    o.threads = threads;
    return o;
  }
};

// Resolved settings not visible in the raw options, appended to the manifest.
using Resolved = std::map<std::string, std::string>;

void write_manifest(const CLI::App* sub, const fs::path& out, const Resolved& resolved) {
  std::ostringstream text;
  text << "command=" << sub->get_name() << "\n";
  text << sub->config_to_str(true, false);
  for (const auto& [key, value] : resolved) text << "resolved." << key << "=" << value << "\n";
  write_text(out / "manifest.txt", text.str());
}

std::pair<CurveSet, CurveSet> load_pair(const std::string& train_path,
                                        const std::string& test_path) {
  CurveSet train = load_ucr(train_path);
  CurveSet test = load_ucr(test_path, train.class_names);
  return {std::move(train), std::move(test)};
}

Table metrics_table() { return Table({"model", "set", "accuracy", "kind"}); }

std::string accuracy_kind(bool apparent) { return apparent ? "apparent" : "test"; }

Table prediction_table(std::span<const int> truth, std::span<const int> predicted,
                       const std::vector<std::string>& names, const Eigen::MatrixXd* proba) {
  std::vector<std::string> header{"row", "true", "predicted"};
  if (proba != nullptr) {
    for (const auto& n : names) header.push_back("p_" + n);
  }
  Table t(std::move(header));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<Table::Cell> row{static_cast<std::int64_t>(i),
                                 names[static_cast<std::size_t>(truth[i])],
                                 names[static_cast<std::size_t>(predicted[i])]};
    if (proba != nullptr) {
      for (Eigen::Index c = 0; c < proba->cols(); ++c) {
        row.emplace_back((*proba)(static_cast<Eigen::Index>(i), c));
      }
    }
    t.add_row(std::move(row));
  }
  return t;
}

Table complexity_csv(const Tree& tree) {
  Table t({"alpha", "leaves", "cv_error", "cv_se"});
  for (const auto& row : tree.complexity_table) {
    t.add_row({row.alpha, static_cast<std::int64_t>(row.leaves), row.cv_error, row.cv_se});
  }
  return t;
}

Table terms_table(const std::vector<SeparationCurve>& curves) {
  Table t({"node", "term", "split_node", "feature", "k", "r", "threshold"});
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.terms.size(); ++i) {
      const auto& term = c.terms[i];
      const ColumnMeta meta{term.component, term.deriv, FeatureSource::Fpc};
      t.add_row({static_cast<std::int64_t>(c.node), static_cast<std::int64_t>(i),
                 static_cast<std::int64_t>(term.node), meta.name(),
                 static_cast<std::int64_t>(term.component), static_cast<std::int64_t>(term.deriv),
                 term.threshold});
    }
  }
  return t;
}

Tree fit_tree(const AugmentedFeatures& features, const TreeArgs& args, std::uint64_t seed) {
  Tree tree = grow(features, args.grow());
  if (args.prune == "none") return tree;
  PruneOptions po;
  po.folds = args.folds;
  po.rule = parse_prune_rule(args.prune);
  po.seed = seed;
  return prune(tree, features, po);
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(what + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ValidationError(what + " is empty");
  return out;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
      return 2;
    case ErrorKind::Validation:
      return 3;
    case ErrorKind::Numeric:
      return 4;
    case ErrorKind::Io:
      return 5;
  }
  return 10;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented functional classification trees and random forests"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string out;
  std::string train_path;
  std::string test_path;
  std::string model_dir;
  std::uint64_t seed = 1;
  FeatureArgs feature_args;
  TreeArgs tree_args;
  ForestArgs forest_args;
  ImportanceArgs importance_args;
  Resolved resolved;

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", seed, "master random seed");
  };

  // simulate
  int scenario_id = 1;
  int n_per_group = 100;
  int grid_size = 50;
  auto* simulate = app.add_subcommand("simulate", "generate a simulated scenario");
  simulate->add_option("--scenario", scenario_id, "scenario 1-6")->required();
  simulate->add_option("--n-per-group", n_per_group, "curves per group");
  simulate->add_option("--grid", grid_size, "observation points on [0, 1]");
  add_out(simulate);
  simulate->callback([&] {
    const CurveSet curves = generate(scenario(scenario_id, seed, n_per_group, grid_size));
    const auto [train, test] = split_half(curves, seed);
    write_ucr(train, fs::path(out) / "train.tsv");
    write_ucr(test, fs::path(out) / "test.tsv");
    resolved["classes"] = std::to_string(curves.n_classes());
    write_manifest(simulate, out, resolved);
  });

  // smooth
  auto* smooth_cmd = app.add_subcommand("smooth", "least-squares B-spline smoothing");
  smooth_cmd->add_option("--train", train_path, "curves to smooth")->required();
  add_out(smooth_cmd);
  feature_args.add(smooth_cmd);
  smooth_cmd->callback([&] {
    const CurveSet curves = load_ucr(train_path);
    FeatureOptions fo = feature_args.resolve();
    fo.n_basis = resolve_n_basis(fo, curves.length());
    const SmoothedSet set = smooth(curves, BasisSystem::clamped(fo.n_basis, fo.order));
    std::vector<std::string> coef_header{"label"};
    for (int s = 1; s <= set.basis.size(); ++s) coef_header.push_back("c_" + std::to_string(s));
    Table coefs(coef_header);
    std::vector<std::string> fit_header{"label"};
    for (Eigen::Index j = 0; j < curves.length(); ++j) {
      fit_header.push_back("t_" + std::to_string(j + 1));
    }
    Table fitted(fit_header);
    const Eigen::MatrixXd values = set.evaluate(curves.domain);
    for (Eigen::Index i = 0; i < set.size(); ++i) {
      const auto& label = curves.class_names[static_cast<std::size_t>(curves.labels[static_cast<std::size_t>(i)])];
      std::vector<Table::Cell> crow{label};
      for (Eigen::Index s = 0; s < set.coeffs.cols(); ++s) crow.emplace_back(set.coeffs(i, s));
      coefs.add_row(std::move(crow));
      std::vector<Table::Cell> frow{label};
      for (Eigen::Index j = 0; j < values.cols(); ++j) frow.emplace_back(values(i, j));
      fitted.add_row(std::move(frow));
    }
    write_table(coefs, fs::path(out) / "coefficients.csv");
    write_table(fitted, fs::path(out) / "fitted.csv");
    resolved["n_basis"] = std::to_string(fo.n_basis);
    write_manifest(smooth_cmd, out, resolved);
  });

  // fpca-dump
  int grid_points = 101;
  auto* fpca_dump = app.add_subcommand("fpca-dump", "eigenfunctions, eigenvalues and scores");
  fpca_dump->add_option("--train", train_path, "training curves")->required();
  fpca_dump->add_option("--grid-points", grid_points, "evaluation points on [0, 1]");
  add_out(fpca_dump);
  feature_args.add(fpca_dump);
  fpca_dump->callback([&] {
    const CurveSet train = load_ucr(train_path);
    FeatureOptions fo = feature_args.resolve();
    fo.source = FeatureSource::Fpc;
    const FeatureMap map = FeatureMap::fit(train, fo);
    const Eigen::VectorXd grid = unit_grid(grid_points);
    Table values({"r", "k", "eigenvalue", "explained", "cumulative"});
    for (const auto& model : map.models) {
      std::vector<std::string> header{"t", "mean"};
      for (int c = 1; c <= model.n_components(); ++c) {
        header.push_back(ColumnMeta{c, model.deriv_order, FeatureSource::Fpc}.name());
      }
      Table curves(header);
      const Eigen::MatrixXd xi = model.eigenfunctions(grid);
      const Eigen::VectorXd mean = model.mean_function(grid);
      for (Eigen::Index j = 0; j < grid.size(); ++j) {
        std::vector<Table::Cell> row{grid[j], mean[j]};
        for (Eigen::Index c = 0; c < xi.cols(); ++c) row.emplace_back(xi(j, c));
        curves.add_row(std::move(row));
      }
      write_table(curves, fs::path(out) / ("eigenfunctions_r" + std::to_string(model.deriv_order) + ".csv"));
      const double total = model.total_variance();
      for (int c = 1; c <= model.n_components(); ++c) {
        const double ev = model.eigenvalues[c - 1];
        values.add_row({static_cast<std::int64_t>(model.deriv_order), static_cast<std::int64_t>(c),
                        ev, total > 0 ? ev / total : 0.0, explained_variance_fraction(model, c)});
      }
    }
    write_table(values, fs::path(out) / "eigenvalues.csv");
    write_table(features_table(map.transform(train), train.class_names),
                fs::path(out) / "scores.csv");
    save_feature_map(map, fs::path(out) / "feature_map.json");
    resolved["n_basis"] = std::to_string(map.options.n_basis);
    write_manifest(fpca_dump, out, resolved);
  });

  // train-tree
  auto* train_tree = app.add_subcommand("train-tree", "grow and prune an AFCT");
  train_tree->add_option("--train", train_path, "training curves")->required();
  train_tree->add_option("--test", test_path, "optional test curves");
  add_out(train_tree);
  feature_args.add(train_tree);
  tree_args.add(train_tree);
  train_tree->callback([&] {
    const CurveSet train = load_ucr(train_path);
    const FeatureMap map = FeatureMap::fit(train, feature_args.resolve());
    const AugmentedFeatures ftrain = map.transform(train);
    const Tree tree = fit_tree(ftrain, tree_args, seed);
    Table metrics = metrics_table();
    metrics.add_row({"tree", "train", accuracy(ftrain.labels, predict(tree, ftrain)), "apparent"});
    if (!test_path.empty()) {
      const CurveSet test = load_ucr(test_path, train.class_names);
      const AugmentedFeatures ftest = map.transform(test);
      const auto pred = predict(tree, ftest);
      metrics.add_row({"tree", "test", accuracy(ftest.labels, pred),
                       accuracy_kind(same_curves(train, test))});
      write_table(prediction_table(ftest.labels, pred, train.class_names, nullptr),
                  fs::path(out) / "predictions.csv");
    }
    save_feature_map(map, fs::path(out) / "feature_map.json");
    save_tree(tree, fs::path(out) / "tree.json");
    write_table(complexity_csv(tree), fs::path(out) / "complexity.csv");
    write_table(metrics, fs::path(out) / "metrics.csv");
    resolved["n_basis"] = std::to_string(map.options.n_basis);
    resolved["leaves"] = std::to_string(tree.leaf_count());
    write_manifest(train_tree, out, resolved);
  });

  // train-forest
  auto* train_forest_cmd = app.add_subcommand("train-forest", "train an AFRF");
  train_forest_cmd->add_option("--train", train_path, "training curves")->required();
  train_forest_cmd->add_option("--test", test_path, "optional test curves");
  add_out(train_forest_cmd);
  feature_args.add(train_forest_cmd);
  forest_args.add(train_forest_cmd);
  train_forest_cmd->callback([&] {
    const CurveSet train = load_ucr(train_path);
    const FeatureMap map = FeatureMap::fit(train, feature_args.resolve());
    const AugmentedFeatures ftrain = map.transform(train);
    const Forest forest = train_forest(ftrain, forest_args.resolve(seed));
    Table metrics = metrics_table();
    const OobEstimate oob = oob_error(forest, ftrain);
    if (oob.covered()) metrics.add_row({"forest", "oob", 1.0 - oob.error, "oob"});
    if (!test_path.empty()) {
      const CurveSet test = load_ucr(test_path, train.class_names);
      const AugmentedFeatures ftest = map.transform(test);
      const Eigen::MatrixXd proba = predict_proba(forest, ftest);
      const auto pred = argmax_rows(proba);
      metrics.add_row({"forest", "test", accuracy(ftest.labels, pred),
                       accuracy_kind(same_curves(train, test))});
      write_table(prediction_table(ftest.labels, pred, train.class_names, &proba),
                  fs::path(out) / "predictions.csv");
    }
    save_feature_map(map, fs::path(out) / "feature_map.json");
    save_forest(forest, fs::path(out) / "forest");
    write_table(metrics, fs::path(out) / "metrics.csv");
    resolved["n_basis"] = std::to_string(map.options.n_basis);
    resolved["mtry"] = std::to_string(forest.mtry);
    resolved["oob_scored"] = std::to_string(oob.scored);
    write_manifest(train_forest_cmd, out, resolved);
  });

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "apply a saved tree or forest");
  predict_cmd->add_option("--model", model_dir, "output directory of train-tree/train-forest")
      ->required();
  predict_cmd->add_option("--test", test_path, "curves to classify")->required();
  add_out(predict_cmd);
  predict_cmd->callback([&] {
    const fs::path dir(model_dir);
    const FeatureMap map = load_feature_map(dir / "feature_map.json");
    const CurveSet test = load_ucr(test_path, map.class_names);
    const AugmentedFeatures ftest = map.transform(test);
    Table metrics = metrics_table();
    if (fs::exists(dir / "forest" / "manifest.json")) {
      const Forest forest = load_forest(dir / "forest");
      const Eigen::MatrixXd proba = predict_proba(forest, ftest);
      const auto pred = argmax_rows(proba);
      metrics.add_row({"forest", "test", accuracy(ftest.labels, pred), "test"});
      write_table(prediction_table(ftest.labels, pred, map.class_names, &proba),
                  fs::path(out) / "predictions.csv");
      write_table(confusion_table(ftest.labels, pred, map.class_names),
                  fs::path(out) / "confusion.csv");
      resolved["model"] = "forest";
    } else {
      const Tree tree = load_tree(dir / "tree.json");
      const auto pred = predict(tree, ftest);
      metrics.add_row({"tree", "test", accuracy(ftest.labels, pred), "test"});
      write_table(prediction_table(ftest.labels, pred, map.class_names, nullptr),
                  fs::path(out) / "predictions.csv");
      write_table(confusion_table(ftest.labels, pred, map.class_names),
                  fs::path(out) / "confusion.csv");
      resolved["model"] = "tree";
    }
    write_table(metrics, fs::path(out) / "metrics.csv");
    write_manifest(predict_cmd, out, resolved);
  });

  // importance
  auto* importance_cmd = app.add_subcommand("importance", "conditional and unconditional permutation importance");
  importance_cmd->add_option("--train", train_path, "training curves")->required();
  importance_cmd->add_option("--test", test_path, "holdout curves (for --eval holdout)");
  importance_cmd->add_option("--model", model_dir, "reuse a train-forest output directory");
  add_out(importance_cmd);
  feature_args.add(importance_cmd);
  forest_args.add(importance_cmd);
  importance_args.add(importance_cmd);
  importance_cmd->callback([&] {
    const CurveSet train = load_ucr(train_path);
    FeatureMap map;
    Forest forest;
    if (!model_dir.empty()) {
      map = load_feature_map(fs::path(model_dir) / "feature_map.json");
      forest = load_forest(fs::path(model_dir) / "forest");
    } else {
      map = FeatureMap::fit(train, feature_args.resolve());
      forest = train_forest(map.transform(train), forest_args.resolve(seed));
    }
    const ImportanceOptions options = importance_args.resolve(seed, forest_args.threads);
    AugmentedFeatures eval;
    if (options.eval_set == EvalSet::Holdout) {
      if (test_path.empty()) throw ValidationError("--eval holdout needs --test");
      eval = map.transform(load_ucr(test_path, map.class_names));
    } else {
      eval = map.transform(train);
    }
    const ImportanceReport report = importance_report(forest, eval, options);
    write_table(report.table(), fs::path(out) / "importance.csv");
    write_table(report.raw_table(), fs::path(out) / "importance_reps.csv");
    resolved["sign"] = "error_after_permutation - error_before";
    resolved["mtry"] = std::to_string(forest.mtry);
    write_manifest(importance_cmd, out, resolved);
  });

  // explain
  auto* explain = app.add_subcommand("explain", "separation curves of a tree's internal nodes");
  explain->add_option("--model", model_dir, "train-tree output directory");
  explain->add_option("--train", train_path, "training curves (when no --model)");
  explain->add_option("--grid-points", grid_points, "evaluation points on [0, 1]");
  add_out(explain);
  feature_args.add(explain);
  tree_args.add(explain);
  explain->callback([&] {
    FeatureMap map;
    Tree tree;
    if (!model_dir.empty()) {
      map = load_feature_map(fs::path(model_dir) / "feature_map.json");
      tree = load_tree(fs::path(model_dir) / "tree.json");
    } else {
      if (train_path.empty()) throw ValidationError("explain needs --model or --train");
      const CurveSet train = load_ucr(train_path);
      map = FeatureMap::fit(train, feature_args.resolve());
      tree = fit_tree(map.transform(train), tree_args, seed);
    }
    const auto curves = separation_curves(tree, map.models, unit_grid(grid_points));
    write_table(separation_table(curves), fs::path(out) / "separation.csv");
    write_table(terms_table(curves), fs::path(out) / "separation_terms.csv");
    resolved["internal_nodes"] = std::to_string(curves.size());
    write_manifest(explain, out, resolved);
  });

  // benchmark
  std::string scenarios_text;
  std::string dataset_name = "dataset";
  std::string trees_grid = "10,25,50,100,200,500";
  std::string ks_grid = "5,10,15,20";
  int replicates = 0;
  auto* benchmark = app.add_subcommand("benchmark", "FRF versus AFRF accuracy grid");
  benchmark->add_option("--scenarios", scenarios_text, "comma-separated scenario ids");
  benchmark->add_option("--train", train_path, "dataset training curves");
  benchmark->add_option("--test", test_path, "dataset test curves");
  benchmark->add_option("--name", dataset_name, "dataset label in the outputs");
  benchmark->add_option("--trees-grid", trees_grid, "forest sizes");
  benchmark->add_option("--k-grid", ks_grid, "components per derivative order");
  benchmark->add_option("--replicates", replicates,
                        "replicates per cell (0 = 10 for datasets, 20 for scenarios)");
  benchmark->add_option("--n-basis", feature_args.n_basis, "B-spline basis size (0 = automatic)");
  benchmark->add_option("--r-max", feature_args.r_max, "AFRF derivative order");
  benchmark->add_option("--mtry", forest_args.mtry, "candidate columns per split (0 = default)");
  benchmark->add_option("--threads", forest_args.threads, "worker threads (0 = all cores)");
  add_out(benchmark);
  benchmark->callback([&] {
    GridConfig g;
    g.trees = parse_int_list(trees_grid, "--trees-grid");
    g.ks = parse_int_list(ks_grid, "--k-grid");
    g.seed = seed;
    g.n_basis = feature_args.n_basis;
    g.mtry = forest_args.mtry;
    g.afrf_r_max = feature_args.r_max;
    g.threads = forest_args.threads;
    std::vector<GridRecord> records;
    if (!scenarios_text.empty()) {
      g.replicates = replicates > 0 ? replicates : 20;
      for (const int id : parse_int_list(scenarios_text, "--scenarios")) {
        scenario(id, seed);  // validates the id before any work
        const auto rec = simulation_benchmark(id, g);
        records.insert(records.end(), rec.begin(), rec.end());
      }
    } else {
      if (train_path.empty() || test_path.empty()) {
        throw ValidationError("benchmark needs --scenarios or both --train and --test");
      }
      g.replicates = replicates > 0 ? replicates : 10;
      const auto [train, test] = load_pair(train_path, test_path);
      records = dataset_benchmark(train, test, g, dataset_name);
    }
    write_table(grid_table(records), fs::path(out) / "grid.csv");
    write_table(summary_table(summarize(records, true)), fs::path(out) / "summary.csv");
    write_table(summary_table(summarize(records, false)), fs::path(out) / "cells.csv");
    Table overall({"dataset", "method", "mean", "peak_cell_mean"});
    std::vector<std::string> datasets;
    for (const auto& r : records) {
      if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
        datasets.push_back(r.dataset);
      }
    }
    for (const auto& d : datasets) {
      for (const std::string method : {"FRF", "AFRF"}) {
        overall.add_row({d, method, overall_mean(records, method, d),
                         peak_cell_mean(records, method, d)});
      }
    }
    write_table(overall, fs::path(out) / "overall.csv");
    resolved["replicates"] = std::to_string(g.replicates);
    write_manifest(benchmark, out, resolved);
  });

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "smooth, FPCA, AFCT, AFRF, importance, explanation");
  pipeline->add_option("--train", train_path, "training curves")->required();
  pipeline->add_option("--test", test_path, "test curves")->required();
  pipeline->add_option("--grid-points", grid_points, "separation-curve points on [0, 1]");
  add_out(pipeline);
  feature_args.add(pipeline);
  tree_args.add(pipeline);
  forest_args.add(pipeline);
  importance_args.add(pipeline);
  pipeline->callback([&] {
    const auto [train, test] = load_pair(train_path, test_path);
    PipelineConfig pc;
    pc.features = feature_args.resolve();
    pc.tree = tree_args.grow();
    if (tree_args.prune == "none") throw ValidationError("pipeline always prunes the AFCT");
    pc.prune.folds = tree_args.folds;
    pc.prune.rule = parse_prune_rule(tree_args.prune);
    pc.prune.seed = seed;
    pc.forest = forest_args.resolve(seed);
    pc.importance = importance_args.resolve(seed, forest_args.threads);
    pc.psi_points = grid_points;
    const PipelineResult res = run_pipeline(train, test, pc);
    const fs::path dir(out);
    const std::string kind = accuracy_kind(res.apparent);
    Table metrics = metrics_table();
    metrics.add_row({"tree", "train", res.tree_train_accuracy, "apparent"});
    metrics.add_row({"tree", "test", res.tree_test_accuracy, kind});
    metrics.add_row({"forest", "test", res.forest_test_accuracy, kind});
    if (res.forest_oob.covered()) {
      metrics.add_row({"forest", "oob", 1.0 - res.forest_oob.error, "oob"});
    }
    write_table(metrics, dir / "metrics.csv");
    write_table(confusion_table(res.test_labels, res.tree_test_pred, train.class_names),
                dir / "confusion_tree.csv");
    write_table(confusion_table(res.test_labels, res.forest_test_pred, train.class_names),
                dir / "confusion_forest.csv");
    write_table(complexity_csv(res.tree), dir / "complexity.csv");
    write_table(separation_table(res.separation), dir / "separation.csv");
    write_table(terms_table(res.separation), dir / "separation_terms.csv");
    write_table(res.importance.table(), dir / "importance.csv");
    write_table(res.importance.raw_table(), dir / "importance_reps.csv");
    save_feature_map(res.map, dir / "feature_map.json");
    save_tree(res.tree, dir / "tree.json");
    save_forest(res.forest, dir / "forest");
    resolved["n_basis"] = std::to_string(res.map.options.n_basis);
    resolved["mtry"] = std::to_string(res.forest.mtry);
    resolved["tree_leaves"] = std::to_string(res.tree.leaf_count());
    write_manifest(pipeline, out, resolved);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 10;
  }
  return 0;
}
