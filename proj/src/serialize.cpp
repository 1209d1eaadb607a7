#include "afrf/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "afrf/error.hpp"

namespace afrf {
namespace {

constexpr int kFormatVersion = 1;

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

Eigen::MatrixXd matrix_from(const Json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw ParseError("ragged matrix in model file");
    m.row(static_cast<Eigen::Index>(i)) = vector_from(j[i]).transpose();
  }
  return m;
}

Json columns_json(const std::vector<ColumnMeta>& columns) {
  Json out = Json::array();
  for (const auto& c : columns) {
    out.push_back({{"name", c.name()},
                   {"component", c.component},
                   {"deriv", c.deriv},
                   {"source", c.source == FeatureSource::Fpc ? "fpc" : "spline"}});
  }
  return out;
}

std::vector<ColumnMeta> columns_from(const Json& j) {
  std::vector<ColumnMeta> out;
  for (const auto& c : j) {
    const auto source = c.at("source").get<std::string>();
    if (source != "fpc" && source != "spline") throw ParseError("unknown feature source " + source);
    out.push_back({c.at("component").get<int>(), c.at("deriv").get<int>(),
                   source == "fpc" ? FeatureSource::Fpc : FeatureSource::Spline});
  }
  return out;
}

Json grow_json(const GrowOptions& o) {
  return {{"impurity", to_string(o.impurity)},
          {"min_split", o.min_split},
          {"min_leaf", o.min_leaf},
          {"max_depth", o.max_depth}};
}

GrowOptions grow_from(const Json& j) {
  GrowOptions o;
  o.impurity = parse_impurity(j.at("impurity").get<std::string>());
  o.min_split = j.at("min_split").get<int>();
  o.min_leaf = j.at("min_leaf").get<int>();
  o.max_depth = j.at("max_depth").get<int>();
  return o;
}

Json basis_json(const BasisSystem& b) {
  return {{"order", b.order()}, {"knots", std::vector<double>(b.knots().begin(), b.knots().end())}};
}

BasisSystem basis_from(const Json& j) {
  return BasisSystem(j.at("order").get<int>(), j.at("knots").get<std::vector<double>>());
}

Json node_json(const Tree& tree, int id) {
  const auto& n = tree.nodes[static_cast<std::size_t>(id)];
  Json out = {{"index", id},
              {"origin", n.origin},
              {"depth", n.depth},
              {"impurity", n.impurity},
              {"counts", n.counts},
              {"label", n.label}};
  if (!n.is_leaf()) {
    Json split = {{"column", n.feature}, {"threshold", n.threshold}};
    if (!tree.columns.empty()) {
      const auto& meta = tree.columns[static_cast<std::size_t>(n.feature)];
      split["name"] = meta.name();
      split["component"] = meta.component;
      split["deriv"] = meta.deriv;
    }
    out["split"] = std::move(split);
    out["left"] = node_json(tree, n.left);
    out["right"] = node_json(tree, n.right);
  }
  return out;
}

int node_from(const Json& j, int parent, std::vector<TreeNode>& nodes) {
  const int id = j.at("index").get<int>();
  if (id < 0 || id >= static_cast<int>(nodes.size()) ||
      nodes[static_cast<std::size_t>(id)].label >= 0) {
    throw ParseError("invalid or duplicate node index " + std::to_string(id));
  }
  TreeNode n;
  n.origin = j.at("origin").get<int>();
  n.depth = j.at("depth").get<int>();
  n.impurity = j.at("impurity").get<double>();
  n.counts = j.at("counts").get<std::vector<int>>();
  n.label = j.at("label").get<int>();
  n.parent = parent;
  if (j.contains("split")) {
    n.feature = j.at("split").at("column").get<int>();
    n.threshold = j.at("split").at("threshold").get<double>();
  }
  nodes[static_cast<std::size_t>(id)] = n;
  if (n.feature >= 0) {
    const int left = node_from(j.at("left"), id, nodes);
    const int right = node_from(j.at("right"), id, nodes);
    nodes[static_cast<std::size_t>(id)].left = left;
    nodes[static_cast<std::size_t>(id)].right = right;
  }
  return id;
}

int count_nodes(const Json& j) {
  return 1 + (j.contains("split") ? count_nodes(j.at("left")) + count_nodes(j.at("right")) : 0);
}

void check_format(const Json& doc, const std::string& format) {
  if (doc.value("format", "") != format) throw ParseError("not an " + format + " document");
  if (doc.value("version", 0) != kFormatVersion) {
    throw ParseError("unsupported " + format + " version");
  }
}

// Runs `fn`, rethrowing JSON access failures as ParseError.
template <typename Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

std::string tree_file(int h) {
  char name[32];
  std::snprintf(name, sizeof name, "tree_%04d.json", h);
  return name;
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return guarded(path.string(), [&] { return Json::parse(buffer.str()); });
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  write_text(path, doc.dump(1) + "\n");
}

Json tree_to_json(const Tree& tree) {
  Json table = Json::array();
  for (const auto& row : tree.complexity_table) {
    table.push_back({{"alpha", row.alpha},
                     {"leaves", row.leaves},
                     {"cv_error", row.cv_error},
                     {"cv_se", row.cv_se}});
  }
  return {{"format", "afrf-tree"},
          {"version", kFormatVersion},
          {"n_classes", tree.n_classes},
          {"n_nodes", tree.nodes.size()},
          {"options", grow_json(tree.options)},
          {"columns", columns_json(tree.columns)},
          {"complexity_table", std::move(table)},
          {"root", node_json(tree, 0)}};
}

Tree tree_from_json(const Json& doc) {
  return guarded("tree", [&] {
    check_format(doc, "afrf-tree");
    Tree tree;
    tree.n_classes = doc.at("n_classes").get<int>();
    tree.options = grow_from(doc.at("options"));
    tree.columns = columns_from(doc.at("columns"));
    for (const auto& row : doc.at("complexity_table")) {
      tree.complexity_table.push_back({row.at("alpha").get<double>(), row.at("leaves").get<int>(),
                                       row.at("cv_error").get<double>(),
                                       row.at("cv_se").get<double>()});
    }
    const Json& root = doc.at("root");
    TreeNode blank;
    blank.label = -1;
    tree.nodes.assign(static_cast<std::size_t>(count_nodes(root)), blank);
    if (node_from(root, -1, tree.nodes) != 0) throw ParseError("root node must have index 0");
    return tree;
  });
}

void save_tree(const Tree& tree, const std::filesystem::path& path) {
  write_json(path, tree_to_json(tree));
}

Tree load_tree(const std::filesystem::path& path) { return tree_from_json(read_json(path)); }

void save_forest(const Forest& forest, const std::filesystem::path& dir) {
  const Json manifest = {{"format", "afrf-forest"},
                         {"version", kFormatVersion},
                         {"seed", forest.seed},
                         {"trees", forest.size()},
                         {"mtry", forest.mtry},
                         {"bootstrap", forest.bootstrap},
                         {"n_classes", forest.n_classes},
                         {"n_train", forest.n_train},
                         {"columns", columns_json(forest.columns)},
                         {"tree_options", grow_json(forest.tree_options)},
                         {"inbag", forest.inbag}};
  write_json(dir / "manifest.json", manifest);
  for (int h = 0; h < forest.size(); ++h) {
    save_tree(forest.trees[static_cast<std::size_t>(h)], dir / tree_file(h));
  }
}

Forest load_forest(const std::filesystem::path& dir) {
  const Json manifest = read_json(dir / "manifest.json");
  Forest forest = guarded("forest manifest", [&] {
    check_format(manifest, "afrf-forest");
    Forest f;
    f.seed = manifest.at("seed").get<std::uint64_t>();
    f.mtry = manifest.at("mtry").get<int>();
    f.bootstrap = manifest.at("bootstrap").get<bool>();
    f.n_classes = manifest.at("n_classes").get<int>();
    f.n_train = manifest.at("n_train").get<int>();
    f.columns = columns_from(manifest.at("columns"));
    f.tree_options = grow_from(manifest.at("tree_options"));
    f.inbag = manifest.at("inbag").get<std::vector<std::vector<int>>>();
    const int h_count = manifest.at("trees").get<int>();
    if (h_count < 1 || static_cast<int>(f.inbag.size()) != h_count) {
      throw ParseError("forest manifest tree count does not match in-bag table");
    }
    return f;
  });
  for (int h = 0; h < static_cast<int>(forest.inbag.size()); ++h) {
    forest.trees.push_back(load_tree(dir / tree_file(h)));
  }
  return forest;
}

Json feature_map_to_json(const FeatureMap& map) {
  Json models = Json::array();
  for (const auto& m : map.models) {
    models.push_back({{"deriv_order", m.deriv_order},
                      {"basis", basis_json(m.basis)},
                      {"mean_coeffs", vector_json(m.mean_coeffs)},
                      {"eigenvalues", vector_json(m.eigenvalues)},
                      {"spectrum", vector_json(m.spectrum)},
                      {"eigen_coeffs", matrix_json(m.eigen_coeffs)}});
  }
  const auto& o = map.options;
  return {{"format", "afrf-features"},
          {"version", kFormatVersion},
          {"options",
           {{"n_basis", o.n_basis},
            {"order", o.order},
            {"k", o.k},
            {"r_max", o.r_max},
            {"source", o.source == FeatureSource::Fpc ? "fpc" : "spline"}}},
          {"class_names", map.class_names},
          {"domain", vector_json(map.domain)},
          {"basis", basis_json(map.basis)},
          {"models", std::move(models)}};
}

FeatureMap feature_map_from_json(const Json& doc) {
  return guarded("feature map", [&] {
    check_format(doc, "afrf-features");
    FeatureMap map;
    const Json& o = doc.at("options");
    map.options.n_basis = o.at("n_basis").get<int>();
    map.options.order = o.at("order").get<int>();
    map.options.k = o.at("k").get<int>();
    map.options.r_max = o.at("r_max").get<int>();
    map.options.source =
        o.at("source").get<std::string>() == "spline" ? FeatureSource::Spline : FeatureSource::Fpc;
    map.class_names = doc.at("class_names").get<std::vector<std::string>>();
    map.domain = vector_from(doc.at("domain"));
    map.basis = basis_from(doc.at("basis"));
    for (const auto& m : doc.at("models")) {
      FpcaModel model;
      model.deriv_order = m.at("deriv_order").get<int>();
      model.basis = basis_from(m.at("basis"));
      model.mean_coeffs = vector_from(m.at("mean_coeffs"));
      model.eigenvalues = vector_from(m.at("eigenvalues"));
      model.spectrum = vector_from(m.at("spectrum"));
      model.eigen_coeffs = matrix_from(m.at("eigen_coeffs"), model.basis.size());
      model.gram = model.basis.gram(0);
      map.models.push_back(std::move(model));
    }
    return map;
  });
}

void save_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
  write_json(path, feature_map_to_json(map));
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  return feature_map_from_json(read_json(path));
}

}  // namespace afrf
