#pragma once

#include <filesystem>

#include "json.hpp"

#include "afrf/cart.hpp"
#include "afrf/features.hpp"
#include "afrf/forest.hpp"

namespace afrf {

using Json = nlohmann::ordered_json;

// Nested node objects from the root; each node keeps its flat index and
// unpruned origin so loading restores the exact node numbering.
Json tree_to_json(const Tree& tree);
Tree tree_from_json(const Json& doc);

void save_tree(const Tree& tree, const std::filesystem::path& path);
Tree load_tree(const std::filesystem::path& path);

// Directory with manifest.json (seed, H, m, columns, in-bag counts) and one
// tree_NNNN.json per tree.
void save_forest(const Forest& forest, const std::filesystem::path& dir);
Forest load_forest(const std::filesystem::path& dir);

Json feature_map_to_json(const FeatureMap& map);
FeatureMap feature_map_from_json(const Json& doc);

void save_feature_map(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap load_feature_map(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace afrf
