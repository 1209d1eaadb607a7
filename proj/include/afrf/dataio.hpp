#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace afrf {

/// A labeled sample of discretely observed curves.
///
/// Row i of `values` holds z_i1 ... z_iT observed at `domain`. Labels are
/// internal indices 0..U; `class_names[u]` is the original label token.
struct CurveSet {
  Eigen::MatrixXd values;
  Eigen::VectorXd domain;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index length() const { return values.cols(); }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  // Throws ValidationError when an invariant is broken.
  void validate() const;

  // Rows `rows` in the given order, sharing domain and class dictionary.
  CurveSet subset(std::span<const int> rows) const;
};

// Equally spaced points on [0, 1], endpoints included.
Eigen::VectorXd unit_grid(Eigen::Index n);

/// Reads a UCR-style file: one series per line, class label first, values
/// separated by tab or comma (detected from the first record; runs of spaces
/// are accepted as a fallback).
///
/// When `known_classes` is non-empty the labels are mapped through it (used
/// to load a test split with the training dictionary) and an unseen label is
/// a ValidationError. Otherwise numeric labels are sorted ascending and
/// remapped to 0..U.
CurveSet load_ucr(const std::filesystem::path& path,
                  std::span<const std::string> known_classes = {});

// Writes `curves` in tab-separated UCR layout with round-trip precision.
void write_ucr(const CurveSet& curves, const std::filesystem::path& path);

/// Rectangular result table written as CSV.
class Table {
 public:
  using Cell = std::variant<std::int64_t, double, std::string>;

  explicit Table(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Throws ValidationError when the row width differs from the header.
  void add_row(std::vector<Cell> row);

  std::string to_csv() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// CSV field with RFC 4180 quoting applied when needed.
std::string csv_escape(const std::string& field);

void write_table(const Table& table, const std::filesystem::path& path);

// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace afrf
