#include "afrf/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "afrf/error.hpp"

namespace afrf {
namespace {

enum class Delimiter { Tab, Comma, Space };

Delimiter detect_delimiter(const std::string& line) {
  if (line.find('\t') != std::string::npos) return Delimiter::Tab;
  if (line.find(',') != std::string::npos) return Delimiter::Comma;
  return Delimiter::Space;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, Delimiter d) {
  std::vector<std::string_view> fields;
  if (d == Delimiter::Space) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto end = line.find_first_of(" \t", start);
      if (end == std::string_view::npos) end = line.size();
      fields.push_back(line.substr(start, end - start));
      pos = end;
    }
    return fields;
  }
  const char sep = d == Delimiter::Tab ? '\t' : ',';
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(sep, start);
    fields.push_back(trim(line.substr(start, end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

double parse_number(std::string_view field, long line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("non-numeric field '" + std::string(field) + "'", line_no);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + std::string(field) + "'", line_no);
  }
  return value;
}

// Canonical class token: integral labels print without a fractional part so
// "1", "1.0" and "1.0000000e+00" name the same class.
std::string canonical_label(double value) {
  if (value == std::floor(value) && std::abs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  return format_double(value);
}

}  // namespace

void CurveSet::validate() const {
  if (values.cols() < 2) {
    throw ValidationError("curves need at least 2 time points, got " +
                          std::to_string(values.cols()));
  }
  if (domain.size() != values.cols()) {
    throw ValidationError("domain length does not match curve length");
  }
  for (Eigen::Index j = 1; j < domain.size(); ++j) {
    if (!(domain[j] > domain[j - 1])) {
      throw ValidationError("domain must be strictly increasing");
    }
  }
  if (static_cast<Eigen::Index>(labels.size()) != values.rows()) {
    throw ValidationError("label count does not match curve count");
  }
  if (!values.allFinite()) throw ValidationError("curves contain non-finite values");
  for (const int y : labels) {
    if (y < 0 || y >= n_classes()) {
      throw ValidationError("label " + std::to_string(y) + " outside 0.." +
                            std::to_string(n_classes() - 1));
    }
  }
}

CurveSet CurveSet::subset(std::span<const int> rows) const {
  CurveSet out;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  out.domain = domain;
  out.class_names = class_names;
  return out;
}

Eigen::VectorXd unit_grid(Eigen::Index n) {
  Eigen::VectorXd t(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    t[j] = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
  }
  return t;
}

CurveSet load_ucr(const std::filesystem::path& path,
                  std::span<const std::string> known_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::vector<double> raw_label_values;
  std::string line;
  long line_no = 0;
  std::optional<Delimiter> delim;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (!delim) delim = detect_delimiter(std::string(body));
    const auto fields = split_fields(body, *delim);
    if (fields.size() < 3) {
      throw ParseError("a record needs a label and at least 2 time points", line_no);
    }
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width - 1) +
                           " values, found " + std::to_string(fields.size() - 1),
                       line_no);
    }
    const double label = parse_number(fields[0], line_no);
    raw_label_values.push_back(label);
    raw_labels.push_back(canonical_label(label));
    std::vector<double> row(fields.size() - 1);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      row[j - 1] = parse_number(fields[j], line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no records in " + path.string());

  CurveSet out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto t = static_cast<Eigen::Index>(width - 1);
  out.values.resize(n, t);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) out.values(i, j) = rows[i][j];
  }
  out.domain = unit_grid(t);

  if (known_classes.empty()) {
    std::map<double, std::string> observed;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      observed.emplace(raw_label_values[i], raw_labels[i]);
    }
    for (const auto& entry : observed) out.class_names.push_back(entry.second);
  } else {
    out.class_names.assign(known_classes.begin(), known_classes.end());
  }
  std::map<std::string, int> index;
  for (std::size_t u = 0; u < out.class_names.size(); ++u) {
    index.emplace(out.class_names[u], static_cast<int>(u));
  }
  out.labels.reserve(raw_labels.size());
  for (const auto& name : raw_labels) {
    const auto it = index.find(name);
    if (it == index.end()) {
      throw ValidationError("label '" + name + "' not in the class dictionary");
    }
    out.labels.push_back(it->second);
  }
  out.validate();
  return out;
}

void write_ucr(const CurveSet& curves, const std::filesystem::path& path) {
  std::string text;
  for (Eigen::Index i = 0; i < curves.size(); ++i) {
    text += curves.class_names[static_cast<std::size_t>(curves.labels[i])];
    for (Eigen::Index j = 0; j < curves.length(); ++j) {
      text += '\t';
      text += format_double(curves.values(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw ValidationError("table row has " + std::to_string(row.size()) +
                          " cells, header has " + std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t j = 0; j < header_.size(); ++j) {
    if (j) out += ',';
    out += csv_escape(header_[j]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
              out += std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
              out += format_double(v);
            } else {
              out += csv_escape(v);
            }
          },
          row[j]);
    }
    out += '\n';
  }
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_table(const Table& table, const std::filesystem::path& path) {
  write_text(path, table.to_csv());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace afrf
