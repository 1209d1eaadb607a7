#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "afrf/dataio.hpp"
#include "afrf/error.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace afrf;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "afrf_dataio_test";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

}  // namespace

TEST(LoadUcr, Ecg200TrainShape) {
  const CurveSet train = oracle::ecg_train();
  EXPECT_EQ(train.size(), 100);
  EXPECT_EQ(train.length(), 96);
  ASSERT_EQ(train.class_names, (std::vector<std::string>{"-1", "1"}));
  EXPECT_EQ(std::count(train.labels.begin(), train.labels.end(), 0), 31);
  EXPECT_EQ(std::count(train.labels.begin(), train.labels.end(), 1), 69);
}

TEST(LoadUcr, Ecg200TestMatchesFile) {
  // Count records and fields directly from the file.
  std::ifstream in(oracle::data_path("ECG200_TEST.tsv"));
  std::string line;
  int rows = 0;
  std::size_t fields = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    fields = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) + 1;
  }
  const CurveSet test = oracle::ecg_test();
  EXPECT_EQ(test.size(), rows);
  EXPECT_EQ(test.length(), static_cast<Eigen::Index>(fields) - 1);
}

TEST(LoadUcr, RemapsLabelsInNumericOrder) {
  const auto path = temp_file("labels.csv", "1,0.5,0.6\n-1,1.5,2\n1.0,3,4\n");
  const CurveSet c = load_ucr(path);
  EXPECT_EQ(c.class_names, (std::vector<std::string>{"-1", "1"}));
  EXPECT_EQ(c.labels, (std::vector<int>{1, 0, 1}));
  EXPECT_DOUBLE_EQ(c.domain[0], 0.0);
  EXPECT_DOUBLE_EQ(c.domain[1], 1.0);
}

TEST(LoadUcr, DetectsSpaceDelimiter) {
  const auto path = temp_file("spaces.txt", "  2   1.0  2.0 3.0\n 1 4 5 6\n");
  const CurveSet c = load_ucr(path);
  EXPECT_EQ(c.length(), 3);
  EXPECT_EQ(c.labels, (std::vector<int>{1, 0}));
  EXPECT_DOUBLE_EQ(c.values(1, 2), 6.0);
}

TEST(LoadUcr, RaggedRowReportsLine) {
  const auto path = temp_file("ragged.tsv", "1\t1\t2\t3\n1\t1\t2\n");
  try {
    load_ucr(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(LoadUcr, NonNumericFieldIsParseError) {
  const auto path = temp_file("text.tsv", "1\t1\t2\n1\tx\t2\n");
  EXPECT_THROW(load_ucr(path), ParseError);
}

TEST(LoadUcr, SinglePointSeriesRejected) {
  const auto path = temp_file("short.tsv", "1\t1\n2\t3\n");
  EXPECT_THROW(load_ucr(path), Error);
}

TEST(LoadUcr, UnknownLabelAgainstDictionary) {
  const auto path = temp_file("unknown.tsv", "3\t1\t2\n");
  const std::vector<std::string> known{"-1", "1"};
  EXPECT_THROW(load_ucr(path, known), ValidationError);
}

TEST(LoadUcr, MissingFileIsIoError) {
  EXPECT_THROW(load_ucr("/nonexistent/afrf.tsv"), IoError);
}

TEST(LoadUcr, RoundTripIsBitExact) {
  CurveSet c = oracle::random_curves(12, 17, 5, 3);
  c.class_names = {"-2", "0", "7"};
  const fs::path path = fs::temp_directory_path() / "afrf_dataio_test" / "roundtrip.tsv";
  write_ucr(c, path);
  const CurveSet back = load_ucr(path);
  EXPECT_EQ(back.values, c.values);
  EXPECT_EQ(back.labels, c.labels);
  EXPECT_EQ(back.class_names, c.class_names);
}

TEST(LoadUcr, RemappingIsBijective) {
  const auto path = temp_file("many.tsv", "5\t1\t2\n3\t1\t2\n9\t0\t0\n3\t4\t4\n");
  const CurveSet c = load_ucr(path);
  EXPECT_EQ(c.class_names, (std::vector<std::string>{"3", "5", "9"}));
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    EXPECT_LT(c.labels[i], c.n_classes());
  }
  EXPECT_EQ(c.labels, (std::vector<int>{1, 0, 2, 0}));
}

TEST(Table, HeaderOnlyWhenEmpty) {
  Table t({"a", "b"});
  EXPECT_EQ(t.to_csv(), "a,b\n");
}

TEST(Table, RejectsWrongWidth) {
  Table t({"a", "b"});
  EXPECT_THROW(t.add_row({std::int64_t{1}}), ValidationError);
}

TEST(Table, QuotesAndFullPrecision) {
  Table t({"name", "value"});
  t.add_row({std::string("x,\"y\""), 0.1});
  t.add_row({std::string("plain"), 1.0 / 3.0});
  const std::string csv = t.to_csv();
  EXPECT_NE(csv.find("\"x,\"\"y\"\"\",0.1\n"), std::string::npos);
  const auto pos = csv.find("plain,") + 6;
  EXPECT_EQ(std::stod(csv.substr(pos)), 1.0 / 3.0);
}

TEST(Table, WriteUnwritablePathIsIoError) {
  Table t({"a"});
  EXPECT_THROW(write_table(t, "/proc/afrf/denied.csv"), IoError);
}

TEST(UnitGrid, EndpointsAndSpacing) {
  const auto g = unit_grid(5);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[4], 1.0);
  EXPECT_NEAR(g[2], 0.5, 1e-15);
}
