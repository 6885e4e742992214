#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "fbstore/io.h"

using namespace fbstore;

TEST(FormatDouble, RoundTripsAndShortest) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(Number, NonFiniteBecomesString) {
  EXPECT_TRUE(number(1.5).is_number());
  EXPECT_EQ(number(std::numeric_limits<double>::infinity()), Json("inf"));
}

TEST(CsvTable, MetaLinesHeaderAndRows) {
  CsvTable t({"a", "b"});
  t.add_row(std::vector<double>{1.0, 0.25});
  t.add_row(std::vector<std::string>{"x", "y"});
  RunMeta m{"rate", Json{{"h", 0.5}}, 7};
  const std::string s = t.str(m);
  std::istringstream in(s);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 8u);
  EXPECT_EQ(lines[0], "# tool=fbstore");
  EXPECT_EQ(lines[1], std::string("# version=") + version());
  EXPECT_EQ(lines[2], "# command=rate");
  EXPECT_EQ(lines[3], "# seed=7");
  EXPECT_EQ(lines[4], "# config={\"h\":0.5}");
  EXPECT_EQ(lines[5], "a,b");
  EXPECT_EQ(lines[6], "1,0.25");
  EXPECT_EQ(lines[7], "x,y");
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_EQ(t.rows(), 2u);
}

TEST(CsvTable, SeedlessAndWidthMismatch) {
  CsvTable t({"a"});
  EXPECT_NE(t.str(RunMeta{"srd", Json::object(), std::nullopt}).find("# seed=none"), std::string::npos);
  EXPECT_THROW(t.add_row(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(JsonDocument, EmbedsMeta) {
  const RunMeta m{"horizon", Json{{"x", 1.0}}, std::nullopt};
  const auto doc = json_document(m, "horizon", Json{{"t", 2.0}});
  ASSERT_FALSE(doc.empty());
  EXPECT_EQ(doc.back(), '\n');
  const auto j = Json::parse(doc);
  EXPECT_EQ(j["meta"]["tool"], "fbstore");
  EXPECT_EQ(j["meta"]["version"], version());
  EXPECT_EQ(j["meta"]["command"], "horizon");
  EXPECT_TRUE(j["meta"]["seed"].is_null());
  EXPECT_EQ(j["meta"]["config"]["x"], 1.0);
  EXPECT_EQ(j["horizon"]["t"], 2.0);
  EXPECT_EQ(doc, json_document(m, "horizon", Json{{"t", 2.0}}));
}

TEST(JsonDocument, HorizonResponseFields) {
  const auto r = horizon(HorizonRequest(HurstParam(0.5), 0.5, 1.0, 0.05));
  const auto j = to_json(r);
  EXPECT_EQ(j["discrete_time_correction"], false);
  EXPECT_NEAR(j["t"].get<double>(), r.t, 0.0);
}

TEST(WriteFile, CreatesParentDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "fbstore_io_test" / "a" / "b";
  std::filesystem::remove_all(dir.parent_path().parent_path());
  write_file((dir / "x.txt").string(), "hello\n");
  std::ifstream in(dir / "x.txt");
  std::string s((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(s, "hello\n");
  std::filesystem::remove_all(dir.parent_path().parent_path());
}
