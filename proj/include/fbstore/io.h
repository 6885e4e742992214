#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbstore/covprobe.h"
#include "fbstore/horizon.h"
#include "fbstore/metrics.h"
#include "fbstore/rate.h"
#include "fbstore/srd.h"
#include "fbstore/storage.h"

namespace fbstore {

using Json = nlohmann::ordered_json;

const char* version();

/// Shortest decimal text that round-trips to the same double ("inf",
/// "-inf" and "nan" for non-finite values).
std::string format_double(double v);

/// Provenance block embedded in every output file.
struct RunMeta {
  std::string command;
  Json config = Json::object();
  std::optional<std::uint64_t> seed;
};

Json meta_json(const RunMeta& meta);

/// Tabular output: `# key=value` provenance lines, a header row, then rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);
  std::size_t rows() const noexcept { return rows_.size(); }

  void write(std::ostream& os, const RunMeta& meta) const;
  std::string str(const RunMeta& meta) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// JSON numbers for doubles; non-finite values become strings.
Json number(double v);

Json to_json(const RatePath& path, bool include_path = true);
Json to_json(const InfimumComparison& cmp);
Json to_json(const DecayFit& fit);
Json to_json(const DistanceEstimate& est);
Json to_json(const GammaEstimate& est);
Json to_json(const HorizonResponse& resp);
Json to_json(const KRateResult& res);
Json to_json(const CovEstimate& est);
Json to_json(const ConjectureReport& rep);

/// Document {"meta": ..., key: body} rendered with two-space indentation and
/// a trailing newline.
std::string json_document(const RunMeta& meta, const std::string& key, const Json& body);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::string& path, const std::string& content);

}  // namespace fbstore
