#include "fbstore/io.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbstore {

const char* version() { return FBSTORE_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json meta_json(const RunMeta& meta) {
  Json j;
  j["tool"] = "fbstore";
  j["version"] = version();
  j["command"] = meta.command;
  j["config"] = meta.config;
  j["seed"] = meta.seed ? Json(*meta.seed) : Json(nullptr);
  return j;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

namespace {

void write_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

}  // namespace

void CsvTable::write(std::ostream& os, const RunMeta& meta) const {
  const Json m = meta_json(meta);
  os << "# tool=" << m["tool"].get<std::string>() << '\n';
  os << "# version=" << m["version"].get<std::string>() << '\n';
  os << "# command=" << meta.command << '\n';
  os << "# seed=" << (meta.seed ? std::to_string(*meta.seed) : std::string("none")) << '\n';
  os << "# config=" << meta.config.dump() << '\n';
  write_line(os, header_);
  for (const auto& row : rows_) write_line(os, row);
}

std::string CsvTable::str(const RunMeta& meta) const {
  std::ostringstream os;
  write(os, meta);
  return os.str();
}

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Json vec(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

Json to_json(const RatePath& p, bool include_path) {
  Json j;
  j["hurst"] = p.hurst;
  j["set"] = to_string(p.kind);
  j["delta"] = p.delta;
  j["eps"] = p.eps;
  j["horizon"] = p.horizon;
  j["n"] = p.n;
  j["value"] = number(p.value);
  j["dual_value"] = number(p.dual_value);
  j["kkt_residual"] = number(p.kkt_residual);
  j["duality_gap"] = number(p.duality_gap);
  j["jitter"] = p.jitter;
  j["gradient_iterations"] = p.gradient_iterations;
  j["active_set_iterations"] = p.active_set_iterations;
  j["terminal_time"] = p.terminal_time ? number(*p.terminal_time) : Json(nullptr);
  j["horizon_flag"] = p.horizon_flag;
  if (include_path) {
    j["grid"] = vec(p.grid.points());
    j["z"] = vec(p.z);
    j["dual"] = vec(p.dual);
  }
  return j;
}

Json to_json(const InfimumComparison& c) {
  Json j;
  j["hurst"] = c.hurst;
  j["A"] = number(c.value_a);
  j["A_bar"] = number(c.value_a_bar);
  j["B"] = number(c.value_b);
  j["rel_A_Abar"] = number(c.rel_a_abar);
  j["rel_A_B"] = number(c.rel_a_b);
  j["rel_Abar_B"] = number(c.rel_abar_b);
  j["max_relative_difference"] = number(c.max_relative_difference);
  j["horizon_flag"] = c.horizon_flag;
  return j;
}

Json to_json(const DecayFit& f) {
  Json j;
  j["hurst"] = f.hurst;
  j["slope"] = number(f.slope);
  j["intercept"] = number(f.intercept);
  j["r_squared"] = number(f.r_squared);
  j["slope_se"] = number(f.slope_se);
  j["points_used"] = f.points_used;
  j["horizons_used"] = vec(f.horizons_used);
  j["excluded_horizons"] = vec(f.excluded_horizons);
  return j;
}

Json to_json(const DistanceEstimate& e) {
  Json j;
  j["value"] = number(e.value);
  j["ci_half_width"] = number(e.half_width);
  j["reps"] = e.reps;
  return j;
}

Json to_json(const GammaEstimate& e) {
  Json j;
  j["x"] = e.x;
  j["t"] = e.t;
  j["t_ref"] = e.t_ref;
  j["step"] = e.step;
  j["reps"] = e.reps;
  j["estimate"] = number(e.estimate);
  j["ci_lower"] = number(e.ci_lower);
  j["ci_upper"] = number(e.ci_upper);
  j["half_width"] = number(e.half_width);
  j["count"] = e.count;
  j["hits_t"] = e.hits_t;
  j["hits_ref"] = e.hits_ref;
  return j;
}

Json to_json(const HorizonResponse& r) {
  Json j;
  j["t"] = number(r.t);
  j["t_star"] = number(r.t_star);
  j["theta"] = number(r.theta);
  j["numerator_rate"] = number(r.numerator_rate);
  j["denominator_rate"] = number(r.denominator_rate);
  j["discrete_time_correction"] = false;
  if (r.theta_certificate) j["theta_certificate"] = to_json(*r.theta_certificate, false);
  return j;
}

Json to_json(const KRateResult& r) {
  Json j;
  j["k_rate"] = number(r.value);
  j["s_star"] = number(r.s_star);
  j["s_max"] = number(r.s_max);
  j["horizon_flag"] = r.horizon_flag;
  return j;
}

Json to_json(const CovEstimate& e) {
  Json j;
  j["warmup"] = e.warmup;
  j["step"] = e.step;
  j["reps"] = e.reps;
  j["mean_q"] = number(e.mean_q);
  j["lags"] = vec(e.lags);
  j["cov"] = vec(e.cov);
  j["ci_half_width"] = vec(e.ci_half_width);
  return j;
}

Json to_json(const ConjectureReport& r) {
  Json j;
  j["hurst"] = r.hurst;
  j["points"] = r.points;
  Json p;
  p["exponent"] = number(r.power_exponent);
  p["exponent_target"] = number(r.power_exponent_target);
  p["gamma_hat"] = number(r.power_amplitude);
  p["gamma_hat_se"] = number(r.power_amplitude_se);
  p["r_squared"] = number(r.power_r_squared);
  j["power"] = p;
  Json w;
  w["rate"] = number(r.weibull_rate);
  w["amplitude"] = number(r.weibull_amplitude);
  w["r_squared"] = number(r.weibull_r_squared);
  j["weibull"] = w;
  j["preferred"] = to_string(r.preferred);
  return j;
}

std::string json_document(const RunMeta& meta, const std::string& key, const Json& body) {
  Json doc;
  doc["meta"] = meta_json(meta);
  doc[key] = body;
  return doc.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace fbstore
