// Dataset ingestion (citation and share CSVs), plot-data emission, and the
// machine-readable results file.
#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dblrank/core.hpp"
#include "dblrank/doublerank.hpp"

namespace dblrank::io {

inline constexpr const char* kWorldLabel = "WORLD";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

[[noreturn]] inline void parse_fail(const std::filesystem::path& path, std::size_t line_no,
                                    const std::string& what) {
  fail(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + what);
}

inline std::int64_t parse_int(std::string_view field, const std::filesystem::path& path,
                              std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    parse_fail(path, line_no, "expected an integer, got '" + std::string(field) + "'");
  return value;
}

inline double parse_double(std::string_view field, const std::filesystem::path& path,
                           std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    parse_fail(path, line_no, "expected a number, got '" + std::string(field) + "'");
  return value;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace detail

// Parses a `group,citations` CSV, one row per paper, into one CitationSet per
// group in order of first appearance. Negative or malformed rows are parse
// errors naming the offending line.
inline std::vector<CitationSet> load_citations(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::EmptySet, path.string() + " is empty");
  ++line_no;
  auto header = detail::split_csv(line);
  if (header.size() != 2 || header[0] != "group" || header[1] != "citations")
    detail::parse_fail(path, line_no, "expected header 'group,citations'");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::int64_t>> by_group;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() != 2) detail::parse_fail(path, line_no, "expected 2 columns");
    std::string group(fields[0]);
    if (group.empty()) detail::parse_fail(path, line_no, "empty group label");
    std::int64_t citations = detail::parse_int(fields[1], path, line_no);
    if (citations < 0) detail::parse_fail(path, line_no, "negative citation count");
    auto [it, inserted] = by_group.try_emplace(group);
    if (inserted) order.push_back(group);
    it->second.push_back(citations);
  }
  if (order.empty()) fail(ErrorKind::EmptySet, path.string() + " holds no data rows");
  std::vector<CitationSet> sets;
  sets.reserve(order.size());
  for (const auto& label : order) sets.emplace_back(label, std::move(by_group[label]));
  return sets;
}

// Splits loaded groups into locals and a world set. A group named WORLD is
// the explicit world; otherwise the world is the union of all groups.
struct ResolvedGroups {
  std::vector<CitationSet> locals;
  CitationSet world;
};

inline ResolvedGroups resolve_world(std::vector<CitationSet> sets) {
  std::optional<CitationSet> world;
  std::vector<CitationSet> locals;
  for (auto& set : sets) {
    if (set.label() == kWorldLabel)
      world.emplace(std::move(set));
    else
      locals.push_back(std::move(set));
  }
  if (!world) {
    std::vector<std::int64_t> all;
    for (const auto& set : locals)
      all.insert(all.end(), set.counts().begin(), set.counts().end());
    if (all.empty()) fail(ErrorKind::EmptySet, "no groups to build a world set from");
    world.emplace(kWorldLabel, std::move(all));
  }
  if (locals.empty()) fail(ErrorKind::EmptySet, "input provides no local groups");
  return {std::move(locals), std::move(*world)};
}

// Parses a `group,percentile,share` CSV into one normalized percentile series
// per group. Rows may arrive in any order; duplicate percentiles within a
// group are rejected.
inline std::vector<std::pair<std::string, PercentileSeries>> load_shares(
    const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::EmptySet, path.string() + " is empty");
  ++line_no;
  auto header = detail::split_csv(line);
  if (header.size() != 3 || header[0] != "group" || header[1] != "percentile" ||
      header[2] != "share")
    detail::parse_fail(path, line_no, "expected header 'group,percentile,share'");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> by_group;
  std::map<std::string, std::size_t> first_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() != 3) detail::parse_fail(path, line_no, "expected 3 columns");
    std::string group(fields[0]);
    if (group.empty()) detail::parse_fail(path, line_no, "empty group label");
    double x = detail::parse_double(fields[1], path, line_no);
    double share = detail::parse_double(fields[2], path, line_no);
    auto [it, inserted] = by_group.try_emplace(group);
    if (inserted) {
      order.push_back(group);
      first_line[group] = line_no;
    }
    for (const auto& [seen_x, seen_share] : it->second)
      if (seen_x == x)
        detail::parse_fail(path, line_no,
                           "duplicate percentile " + std::to_string(x) + " for group '" +
                               group + "'");
    it->second.emplace_back(x, share);
  }
  if (order.empty()) fail(ErrorKind::EmptySet, path.string() + " holds no data rows");
  std::vector<std::pair<std::string, PercentileSeries>> out;
  out.reserve(order.size());
  for (const auto& label : order) {
    try {
      out.emplace_back(label, series_from_shares(std::move(by_group[label]), std::nullopt, label));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NonMonotone || e.kind() == ErrorKind::BadGrid) throw;
      detail::parse_fail(path, first_line[label], e.what());
    }
  }
  return out;
}

inline void save_citations(const std::filesystem::path& path,
                           const std::vector<CitationSet>& sets) {
  auto out = detail::open_output(path);
  out << "group,citations\n";
  for (const auto& set : sets)
    for (auto c : set.counts()) out << set.label() << ',' << c << '\n';
}

// Two-column whitespace-delimited plot data with a single comment header.
inline void write_xy(const std::filesystem::path& path,
                     const std::vector<std::pair<double, double>>& rows, const char* x_name,
                     const char* y_name) {
  auto out = detail::open_output(path);
  out << "# " << x_name << ' ' << y_name << '\n';
  std::ostringstream buf;
  buf.precision(17);
  for (const auto& [x, y] : rows) {
    buf.str("");
    buf << x << ' ' << y << '\n';
    out << buf.str();
  }
}

using json = nlohmann::ordered_json;

inline json series_to_json(const PercentileSeries& series) {
  json points = json::array();
  for (const auto& p : series.points())
    points.push_back({{"x", p.x}, {"n", p.n_local}, {"share", p.share}});
  json j;
  j["local_label"] = series.local_label();
  j["world_label"] = series.world_label();
  j["local_size"] = series.local_size();
  if (series.world_size())
    j["world_size"] = *series.world_size();
  else
    j["world_size"] = nullptr;
  j["counts_synthetic"] = series.counts_synthetic();
  j["points"] = points;
  return j;
}

inline PercentileSeries series_from_json(const json& j) {
  std::vector<PercentilePoint> points;
  for (const auto& p : j.at("points"))
    points.push_back({p.at("x").get<double>(), p.at("n").get<double>(),
                      p.at("share").get<double>()});
  std::optional<std::int64_t> world_size;
  if (!j.at("world_size").is_null()) world_size = j.at("world_size").get<std::int64_t>();
  return PercentileSeries(j.at("world_label").get<std::string>(),
                          j.at("local_label").get<std::string>(), world_size,
                          j.at("local_size").get<std::int64_t>(), std::move(points),
                          j.at("counts_synthetic").get<bool>());
}

inline json fit_to_json(const PowerLawFit& fit) {
  json j;
  j["method"] = to_string(fit.method());
  j["a"] = fit.a();
  j["alpha"] = fit.alpha();
  if (fit.chi2()) {
    j["chi2"] = *fit.chi2();
    j["dof"] = *fit.dof();
    j["p_value"] = *fit.p_value();
  } else {
    j["chi2"] = nullptr;
    j["dof"] = nullptr;
    j["p_value"] = nullptr;
  }
  json points = json::array();
  for (const auto& [x, n] : fit.points_used()) points.push_back({{"x", x}, {"n", n}});
  j["points_used"] = points;
  return j;
}

inline PowerLawFit fit_from_json(const json& j) {
  std::vector<std::pair<double, double>> points;
  for (const auto& p : j.at("points_used"))
    points.emplace_back(p.at("x").get<double>(), p.at("n").get<double>());
  FitMethod method = FitMethod::LR;
  auto name = j.at("method").get<std::string>();
  if (name == "lm")
    method = FitMethod::LM;
  else if (name == "ml")
    method = FitMethod::ML;
  else if (name == "closed_form")
    method = FitMethod::ClosedForm;
  std::optional<double> chi2, p_value;
  std::optional<int> dof;
  if (!j.at("chi2").is_null()) {
    chi2 = j.at("chi2").get<double>();
    dof = j.at("dof").get<int>();
    p_value = j.at("p_value").get<double>();
  }
  return PowerLawFit(j.at("a").get<double>(), j.at("alpha").get<double>(), method,
                     std::move(points), chi2, dof, p_value);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace dblrank::io
