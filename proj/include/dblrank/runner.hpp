// Experiment orchestration: run configuration, key=value config files, and
// the subcommand pipelines that write tables, plot data, and results files.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dblrank/core.hpp"
#include "dblrank/distkit.hpp"
#include "dblrank/doublerank.hpp"
#include "dblrank/fitkit.hpp"
#include "dblrank/indicators.hpp"
#include "dblrank/io.hpp"
#include "dblrank/synthgen.hpp"

namespace dblrank {

enum class RunMode { Synth, Analyze, DoubleRank, Fit, Indicators, Report };

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Synth: return "synth";
    case RunMode::Analyze: return "analyze";
    case RunMode::DoubleRank: return "doublerank";
    case RunMode::Fit: return "fit";
    case RunMode::Indicators: return "indicators";
    case RunMode::Report: return "report";
  }
  return "unknown";
}

struct SynthSpecEntry {
  std::string label;
  double mu = 0.0;
  double sigma = 1.0;
  std::int64_t n_papers = 0;
};

struct RunConfig {
  RunMode mode = RunMode::Report;
  std::filesystem::path input;
  std::filesystem::path out = "out";
  std::vector<double> grid = default_grid();
  std::vector<double> exclude = {100.0};
  std::int64_t min_count = 10;
  std::vector<FitMethod> methods = {FitMethod::LR};
  double percentile = 0.01;
  std::uint64_t seed = 1;
  // synth
  std::vector<SynthSpecEntry> specs;
  std::optional<SynthSpecEntry> world_extra;
  // analyze
  std::int64_t max_citations = 50;
  int css_depth = 2;
  std::int64_t tail_lo = 50;
  std::int64_t tail_hi = 400;
  // indicators without input data
  std::optional<double> ptop1;
  std::optional<double> ptop10;
  // report from an existing results file
  std::filesystem::path from_results;
};

namespace config {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::BadConfig, "bad " + what + ": '" + s + "'");
  }
}

inline std::int64_t to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::BadConfig, "bad " + what + ": '" + s + "'");
  }
}

inline std::vector<double> parse_percentile_list(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ','))
    out.push_back(to_double(part, "percentile list entry"));
  return out;
}

inline std::vector<FitMethod> parse_methods(const std::string& s) {
  std::vector<FitMethod> out;
  for (const auto& part : split(s, ',')) {
    if (part == "lr")
      out.push_back(FitMethod::LR);
    else if (part == "lm")
      out.push_back(FitMethod::LM);
    else if (part == "ml")
      out.push_back(FitMethod::ML);
    else
      fail(ErrorKind::BadConfig, "unknown fit method '" + part + "'");
  }
  if (out.empty()) fail(ErrorKind::BadConfig, "no fit methods given");
  return out;
}

// label:mu:sigma:n
inline SynthSpecEntry parse_spec_entry(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.size() != 4)
    fail(ErrorKind::BadConfig, "spec must be label:mu:sigma:n, got '" + s + "'");
  SynthSpecEntry e;
  e.label = parts[0];
  if (e.label.empty()) fail(ErrorKind::BadConfig, "spec label is empty in '" + s + "'");
  e.mu = to_double(parts[1], "spec mu");
  e.sigma = to_double(parts[2], "spec sigma");
  e.n_papers = to_int(parts[3], "spec n");
  return e;
}

// mu:sigma:n
inline SynthSpecEntry parse_world_extra(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.size() != 3)
    fail(ErrorKind::BadConfig, "world-extra must be mu:sigma:n, got '" + s + "'");
  SynthSpecEntry e;
  e.label = io::kWorldLabel;
  e.mu = to_double(parts[0], "world-extra mu");
  e.sigma = to_double(parts[1], "world-extra sigma");
  e.n_papers = to_int(parts[2], "world-extra n");
  return e;
}

// Plain key=value lines; '#' starts a comment; blank lines ignored.
inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::BadConfig, "cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = std::string(io::detail::trim(line));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::BadConfig,
           path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    auto key = std::string(io::detail::trim(std::string_view(trimmed).substr(0, eq)));
    auto value = std::string(io::detail::trim(std::string_view(trimmed).substr(eq + 1)));
    if (key.empty())
      fail(ErrorKind::BadConfig, path.string() + ":" + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

// Applies one key=value pair; config files and command-line flags both funnel
// through here so they cannot drift apart.
inline void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "input") {
    cfg.input = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "grid") {
    cfg.grid = parse_percentile_list(value);
  } else if (key == "exclude") {
    cfg.exclude = parse_percentile_list(value);
  } else if (key == "min-count") {
    cfg.min_count = to_int(value, "min-count");
  } else if (key == "methods") {
    cfg.methods = parse_methods(value);
  } else if (key == "percentile") {
    cfg.percentile = to_double(value, "percentile");
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_int(value, "seed"));
  } else if (key == "spec") {
    cfg.specs.clear();
    for (const auto& entry : split(value, ';'))
      if (!entry.empty()) cfg.specs.push_back(parse_spec_entry(entry));
  } else if (key == "world-extra") {
    cfg.world_extra = parse_world_extra(value);
  } else if (key == "max-citations") {
    cfg.max_citations = to_int(value, "max-citations");
  } else if (key == "css-depth") {
    cfg.css_depth = static_cast<int>(to_int(value, "css-depth"));
  } else if (key == "tail-window") {
    auto parts = split(value, ':');
    if (parts.size() != 2)
      fail(ErrorKind::BadConfig, "tail-window must be lo:hi, got '" + value + "'");
    cfg.tail_lo = to_int(parts[0], "tail-window lo");
    cfg.tail_hi = to_int(parts[1], "tail-window hi");
  } else if (key == "ptop1") {
    cfg.ptop1 = to_double(value, "ptop1");
  } else if (key == "ptop10") {
    cfg.ptop10 = to_double(value, "ptop10");
  } else if (key == "from-results") {
    cfg.from_results = value;
  } else {
    fail(ErrorKind::BadConfig, "unknown config key '" + key + "'");
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  for (const auto& [key, value] : parse_config_file(path)) apply_kv(cfg, key, value);
}

}  // namespace config

namespace detail {

template <typename F>
auto with_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("[") + stage + "] " + e.what());
  }
}

inline std::string format_sig4(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

// Fixed-width aligned text table.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& out) const {
    std::vector<std::size_t> widths(header_.size(), 0);
    for (std::size_t i = 0; i < header_.size(); ++i) widths[i] = header_[i].size();
    for (const auto& row : rows_)
      for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i)
        widths[i] = std::max(widths[i], row[i].size());
    auto emit = [&](const std::vector<std::string>& row) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(widths[i]) + 2) << row[i];
      }
      out << '\n';
    };
    emit(header_);
    for (const auto& row : rows_) emit(row);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace detail

// One group's evaluation: the series it was fitted on plus per-method fits
// and indicators.
struct GroupResult {
  PercentileSeries series;          // after any min-count cleaning
  PercentileSeries series_raw;      // as built from the data
  std::vector<PowerLawFit> fits;
  std::vector<IndicatorSet> indicators;
};

struct RunResults {
  RunConfig config;
  std::vector<std::pair<std::string, GroupResult>> groups;
};

namespace detail {

inline io::json results_to_json(const RunResults& results) {
  const auto& cfg = results.config;
  io::json j;
  j["tool"] = "dblrank";
  j["mode"] = to_string(cfg.mode);
  io::json params;
  params["input"] = cfg.input.string();
  params["grid"] = cfg.grid;
  params["exclude"] = cfg.exclude;
  params["min_count"] = cfg.min_count;
  io::json methods = io::json::array();
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  params["methods"] = methods;
  params["percentile"] = cfg.percentile;
  params["seed"] = cfg.seed;
  j["params"] = params;
  io::json groups = io::json::array();
  for (const auto& [label, group] : results.groups) {
    io::json g;
    g["label"] = label;
    g["series"] = io::series_to_json(group.series);
    g["series_raw"] = io::series_to_json(group.series_raw);
    io::json fits = io::json::array();
    for (std::size_t i = 0; i < group.fits.size(); ++i) {
      const auto& fit = group.fits[i];
      io::json f = io::fit_to_json(fit);
      // predictions over the raw series, including excluded percentiles;
      // the residual at the excluded top percentile is itself a diagnostic
      io::json predicted = io::json::array();
      for (const auto& p : group.series_raw.points()) {
        double value = fit.predict(p.x);
        predicted.push_back({{"x", p.x},
                             {"observed", p.n_local},
                             {"calculated", value},
                             {"difference", p.n_local - value}});
      }
      f["predicted"] = predicted;
      if (i < group.indicators.size()) {
        const auto& ind = group.indicators[i];
        io::json ij;
        ij["method"] = to_string(ind.method());
        ij["alpha"] = ind.alpha();
        ij["percentile"] = ind.percentile();
        ij["n_total"] = ind.n_total();
        ij["e_p"] = ind.e_p();
        ij["p_top_1"] = ind.p_top_1();
        ij["p_top_10"] = ind.p_top_10();
        ij["p_top_001"] = ind.p_top_001();
        ij["prob_at_percentile"] = ind.prob_at_percentile();
        ij["freq_at_percentile"] = ind.freq_at_percentile();
        ij["quality_ok"] = ind.quality_ok();
        f["indicators"] = ij;
      }
      fits.push_back(f);
    }
    g["fits"] = fits;
    groups.push_back(g);
  }
  j["groups"] = groups;
  return j;
}

struct ParsedGroup {
  std::string label;
  PercentileSeries series;
  PercentileSeries series_raw;
  std::vector<PowerLawFit> fits;
};

// Reads back the parts of a results file needed to re-render reports.
inline std::vector<ParsedGroup> results_from_json(const io::json& j) {
  std::vector<ParsedGroup> out;
  for (const auto& g : j.at("groups")) {
    std::vector<PowerLawFit> fits;
    for (const auto& f : g.at("fits")) fits.push_back(io::fit_from_json(f));
    out.push_back({g.at("label").get<std::string>(), io::series_from_json(g.at("series")),
                   io::series_from_json(g.at("series_raw")), std::move(fits)});
  }
  return out;
}

inline void write_fit_tables(const std::filesystem::path& out_dir, const RunResults& results) {
  TextTable fits({"group", "method", "A", "alpha", "chi2", "dof", "p", "P_top0.01%"});
  TextTable inds({"group", "method", "n", "e_p", "P_top1%", "P_top10%", "P_top0.01%",
                  "P(x)", "N(x)", "x", "quality"});
  for (const auto& [label, group] : results.groups) {
    for (std::size_t i = 0; i < group.fits.size(); ++i) {
      const auto& fit = group.fits[i];
      std::string chi2 = fit.chi2() ? format_sig4(*fit.chi2()) : "-";
      std::string dof = fit.dof() ? std::to_string(*fit.dof()) : "-";
      std::string p = fit.p_value() ? format_sig4(*fit.p_value()) : "-";
      std::string ptop;
      if (i < group.indicators.size()) ptop = format_sig4(group.indicators[i].p_top_001());
      fits.add_row({label, to_string(fit.method()), format_sig4(fit.a()),
                    format_sig4(fit.alpha()), chi2, dof, p, ptop});
      if (i < group.indicators.size()) {
        const auto& ind = group.indicators[i];
        inds.add_row({label, to_string(ind.method()), std::to_string(ind.n_total()),
                      format_sig4(ind.e_p()), format_sig4(ind.p_top_1()),
                      format_sig4(ind.p_top_10()), format_sig4(ind.p_top_001()),
                      format_sig4(ind.prob_at_percentile()),
                      format_sig4(ind.freq_at_percentile()), format_sig4(ind.percentile()),
                      ind.quality_ok() ? "ok" : "suspect"});
      }
    }
  }
  auto fit_file = io::detail::open_output(out_dir / "fits.txt");
  fits.write(fit_file);
  auto ind_file = io::detail::open_output(out_dir / "indicators.txt");
  inds.write(ind_file);
}

inline void write_deviation_table(const std::filesystem::path& out_dir,
                                  const RunResults& results) {
  auto out = io::detail::open_output(out_dir / "deviations.txt");
  for (const auto& [label, group] : results.groups) {
    for (const auto& fit : group.fits) {
      out << label << " (" << to_string(fit.method()) << ")\n";
      TextTable t({"percentile", "observed", "calculated", "difference"});
      for (const auto& p : group.series_raw.points()) {
        double value = fit.predict(p.x);
        t.add_row({format_sig4(p.x), format_sig4(p.n_local), format_sig4(value),
                   format_sig4(p.n_local - value)});
      }
      t.write(out);
      out << '\n';
    }
  }
}

inline void write_series_plot(const std::filesystem::path& out_dir, const std::string& label,
                              const PercentileSeries& series) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& p : series.points()) rows.emplace_back(p.x, p.n_local);
  io::write_xy(out_dir / (label + "_percentiles.txt"), rows, "top_percentile", "n_papers");
}

}  // namespace detail

namespace detail {

inline bool input_is_shares(const std::filesystem::path& path) {
  auto in = io::detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::EmptySet, path.string() + " is empty");
  auto fields = io::detail::split_csv(line);
  if (fields.size() == 2 && fields[0] == "group" && fields[1] == "citations") return false;
  if (fields.size() == 3 && fields[0] == "group" && fields[1] == "percentile" &&
      fields[2] == "share")
    return true;
  fail(ErrorKind::ParseError, path.string() + ": unrecognized header '" + line + "'");
}

inline PowerLawFit run_fit_method(const PercentileSeries& series, FitMethod method,
                                  const std::vector<double>& exclude) {
  switch (method) {
    case FitMethod::LR: return fit_lr(series, exclude);
    case FitMethod::LM: return fit_lm(series, exclude);
    case FitMethod::ML: return fit_ml(series, exclude);
    case FitMethod::ClosedForm: break;
  }
  fail(ErrorKind::BadConfig, "closed-form fits need explicit top-percentile counts");
}

inline GroupResult evaluate_series(const PercentileSeries& raw, const RunConfig& cfg) {
  PercentileSeries cleaned = clean_series(raw, cfg.min_count);
  GroupResult group{cleaned, raw, {}, {}};
  for (auto method : cfg.methods) {
    auto fit = run_fit_method(cleaned, method, cfg.exclude);
    group.indicators.emplace_back(fit, cleaned.local_size(), cfg.percentile);
    group.fits.push_back(std::move(fit));
  }
  return group;
}

inline std::vector<std::pair<std::string, PercentileSeries>> build_series(
    const RunConfig& cfg) {
  if (input_is_shares(cfg.input)) return io::load_shares(cfg.input);
  auto resolved = io::resolve_world(io::load_citations(cfg.input));
  WorldIndex world(resolved.world);
  std::vector<std::pair<std::string, PercentileSeries>> out;
  for (const auto& local : resolved.locals)
    out.emplace_back(local.label(), percentile_series(local, world, cfg.grid));
  return out;
}

inline void run_synth(const RunConfig& cfg) {
  if (cfg.specs.empty())
    fail(ErrorKind::BadConfig, "synth needs at least one spec (label:mu:sigma:n)");
  std::vector<CitationSet> sets;
  std::uint64_t stream = cfg.seed;
  for (const auto& entry : cfg.specs) {
    LognormalSpec spec(entry.mu, entry.sigma, entry.n_papers, stream++);
    sets.push_back(sample_lognormal(spec, entry.label));
  }
  std::vector<CitationSet> all = sets;
  if (cfg.world_extra) {
    LognormalSpec extra(cfg.world_extra->mu, cfg.world_extra->sigma, cfg.world_extra->n_papers,
                        stream++);
    all.push_back(compose_world(sets, extra));
  }
  for (const auto& set : all)
    io::save_citations(cfg.out / (set.label() + ".csv"), {set});
  io::save_citations(cfg.out / "citations.csv", all);
}

inline void run_analyze(const RunConfig& cfg) {
  if (input_is_shares(cfg.input))
    fail(ErrorKind::BadConfig, "analyze needs per-paper citation counts, not shares");
  auto sets = io::load_citations(cfg.input);
  io::json summary = io::json::array();
  auto table_out = io::detail::open_output(cfg.out / "summary.txt");
  TextTable table({"group", "papers", "mean", "max", "css_thresholds", "css_shares",
                   "tail_a", "tail_alpha"});
  for (const auto& set : sets) {
    auto hist = histogram(set, cfg.max_citations);
    auto bins = log_bins(set);
    auto rf = rank_frequency(set);

    std::vector<std::pair<double, double>> hist_rows;
    for (std::size_t c = 0; c < hist.counts.size(); ++c)
      hist_rows.emplace_back(static_cast<double>(c), static_cast<double>(hist.counts[c]));
    io::write_xy(cfg.out / (set.label() + "_histogram.txt"), hist_rows, "citations", "papers");

    std::vector<std::pair<double, double>> bin_rows;
    for (const auto& bin : bins) {
      double center = bin.lo == 0 ? 0.0
                                  : std::sqrt(static_cast<double>(bin.lo) *
                                              static_cast<double>(bin.hi));
      bin_rows.emplace_back(center, static_cast<double>(bin.count));
    }
    io::write_xy(cfg.out / (set.label() + "_logbins.txt"), bin_rows, "bin_center", "papers");

    std::vector<std::pair<double, double>> rank_rows, cum_rows;
    const auto& sorted = rf.sorted_counts();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      rank_rows.emplace_back(static_cast<double>(sorted[i]), static_cast<double>(i + 1));
      cum_rows.emplace_back(static_cast<double>(sorted[i]),
                            static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
    }
    io::write_xy(cfg.out / (set.label() + "_rank_frequency.txt"), rank_rows, "citations",
                 "rank");
    io::write_xy(cfg.out / (set.label() + "_cumulative.txt"), cum_rows, "citations",
                 "cumulative_probability");

    io::json entry;
    entry["label"] = set.label();
    entry["papers"] = set.size();
    entry["mean"] = set.mean();
    entry["max"] = set.max_count();
    entry["histogram_omitted_tail"] = hist.omitted_tail;
    std::string css_thresholds = "-";
    std::string css_shares = "-";
    try {
      auto css = css_classify(set, cfg.css_depth);
      entry["css_thresholds"] = css.thresholds();
      entry["css_shares"] = css.class_shares();
      std::string sep;
      css_thresholds.clear();
      for (double m : css.thresholds()) {
        css_thresholds += sep + format_sig4(m);
        sep = "/";
      }
      css_shares.clear();
      sep = "";
      for (double s : css.class_shares()) {
        css_shares += sep + format_sig4(s);
        sep = "/";
      }
    } catch (const Error& e) {
      entry["css_error"] = e.what();
    }
    std::string tail_a = "-";
    std::string tail_alpha = "-";
    try {
      auto tail = tail_power_fit(rf, cfg.tail_lo, cfg.tail_hi);
      entry["tail_a"] = tail.a();
      entry["tail_alpha"] = tail.decay_exponent();
      tail_a = format_sig4(tail.a());
      tail_alpha = format_sig4(tail.decay_exponent());
    } catch (const Error& e) {
      entry["tail_error"] = e.what();
    }
    summary.push_back(entry);
    table.add_row({set.label(), std::to_string(set.size()), format_sig4(set.mean()),
                   std::to_string(set.max_count()), css_thresholds, css_shares, tail_a,
                   tail_alpha});
  }
  table.write(table_out);
  io::write_json(cfg.out / "analysis.json", summary);
}

inline void run_doublerank(const RunConfig& cfg) {
  if (input_is_shares(cfg.input))
    fail(ErrorKind::BadConfig, "doublerank needs per-paper citation counts, not shares");
  auto resolved = io::resolve_world(io::load_citations(cfg.input));
  WorldIndex world(resolved.world);
  io::json groups = io::json::array();
  for (const auto& local : resolved.locals) {
    auto pairs = global_ranks(local, world);
    std::vector<std::pair<double, double>> rows;
    rows.reserve(pairs.size());
    for (const auto& pair : pairs)
      rows.emplace_back(pair.global_rank, static_cast<double>(pair.local_rank));
    io::write_xy(cfg.out / (local.label() + "_doublerank.txt"), rows, "global_rank",
                 "local_rank");
    auto series = percentile_series(local, world, cfg.grid);
    write_series_plot(cfg.out, local.label(), series);
    io::json g;
    g["label"] = local.label();
    g["series"] = io::series_to_json(series);
    groups.push_back(g);
  }
  io::json j;
  j["tool"] = "dblrank";
  j["mode"] = to_string(cfg.mode);
  j["world_label"] = resolved.world.label();
  j["world_size"] = resolved.world.size();
  j["groups"] = groups;
  io::write_json(cfg.out / "doublerank.json", j);
}

inline RunResults run_fit_pipeline(const RunConfig& cfg) {
  RunResults results{cfg, {}};
  if (cfg.mode == RunMode::Indicators && cfg.ptop1 && cfg.ptop10) {
    auto fit = closed_form_fit(*cfg.ptop1, *cfg.ptop10);
    // the law's own normalization: N = N(100) = A * 100^alpha
    auto n_total = std::max<std::int64_t>(1, std::llround(fit.predict(100.0)));
    double share_scale = 100.0 / static_cast<double>(n_total);
    std::vector<PercentilePoint> pts{{1.0, *cfg.ptop1, *cfg.ptop1 * share_scale},
                                     {10.0, *cfg.ptop10, *cfg.ptop10 * share_scale}};
    PercentileSeries series("(external)", "ptops", std::nullopt, n_total, std::move(pts),
                            true);
    GroupResult group{series, series, {}, {}};
    group.indicators.emplace_back(fit, n_total, cfg.percentile);
    group.fits.push_back(std::move(fit));
    results.groups.emplace_back("ptops", std::move(group));
    return results;
  }
  for (auto& [label, series] : build_series(cfg))
    results.groups.emplace_back(label, evaluate_series(series, cfg));
  return results;
}

inline void emit_fit_artifacts(const RunConfig& cfg, const RunResults& results) {
  io::write_json(cfg.out / "results.json", results_to_json(results));
  write_fit_tables(cfg.out, results);
  write_deviation_table(cfg.out, results);
  for (const auto& [label, group] : results.groups)
    write_series_plot(cfg.out, label, group.series_raw);
}

inline void run_report_from_results(const RunConfig& cfg) {
  auto j = io::read_json(cfg.from_results);
  auto groups = results_from_json(j);
  RunResults results{cfg, {}};
  for (auto& parsed : groups) {
    GroupResult group{parsed.series, parsed.series_raw, std::move(parsed.fits), {}};
    for (const auto& fit : group.fits)
      group.indicators.emplace_back(fit, group.series.local_size(), cfg.percentile);
    results.groups.emplace_back(parsed.label, std::move(group));
  }
  write_fit_tables(cfg.out, results);
  write_deviation_table(cfg.out, results);
}

}  // namespace detail

// Executes the configured pipeline, writing all artifacts under cfg.out.
// Throws dblrank::Error with a stage-tagged message on failure.
inline void run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.mode != RunMode::Synth && !(cfg.mode == RunMode::Indicators && cfg.ptop1) &&
      cfg.from_results.empty()) {
    if (cfg.input.empty())
      fail(ErrorKind::BadConfig, std::string(to_string(cfg.mode)) + " needs --input");
    if (!fs::exists(cfg.input))
      fail(ErrorKind::BadConfig, "input file does not exist: " + cfg.input.string());
  }
  if (cfg.mode == RunMode::Indicators && cfg.ptop1.has_value() != cfg.ptop10.has_value())
    fail(ErrorKind::BadConfig, "ptop1 and ptop10 must be given together");
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create output directory " + cfg.out.string());

  switch (cfg.mode) {
    case RunMode::Synth:
      detail::with_stage("synth", [&] { detail::run_synth(cfg); });
      return;
    case RunMode::Analyze:
      detail::with_stage("analyze", [&] { detail::run_analyze(cfg); });
      return;
    case RunMode::DoubleRank:
      detail::with_stage("doublerank", [&] { detail::run_doublerank(cfg); });
      return;
    case RunMode::Fit:
    case RunMode::Indicators: {
      auto results = detail::with_stage("fit", [&] { return detail::run_fit_pipeline(cfg); });
      detail::with_stage("emit", [&] { detail::emit_fit_artifacts(cfg, results); });
      return;
    }
    case RunMode::Report: {
      if (!cfg.from_results.empty()) {
        detail::with_stage("report", [&] { detail::run_report_from_results(cfg); });
        return;
      }
      if (!detail::input_is_shares(cfg.input)) {
        detail::with_stage("analyze", [&] { detail::run_analyze(cfg); });
        detail::with_stage("doublerank", [&] { detail::run_doublerank(cfg); });
      }
      auto results = detail::with_stage("fit", [&] { return detail::run_fit_pipeline(cfg); });
      detail::with_stage("emit", [&] { detail::emit_fit_artifacts(cfg, results); });
      return;
    }
  }
  fail(ErrorKind::BadConfig, "unhandled run mode");
}

}  // namespace dblrank
