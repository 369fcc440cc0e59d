#pragma once

// File formats: experiment configs (JSON), result tables (CSV), summaries
// (JSON), log-log plots (SVG), observation CSVs and schedule JSON.

#include "invdens/error.hpp"
#include "invdens/harness.hpp"
#include "invdens/sampling.hpp"
#include "invdens/simulate.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace invdens::io {

using json = nlohmann::json;

inline std::string format_double(double v)
{
  if (std::isnan(v))
    return "NA";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline json read_json(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::configuration, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::configuration, "cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// Config

namespace detail {

inline Matrix matrix_from_json(const json& j, int d)
{
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    fail(ErrorKind::configuration, "matrix must have " + std::to_string(d) + " rows");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      fail(ErrorKind::configuration, "matrix rows must have " + std::to_string(d) + " entries");
    for (int k = 0; k < d; ++k)
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

inline ScheduleSpec schedule_from_json(const json& j)
{
  ScheduleSpec s;
  const auto mode = j.value("mode", std::string("sync"));
  if (mode == "sync")
    s.kind = ScheduleKind::sync;
  else if (mode == "phase")
    s.kind = ScheduleKind::phase;
  else if (mode == "jitter")
    s.kind = ScheduleKind::jitter;
  else if (mode == "staggered")
    s.kind = ScheduleKind::staggered;
  else
    fail(ErrorKind::configuration, "unknown schedule mode '" + mode + "'");
  s.offsets = j.value("offsets", std::vector<double>{});
  s.jitter_fraction = j.value("fraction", 0.0);
  return s;
}

} // namespace detail

inline ExperimentConfig config_from_json(const json& j)
{
  try {
    ExperimentConfig cfg;
    const auto& m = j.at("model");
    cfg.model.id = m.value("id", std::string("ou"));
    cfg.model.d = m.at("d").get<int>();
    cfg.model.theta = m.value("theta", 1.0);
    cfg.model.sigma = m.value("sigma", std::sqrt(2.0));
    cfg.model.scale = m.value("scale", 1.0);
    if (m.contains("drift_matrix"))
      cfg.model.drift_matrix = detail::matrix_from_json(m["drift_matrix"], cfg.model.d);
    if (m.contains("noise_matrix"))
      cfg.model.noise_matrix = detail::matrix_from_json(m["noise_matrix"], cfg.model.d);

    cfg.smoothness = SmoothnessSpec(j.at("smoothness").get<std::vector<double>>());
    const auto est = j.value("estimator", std::string("sync"));
    if (est == "sync")
      cfg.estimator = EstimatorMode::sync;
    else if (est == "async")
      cfg.estimator = EstimatorMode::async;
    else if (est == "hybrid")
      cfg.estimator = EstimatorMode::hybrid;
    else if (est == "continuous")
      cfg.estimator = EstimatorMode::continuous;
    else
      fail(ErrorKind::configuration, "unknown estimator '" + est + "'");

    cfg.point = j.value("point", std::vector<double>{});
    cfg.kernel_order = j.value("kernel_order", 2);
    cfg.replications = j.at("replications").get<int>();
    cfg.seed = j.value("seed", std::uint64_t{ 1 });
    cfg.workers = j.value("workers", 1);
    cfg.burn_in = j.value("burn_in", kDefaultBurnIn);
    cfg.fine_steps = j.value("fine_steps", kDefaultFineSteps);
    cfg.strip_log = j.value("strip_log", false);
    cfg.histogram_fallback = j.value("histogram_fallback", false);
    cfg.histogram_time = j.value("histogram_time", 1e5);
    cfg.histogram_bin = j.value("histogram_bin", 0.25);
    const auto scale = j.value("scale", std::string("T"));
    if (scale != "T" && scale != "n")
      fail(ErrorKind::configuration, "scale must be \"T\" or \"n\"");
    cfg.scale = scale == "T" ? RateExponent::Base::T : RateExponent::Base::n;

    if (j.contains("bandwidth")) {
      const auto& b = j["bandwidth"];
      const auto rule = b.value("rule", std::string("continuous"));
      if (rule == "continuous")
        cfg.bandwidth = BandwidthRule::continuous;
      else if (rule == "intermediate")
        cfg.bandwidth = BandwidthRule::intermediate;
      else if (rule == "d2")
        cfg.bandwidth = BandwidthRule::d2;
      else if (rule == "explicit") {
        cfg.bandwidth = BandwidthRule::explicit_vector;
        cfg.explicit_bandwidth = b.at("h").get<std::vector<double>>();
      } else
        fail(ErrorKind::configuration, "unknown bandwidth rule '" + rule + "'");
    }
    if (j.contains("acceptance")) {
      const auto& a = j["acceptance"];
      if (a.contains("expected_slope"))
        cfg.expected_slope = a["expected_slope"].get<double>();
      cfg.slope_tolerance = a.value("tolerance", 0.25);
    }

    for (const auto& r : j.at("sweep")) {
      SweepRow row;
      row.n = r.at("n").get<long>();
      row.delta = r.value("delta", 0.0);
      row.horizon = r.value("T", 0.0);
      if (r.contains("schedule"))
        row.schedule = detail::schedule_from_json(r["schedule"]);
      cfg.sweep.push_back(std::move(row));
    }
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path)
{
  return config_from_json(read_json(path));
}

// ---------------------------------------------------------------------------
// Results

inline constexpr const char* kResultHeader =
  "scale,delta_n,delta_prime_n,mse,bias_sq,variance,stderr,regime,theory_exponent";

inline std::string result_csv(const ResultTable& table)
{
  std::ostringstream os;
  os << kResultHeader << '\n';
  for (const auto& r : table.rows) {
    os << format_double(r.scale) << ',' << format_double(r.delta_n) << ',' << format_double(r.delta_prime_n) << ','
       << format_double(r.mse) << ',' << format_double(r.bias_sq) << ',' << format_double(r.variance) << ','
       << format_double(r.stderr_mse) << ',' << r.regime << ','
       << (r.theory_exponent ? format_double(*r.theory_exponent) : std::string("NA")) << '\n';
  }
  return os.str();
}

struct Summary
{
  FitResult fit;
  std::optional<double> theory_exponent;
  std::optional<double> expected_slope;
  double tolerance = 0.25;
  std::optional<bool> pass;
};

inline Summary summarize(const ExperimentConfig& cfg, const ResultTable& table)
{
  Summary s;
  s.fit = fit_exponent(table, cfg.scale, cfg.strip_log);
  if (!table.rows.empty())
    s.theory_exponent = table.rows.front().theory_exponent;
  s.expected_slope = cfg.expected_slope;
  if (!s.expected_slope && s.theory_exponent)
    s.expected_slope = -*s.theory_exponent;
  s.tolerance = cfg.slope_tolerance;
  if (s.expected_slope)
    s.pass = std::abs(s.fit.slope - *s.expected_slope) <= s.tolerance;
  return s;
}

inline json summary_json(const ExperimentConfig& cfg, const ResultTable& table, const Summary& s)
{
  json j;
  j["base"] = std::string(to_string(cfg.scale));
  j["strip_log"] = cfg.strip_log;
  j["oracle"] = table.oracle;
  j["fitted_slope"] = s.fit.slope;
  j["intercept"] = s.fit.intercept;
  j["slope_stderr"] = s.fit.stderr_slope;
  j["rows_used"] = s.fit.used_rows;
  j["warnings"] = s.fit.warnings;
  j["theory_exponent"] = s.theory_exponent ? json(*s.theory_exponent) : json(nullptr);
  j["expected_slope"] = s.expected_slope ? json(*s.expected_slope) : json(nullptr);
  j["tolerance"] = s.tolerance;
  json rule;
  rule["rule"] = "|fitted_slope - expected_slope| <= tolerance";
  rule["pass"] = s.pass ? json(*s.pass) : json(nullptr);
  j["acceptance"] = json::array({ rule });
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({ { "n", r.n },
                     { "T", r.horizon },
                     { "bandwidth", r.bandwidth },
                     { "mean_estimate", r.mean_estimate },
                     { "target", r.target },
                     { "threshold_ratio", r.threshold_ratio },
                     { "diverged", r.diverged } });
  }
  j["rows"] = rows;
  return j;
}

//! Log-log scatter of MSE against the scale with the fitted line.
inline std::string result_svg(const ResultTable& table, const FitResult& fit, bool strip_log)
{
  const double w = 640;
  const double hgt = 480;
  const double pad = 60;
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& r : table.rows) {
    if (!(r.mse > 0.0))
      continue;
    const double s = table.base == RateExponent::Base::T ? r.horizon : static_cast<double>(r.n);
    lx.push_back(std::log(strip_log ? s / std::log(s) : s));
    ly.push_back(std::log(r.mse));
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << hgt << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (lx.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  double x0 = *std::min_element(lx.begin(), lx.end());
  double x1 = *std::max_element(lx.begin(), lx.end());
  double y0 = std::min(*std::min_element(ly.begin(), ly.end()), fit.intercept + fit.slope * x1);
  double y1 = std::max(*std::max_element(ly.begin(), ly.end()), fit.intercept + fit.slope * x0);
  if (x1 == x0)
    x1 = x0 + 1;
  if (y1 == y0)
    y1 = y0 + 1;
  auto px = [&](double v) { return pad + (v - x0) / (x1 - x0) * (w - 2 * pad); };
  auto py = [&](double v) { return hgt - pad - (v - y0) / (y1 - y0) * (hgt - 2 * pad); };
  os << "<line x1=\"" << pad << "\" y1=\"" << hgt - pad << "\" x2=\"" << w - pad << "\" y2=\"" << hgt - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << hgt - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << hgt - 15 << "\" text-anchor=\"middle\">log "
     << (table.base == RateExponent::Base::T ? "T" : "n") << (strip_log ? " / log" : "") << "</text>\n";
  os << "<text x=\"15\" y=\"" << hgt / 2 << "\" transform=\"rotate(-90 15 " << hgt / 2
     << ")\" text-anchor=\"middle\">log MSE</text>\n";
  for (std::size_t i = 0; i < lx.size(); ++i)
    os << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"4\" fill=\"steelblue\"/>\n";
  os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fit.intercept + fit.slope * x0) << "\" x2=\"" << px(x1)
     << "\" y2=\"" << py(fit.intercept + fit.slope * x1) << "\" stroke=\"firebrick\"/>\n";
  os << "<text x=\"" << w - pad << "\" y=\"" << pad - 20 << "\" text-anchor=\"end\">slope " << std::setprecision(4)
     << fit.slope << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Observations and schedules

inline json schedule_json(const SamplingSchedule& s)
{
  return { { "T", s.horizon() }, { "grids", s.grids() } };
}

inline SamplingSchedule schedule_from_json(const json& j)
{
  try {
    return SamplingSchedule(j.at("T").get<double>(), j.at("grids").get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, std::string("schedule: ") + e.what());
  }
}

//! One row per union-grid tick: time,x1..xd; empty cells where a coordinate
//! has no tick.
inline std::string observations_csv(const ObservationSet& obs)
{
  const auto& s = obs.schedule();
  const int d = s.dimension();
  std::ostringstream os;
  os << "time";
  for (int l = 0; l < d; ++l)
    os << ",x" << l + 1;
  os << '\n';
  std::vector<std::size_t> pos(static_cast<std::size_t>(d), 0);
  for (double t : s.union_grid()) {
    os << format_double(t);
    for (int l = 0; l < d; ++l) {
      const auto& g = s.grid(l);
      auto& p = pos[static_cast<std::size_t>(l)];
      os << ',';
      if (p < g.size() && g[p] == t)
        os << format_double(obs.values(l)[p++]);
    }
    os << '\n';
  }
  return os.str();
}

inline std::string path_csv(const FinePath& path)
{
  std::ostringstream os;
  os << "time";
  for (int l = 0; l < path.dimension(); ++l)
    os << ",x" << l + 1;
  os << '\n';
  for (Eigen::Index k = 0; k < path.size(); ++k) {
    os << format_double(static_cast<double>(k) * path.dt);
    for (int l = 0; l < path.dimension(); ++l)
      os << ',' << format_double(path.values(k, l));
    os << '\n';
  }
  return os.str();
}

struct ObservationTable
{
  std::vector<double> times;
  std::vector<std::vector<std::optional<double>>> columns;
};

inline ObservationTable read_observations_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::configuration, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::configuration, path + ": empty file");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (columns < 1)
    fail(ErrorKind::configuration, path + ": expected columns time,x1..xd");
  ObservationTable t;
  t.columns.resize(columns);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    if (cells.size() != columns + 1)
      fail(ErrorKind::configuration, path + ":" + std::to_string(lineno) + ": wrong number of cells");
    try {
      t.times.push_back(std::stod(cells[0]));
      for (std::size_t c = 0; c < columns; ++c)
        t.columns[c].push_back(cells[c + 1].empty() ? std::nullopt : std::optional<double>(std::stod(cells[c + 1])));
    } catch (const std::exception&) {
      fail(ErrorKind::configuration, path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return t;
}

//! Rebuilds an ObservationSet; the horizon comes from the caller (schedule
//! JSON or --horizon) since the CSV alone does not carry T_n.
inline ObservationSet observations_from_table(const ObservationTable& t, double horizon)
{
  std::vector<std::vector<double>> grids(t.columns.size());
  std::vector<std::vector<double>> values(t.columns.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    for (std::size_t i = 0; i < t.times.size(); ++i) {
      if (t.columns[c][i]) {
        grids[c].push_back(t.times[i]);
        values[c].push_back(*t.columns[c][i]);
      }
    }
  }
  return ObservationSet(SamplingSchedule(horizon, std::move(grids)), std::move(values));
}

//! A fully observed table read as a fine path with constant step.
inline FinePath path_from_table(const ObservationTable& t)
{
  if (t.times.size() < 2)
    fail(ErrorKind::configuration, "path needs at least two rows");
  FinePath p;
  p.dt = t.times[1] - t.times[0];
  p.values.resize(static_cast<Eigen::Index>(t.times.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    if (std::abs(t.times[i] - static_cast<double>(i) * p.dt) > 1e-9 * std::max(1.0, t.times[i]))
      fail(ErrorKind::configuration, "path rows must be equally spaced");
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (!t.columns[c][i])
        fail(ErrorKind::configuration, "path rows must be fully observed");
      p.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = *t.columns[c][i];
    }
  }
  return p;
}

} // namespace invdens::io
