#pragma once

// Monte Carlo sweeps: simulate R stationary paths per sweep row, estimate the
// density at a point, and tabulate MSE / bias^2 / variance next to the
// regime verdict and theoretical exponent. Also OLS rate fitting and an
// occupation-histogram density oracle for models without a closed form.

#include "invdens/error.hpp"
#include "invdens/estimators.hpp"
#include "invdens/kernels.hpp"
#include "invdens/models.hpp"
#include "invdens/rates.hpp"
#include "invdens/rng.hpp"
#include "invdens/sampling.hpp"
#include "invdens/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace invdens {

// ---------------------------------------------------------------------------
// Configuration

enum class EstimatorMode
{
  sync,
  async,
  hybrid,
  continuous
};

inline std::string_view to_string(EstimatorMode m)
{
  switch (m) {
    case EstimatorMode::sync: return "sync";
    case EstimatorMode::async: return "async";
    case EstimatorMode::hybrid: return "hybrid";
    case EstimatorMode::continuous: return "continuous";
  }
  return "unknown";
}

enum class BandwidthRule
{
  continuous,
  intermediate,
  d2,
  explicit_vector
};

enum class ScheduleKind
{
  sync,
  phase,
  jitter,
  staggered
};

struct ScheduleSpec
{
  ScheduleKind kind = ScheduleKind::sync;
  std::vector<double> offsets;  // phase / staggered
  double jitter_fraction = 0.0; // jitter
};

struct SweepRow
{
  long n = 0;
  double delta = 0.0;   // Delta_n for sync rows; T / n otherwise when T is absent
  double horizon = 0.0; // 0: derived as n * delta
  ScheduleSpec schedule;
};

struct ModelSpec
{
  std::string id = "ou"; // "ou" | "hyperbolic-langevin"
  int d = 3;
  double theta = 1.0;
  double sigma = std::sqrt(2.0);
  std::optional<Matrix> drift_matrix;
  std::optional<Matrix> noise_matrix;
  double scale = 1.0; // hyperbolic potential scale
};

struct ExperimentConfig
{
  ModelSpec model;
  SmoothnessSpec smoothness{ { 2.0, 2.0, 2.0 } };
  EstimatorMode estimator = EstimatorMode::sync;
  std::vector<double> point; // empty: origin
  int kernel_order = 2;
  std::vector<SweepRow> sweep;
  int replications = 100;
  std::uint64_t seed = 1;
  BandwidthRule bandwidth = BandwidthRule::continuous;
  std::vector<double> explicit_bandwidth;
  int workers = 1;
  RateExponent::Base scale = RateExponent::Base::T;
  bool strip_log = false;
  double burn_in = kDefaultBurnIn;
  double fine_steps = kDefaultFineSteps; // dt_fine = Delta_n / fine_steps
  bool histogram_fallback = false;
  double histogram_time = 1e5;
  double histogram_bin = 0.25;
  std::optional<double> expected_slope;
  double slope_tolerance = 0.25;
};

inline DiffusionModel build_model(const ModelSpec& m)
{
  if (m.id == "ou") {
    if (m.drift_matrix || m.noise_matrix) {
      const Matrix a = m.drift_matrix ? *m.drift_matrix : Matrix(m.theta * Matrix::Identity(m.d, m.d));
      const Matrix s = m.noise_matrix ? *m.noise_matrix : Matrix(m.sigma * Matrix::Identity(m.d, m.d));
      return make_ou(a, s);
    }
    return make_ou(m.d, m.theta, m.sigma);
  }
  if (m.id == "hyperbolic-langevin")
    return make_hyperbolic_langevin(m.d, m.scale);
  fail(ErrorKind::configuration, "unknown model id '" + m.id + "'");
}

inline void validate(const ExperimentConfig& cfg, int d)
{
  if (cfg.replications < 2)
    fail(ErrorKind::configuration, "replications must be >= 2");
  if (cfg.sweep.empty())
    fail(ErrorKind::configuration, "sweep is empty");
  if (cfg.smoothness.dimension() != d)
    fail(ErrorKind::configuration, "smoothness vector length differs from model dimension");
  if (!cfg.point.empty() && static_cast<int>(cfg.point.size()) != d)
    fail(ErrorKind::configuration, "evaluation point dimension differs from model dimension");
  if (cfg.workers < 1)
    fail(ErrorKind::configuration, "workers must be >= 1");
  if (!(cfg.fine_steps >= 1.0))
    fail(ErrorKind::configuration, "fine_steps must be >= 1");
  for (const auto& row : cfg.sweep) {
    if (row.n < 1)
      fail(ErrorKind::configuration, "sweep rows need n >= 1");
    if (!(row.delta > 0.0) && !(row.horizon > 0.0))
      fail(ErrorKind::configuration, "sweep rows need delta or T");
    if (row.schedule.kind == ScheduleKind::sync && row.delta > 0.0 && row.horizon > 0.0
        && std::abs(row.horizon - static_cast<double>(row.n) * row.delta) > 1e-9 * row.horizon)
      fail(ErrorKind::configuration, "synchronous rows need T = n * delta");
  }
  if (cfg.estimator == EstimatorMode::hybrid && d < 3)
    fail(ErrorKind::configuration, "hybrid estimator needs d >= 3");
}

// ---------------------------------------------------------------------------
// Results

struct ResultRow
{
  double scale = 0.0;
  long n = 0;
  double horizon = 0.0;
  double delta_n = 0.0;
  double delta_prime_n = 0.0;
  double mse = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
  double stderr_mse = 0.0;
  std::string regime;
  std::optional<double> theory_exponent;
  double mean_estimate = 0.0;
  double target = 0.0;
  double threshold_ratio = 0.0;
  std::vector<double> bandwidth;
  int diverged = 0;
  std::vector<double> estimates;
};

struct ResultTable
{
  RateExponent::Base base = RateExponent::Base::T;
  std::string oracle = "analytic"; // or "histogram (lower precision)"
  std::vector<ResultRow> rows;
};

namespace detail {

//! Pairwise summation: fixed association independent of scheduling.
inline double pairwise_sum(std::span<const double> v)
{
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v)
      s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

//! Runs f(i) for i in [0, count) on `workers` threads; f writes to slot i.
template<class F>
void parallel_for(std::size_t count, int workers, F&& f)
{
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i)
      f(i);
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, count); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          f(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool)
    t.join();
  for (auto& e : errors) {
    if (e)
      std::rethrow_exception(e);
  }
}

inline SamplingSchedule row_schedule(const SweepRow& row, int d, std::uint64_t seed, std::uint32_t row_index)
{
  const double horizon = row.horizon > 0.0 ? row.horizon : static_cast<double>(row.n) * row.delta;
  const auto n = static_cast<int>(row.n);
  switch (row.schedule.kind) {
    case ScheduleKind::sync:
      if (row.delta > 0.0)
        return uniform_schedule(n, row.delta, d);
      return uniform_schedule(n, horizon / static_cast<double>(n), d);
    case ScheduleKind::phase:
      return async_schedule(n, horizon, PhaseShift{ row.schedule.offsets }, d);
    case ScheduleKind::staggered:
      return async_schedule(n, horizon, Staggered{ row.schedule.offsets }, d);
    case ScheduleKind::jitter:
      // One realized schedule per row, drawn from a reserved stream.
      return async_schedule(n,
                            horizon,
                            Jittered{ row.schedule.jitter_fraction,
                                      rng::replication_stream(seed, row_index, 0xffffffffu) },
                            d);
  }
  fail(ErrorKind::configuration, "unknown schedule kind");
}

inline BandwidthVector row_bandwidth(const ExperimentConfig& cfg, double n, double horizon)
{
  switch (cfg.bandwidth) {
    case BandwidthRule::continuous: return bandwidth_continuous(cfg.smoothness, horizon);
    case BandwidthRule::intermediate: return bandwidth_intermediate(cfg.smoothness, n);
    case BandwidthRule::d2: return bandwidth_d2(cfg.smoothness, horizon);
    case BandwidthRule::explicit_vector: return BandwidthVector(cfg.explicit_bandwidth);
  }
  fail(ErrorKind::configuration, "unknown bandwidth rule");
}

inline SamplingSchedule subschedule(const SamplingSchedule& s, const std::vector<int>& coords)
{
  std::vector<std::vector<double>> grids;
  for (int l : coords)
    grids.push_back(s.grid(l));
  return SamplingSchedule(s.horizon(), std::move(grids));
}

inline ObservationSet subobservations(const ObservationSet& obs, const std::vector<int>& coords)
{
  std::vector<std::vector<double>> values;
  for (int l : coords)
    values.push_back(obs.values(l));
  return ObservationSet(subschedule(obs.schedule(), coords), std::move(values), obs.path());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Histogram oracle

struct HistogramOptions
{
  double burn_in = kDefaultBurnIn;
  double dt = 0.01;
  int batches = 20;
  std::vector<double> origin; // bin edges at origin + k * width; empty: all zeros
  std::optional<Vector> start; // EM start point; default origin of R^d
};

//! Normalized occupation histogram of one long stationary path. Accuracy per
//! bin is O(total_time^{-1/2}); batch_stderr estimates it from batch means.
class HistogramDensity
{
public:
  using Key = std::vector<long>;

  HistogramDensity(int d, double width, std::vector<double> origin, int batches)
    : d_(d)
    , width_(width)
    , origin_(std::move(origin))
    , batches_(batches)
  {
    if (origin_.empty())
      origin_.assign(static_cast<std::size_t>(d), 0.0);
  }

  Key key(std::span<const double> x) const
  {
    Key k(static_cast<std::size_t>(d_));
    for (int l = 0; l < d_; ++l)
      k[static_cast<std::size_t>(l)] = static_cast<long>(std::floor((x[l] - origin_[l]) / width_));
    return k;
  }

  void add(std::span<const double> x, int batch)
  {
    auto& cell = cells_[key(x)];
    if (cell.empty())
      cell.assign(static_cast<std::size_t>(batches_) + 1, 0);
    ++cell[0];
    ++cell[static_cast<std::size_t>(batch) + 1];
    ++samples_;
  }

  void set_batch_sizes(std::vector<std::size_t> sizes) { batch_sizes_ = std::move(sizes); }

  double bin_volume() const { return std::pow(width_, d_); }
  std::size_t samples() const { return samples_; }
  std::size_t occupied_bins() const { return cells_.size(); }
  const std::map<Key, std::vector<std::size_t>>& cells() const { return cells_; }

  double density(const Key& k) const
  {
    const auto it = cells_.find(k);
    if (it == cells_.end() || samples_ == 0)
      return 0.0;
    return static_cast<double>(it->second[0]) / (static_cast<double>(samples_) * bin_volume());
  }

  double operator()(std::span<const double> x) const { return density(key(x)); }
  double operator()(const Vector& x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

  //! Standard error of the bin density from batch means.
  double batch_stderr(std::span<const double> x) const
  {
    const auto it = cells_.find(key(x));
    const auto b = static_cast<std::size_t>(batches_);
    std::vector<double> dens(b, 0.0);
    for (std::size_t j = 0; j < b; ++j) {
      const double count = it == cells_.end() ? 0.0 : static_cast<double>(it->second[j + 1]);
      dens[j] = batch_sizes_[j] ? count / (static_cast<double>(batch_sizes_[j]) * bin_volume()) : 0.0;
    }
    const double mean = std::accumulate(dens.begin(), dens.end(), 0.0) / static_cast<double>(b);
    double ss = 0.0;
    for (double v : dens)
      ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
  }

  //! sum over bins of density * volume (1 up to rounding).
  double total_mass() const
  {
    std::vector<double> m;
    for (const auto& [k, c] : cells_)
      m.push_back(density(k) * bin_volume());
    return detail::pairwise_sum(m);
  }

private:
  int d_;
  double width_;
  std::vector<double> origin_;
  int batches_;
  std::size_t samples_ = 0;
  std::vector<std::size_t> batch_sizes_;
  std::map<Key, std::vector<std::size_t>> cells_;
};

inline HistogramDensity histogram_oracle(const DiffusionModel& model,
                                         double total_time,
                                         double bin_width,
                                         rng::StreamId stream,
                                         const HistogramOptions& opt = {})
{
  if (!(total_time > 0.0) || !(bin_width > 0.0) || !(opt.dt > 0.0) || opt.batches < 2)
    fail(ErrorKind::parameter, "histogram needs positive time, bin width, dt and >= 2 batches");
  const int d = model.dimension();
  HistogramDensity hist(d, bin_width, opt.origin, opt.batches);
  const auto samples = static_cast<std::size_t>(std::max<Eigen::Index>(1, fine_grid_points(total_time, opt.dt) - 1));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(opt.batches), 0);

  rng::Philox gen(stream);
  std::normal_distribution<double> normal;
  Vector x = opt.start ? *opt.start : Vector::Zero(d);
  if (x.size() != d)
    fail(ErrorKind::dimension, "histogram start point dimension differs from model");

  std::function<void(std::size_t)> advance;
  std::optional<detail::OuStepper> ou;
  Vector xi(d);
  const double sqdt = std::sqrt(opt.dt);
  if (model.ou()) {
    ou.emplace(*model.ou());
    if (!opt.start)
      x = ou->stationary(gen, normal);
    advance = [&](std::size_t) { ou->step(x, opt.dt, gen, normal); };
  } else {
    advance = [&](std::size_t step) {
      for (int i = 0; i < d; ++i)
        xi[i] = normal(gen);
      x += model.drift(x) * opt.dt + model.diffusion(x) * xi * sqdt;
      if (!x.allFinite())
        fail(ErrorKind::path_divergence, "non-finite state at step " + std::to_string(step));
    };
    const auto burn = static_cast<std::size_t>(std::llround(opt.burn_in / opt.dt));
    for (std::size_t k = 0; k < burn; ++k)
      advance(k);
  }
  for (std::size_t k = 0; k < samples; ++k) {
    if (k > 0)
      advance(k);
    const auto batch = static_cast<int>(k * static_cast<std::size_t>(opt.batches) / samples);
    hist.add(std::span<const double>(x.data(), static_cast<std::size_t>(d)), batch);
    ++sizes[static_cast<std::size_t>(batch)];
  }
  hist.set_batch_sizes(std::move(sizes));
  return hist;
}

// ---------------------------------------------------------------------------
// Experiment runner

//! Runs the sweep with an explicit model and density target (used for models
//! built in code, e.g. degenerate test models).
inline ResultTable run_experiment(const ExperimentConfig& cfg,
                                  const DiffusionModel& model,
                                  std::optional<double> target = std::nullopt)
{
  const int d = model.dimension();
  validate(cfg, d);
  const std::vector<double> point = cfg.point.empty() ? std::vector<double>(static_cast<std::size_t>(d), 0.0) : cfg.point;
  const Vector x = Eigen::Map<const Vector>(point.data(), d);

  ResultTable table;
  table.base = cfg.scale;
  if (!target) {
    if (model.has_density()) {
      target = true_density(model, x);
    } else if (cfg.histogram_fallback) {
      HistogramOptions opt;
      opt.burn_in = cfg.burn_in;
      const auto hist = histogram_oracle(
        model, cfg.histogram_time, cfg.histogram_bin, rng::replication_stream(cfg.seed, 0xffffffffu, 0), opt);
      target = hist(x);
      table.oracle = "histogram (lower precision)";
    } else {
      fail(ErrorKind::configuration, "model has no analytic density and the histogram fallback is disabled");
    }
  }

  const KernelSpec kernel = build_kernel(cfg.kernel_order);
  const Vector x0 = Vector::Zero(d);
  const auto reps = static_cast<std::size_t>(cfg.replications);

  for (std::size_t r = 0; r < cfg.sweep.size(); ++r) {
    const auto& row = cfg.sweep[r];
    const auto row_id = static_cast<std::uint32_t>(r);
    const SamplingSchedule schedule = detail::row_schedule(row, d, cfg.seed, row_id);
    const double horizon = schedule.horizon();
    const double n = static_cast<double>(row.n);
    const double delta_n = mesh_delta(schedule);
    const double delta_prime = asynchrony_delta_prime(schedule);
    const double dt = delta_n / cfg.fine_steps;
    const EstimateRequest req(point, detail::row_bandwidth(cfg, n, horizon), kernel, cfg.smoothness);

    std::vector<int> discrete;
    for (int l = 2; l < d; ++l)
      discrete.push_back(l);

    std::vector<double> est(reps, 0.0);
    std::vector<char> ok(reps, 1);
    std::vector<std::string> why(reps);
    detail::parallel_for(reps, cfg.workers, [&](std::size_t i) {
      const auto stream = rng::replication_stream(cfg.seed, row_id, static_cast<std::uint32_t>(i));
      try {
        if (cfg.estimator == EstimatorMode::sync || cfg.estimator == EstimatorMode::async) {
          const ObservationSet obs = model.ou() ? ou_exact_observations(*model.ou(), schedule, stream)
                                                : simulate_observations(model, schedule, x0, dt, cfg.burn_in, stream);
          est[i] = cfg.estimator == EstimatorMode::sync ? estimate_sync(obs, req) : estimate_async(obs, req);
          return;
        }
        const auto path = std::make_shared<const FinePath>(model.ou() ? ou_exact_fine_path(*model.ou(), dt, horizon, stream)
                                                                      : simulate_path(model, x0, dt, cfg.burn_in, horizon, stream));
        if (cfg.estimator == EstimatorMode::continuous) {
          est[i] = estimate_continuous(*path, req);
        } else {
          const auto obs = detail::subobservations(observe(path, schedule), discrete);
          est[i] = estimate_hybrid(*path, obs, req);
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::path_divergence)
          throw;
        ok[i] = 0;
        why[i] = e.what();
      }
    });

    ResultRow out;
    out.diverged = static_cast<int>(std::count(ok.begin(), ok.end(), 0));
    if (out.diverged > 0 && static_cast<double>(out.diverged) > 0.01 * static_cast<double>(reps)) {
      const auto first = static_cast<std::size_t>(std::find(ok.begin(), ok.end(), 0) - ok.begin());
      fail(ErrorKind::path_divergence,
           "sweep row " + std::to_string(r) + ": " + std::to_string(out.diverged) + " of " + std::to_string(reps)
             + " replications diverged (first: replication " + std::to_string(first) + ", " + why[first] + ")");
    }
    std::vector<double> kept;
    for (std::size_t i = 0; i < reps; ++i) {
      if (ok[i])
        kept.push_back(est[i]);
    }
    const auto m = static_cast<double>(kept.size());
    const double mean = detail::pairwise_sum(kept) / m;
    std::vector<double> centered(kept.size());
    std::vector<double> sq_err(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      centered[i] = (kept[i] - mean) * (kept[i] - mean);
      sq_err[i] = (kept[i] - *target) * (kept[i] - *target);
    }
    out.variance = detail::pairwise_sum(centered) / m;
    out.bias_sq = (mean - *target) * (mean - *target);
    out.mse = detail::pairwise_sum(sq_err) / m;
    std::vector<double> dev(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      dev[i] = (sq_err[i] - out.mse) * (sq_err[i] - out.mse);
    out.stderr_mse = std::sqrt(detail::pairwise_sum(dev) / (m - 1.0) / m);

    out.n = row.n;
    out.horizon = horizon;
    out.scale = cfg.scale == RateExponent::Base::T ? horizon : n;
    out.delta_n = delta_n;
    out.delta_prime_n = delta_prime;
    out.mean_estimate = mean;
    out.target = *target;
    out.bandwidth = req.bandwidth().values();
    out.estimates = std::move(est);

    const auto verdict = classify_regime(cfg.smoothness,
                                         RegimeInputs{ d, n, delta_n, delta_prime, horizon, schedule.synchronous() });
    out.regime = std::string(to_string(verdict.regime));
    out.threshold_ratio = verdict.ratio;
    if (const auto e = rate_exponent(cfg.smoothness, verdict.regime))
      out.theory_exponent = e->exponent;
    table.rows.push_back(std::move(out));
  }
  return table;
}

inline ResultTable run_experiment(const ExperimentConfig& cfg)
{
  return run_experiment(cfg, build_model(cfg.model));
}

// ---------------------------------------------------------------------------
// Rate fitting

struct FitResult
{
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t used_rows = 0;
  std::vector<std::string> warnings;
};

//! OLS of log(y) on log(x), x = scale or scale / log(scale) with strip_log.
inline FitResult fit_loglog(std::span<const double> scale, std::span<const double> y, bool strip_log)
{
  FitResult fit;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (!(y[i] > 0.0)) {
      fit.warnings.push_back("row " + std::to_string(i) + " has nonpositive MSE; excluded");
      continue;
    }
    const double base = strip_log ? scale[i] / std::log(scale[i]) : scale[i];
    lx.push_back(std::log(base));
    ly.push_back(std::log(y[i]));
  }
  fit.used_rows = lx.size();
  if (lx.size() < 3)
    fail(ErrorKind::fit, "fewer than 3 usable rows");
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0))
    fail(ErrorKind::fit, "scale values are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.stderr_slope = lx.size() > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
  return fit;
}

inline FitResult fit_exponent(const ResultTable& table, RateExponent::Base base, bool strip_log)
{
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : table.rows) {
    x.push_back(base == RateExponent::Base::T ? r.horizon : static_cast<double>(r.n));
    y.push_back(r.mse);
  }
  return fit_loglog(x, y, strip_log);
}

// ---------------------------------------------------------------------------
// Rank correlation

inline std::vector<double> average_ranks(std::span<const double> v)
{
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
      ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

//! Spearman rho: Pearson correlation of average ranks.
inline double spearman(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size() || a.size() < 2)
    fail(ErrorKind::parameter, "spearman needs two samples of equal length >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double m = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / m;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / m;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0))
    return 0.0;
  return sab / std::sqrt(saa * sbb);
}

} // namespace invdens
