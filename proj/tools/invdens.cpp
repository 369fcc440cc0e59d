// Command-line front end: kernel-check, simulate, estimate, rate-check, experiment.

#include "invdens/invdens.hpp"
#include "invdens/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>

namespace {

using namespace invdens;
using io::json;

std::vector<double> parse_list(const std::string& s)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorKind::configuration, "not a number: '" + item + "'");
    }
  }
  return out;
}

int kernel_check(int order)
{
  const auto k = build_kernel(order);
  std::cout << "l,moment\n";
  for (int l = 0; l <= order; ++l)
    std::cout << l << ',' << io::format_double(kernel_moment(k, l)) << '\n';
  return 0;
}

struct SimulateArgs
{
  std::string model = "ou";
  int d = 3;
  double theta = 1.0;
  double sigma = std::sqrt(2.0);
  double scale = 1.0;
  int n = 1000;
  double delta = 0.01;
  double horizon = 0.0;
  std::string schedule = "sync";
  std::string offsets;
  double jitter = 0.25;
  std::uint64_t seed = 1;
  double fine_steps = kDefaultFineSteps;
  double burn_in = kDefaultBurnIn;
  std::string out;
  std::string path_out;
  std::string schedule_out;
};

int simulate(const SimulateArgs& a)
{
  ModelSpec spec;
  spec.id = a.model;
  spec.d = a.d;
  spec.theta = a.theta;
  spec.sigma = a.sigma;
  spec.scale = a.scale;
  const auto model = build_model(spec);
  const double horizon = a.horizon > 0.0 ? a.horizon : a.n * a.delta;
  const auto stream = rng::replication_stream(a.seed, 0, 0);

  SamplingSchedule schedule = uniform_schedule(a.n, a.delta, a.d);
  if (a.schedule == "phase" || a.schedule == "staggered") {
    auto offsets = parse_list(a.offsets);
    if (a.schedule == "phase")
      schedule = async_schedule(a.n, horizon, PhaseShift{ offsets }, a.d);
    else
      schedule = async_schedule(a.n, horizon, Staggered{ offsets }, a.d);
  } else if (a.schedule == "jitter") {
    schedule = async_schedule(a.n, horizon, Jittered{ a.jitter, rng::replication_stream(a.seed, 0, 0xffffffffu) }, a.d);
  } else if (a.schedule != "sync") {
    fail(ErrorKind::configuration, "unknown schedule '" + a.schedule + "'");
  }

  const double dt = mesh_delta(schedule) / a.fine_steps;
  const auto path = std::make_shared<const FinePath>(model.ou() ? ou_exact_fine_path(*model.ou(), dt, schedule.horizon(), stream)
                                                                : simulate_path(model, Vector::Zero(a.d), dt, a.burn_in, schedule.horizon(), stream));
  const auto obs = observe(path, schedule);
  if (!a.out.empty())
    io::write_text(a.out, io::observations_csv(obs));
  else
    std::cout << io::observations_csv(obs);
  if (!a.path_out.empty())
    io::write_text(a.path_out, io::path_csv(*path));
  if (!a.schedule_out.empty())
    io::write_text(a.schedule_out, io::schedule_json(schedule).dump() + "\n");
  std::cerr << "Delta_n=" << mesh_delta(schedule) << " Delta'_n=" << asynchrony_delta_prime(schedule) << '\n';
  return 0;
}

struct EstimateArgs
{
  std::string obs;
  std::string schedule;
  std::string path;
  double horizon = 0.0;
  std::string point;
  std::string bandwidth;
  int order = 2;
  std::string mode = "async";
  std::string continuous = "1,2";
  bool clip = false;
};

int estimate(const EstimateArgs& a)
{
  const EstimateRequest req(parse_list(a.point), BandwidthVector(parse_list(a.bandwidth)), build_kernel(a.order));
  const auto table = io::read_observations_csv(a.obs);
  double horizon = a.horizon;
  if (!a.schedule.empty())
    horizon = io::schedule_from_json(io::read_json(a.schedule)).horizon();

  double value = 0.0;
  std::optional<SamplingSchedule> used;
  if (a.mode == "continuous") {
    const auto path = io::path_from_table(table);
    value = estimate_continuous(path, req);
  } else if (a.mode == "hybrid") {
    if (a.path.empty())
      fail(ErrorKind::configuration, "hybrid mode needs --path");
    const auto path = io::path_from_table(io::read_observations_csv(a.path));
    if (!(horizon > 0.0))
      horizon = path.horizon();
    const auto c = parse_list(a.continuous);
    if (c.size() != 2)
      fail(ErrorKind::configuration, "--continuous needs two coordinate indices");
    const HybridCoordinates hc{ static_cast<int>(c[0]) - 1, static_cast<int>(c[1]) - 1 };
    const auto full = io::observations_from_table(table, horizon);
    std::vector<int> discrete;
    for (int l = 0; l < full.dimension(); ++l) {
      if (l != hc.first && l != hc.second)
        discrete.push_back(l);
    }
    const auto obs = detail::subobservations(full, discrete);
    value = estimate_hybrid(path, obs, req, hc);
    used = full.schedule();
  } else {
    if (!(horizon > 0.0))
      fail(ErrorKind::configuration, "discrete modes need --schedule or --horizon for T_n");
    const auto obs = io::observations_from_table(table, horizon);
    if (a.mode == "sync")
      value = estimate_sync(obs, req);
    else if (a.mode == "async")
      value = estimate_async(obs, req);
    else
      fail(ErrorKind::configuration, "unknown mode '" + a.mode + "'");
    used = obs.schedule();
  }
  json out;
  out["estimate"] = value;
  if (a.clip)
    out["display_estimate"] = display_clip(value);
  if (used) {
    out["delta_n"] = mesh_delta(*used);
    out["delta_prime_n"] = asynchrony_delta_prime(*used);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct RateArgs
{
  std::string beta;
  int d = 0;
  double horizon = 0.0;
  double n = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;
  bool sync = false;
};

json bandwidth_json(const BandwidthVector& h)
{
  return h.values();
}

int rate_check(const RateArgs& a)
{
  const SmoothnessSpec spec(parse_list(a.beta));
  const int d = a.d > 0 ? a.d : spec.dimension();
  const auto v = classify_regime(spec, RegimeInputs{ d, a.n, a.delta, a.sync ? 0.0 : a.delta_prime, a.horizon, a.sync });
  const auto m = harmonic_means(spec);
  json out;
  out["regime"] = std::string(to_string(v.regime));
  out["binding"] = { { "condition", v.binding_condition },
                     { "threshold", v.binding_threshold },
                     { "actual", v.binding_actual } };
  out["ratio"] = v.ratio;
  out["log_factor"] = v.log_factor;
  json th = json::array();
  for (const auto& t : v.thresholds)
    th.push_back({ { "condition", t.condition }, { "threshold", t.threshold }, { "actual", t.actual }, { "satisfied", t.satisfied } });
  out["thresholds"] = th;
  out["harmonic_means"] = { { "beta_bar", m.beta_bar },
                            { "beta_bar3", m.beta_bar3 ? json(*m.beta_bar3) : json(nullptr) },
                            { "k0", m.k0 } };
  json bw;
  if (d >= 3) {
    bw["continuous"] = bandwidth_json(bandwidth_continuous(spec, a.horizon));
    bw["intermediate"] = bandwidth_json(bandwidth_intermediate(spec, a.n));
  } else {
    bw["d2"] = bandwidth_json(bandwidth_d2(spec, a.horizon));
  }
  out["bandwidths"] = bw;
  if (const auto e = rate_exponent(spec, v.regime))
    out["exponent"] = { { "value", e->exponent }, { "base", std::string(to_string(e->base)) }, { "log_factor", e->log_factor } };
  else
    out["exponent"] = "no theoretical rate";
  std::cout << out.dump(2) << '\n';
  return 0;
}

int experiment(const std::string& config, const std::string& out, const std::string& summary, const std::string& plot, int workers)
{
  auto cfg = io::load_config(config);
  if (workers > 0)
    cfg.workers = workers;
  const auto table = run_experiment(cfg);
  const auto csv = io::result_csv(table);
  if (!out.empty())
    io::write_text(out, csv);
  else
    std::cout << csv;
  const auto s = io::summarize(cfg, table);
  const auto sj = io::summary_json(cfg, table, s);
  if (!summary.empty())
    io::write_text(summary, sj.dump(2) + "\n");
  else
    std::cerr << sj.dump(2) << '\n';
  if (!plot.empty())
    io::write_text(plot, io::result_svg(table, s.fit, cfg.strip_log));
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Invariant density estimation for ergodic diffusions" };
  app.require_subcommand(1);

  int order = 2;
  auto* kc = app.add_subcommand("kernel-check", "print moments 0..M of the order-M kernel");
  kc->add_option("--order", order, "kernel order M")->required()->check(CLI::Range(1, 40));

  SimulateArgs sim;
  auto* sc = app.add_subcommand("simulate", "simulate a path and extract observations");
  sc->add_option("--model", sim.model, "ou | hyperbolic-langevin");
  sc->add_option("--d", sim.d, "dimension");
  sc->add_option("--theta", sim.theta, "OU mean reversion");
  sc->add_option("--sigma", sim.sigma, "OU noise level");
  sc->add_option("--scale", sim.scale, "hyperbolic potential scale");
  sc->add_option("--n", sim.n, "ticks per coordinate");
  sc->add_option("--delta", sim.delta, "sampling step");
  sc->add_option("--horizon", sim.horizon, "T_n (default n * delta)");
  sc->add_option("--schedule", sim.schedule, "sync | phase | jitter | staggered");
  sc->add_option("--offsets", sim.offsets, "per-coordinate offsets for phase/staggered");
  sc->add_option("--jitter", sim.jitter, "jitter fraction (< 0.5)");
  sc->add_option("--seed", sim.seed, "master seed");
  sc->add_option("--fine-steps", sim.fine_steps, "fine steps per Delta_n");
  sc->add_option("--burn-in", sim.burn_in, "burn-in time (Euler-Maruyama models)");
  sc->add_option("--out", sim.out, "observation CSV (time,x1..xd)");
  sc->add_option("--path-out", sim.path_out, "fine path CSV");
  sc->add_option("--schedule-out", sim.schedule_out, "schedule JSON");

  EstimateArgs est;
  auto* ec = app.add_subcommand("estimate", "estimate the invariant density at a point");
  ec->add_option("--obs", est.obs, "observation CSV")->required();
  ec->add_option("--schedule", est.schedule, "schedule JSON (for T_n)");
  ec->add_option("--horizon", est.horizon, "T_n");
  ec->add_option("--path", est.path, "fine path CSV (hybrid)");
  ec->add_option("--point", est.point, "x1,..,xd")->required();
  ec->add_option("--bandwidth", est.bandwidth, "h1,..,hd")->required();
  ec->add_option("--order", est.order, "kernel order M");
  ec->add_option("--mode", est.mode, "sync | async | hybrid | continuous");
  ec->add_option("--continuous", est.continuous, "1-based continuous coordinates for hybrid");
  ec->add_flag("--clip", est.clip, "also report max(estimate, 0)");

  RateArgs rate;
  auto* rc = app.add_subcommand("rate-check", "classify the sampling regime");
  rc->add_option("--beta", rate.beta, "b1,..,bd ascending")->required();
  rc->add_option("--d", rate.d, "dimension");
  rc->add_option("--T", rate.horizon, "horizon T_n")->required();
  rc->add_option("--n", rate.n, "sample size n")->required();
  rc->add_option("--delta", rate.delta, "Delta_n")->required();
  rc->add_option("--delta-prime", rate.delta_prime, "Delta'_n");
  rc->add_flag("--sync", rate.sync, "synchronous sampling");

  std::string config;
  std::string out;
  std::string summary;
  std::string plot;
  int workers = 0;
  auto* xc = app.add_subcommand("experiment", "run a Monte Carlo sweep");
  xc->add_option("--config", config, "config JSON")->required();
  xc->add_option("--out", out, "results CSV");
  xc->add_option("--summary", summary, "summary JSON");
  xc->add_option("--plot", plot, "log-log SVG");
  xc->add_option("--workers", workers, "override worker count");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*kc)
      return kernel_check(order);
    if (*sc)
      return simulate(sim);
    if (*ec)
      return estimate(est);
    if (*rc)
      return rate_check(rate);
    if (*xc)
      return experiment(config, out, summary, plot, workers);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
