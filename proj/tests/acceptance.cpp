// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.

#include "invdens/invdens.hpp"
#include "invdens/io.hpp"

#include <boost/math/constants/constants.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace invdens;

namespace {

struct Outcome
{
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body)
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o{ false, "" };
  try {
    o = body();
  } catch (const std::exception& e) {
    o = { false, std::string("exception: ") + e.what() };
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += " [over time budget " + std::to_string(budget_s) + " s]";
  }
  if (!o.pass)
    ++failures;
  std::printf("[%s] %2d %-34s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome kernel_moments()
{
  double worst = 0.0;
  for (int m = 1; m <= 8; ++m) {
    const auto k = build_kernel(m);
    worst = std::max(worst, std::abs(kernel_moment(k, 0) - 1.0));
    for (int l = 1; l <= m; ++l)
      worst = std::max(worst, std::abs(kernel_moment(k, l)));
  }
  return { worst < 1e-10, fmt("max moment error %.2e (tol 1e-10)", worst) };
}

// Piecewise tensor Gauss-Legendre: the estimate is a polynomial in each x_l
// between the breakpoints X_i^l +- h_l, so the rule is exact up to rounding.
Outcome normalization()
{
  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> normal(0.0, 0.6);
  std::uniform_real_distribution<double> unif(0.15, 0.9);
  std::uniform_int_distribution<int> order(1, 6);
  const GaussLegendre rule(5);
  double worst = 0.0;
  for (int set = 0; set < 20; ++set) {
    const int d = 2 + set % 2;
    const int n = 4;
    std::vector<std::vector<double>> values(static_cast<std::size_t>(d));
    for (auto& col : values)
      for (int i = 0; i < n; ++i)
        col.push_back(normal(gen));
    std::vector<double> hv;
    for (int l = 0; l < d; ++l)
      hv.push_back(unif(gen));
    const ObservationSet obs(uniform_schedule(n, 0.5, d), values);
    const BandwidthVector h(hv);
    const KernelSpec kernel = build_kernel(order(gen));

    std::vector<std::vector<double>> nodes(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) {
      const auto li = static_cast<std::size_t>(l);
      std::vector<double> bp;
      for (double x : values[li]) {
        bp.push_back(x - hv[li]);
        bp.push_back(x + hv[li]);
      }
      std::sort(bp.begin(), bp.end());
      for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
        const double a = bp[j];
        const double b = bp[j + 1];
        if (b <= a)
          continue;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          nodes[li].push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q]);
          weights[li].push_back(0.5 * (b - a) * rule.weights[q]);
        }
      }
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    double total = 0.0;
    while (true) {
      double w = 1.0;
      for (std::size_t l = 0; l < static_cast<std::size_t>(d); ++l) {
        x[l] = nodes[l][idx[l]];
        w *= weights[l][idx[l]];
      }
      total += w * estimate_sync(obs, EstimateRequest(x, h, kernel));
      std::size_t l = 0;
      while (l < static_cast<std::size_t>(d) && ++idx[l] == nodes[l].size())
        idx[l++] = 0;
      if (l == static_cast<std::size_t>(d))
        break;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return { worst < 1e-8, fmt("20 sets, max |integral - 1| %.2e (tol 1e-8)", worst) };
}

Outcome sync_async()
{
  const auto ou = make_ou(3, 1.0, std::sqrt(2.0));
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 200 + static_cast<int>(seed) * 7;
    const double delta = 0.005 + 0.001 * static_cast<double>(seed);
    const auto s = uniform_schedule(n, delta, 3);
    const auto obs = ou_exact_observations(*ou.ou(), s, { seed, 1 });
    const EstimateRequest req({ 0, 0, 0 }, BandwidthVector{ unif(gen), unif(gen), unif(gen) }, build_kernel(2));
    const double a = estimate_async(obs, req);
    const double b = estimate_sync(obs, req);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  return { worst <= 1e-12, fmt("100 schedules, max relative gap %.2e (tol 1e-12)", worst) };
}

Outcome delta_measures()
{
  bool sync_zero = true;
  for (int t = 0; t < 100; ++t)
    sync_zero = sync_zero && asynchrony_delta_prime(uniform_schedule(10 + t, 0.01 * (1 + t), 2 + t % 4)) == 0.0;
  int violations = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto s = async_schedule(10 + static_cast<int>(t % 90),
                                  1.0 + static_cast<double>(t % 13),
                                  Jittered{ 0.49 * static_cast<double>(t % 50) / 49.0, { 4242, t } },
                                  2 + static_cast<int>(t % 4));
    if (!(asynchrony_delta_prime(s) <= mesh_delta(s)))
      ++violations;
  }
  return { sync_zero && violations == 0,
           std::string("Delta'=0 on 100 sync schedules: ") + (sync_zero ? "yes" : "no")
             + fmt(", Delta'<=Delta violations on 1000 jittered: %.0f", violations) };
}

Outcome rate_identities()
{
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int d = 3 + t % 4;
    std::vector<double> b;
    for (int j = 0; j < d; ++j)
      b.push_back(u(gen));
    std::sort(b.begin(), b.end());
    b[1] = b[2]; // beta_2 = beta_3 branch
    const SmoothnessSpec spec(b);
    const auto m = harmonic_means(spec);
    const double n = std::pow(10.0, 3.0 + (t % 5));
    const double delta = sync_threshold_n(spec, n);
    const double horizon = n * delta;
    const double cont = std::pow(horizon, -2.0 * *m.beta_bar3 / (2.0 * *m.beta_bar3 + d - 2.0));
    const double inter = std::pow(n, -2.0 * m.beta_bar / (2.0 * m.beta_bar + d));
    worst = std::max(worst, std::abs(cont / inter - 1.0));
    worst = std::max(worst, std::abs(sync_threshold_T(spec, horizon) / delta - 1.0));
  }
  return { worst <= 1e-9, fmt("200 specs, max relative mismatch %.2e (tol 1e-9)", worst) };
}

ExperimentConfig continuous_config()
{
  ExperimentConfig cfg;
  cfg.model = ModelSpec{};
  cfg.model.d = 3;
  cfg.smoothness = SmoothnessSpec({ 2, 2, 2 });
  cfg.estimator = EstimatorMode::sync;
  cfg.kernel_order = 2;
  cfg.replications = 400;
  cfg.seed = 6;
  cfg.bandwidth = BandwidthRule::continuous;
  cfg.scale = RateExponent::Base::T;
  for (double horizon : { 250.0, 500.0, 1000.0, 2000.0 }) {
    const double delta = 0.5 * sync_threshold_T(cfg.smoothness, horizon);
    SweepRow r;
    r.n = std::lround(horizon / delta);
    r.delta = horizon / static_cast<double>(r.n);
    cfg.sweep.push_back(r);
  }
  return cfg;
}

std::string continuous_csv;

Outcome continuous_rate()
{
  const auto cfg = continuous_config();
  const auto table = run_experiment(cfg);
  continuous_csv = io::result_csv(table);
  const auto fit = fit_exponent(table, RateExponent::Base::T, false);
  bool regimes = true;
  for (const auto& r : table.rows)
    regimes = regimes && r.regime == "continuous-rate";
  const bool ok = regimes && std::abs(fit.slope - (-0.8)) <= 0.25;
  return { ok, fmt("slope %.3f +- %.3f vs -0.800 (tol 0.25)", fit.slope, fit.stderr_slope)
                 + (regimes ? "" : ", unexpected regime verdict") };
}

Outcome intermediate_rate()
{
  ExperimentConfig cfg = continuous_config();
  cfg.seed = 7;
  cfg.bandwidth = BandwidthRule::intermediate;
  cfg.scale = RateExponent::Base::n;
  cfg.sweep.clear();
  for (double n : { 2500.0, 5000.0, 10000.0, 20000.0 }) {
    SweepRow r;
    r.n = static_cast<long>(n);
    r.delta = 4.0 * sync_threshold_n(cfg.smoothness, n);
    cfg.sweep.push_back(r);
  }
  const auto table = run_experiment(cfg);
  const auto fit = fit_exponent(table, RateExponent::Base::n, false);
  bool regimes = true;
  for (const auto& r : table.rows)
    regimes = regimes && r.regime == "intermediate";
  const bool ok = regimes && std::abs(fit.slope - (-4.0 / 7.0)) <= 0.25;
  return { ok, fmt("slope %.3f +- %.3f vs -0.571 (tol 0.25)", fit.slope, fit.stderr_slope)
                 + (regimes ? "" : ", unexpected regime verdict") };
}

// Non-reversible OU (rotation in the (x1, x2) plane) so that coordinate lags
// bias the joint law; stationary law stays N(0, I). Staggered schedules hold
// Delta_n = T/n fixed while Delta'_n takes 0, T/(4n), T/(2n).
Outcome async_bias()
{
  ExperimentConfig cfg;
  cfg.model.d = 3;
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = -6.0;
  a(1, 0) = 6.0;
  cfg.model.drift_matrix = a;
  cfg.model.noise_matrix = Matrix(std::sqrt(2.0) * Matrix::Identity(3, 3));
  cfg.smoothness = SmoothnessSpec({ 2, 2, 2 });
  cfg.estimator = EstimatorMode::async;
  cfg.kernel_order = 2;
  cfg.replications = 2000;
  cfg.seed = 8;
  cfg.bandwidth = BandwidthRule::explicit_vector;
  cfg.explicit_bandwidth = { 0.3, 0.3, 0.3 };
  const long n = 5000;
  const double horizon = 2000.0;
  const double p = horizon / static_cast<double>(n);
  for (double o : { 0.0, p / 4.0, p / 2.0 }) {
    SweepRow r;
    r.n = n;
    r.horizon = horizon;
    r.schedule.kind = ScheduleKind::staggered;
    r.schedule.offsets = { 0.0, o, 0.0 };
    cfg.sweep.push_back(r);
  }
  const auto table = run_experiment(cfg);
  std::vector<double> dp;
  std::vector<double> bias;
  bool fixed_mesh = true;
  for (const auto& r : table.rows) {
    dp.push_back(r.delta_prime_n);
    bias.push_back(std::sqrt(r.bias_sq));
    fixed_mesh = fixed_mesh && std::abs(r.delta_n - p) <= 1e-12;
  }
  const double rho = spearman(dp, bias);
  return { rho >= 0.8 && fixed_mesh,
           fmt("Delta'=(%.2f,%.2f,%.2f)", dp[0], dp[1], dp[2]) + fmt(" |bias|=(%.2e,%.2e,%.2e)", bias[0], bias[1], bias[2])
             + fmt(" rho %.2f (min 0.8)", rho) };
}

Outcome reproducibility()
{
  if (continuous_csv.empty())
    return { false, "criterion 6 produced no table" };
  auto cfg = continuous_config();
  cfg.workers = 3;
  const auto again = io::result_csv(run_experiment(cfg));
  const bool same = again == continuous_csv;
  return { same, same ? "workers=1 and workers=3 CSVs are byte-identical" : "CSV differs between worker counts" };
}

Outcome classifier()
{
  const SmoothnessSpec s({ 2, 2, 2 });
  // 50-digit oracle values (tests/oracles/rate_thresholds.py)
  const double sync_thr = 0.025118864315095801111;
  const double quarter = 0.0062797160787739502777;
  const double dprime = 0.0037275248209039364728;
  bool ok = true;
  std::string why;

  const auto a = classify_regime(s, { 3, 1e6, 0.01, 0.0, 1e4, true });
  const auto b = classify_regime(s, { 3, 5e4, 0.2, 0.0, 1e4, true });
  if (a.regime != Regime::continuous_rate || b.regime != Regime::intermediate
      || std::abs(a.binding_threshold / sync_thr - 1.0) > 1e-14) {
    ok = false;
    why += " sync example;";
  }

  bool vacuous = asynchrony_delta_prime(uniform_schedule(1000, 0.01, 3)) == 0.0;
  for (const auto& t : a.thresholds)
    vacuous = vacuous && t.condition.find("Delta'") == std::string::npos;
  if (!vacuous) {
    ok = false;
    why += " synchronous Delta' example;";
  }

  const auto c = classify_regime(s, { 3, 2e6, 5e-3, 1e-3, 1e4, false });
  if (c.regime != Regime::continuous_rate || std::abs(c.thresholds.at(0).threshold / quarter - 1.0) > 1e-14
      || std::abs(c.thresholds.at(1).threshold / dprime - 1.0) > 1e-14) {
    ok = false;
    why += " async example;";
  }
  return { ok, ok ? "3 worked examples reproduce (thresholds within 1e-14 of oracle)" : "mismatch:" + why };
}

} // namespace

int main()
{
  report(1, "kernel moments", 1.0, kernel_moments);
  report(2, "estimator normalization", 10.0, normalization);
  report(3, "sync/async equivalence", 5.0, sync_async);
  report(4, "Delta measures", 5.0, delta_measures);
  report(5, "rate-formula identities", 1.0, rate_identities);
  report(6, "continuous-regime rate", 600.0, continuous_rate);
  report(7, "intermediate-regime rate", 600.0, intermediate_rate);
  report(8, "asynchronous bias sensitivity", 600.0, async_bias);
  report(9, "reproducibility", 600.0, reproducibility);
  report(10, "regime classifier", 1.0, classifier);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
