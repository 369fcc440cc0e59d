#include "invdens/harness.hpp"

#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>

using namespace invdens;
using boost::math::constants::pi;

namespace {

ExperimentConfig small_ou_config()
{
  ExperimentConfig cfg;
  cfg.model.d = 3;
  cfg.smoothness = SmoothnessSpec({ 2, 2, 2 });
  cfg.estimator = EstimatorMode::sync;
  cfg.kernel_order = 2;
  cfg.replications = 24;
  cfg.seed = 2024;
  cfg.bandwidth = BandwidthRule::continuous;
  for (double horizon : { 50.0, 100.0 }) {
    SweepRow r;
    r.delta = 0.1;
    r.n = static_cast<long>(horizon / r.delta);
    cfg.sweep.push_back(r);
  }
  return cfg;
}

DiffusionModel pinned_model(int d)
{
  return DiffusionModel(
    "pinned",
    d,
    [d](const Vector&) -> Vector { return Vector::Zero(d); },
    [d](const Vector&) -> Matrix { return Matrix::Zero(d, d); },
    A1Constants{ 1.0, 1.0, 1.0, 1.0, 1.0 },
    A2Constants{ 1.0, 1.0 });
}

} // namespace

TEST(FitExponent, ExactPowerLaw)
{
  const std::vector<double> t{ 250, 500, 1000, 2000 };
  std::vector<double> y;
  for (double v : t)
    y.push_back(7.0 * std::pow(v, -0.8));
  const auto f = fit_loglog(t, y, false);
  EXPECT_NEAR(f.slope, -0.8, 1e-9);
  EXPECT_NEAR(f.intercept, std::log(7.0), 1e-9);
  EXPECT_NEAR(f.stderr_slope, 0.0, 1e-9);
}

TEST(FitExponent, StripLog)
{
  const std::vector<double> t{ 250, 500, 1000, 2000, 4000 };
  std::vector<double> y;
  for (double v : t)
    y.push_back(std::pow(std::log(v) / v, 0.857));
  EXPECT_NEAR(fit_loglog(t, y, true).slope, -0.857, 1e-9);
}

TEST(FitExponent, ConstantRows)
{
  const std::vector<double> t{ 1, 2, 4, 8 };
  const std::vector<double> y{ 3, 3, 3, 3 };
  EXPECT_NEAR(fit_loglog(t, y, false).slope, 0.0, 1e-9);
}

TEST(FitExponent, NonpositiveRowsExcluded)
{
  const std::vector<double> t{ 1, 2, 4, 8 };
  const std::vector<double> y{ 1, 0.0, 0.25, 0.125 };
  const auto f = fit_loglog(t, y, false);
  EXPECT_EQ(f.used_rows, 3u);
  EXPECT_EQ(f.warnings.size(), 1u);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  const std::vector<double> bad{ 1, 0.0, -1.0, 0.125 };
  try {
    fit_loglog(t, bad, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::fit);
  }
}

TEST(Spearman, Basics)
{
  const std::vector<double> a{ 1, 2, 3 };
  const std::vector<double> b{ 10, 20, 30 };
  const std::vector<double> c{ 30, 20, 10 };
  EXPECT_DOUBLE_EQ(spearman(a, b), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, c), -1.0);
  const std::vector<double> ties{ 1, 1, 2, 3 };
  const std::vector<double> other{ 5, 6, 7, 8 };
  EXPECT_NEAR(spearman(ties, other), 0.9486832980505138, 1e-12);
}

TEST(RunExperiment, MseDecomposition)
{
  const auto t = run_experiment(small_ou_config());
  ASSERT_EQ(t.rows.size(), 2u);
  for (const auto& r : t.rows) {
    EXPECT_NEAR(r.mse, r.bias_sq + r.variance, 1e-12 * r.mse);
    EXPECT_GT(r.stderr_mse, 0.0);
    EXPECT_NEAR(r.target, std::pow(2.0 * pi<double>(), -1.5), 1e-15);
    EXPECT_EQ(r.delta_prime_n, 0.0);
    EXPECT_NEAR(r.delta_n, 0.1, 1e-12);
    EXPECT_EQ(r.estimates.size(), 24u);
  }
}

TEST(RunExperiment, DeterministicAcrossWorkers)
{
  auto cfg = small_ou_config();
  cfg.workers = 1;
  const auto a = run_experiment(cfg);
  cfg.workers = 4;
  const auto b = run_experiment(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].estimates, b.rows[i].estimates);
    EXPECT_EQ(a.rows[i].mse, b.rows[i].mse);
    EXPECT_EQ(a.rows[i].variance, b.rows[i].variance);
  }
}

TEST(RunExperiment, AsyncMatchesSyncOnSynchronousSchedule)
{
  auto cfg = small_ou_config();
  const auto a = run_experiment(cfg);
  cfg.estimator = EstimatorMode::async;
  const auto b = run_experiment(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].estimates, b.rows[i].estimates);
    EXPECT_EQ(a.rows[i].mse, b.rows[i].mse);
  }
}

TEST(RunExperiment, PinnedModelHasZeroVariance)
{
  auto cfg = small_ou_config();
  cfg.estimator = EstimatorMode::async;
  cfg.bandwidth = BandwidthRule::explicit_vector;
  cfg.explicit_bandwidth = { 0.5, 0.5, 0.5 };
  const double k0 = build_kernel(2).at_zero();
  const double constant = std::pow(k0 / 0.5, 3);
  const auto t = run_experiment(cfg, pinned_model(3), constant);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.variance, 0.0);
    EXPECT_NEAR(r.mean_estimate, constant, 1e-12);
  }
}

TEST(RunExperiment, ContinuousAndHybridModes)
{
  auto cfg = small_ou_config();
  cfg.replications = 4;
  cfg.fine_steps = 5;
  for (auto mode : { EstimatorMode::continuous, EstimatorMode::hybrid }) {
    cfg.estimator = mode;
    const auto t = run_experiment(cfg);
    for (const auto& r : t.rows) {
      EXPECT_TRUE(std::isfinite(r.mse));
      EXPECT_GT(r.mean_estimate, 0.0);
    }
  }
}

TEST(RunExperiment, EulerMaruyamaModel)
{
  auto cfg = small_ou_config();
  cfg.model.id = "hyperbolic-langevin";
  cfg.model.d = 3;
  cfg.replications = 4;
  cfg.fine_steps = 10;
  cfg.sweep.resize(1);
  const auto t = run_experiment(cfg);
  EXPECT_GT(t.rows[0].mean_estimate, 0.0);
  EXPECT_EQ(t.oracle, "analytic");
}

TEST(RunExperiment, MissingOracle)
{
  const auto cfg = small_ou_config();
  const auto m = make_ou(3, 1.0, std::sqrt(2.0)).without_density();
  try {
    run_experiment(cfg, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::configuration);
  }
}

TEST(RunExperiment, HistogramFallbackLabelled)
{
  auto cfg = small_ou_config();
  cfg.histogram_fallback = true;
  cfg.histogram_time = 2000.0;
  cfg.histogram_bin = 0.5;
  cfg.replications = 4;
  cfg.sweep.resize(1);
  const auto m = make_ou(3, 1.0, std::sqrt(2.0)).without_density();
  const auto t = run_experiment(cfg, m);
  EXPECT_NE(t.oracle.find("histogram"), std::string::npos);
  EXPECT_GT(t.rows[0].target, 0.0);
}

TEST(RunExperiment, DivergenceAborts)
{
  auto cfg = small_ou_config();
  cfg.replications = 4;
  cfg.sweep.resize(1);
  const DiffusionModel m(
    "explosive", 3, [](const Vector& x) { return Vector(x.array().square() * 1e3 + 1.0); },
    [](const Vector&) { return Matrix(Matrix::Identity(3, 3)); }, A1Constants{ 1.0, 1.0, 1.0, 1.0, 1.0 },
    A2Constants{ 1.0, 1.0 });
  try {
    run_experiment(cfg, m, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::path_divergence);
    EXPECT_NE(std::string(e.what()).find("replications diverged"), std::string::npos);
  }
}

TEST(RunExperiment, ConfigValidation)
{
  auto cfg = small_ou_config();
  cfg.replications = 1;
  EXPECT_THROW(run_experiment(cfg), Error);
  cfg = small_ou_config();
  cfg.sweep.clear();
  EXPECT_THROW(run_experiment(cfg), Error);
  cfg = small_ou_config();
  cfg.sweep[0].horizon = 51.0; // not n * delta
  EXPECT_THROW(run_experiment(cfg), Error);
}

TEST(Histogram, OriginBinMatchesGaussian)
{
  const auto m = make_ou(2, 1.0, std::sqrt(2.0));
  HistogramOptions opt;
  opt.dt = 0.05;
  opt.origin = { -0.125, -0.125 }; // bin [-0.125, 0.125)^2 contains 0
  const auto h = histogram_oracle(m, 1e5, 0.25, { 17, 1 }, opt);
  // exact mass of the centre bin under N(0, I)
  const double edge = std::erf(0.125 / std::sqrt(2.0));
  const double expect = edge * edge / (0.25 * 0.25);
  const std::vector<double> zero{ 0.0, 0.0 };
  EXPECT_NEAR(h(zero), expect, 4.0 * h.batch_stderr(zero));
  EXPECT_NEAR(h(zero), 1.0 / (2.0 * pi<double>()), 0.01);
}

TEST(Histogram, NormalizedExactly)
{
  const auto m = make_hyperbolic_langevin(2, 1.0);
  HistogramOptions opt;
  opt.dt = 0.02;
  const auto h = histogram_oracle(m, 500.0, 0.3, { 3, 3 }, opt);
  EXPECT_NEAR(h.total_mass(), 1.0, 1e-12);
}

TEST(Histogram, PinnedPathSingleBin)
{
  const auto h = histogram_oracle(pinned_model(2), 100.0, 0.5, { 1, 1 });
  EXPECT_EQ(h.occupied_bins(), 1u);
  EXPECT_NEAR(h.total_mass(), 1.0, 1e-15);
}
