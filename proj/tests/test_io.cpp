#include "invdens/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace invdens;

namespace {

std::string temp_file(const std::string& name)
{
  return (std::filesystem::temp_directory_path() / ("invdens_test_" + name)).string();
}

} // namespace

TEST(Io, ConfigRoundTrip)
{
  const auto j = io::json::parse(R"({
    "model": {"id": "ou", "d": 3, "drift_matrix": [[1,-6,0],[6,1,0],[0,0,1]]},
    "smoothness": [2,2,2],
    "estimator": "async",
    "kernel_order": 2,
    "replications": 10,
    "seed": 5,
    "workers": 2,
    "scale": "n",
    "bandwidth": {"rule": "explicit", "h": [0.3,0.3,0.3]},
    "sweep": [{"n": 100, "T": 40, "schedule": {"mode": "staggered", "offsets": [0,0.1,0]}}],
    "acceptance": {"expected_slope": -0.5, "tolerance": 0.1}
  })");
  const auto cfg = io::config_from_json(j);
  EXPECT_EQ(cfg.estimator, EstimatorMode::async);
  EXPECT_EQ(cfg.bandwidth, BandwidthRule::explicit_vector);
  EXPECT_EQ(cfg.scale, RateExponent::Base::n);
  ASSERT_TRUE(cfg.model.drift_matrix);
  EXPECT_EQ((*cfg.model.drift_matrix)(1, 0), 6.0);
  EXPECT_EQ(cfg.sweep[0].schedule.kind, ScheduleKind::staggered);
  EXPECT_EQ(cfg.sweep[0].schedule.offsets[1], 0.1);
  EXPECT_EQ(*cfg.expected_slope, -0.5);
}

TEST(Io, BadConfig)
{
  try {
    io::config_from_json(io::json::parse(R"({"model": {"id": "ou"}})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::configuration);
  }
  EXPECT_THROW(io::config_from_json(io::json::parse(
                 R"({"model":{"d":3},"smoothness":[2,2,2],"replications":4,"estimator":"bogus","sweep":[]})")),
               Error);
}

TEST(Io, ResultCsvHeader)
{
  ResultTable t;
  ResultRow r;
  r.scale = 250;
  r.regime = "gap";
  t.rows.push_back(r);
  const auto csv = io::result_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scale,delta_n,delta_prime_n,mse,bias_sq,variance,stderr,regime,theory_exponent");
  EXPECT_NE(csv.find(",gap,NA"), std::string::npos);
}

TEST(Io, ObservationCsvRoundTrip)
{
  const SamplingSchedule s(1.5, { { 0.0, 1.0 }, { 0.0, 0.5 } });
  const ObservationSet obs(s, { { 0.25, -1.5 }, { 3.0, 0.125 } });
  const auto path = temp_file("obs.csv");
  io::write_text(path, io::observations_csv(obs));
  const auto back = io::observations_from_table(io::read_observations_csv(path), 1.5);
  EXPECT_TRUE(back.schedule() == s);
  EXPECT_EQ(back.values(0), obs.values(0));
  EXPECT_EQ(back.values(1), obs.values(1));
  std::remove(path.c_str());
}

TEST(Io, ScheduleJsonRoundTrip)
{
  const SamplingSchedule s(2.0, { { 0.0, 0.7 }, { 0.0, 0.5, 1.9 } });
  EXPECT_TRUE(io::schedule_from_json(io::json::parse(io::schedule_json(s).dump())) == s);
}

TEST(Io, PathCsvRoundTrip)
{
  const auto m = make_ou(2, 1.0, 1.0);
  const auto p = ou_exact_fine_path(*m.ou(), 0.25, 2.0, { 1, 1 });
  const auto file = temp_file("path.csv");
  io::write_text(file, io::path_csv(p));
  const auto back = io::path_from_table(io::read_observations_csv(file));
  EXPECT_EQ(back.size(), p.size());
  EXPECT_TRUE((back.values.array() == p.values.array()).all());
  std::remove(file.c_str());
}

TEST(Io, SvgContainsPoints)
{
  ResultTable t;
  for (double s : { 100.0, 200.0, 400.0 }) {
    ResultRow r;
    r.horizon = s;
    r.scale = s;
    r.mse = 1.0 / s;
    t.rows.push_back(r);
  }
  std::vector<double> x{ 100, 200, 400 }, y{ 0.01, 0.005, 0.0025 };
  const auto svg = io::result_svg(t, fit_loglog(x, y, false), false);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), 'c') >= 3, true);
}
