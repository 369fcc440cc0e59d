#pragma once

// Path simulation: Euler-Maruyama on a fine grid for any model, exact
// Gaussian transitions for Ornstein-Uhlenbeck, and extraction of
// observations along a schedule.

#include "invdens/error.hpp"
#include "invdens/models.hpp"
#include "invdens/rng.hpp"
#include "invdens/sampling.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <variant>
#include <vector>

namespace invdens {

//! States stored row-wise: row k is the state at time k * dt.
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDefaultBurnIn = 20.0;
inline constexpr double kDefaultFineSteps = 50.0; // dt_fine = Delta_n / 50

struct FinePath
{
  double dt = 0.0;
  PathMatrix values;

  int dimension() const { return static_cast<int>(values.cols()); }
  Eigen::Index size() const { return values.rows(); }
  double horizon() const { return dt * static_cast<double>(values.rows() - 1); }
};

//! Number of fine-grid points covering [0, T].
inline Eigen::Index fine_grid_points(double horizon, double dt)
{
  return static_cast<Eigen::Index>(std::floor(horizon / dt + 1e-9)) + 1;
}

//! Euler-Maruyama X_{k+1} = X_k + b(X_k) dt + a(X_k) sqrt(dt) xi_k. The
//! first t_burn time units are discarded; the returned window covers [0, T].
inline FinePath simulate_path(const DiffusionModel& model,
                              const Vector& x0,
                              double dt,
                              double t_burn,
                              double horizon,
                              rng::StreamId stream)
{
  if (!(dt > 0.0) || !(dt <= horizon) || !(t_burn >= 0.0))
    fail(ErrorKind::parameter, "simulate_path needs 0 < dt <= T and t_burn >= 0");
  const int d = model.dimension();
  if (x0.size() != d)
    fail(ErrorKind::dimension, "initial point dimension does not match model");

  rng::Philox gen(stream);
  std::normal_distribution<double> normal;
  const double sqdt = std::sqrt(dt);
  Vector x = x0;
  Vector xi(d);

  auto advance = [&](std::int64_t step) {
    for (int i = 0; i < d; ++i)
      xi[i] = normal(gen);
    x += model.drift(x) * dt + model.diffusion(x) * xi * sqdt;
    if (!x.allFinite())
      fail(ErrorKind::path_divergence, "non-finite state at step " + std::to_string(step));
  };

  const auto burn = static_cast<std::int64_t>(std::llround(t_burn / dt));
  for (std::int64_t k = 0; k < burn; ++k)
    advance(k);

  FinePath path;
  path.dt = dt;
  path.values.resize(fine_grid_points(horizon, dt), d);
  path.values.row(0) = x.transpose();
  for (Eigen::Index k = 1; k < path.values.rows(); ++k) {
    advance(burn + k);
    path.values.row(k) = x.transpose();
  }
  return path;
}

//! Start the exact OU path from a stationary draw N(0, Sigma_inf).
struct StationaryDraw
{};

using OuStart = std::variant<Vector, StationaryDraw>;

namespace detail {

//! Exact OU transition over a step s: X' = E(s) X + L(s) xi.
class OuStepper
{
public:
  explicit OuStepper(const OuParams& ou)
    : ou_(ou)
    , diagonal_(ou.diagonal())
    , cov_(ou_stationary_covariance(ou))
  {
    if (diagonal_) {
      theta_ = ou.drift_matrix.diagonal();
      var_ = cov_.diagonal();
    }
  }

  const Matrix& stationary_covariance() const { return cov_; }

  template<class Gen>
  Vector stationary(Gen& gen, std::normal_distribution<double>& normal) const
  {
    const auto d = cov_.rows();
    Vector xi(d);
    for (Eigen::Index i = 0; i < d; ++i)
      xi[i] = normal(gen);
    if (diagonal_)
      return (var_.array().sqrt() * xi.array()).matrix();
    return root(cov_) * xi;
  }

  template<class Gen>
  void step(Vector& x, double s, Gen& gen, std::normal_distribution<double>& normal)
  {
    const auto d = x.size();
    if (s == 0.0)
      return;
    if (diagonal_) {
      if (s != last_s_) {
        last_s_ = s;
        decay_.resize(d);
        sd_.resize(d);
        for (Eigen::Index i = 0; i < d; ++i) {
          decay_[i] = std::exp(-theta_[i] * s);
          sd_[i] = std::sqrt(-var_[i] * std::expm1(-2.0 * theta_[i] * s));
        }
      }
      for (Eigen::Index i = 0; i < d; ++i)
        x[i] = decay_[i] * x[i] + sd_[i] * normal(gen);
      return;
    }
    const auto key = static_cast<long long>(std::llround(s * 1e12));
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const Matrix e = (-ou_.drift_matrix * s).exp();
      const Matrix c = cov_ - e * cov_ * e.transpose();
      it = cache_.emplace(key, std::make_pair(e, root(0.5 * (c + c.transpose())))).first;
    }
    Vector xi(d);
    for (Eigen::Index i = 0; i < d; ++i)
      xi[i] = normal(gen);
    x = it->second.first * x + it->second.second * xi;
  }

private:
  static Matrix root(const Matrix& c)
  {
    const Eigen::LLT<Matrix> llt(c);
    if (llt.info() == Eigen::Success)
      return llt.matrixL();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
  }

  const OuParams& ou_;
  bool diagonal_;
  Matrix cov_;
  Vector theta_;
  Vector var_;
  double last_s_ = -1.0;
  Vector decay_;
  Vector sd_;
  std::map<long long, std::pair<Matrix, Matrix>> cache_;
};

} // namespace detail

//! Samples X at the given sorted times with the exact Gaussian transition
//! X_{t+s} = e^{-A s} X_t + N(0, Sigma - e^{-A s} Sigma e^{-A^T s}).
inline PathMatrix ou_exact_path(const OuParams& ou,
                                const std::vector<double>& times,
                                rng::StreamId stream,
                                const OuStart& start = StationaryDraw{})
{
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1]))
      fail(ErrorKind::parameter, "times must be sorted and nonnegative");
  }
  const auto d = ou.drift_matrix.rows();
  detail::OuStepper stepper(ou);
  rng::Philox gen(stream);
  std::normal_distribution<double> normal;

  Vector x;
  double t = 0.0;
  if (const auto* x0 = std::get_if<Vector>(&start)) {
    if (x0->size() != d)
      fail(ErrorKind::dimension, "start point dimension does not match model");
    x = *x0;
  } else {
    x = stepper.stationary(gen, normal);
    if (!times.empty())
      t = times.front();
  }

  PathMatrix out(static_cast<Eigen::Index>(times.size()), d);
  for (std::size_t i = 0; i < times.size(); ++i) {
    stepper.step(x, times[i] - t, gen, normal);
    t = times[i];
    out.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  return out;
}

//! Exact OU path on a fine grid {0, dt, ..., T}.
inline FinePath ou_exact_fine_path(const OuParams& ou,
                                   double dt,
                                   double horizon,
                                   rng::StreamId stream,
                                   const OuStart& start = StationaryDraw{})
{
  const auto n = fine_grid_points(horizon, dt);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    times[static_cast<std::size_t>(k)] = static_cast<double>(k) * dt;
  return FinePath{ dt, ou_exact_path(ou, times, stream, start) };
}

//! Per-coordinate values X^l at the ticks of coordinate l.
class ObservationSet
{
public:
  ObservationSet(SamplingSchedule schedule,
                 std::vector<std::vector<double>> values,
                 std::shared_ptr<const FinePath> path = nullptr)
    : schedule_(std::move(schedule))
    , values_(std::move(values))
    , path_(std::move(path))
  {
    if (values_.size() != static_cast<std::size_t>(schedule_.dimension()))
      fail(ErrorKind::dimension, "one value list per coordinate required");
    for (int l = 0; l < schedule_.dimension(); ++l) {
      if (values_[static_cast<std::size_t>(l)].size() != schedule_.grid(l).size())
        fail(ErrorKind::dimension, "value list length differs from grid length");
    }
  }

  const SamplingSchedule& schedule() const { return schedule_; }
  int dimension() const { return schedule_.dimension(); }
  const std::vector<double>& values(int l) const { return values_.at(static_cast<std::size_t>(l)); }
  const std::vector<std::vector<double>>& all_values() const { return values_; }
  const std::shared_ptr<const FinePath>& path() const { return path_; }

private:
  SamplingSchedule schedule_;
  std::vector<std::vector<double>> values_;
  std::shared_ptr<const FinePath> path_;
};

//! Builds observations from states recorded at every union-grid tick.
inline ObservationSet observations_from_union(const SamplingSchedule& s,
                                              const std::vector<double>& union_ticks,
                                              const PathMatrix& states)
{
  std::vector<std::vector<double>> values(static_cast<std::size_t>(s.dimension()));
  for (int l = 0; l < s.dimension(); ++l) {
    const auto& g = s.grid(l);
    auto& v = values[static_cast<std::size_t>(l)];
    v.reserve(g.size());
    std::size_t k = 0;
    for (double t : g) {
      while (union_ticks[k] != t)
        ++k;
      v.push_back(states(static_cast<Eigen::Index>(k), l));
    }
  }
  return ObservationSet(s, std::move(values));
}

//! Extracts X^l at the fine-grid index nearest each tick of coordinate l.
inline ObservationSet observe(std::shared_ptr<const FinePath> path, const SamplingSchedule& s)
{
  if (!path)
    fail(ErrorKind::parameter, "observe needs a path");
  if (path->dimension() != s.dimension())
    fail(ErrorKind::dimension, "path and schedule dimensions differ");
  const double dt = path->dt;
  std::vector<std::vector<double>> values(static_cast<std::size_t>(s.dimension()));
  for (int l = 0; l < s.dimension(); ++l) {
    auto& v = values[static_cast<std::size_t>(l)];
    for (double t : s.grid(l)) {
      const auto idx = static_cast<Eigen::Index>(std::llround(t / dt));
      if (idx >= path->size())
        fail(ErrorKind::domain, "tick " + std::to_string(t) + " beyond path horizon");
      if (std::abs(static_cast<double>(idx) * dt - t) > 0.5 * dt * (1.0 + 1e-9))
        fail(ErrorKind::domain, "tick " + std::to_string(t) + " cannot be snapped");
      v.push_back(path->values(idx, l));
    }
  }
  return ObservationSet(s, std::move(values), std::move(path));
}

inline ObservationSet observe(const FinePath& path, const SamplingSchedule& s)
{
  return observe(std::make_shared<const FinePath>(path), s);
}

//! Euler-Maruyama run that only records the states at union-grid ticks
//! (snapped to the fine grid), avoiding storage of the full fine path.
inline ObservationSet simulate_observations(const DiffusionModel& model,
                                            const SamplingSchedule& s,
                                            const Vector& x0,
                                            double dt,
                                            double t_burn,
                                            rng::StreamId stream)
{
  const int d = model.dimension();
  if (s.dimension() != d)
    fail(ErrorKind::dimension, "schedule and model dimensions differ");
  if (!(dt > 0.0) || !(t_burn >= 0.0))
    fail(ErrorKind::parameter, "dt must be positive and burn-in nonnegative");
  const auto ticks = s.union_grid();
  std::vector<Eigen::Index> target(ticks.size());
  for (std::size_t i = 0; i < ticks.size(); ++i)
    target[i] = static_cast<Eigen::Index>(std::llround(ticks[i] / dt));

  rng::Philox gen(stream);
  std::normal_distribution<double> normal;
  const double sqdt = std::sqrt(dt);
  Vector x = x0;
  Vector xi(d);
  std::int64_t step = 0;
  auto advance = [&] {
    for (int i = 0; i < d; ++i)
      xi[i] = normal(gen);
    x += model.drift(x) * dt + model.diffusion(x) * xi * sqdt;
    ++step;
    if (!x.allFinite())
      fail(ErrorKind::path_divergence, "non-finite state at step " + std::to_string(step));
  };
  const auto burn = static_cast<std::int64_t>(std::llround(t_burn / dt));
  for (std::int64_t k = 0; k < burn; ++k)
    advance();

  PathMatrix states(static_cast<Eigen::Index>(ticks.size()), d);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    while (k < target[i]) {
      advance();
      ++k;
    }
    states.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  return observations_from_union(s, ticks, states);
}

//! Exact OU observations along a schedule, starting from stationarity.
inline ObservationSet ou_exact_observations(const OuParams& ou, const SamplingSchedule& s, rng::StreamId stream)
{
  const auto ticks = s.union_grid();
  return observations_from_union(s, ticks, ou_exact_path(ou, ticks, stream, StationaryDraw{}));
}

} // namespace invdens
