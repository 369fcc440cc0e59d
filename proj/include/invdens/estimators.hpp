#pragma once

// Kernel estimators of the invariant density at a point: continuous record,
// synchronous discrete, asynchronous (exact union-grid segmentation) and the
// hybrid estimator with two continuously observed coordinates.

#include "invdens/error.hpp"
#include "invdens/kernels.hpp"
#include "invdens/rates.hpp"
#include "invdens/sampling.hpp"
#include "invdens/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace invdens {

class EstimateRequest
{
public:
  EstimateRequest(std::vector<double> point,
                  BandwidthVector h,
                  KernelSpec kernel,
                  std::optional<SmoothnessSpec> smoothness = std::nullopt)
    : point_(std::move(point))
    , h_(std::move(h))
    , kernel_(std::move(kernel))
    , smoothness_(std::move(smoothness))
  {
    if (point_.size() != h_.size())
      fail(ErrorKind::dimension, "evaluation point and bandwidth dimensions differ");
    if (smoothness_) {
      if (static_cast<std::size_t>(smoothness_->dimension()) != point_.size())
        fail(ErrorKind::dimension, "smoothness vector and point dimensions differ");
      if (static_cast<double>(kernel_.order()) < smoothness_->max_beta())
        fail(ErrorKind::precondition, "kernel order must be >= max beta");
    }
  }

  int dimension() const { return static_cast<int>(point_.size()); }
  const std::vector<double>& point() const { return point_; }
  const BandwidthVector& bandwidth() const { return h_; }
  const KernelSpec& kernel() const { return kernel_; }
  const std::optional<SmoothnessSpec>& smoothness() const { return smoothness_; }

  //! K_{h_l}(x_l - v) for a single coordinate.
  double factor(int l, double v) const
  {
    const auto i = static_cast<std::size_t>(l);
    const double u = point_[i] - v;
    if (!(std::abs(u) <= h_[i]))
      return 0.0;
    return kernel_(u / h_[i]) / h_[i];
  }

private:
  std::vector<double> point_;
  BandwidthVector h_;
  KernelSpec kernel_;
  std::optional<SmoothnessSpec> smoothness_;
};

//! Display-only post-processing; MSE targets use the raw estimate.
inline double display_clip(double estimate)
{
  return std::max(estimate, 0.0);
}

namespace detail {

inline std::vector<std::vector<double>> coordinate_factors(const ObservationSet& obs,
                                                           const EstimateRequest& req,
                                                           const std::vector<int>& coords)
{
  std::vector<std::vector<double>> f(coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const auto& v = obs.values(static_cast<int>(j));
    f[j].reserve(v.size());
    for (double x : v)
      f[j].push_back(req.factor(coords[j], x));
  }
  return f;
}

inline std::vector<int> identity_coords(int d)
{
  std::vector<int> c(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l)
    c[static_cast<std::size_t>(l)] = l;
  return c;
}

} // namespace detail

//! Synchronous estimator with weights (t_{i+1} - t_i) / T_n; 1/n on uniform grids with T_n = n Delta.
inline double estimate_sync(const ObservationSet& obs, const EstimateRequest& req)
{
  const auto& s = obs.schedule();
  if (!s.synchronous())
    fail(ErrorKind::schedule_not_synchronous, "estimate_sync needs a synchronous schedule");
  if (obs.dimension() != req.dimension())
    fail(ErrorKind::dimension, "observation and request dimensions differ");
  const auto f = detail::coordinate_factors(obs, req, detail::identity_coords(req.dimension()));
  const auto& t = s.grid(0);
  const double horizon = s.horizon();
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = (i + 1 < t.size() ? t[i + 1] : horizon) - t[i];
    double k = w;
    for (const auto& fl : f)
      k *= fl[i];
    sum += k;
  }
  return sum / horizon;
}

//! Asynchronous estimator, evaluated exactly: the integrand is constant between consecutive
//! ticks of the union grid.
inline double estimate_async(const ObservationSet& obs, const EstimateRequest& req)
{
  const auto& s = obs.schedule();
  if (obs.dimension() != req.dimension())
    fail(ErrorKind::dimension, "observation and request dimensions differ");
  const auto ticks = s.union_grid();
  if (ticks.empty())
    fail(ErrorKind::domain, "empty union grid");
  const auto f = detail::coordinate_factors(obs, req, detail::identity_coords(req.dimension()));
  const auto d = f.size();
  std::vector<std::size_t> pos(d, 0);
  const double horizon = s.horizon();
  double sum = 0.0;
  for (std::size_t k = 0; k < ticks.size(); ++k) {
    const double u = ticks[k];
    const double w = (k + 1 < ticks.size() ? ticks[k + 1] : horizon) - u;
    double v = w;
    for (std::size_t l = 0; l < d; ++l) {
      const auto& g = s.grids()[l];
      while (pos[l] + 1 < g.size() && g[pos[l] + 1] <= u)
        ++pos[l];
      v *= f[l][pos[l]];
    }
    sum += v;
  }
  return sum / horizon;
}

//! Which path columns are observed continuously; they also name the
//! corresponding entries of the evaluation point. The remaining coordinates,
//! in increasing order, are the coordinates of the ObservationSet.
struct HybridCoordinates
{
  int first = 0;
  int second = 1;
};

//! Hybrid estimator (two continuous coordinates), left-endpoint Riemann sum on the fine grid of `path`.
inline double estimate_hybrid(const FinePath& path,
                              const ObservationSet& obs,
                              const EstimateRequest& req,
                              HybridCoordinates cont = {})
{
  const int d = req.dimension();
  if (d < 3)
    fail(ErrorKind::dimension, "hybrid estimator needs d >= 3");
  if (cont.first == cont.second || cont.first < 0 || cont.second < 0 || cont.first >= d || cont.second >= d)
    fail(ErrorKind::dimension, "invalid continuous coordinate pair");
  if (std::max(cont.first, cont.second) >= path.dimension())
    fail(ErrorKind::dimension, "path lacks the continuous coordinates");
  if (obs.dimension() != d - 2)
    fail(ErrorKind::dimension, "observation set must carry the d - 2 discrete coordinates");

  std::vector<int> discrete;
  for (int l = 0; l < d; ++l) {
    if (l != cont.first && l != cont.second)
      discrete.push_back(l);
  }
  const auto f = detail::coordinate_factors(obs, req, discrete);
  const auto& s = obs.schedule();
  const double horizon = s.horizon();
  const double dt = path.dt;
  const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
  if (steps < 1 || steps > path.size())
    fail(ErrorKind::domain, "fine path does not cover [0, T_n)");

  std::vector<std::size_t> pos(f.size(), 0);
  const double slack = 1e-9 * dt;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double u = static_cast<double>(k) * dt;
    double v = req.factor(cont.first, path.values(k, cont.first));
    if (v != 0.0)
      v *= req.factor(cont.second, path.values(k, cont.second));
    for (std::size_t j = 0; j < f.size(); ++j) {
      const auto& g = s.grids()[j];
      while (pos[j] + 1 < g.size() && g[pos[j] + 1] <= u + slack)
        ++pos[j];
      v *= f[j][pos[j]];
    }
    sum += v;
  }
  return sum * dt / horizon;
}

//! Continuous-observation estimator on the fine grid: left-endpoint sum over [0, T], T = path horizon.
inline double estimate_continuous(const FinePath& path, const EstimateRequest& req)
{
  if (path.dimension() != req.dimension())
    fail(ErrorKind::dimension, "path and request dimensions differ");
  if (path.size() < 2)
    fail(ErrorKind::domain, "continuous estimator needs at least two fine-grid points");
  const int d = req.dimension();
  double sum = 0.0;
  for (Eigen::Index k = 0; k + 1 < path.size(); ++k) {
    double v = 1.0;
    for (int l = 0; l < d && v != 0.0; ++l)
      v *= req.factor(l, path.values(k, l));
    sum += v;
  }
  return sum / static_cast<double>(path.size() - 1);
}

} // namespace invdens
