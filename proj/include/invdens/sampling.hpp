#pragma once

// Observation schedules: one strictly increasing tick grid per coordinate on
// [0, T_n], the last-tick maps phi_{n,l}, the mesh Delta_n and the
// asynchronicity Delta'_n.

#include "invdens/error.hpp"
#include "invdens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace invdens {

class SamplingSchedule
{
public:
  SamplingSchedule(double horizon, std::vector<std::vector<double>> grids)
    : horizon_(horizon)
    , grids_(std::move(grids))
  {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
      fail(ErrorKind::parameter, "schedule horizon must be positive and finite");
    if (grids_.empty())
      fail(ErrorKind::dimension, "schedule needs at least one coordinate");
    for (std::size_t l = 0; l < grids_.size(); ++l) {
      const auto& g = grids_[l];
      if (g.empty() || g.front() != 0.0)
        fail(ErrorKind::parameter, "grid " + std::to_string(l) + " must start at 0");
      for (std::size_t i = 1; i < g.size(); ++i) {
        if (!(g[i] > g[i - 1]))
          fail(ErrorKind::parameter, "grid " + std::to_string(l) + " is not strictly increasing");
      }
      if (g.back() > horizon_)
        fail(ErrorKind::parameter, "grid " + std::to_string(l) + " exceeds the horizon");
    }
    synchronous_ = std::all_of(grids_.begin(), grids_.end(), [&](const auto& g) { return g == grids_.front(); });
  }

  int dimension() const { return static_cast<int>(grids_.size()); }
  double horizon() const { return horizon_; }
  const std::vector<double>& grid(int l) const { return grids_.at(static_cast<std::size_t>(l)); }
  const std::vector<std::vector<double>>& grids() const { return grids_; }

  //! True when every coordinate is observed at the same instants.
  bool synchronous() const { return synchronous_; }

  //! Sorted union of all ticks.
  std::vector<double> union_grid() const
  {
    std::vector<double> u;
    for (const auto& g : grids_)
      u.insert(u.end(), g.begin(), g.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  }

  friend bool operator==(const SamplingSchedule&, const SamplingSchedule&) = default;

private:
  double horizon_;
  std::vector<std::vector<double>> grids_;
  bool synchronous_ = false;
};

//! Ticks {0, delta, ..., (n-1) delta} on every coordinate, T_n = n delta.
inline SamplingSchedule uniform_schedule(int n, double delta, int d)
{
  if (n < 1 || !(delta > 0.0) || d < 1)
    fail(ErrorKind::parameter, "uniform schedule needs n >= 1, delta > 0, d >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = i * delta;
  return SamplingSchedule(n * delta, std::vector<std::vector<double>>(static_cast<std::size_t>(d), g));
}

//! Coordinate l ticks at {0} U {i T/n + offset_l : i = 1..n-1}; |offset_l| < T/n.
struct PhaseShift
{
  std::vector<double> offsets;
};

//! Interior ticks i T/n moved by U(-f, f) T/n; f in [0, 0.49].
struct Jittered
{
  double fraction = 0.0;
  rng::StreamId stream;
};

//! Coordinate l ticks at {i T/n} U {i T/n + offset_l}, 0 <= offset_l < T/n.
//! Refreshing each coordinate on the common base grid keeps Delta_n = T/n
//! while Delta'_n equals the largest pairwise offset difference.
struct Staggered
{
  std::vector<double> offsets;
};

using AsyncMode = std::variant<PhaseShift, Jittered, Staggered>;

inline SamplingSchedule async_schedule(int n, double horizon, const AsyncMode& mode, int d)
{
  if (n < 1 || !(horizon > 0.0) || d < 1)
    fail(ErrorKind::parameter, "async schedule needs n >= 1, T > 0, d >= 1");
  const double step = horizon / n;
  std::vector<std::vector<double>> grids(static_cast<std::size_t>(d));

  if (const auto* ps = std::get_if<PhaseShift>(&mode)) {
    if (ps->offsets.size() != static_cast<std::size_t>(d))
      fail(ErrorKind::parameter, "need one phase offset per coordinate");
    for (int l = 0; l < d; ++l) {
      const double o = ps->offsets[static_cast<std::size_t>(l)];
      if (!(std::abs(o) < step))
        fail(ErrorKind::parameter, "phase offset must satisfy |offset| < T/n");
      auto& g = grids[static_cast<std::size_t>(l)];
      g.push_back(0.0);
      for (int i = 1; i < n; ++i) {
        const double t = i * step + o;
        if (t > 0.0 && t <= horizon)
          g.push_back(t);
      }
    }
  } else if (const auto* jit = std::get_if<Jittered>(&mode)) {
    if (!(jit->fraction >= 0.0 && jit->fraction <= 0.49))
      fail(ErrorKind::parameter, "jitter fraction must lie in [0, 0.49]");
    rng::Philox gen(jit->stream);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int l = 0; l < d; ++l) {
      auto& g = grids[static_cast<std::size_t>(l)];
      g.push_back(0.0);
      for (int i = 1; i < n; ++i)
        g.push_back(i * step + jit->fraction * step * unit(gen));
      std::sort(g.begin() + 1, g.end());
    }
  } else {
    const auto& st = std::get<Staggered>(mode);
    if (st.offsets.size() != static_cast<std::size_t>(d))
      fail(ErrorKind::parameter, "need one stagger offset per coordinate");
    for (int l = 0; l < d; ++l) {
      const double o = st.offsets[static_cast<std::size_t>(l)];
      if (!(o >= 0.0 && o < step))
        fail(ErrorKind::parameter, "stagger offset must satisfy 0 <= offset < T/n");
      auto& g = grids[static_cast<std::size_t>(l)];
      for (int i = 0; i < n; ++i) {
        g.push_back(i * step);
        if (o > 0.0)
          g.push_back(i * step + o);
      }
    }
  }
  return SamplingSchedule(horizon, std::move(grids));
}

//! phi_{n,l}(t): the last tick of coordinate l at or before t.
inline double last_tick(const SamplingSchedule& s, int l, double t)
{
  if (l < 0 || l >= s.dimension())
    fail(ErrorKind::dimension, "coordinate index out of range");
  if (!(t >= 0.0 && t <= s.horizon()))
    fail(ErrorKind::domain, "time " + std::to_string(t) + " outside [0, T_n]");
  const auto& g = s.grid(l);
  return *(std::upper_bound(g.begin(), g.end(), t) - 1);
}

//! Delta_n: largest gap over all coordinates, including the gap to T_n.
inline double mesh_delta(const SamplingSchedule& s)
{
  double mesh = 0.0;
  for (const auto& g : s.grids()) {
    for (std::size_t i = 1; i < g.size(); ++i)
      mesh = std::max(mesh, g[i] - g[i - 1]);
    mesh = std::max(mesh, s.horizon() - g.back());
  }
  return mesh;
}

//! Delta'_n = sup_t max_{i,j} |phi_i(t) - phi_j(t)|. The map t -> phi(t) is
//! right-continuous and piecewise constant with jumps only at ticks, so the
//! supremum is a maximum over the union grid.
inline double asynchrony_delta_prime(const SamplingSchedule& s)
{
  const auto ticks = s.union_grid();
  const auto d = static_cast<std::size_t>(s.dimension());
  std::vector<std::size_t> pos(d, 0);
  double worst = 0.0;
  for (double u : ticks) {
    double lo = u;
    double hi = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
      const auto& g = s.grids()[l];
      while (pos[l] + 1 < g.size() && g[pos[l] + 1] <= u)
        ++pos[l];
      lo = std::min(lo, g[pos[l]]);
      hi = std::max(hi, g[pos[l]]);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

} // namespace invdens
