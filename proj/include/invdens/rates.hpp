#pragma once

// Anisotropic smoothness arithmetic: harmonic means, rate-optimal bandwidths
// for each sampling regime, the regime classifier and the theoretical MSE
// exponents.

#include "invdens/error.hpp"
#include "invdens/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace invdens {

//! Smoothness indices beta (ascending) and Hoelder constants L.
class SmoothnessSpec
{
public:
  explicit SmoothnessSpec(std::vector<double> beta, std::vector<double> l = {})
    : beta_(std::move(beta))
    , l_(std::move(l))
  {
    if (beta_.empty())
      fail(ErrorKind::dimension, "smoothness vector is empty");
    if (l_.empty())
      l_.assign(beta_.size(), 1.0);
    if (l_.size() != beta_.size())
      fail(ErrorKind::dimension, "beta and L must have equal length");
    for (std::size_t i = 0; i < beta_.size(); ++i) {
      if (!(beta_[i] > 0.0) || !(l_[i] > 0.0))
        fail(ErrorKind::precondition, "beta and L entries must be positive");
      if (i > 0 && beta_[i] < beta_[i - 1])
        fail(ErrorKind::precondition, "beta must be sorted ascending");
    }
  }

  int dimension() const { return static_cast<int>(beta_.size()); }
  const std::vector<double>& beta() const { return beta_; }
  const std::vector<double>& hoelder_constants() const { return l_; }
  double beta(int j) const { return beta_.at(static_cast<std::size_t>(j)); }
  double max_beta() const { return beta_.back(); }

private:
  std::vector<double> beta_;
  std::vector<double> l_;
};

struct HarmonicMeans
{
  double beta_bar;                      // 1/beta_bar = (1/d) sum_j 1/beta_j
  std::optional<double> beta_bar3;      // over beta_3..beta_d, d >= 3
  int k0;                               // multiplicity of beta_1
  std::optional<double> beta_bar_k;     // over beta_{k0+1}..beta_d
};

inline HarmonicMeans harmonic_means(const SmoothnessSpec& spec)
{
  const auto& b = spec.beta();
  const auto d = b.size();
  if (d < 2)
    fail(ErrorKind::dimension, "harmonic means need d >= 2");
  auto harmonic = [&](std::size_t from) {
    double inv = 0.0;
    for (std::size_t j = from; j < d; ++j)
      inv += 1.0 / b[j];
    return static_cast<double>(d - from) / inv;
  };
  HarmonicMeans m{ harmonic(0), std::nullopt, 0, std::nullopt };
  if (d >= 3)
    m.beta_bar3 = harmonic(2);
  m.k0 = static_cast<int>(std::count(b.begin(), b.end(), b.front()));
  if (static_cast<std::size_t>(m.k0) < d)
    m.beta_bar_k = harmonic(static_cast<std::size_t>(m.k0));
  return m;
}

namespace detail {

inline BandwidthVector clamp_bandwidth(std::vector<double> h)
{
  const double below_one = std::nextafter(1.0, 0.0);
  for (double& v : h)
    v = std::min(v, below_one);
  return BandwidthVector(std::move(h));
}

inline void require_d3(const SmoothnessSpec& spec)
{
  if (spec.dimension() < 3)
    fail(ErrorKind::dimension, "continuous-regime bandwidths need d >= 3; use bandwidth_d2");
}

} // namespace detail

//! Exponents a_j = beta3 / (beta_j (2 beta3 + d - 2)).
inline std::vector<double> continuous_bandwidth_exponents(const SmoothnessSpec& spec)
{
  detail::require_d3(spec);
  const double b3 = *harmonic_means(spec).beta_bar3;
  const double d = spec.dimension();
  std::vector<double> a;
  for (double bj : spec.beta())
    a.push_back(b3 / (bj * (2.0 * b3 + d - 2.0)));
  return a;
}

//! True when beta_2 < beta_3 (the log-factor branch).
inline bool log_branch(const SmoothnessSpec& spec)
{
  return spec.dimension() >= 3 && spec.beta(1) < spec.beta(2);
}

//! h*_j = (log T / T)^{a_j} if beta_2 < beta_3, (1/T)^{a_j} if beta_2 = beta_3.
inline BandwidthVector bandwidth_continuous(const SmoothnessSpec& spec, double horizon)
{
  detail::require_d3(spec);
  if (!(horizon > std::exp(1.0)))
    fail(ErrorKind::precondition, "continuous bandwidth needs T > e");
  const double base = log_branch(spec) ? std::log(horizon) / horizon : 1.0 / horizon;
  std::vector<double> h;
  for (double a : continuous_bandwidth_exponents(spec))
    h.push_back(std::pow(base, a));
  return detail::clamp_bandwidth(std::move(h));
}

//! Exponents beta_bar / (beta_j (2 beta_bar + d)).
inline std::vector<double> intermediate_bandwidth_exponents(const SmoothnessSpec& spec)
{
  const double bb = harmonic_means(spec).beta_bar;
  const double d = spec.dimension();
  std::vector<double> e;
  for (double bj : spec.beta())
    e.push_back(bb / (bj * (2.0 * bb + d)));
  return e;
}

//! h~_j = n^{-beta_bar / (beta_j (2 beta_bar + d))}.
inline BandwidthVector bandwidth_intermediate(const SmoothnessSpec& spec, double n)
{
  if (!(n >= 2.0))
    fail(ErrorKind::precondition, "intermediate bandwidth needs n >= 2");
  std::vector<double> h;
  for (double e : intermediate_bandwidth_exponents(spec))
    h.push_back(std::pow(n, -e));
  return detail::clamp_bandwidth(std::move(h));
}

//! d = 2: h_l = (log T / T)^{1 / (2 beta_l)}.
inline BandwidthVector bandwidth_d2(const SmoothnessSpec& spec, double horizon)
{
  if (spec.dimension() != 2)
    fail(ErrorKind::dimension, "bandwidth_d2 needs d = 2");
  if (!(horizon > 1.0))
    fail(ErrorKind::precondition, "bandwidth_d2 needs T > 1");
  const double base = std::log(horizon) / horizon;
  std::vector<double> h;
  for (double bl : spec.beta())
    h.push_back(std::pow(base, 1.0 / (2.0 * bl)));
  return detail::clamp_bandwidth(std::move(h));
}

// ---------------------------------------------------------------------------
// Sampling-step thresholds

//! Synchronous condition in T form (constant 1):
//! beta_2 < beta_3: (log T / T)^{e} log T, beta_2 = beta_3: T^{-e},
//! e = beta3 / (2 beta3 + d - 2) (1/beta_1 + 1/beta_2).
inline double sync_threshold_T(const SmoothnessSpec& spec, double horizon)
{
  detail::require_d3(spec);
  const double b3 = *harmonic_means(spec).beta_bar3;
  const double d = spec.dimension();
  const double e = b3 / (2.0 * b3 + d - 2.0) * (1.0 / spec.beta(0) + 1.0 / spec.beta(1));
  if (log_branch(spec))
    return std::pow(std::log(horizon) / horizon, e) * std::log(horizon);
  return std::pow(horizon, -e);
}

//! The same condition rewritten in n (T = n Delta_n):
//! n^{-f} (times log n when beta_2 < beta_3), f = beta_bar / (2 beta_bar + d) (1/beta_1 + 1/beta_2).
inline double sync_threshold_n(const SmoothnessSpec& spec, double n)
{
  detail::require_d3(spec);
  const double bb = harmonic_means(spec).beta_bar;
  const double d = spec.dimension();
  const double f = bb / (2.0 * bb + d) * (1.0 / spec.beta(0) + 1.0 / spec.beta(1));
  const double t = std::pow(n, -f);
  return log_branch(spec) ? t * std::log(n) : t;
}

//! d = 2 condition: h*_1 h*_2 sum_j |log h*_j| with the bandwidth_d2 choice.
inline double d2_threshold_T(const SmoothnessSpec& spec, double horizon)
{
  const auto h = bandwidth_d2(spec, horizon);
  return h.product() * (std::abs(std::log(h[0])) + std::abs(std::log(h[1])));
}

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime
{
  continuous_rate,
  intermediate,
  gap,
  d2_continuous,
  d2_intermediate
};

inline std::string_view to_string(Regime r)
{
  switch (r) {
    case Regime::continuous_rate: return "continuous-rate";
    case Regime::intermediate: return "intermediate";
    case Regime::gap: return "gap";
    case Regime::d2_continuous: return "d2-continuous";
    case Regime::d2_intermediate: return "d2-intermediate";
  }
  return "unknown";
}

struct ThresholdCheck
{
  std::string condition;
  double threshold;
  double actual;
  bool satisfied;
};

struct RegimeVerdict
{
  Regime regime;
  std::string binding_condition;
  double binding_threshold = 0.0;
  double binding_actual = 0.0;
  double ratio = 0.0; // Delta_n / binding sampling-step threshold
  bool log_factor = false;
  std::vector<ThresholdCheck> thresholds;
};

struct RegimeInputs
{
  int d = 0;
  double n = 0.0;
  double delta_n = 0.0;
  double delta_prime_n = 0.0;
  double horizon = 0.0;
  bool synchronous = true;
};

inline RegimeVerdict classify_regime(const SmoothnessSpec& spec, const RegimeInputs& in)
{
  if (in.d != spec.dimension())
    fail(ErrorKind::dimension, "d does not match the smoothness vector");
  if (!(in.n > 0.0) || !(in.delta_n > 0.0) || !(in.horizon > 0.0) || !(in.delta_prime_n >= 0.0))
    fail(ErrorKind::precondition, "n, Delta_n and T must be positive, Delta'_n nonnegative");
  if (in.delta_prime_n > in.delta_n)
    fail(ErrorKind::precondition, "Delta'_n must not exceed Delta_n");
  if (in.synchronous && in.horizon < in.n * in.delta_n * (1.0 - 1e-9))
    fail(ErrorKind::consistency, "synchronous uniform sampling needs T >= n Delta_n");

  RegimeVerdict v{};
  auto check = [&](std::string cond, double threshold, double actual, bool le) {
    const bool ok = le ? actual <= threshold : actual >= threshold;
    v.thresholds.push_back({ std::move(cond), threshold, actual, ok });
    return ok;
  };
  auto bind = [&](std::size_t index) {
    const auto& c = v.thresholds.at(index);
    v.binding_condition = c.condition;
    v.binding_threshold = c.threshold;
    v.binding_actual = c.actual;
    v.ratio = in.delta_n / c.threshold;
  };

  if (in.d == 2) {
    const double thr = d2_threshold_T(spec, in.horizon);
    const bool ok = check("Delta_n <= h*_1 h*_2 sum |log h*_j|", thr, in.delta_n, true);
    v.regime = ok ? Regime::d2_continuous : Regime::d2_intermediate;
    v.log_factor = ok;
    bind(0);
    return v;
  }
  if (in.d < 2)
    fail(ErrorKind::dimension, "regimes are defined for d >= 2");

  const auto means = harmonic_means(spec);
  const double b3 = *means.beta_bar3;
  const double bb = means.beta_bar;
  const double d = in.d;
  const double log_ratio = std::log(in.horizon) / in.horizon;

  if (in.synchronous) {
    const bool ok = check(log_branch(spec) ? "Delta_n <= (log T/T)^e log T (beta_2 < beta_3)"
                                           : "Delta_n <= T^-e (beta_2 = beta_3)",
                          sync_threshold_T(spec, in.horizon),
                          in.delta_n,
                          true);
    v.regime = ok ? Regime::continuous_rate : Regime::intermediate;
    v.log_factor = ok && log_branch(spec);
    bind(0);
    return v;
  }

  const auto hstar = bandwidth_continuous(spec, in.horizon);
  const bool c1 = check("Delta_n <= h*_1 h*_2 / 4", 0.25 * hstar[0] * hstar[1], in.delta_n, true);
  const bool c2 = check("Delta'_n <= (log T/T)^(2 beta3/(2 beta3 + d - 2))",
                        std::pow(log_ratio, 2.0 * b3 / (2.0 * b3 + d - 2.0)),
                        in.delta_prime_n,
                        true);
  const auto htilde = bandwidth_intermediate(spec, std::max(in.n, 2.0));
  const bool i1 = check("Delta_n >= (prod h~*_l)^(2/d)", std::pow(htilde.product(), 2.0 / d), in.delta_n, false);
  const bool i2 = check("Delta'_n <= n^(-2 beta_bar/(2 beta_bar + d))",
                        std::pow(in.n, -2.0 * bb / (2.0 * bb + d)),
                        in.delta_prime_n,
                        true);
  if (c1 && c2) {
    v.regime = Regime::continuous_rate;
    v.log_factor = true;
    bind(0);
  } else if (i1 && i2) {
    v.regime = Regime::intermediate;
    bind(2);
  } else {
    v.regime = Regime::gap;
    bind(c1 ? 1 : 0);
  }
  return v;
}

struct RateExponent
{
  double exponent;
  enum class Base
  {
    T,
    n
  } base;
  bool log_factor;
};

inline std::string_view to_string(RateExponent::Base b)
{
  return b == RateExponent::Base::T ? "T" : "n";
}

//! MSE ~ base^{-exponent}; std::nullopt for the gap regime (no theoretical rate).
inline std::optional<RateExponent> rate_exponent(const SmoothnessSpec& spec, Regime regime)
{
  const auto m = harmonic_means(spec);
  const double d = spec.dimension();
  switch (regime) {
    case Regime::continuous_rate: {
      detail::require_d3(spec);
      const double b3 = *m.beta_bar3;
      return RateExponent{ 2.0 * b3 / (2.0 * b3 + d - 2.0), RateExponent::Base::T, log_branch(spec) };
    }
    case Regime::intermediate:
      return RateExponent{ 2.0 * m.beta_bar / (2.0 * m.beta_bar + d), RateExponent::Base::n, false };
    case Regime::d2_continuous:
      return RateExponent{ 1.0, RateExponent::Base::T, true };
    case Regime::d2_intermediate:
      return RateExponent{ 2.0 * m.beta_bar / (2.0 * m.beta_bar + 2.0), RateExponent::Base::n, false };
    case Regime::gap:
      return std::nullopt;
  }
  return std::nullopt;
}

} // namespace invdens
