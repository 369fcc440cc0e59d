#pragma once

// Compactly supported polynomial kernels with vanishing moments, and the
// anisotropic product kernel K_h(v) = prod_l K(v_l / h_l) / h_l.

#include "invdens/error.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace invdens {

//! Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree <= 2n - 1.
struct GaussLegendre
{
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n)
  {
    if (n < 1)
      fail(ErrorKind::parameter, "Gauss-Legendre rule needs at least one node");
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    for (double z : zeros) {
      const double dp = boost::math::legendre_p_prime<double>(n, z);
      const double w = 2.0 / ((1.0 - z * z) * dp * dp);
      nodes.push_back(z);
      weights.push_back(w);
      if (z != 0.0) {
        nodes.push_back(-z);
        weights.push_back(w);
      }
    }
  }

  //! Integral of f over [a, b].
  template<class F>
  double integrate(F&& f, double a, double b) const
  {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

//! Polynomial kernel of order M supported on [-1, 1].
class KernelSpec
{
public:
  KernelSpec(int order, std::vector<double> coefficients)
    : order_(order)
    , coefficients_(std::move(coefficients))
  {
    if (order_ < 0)
      fail(ErrorKind::parameter, "kernel order must be nonnegative");
    if (coefficients_.empty())
      fail(ErrorKind::parameter, "kernel polynomial has no coefficients");
  }

  int order() const { return order_; }

  //! Monomial coefficients, lowest degree first.
  const std::vector<double>& coefficients() const { return coefficients_; }

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }

  double operator()(double u) const
  {
    if (!(std::abs(u) <= 1.0))
      return 0.0;
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it)
      acc = acc * u + *it;
    return acc;
  }

  //! Value at 0, the peak height used by degenerate-path identities.
  double at_zero() const { return coefficients_.front(); }

private:
  int order_;
  std::vector<double> coefficients_;
};

//! Monomial coefficients of the Legendre polynomials P_0..P_m.
inline std::vector<std::vector<double>> legendre_coefficients(int m)
{
  std::vector<std::vector<double>> p;
  p.push_back({ 1.0 });
  if (m >= 1)
    p.push_back({ 0.0, 1.0 });
  for (int j = 1; j < m; ++j) {
    // (j + 1) P_{j+1} = (2j + 1) u P_j - j P_{j-1}
    std::vector<double> next(static_cast<std::size_t>(j) + 2, 0.0);
    const auto& pj = p[static_cast<std::size_t>(j)];
    const auto& pm = p[static_cast<std::size_t>(j) - 1];
    for (std::size_t k = 0; k < pj.size(); ++k)
      next[k + 1] += (2.0 * j + 1.0) * pj[k];
    for (std::size_t k = 0; k < pm.size(); ++k)
      next[k] -= j * pm[k];
    for (double& c : next)
      c /= (j + 1.0);
    p.push_back(std::move(next));
  }
  return p;
}

//! K(u) = sum_{j<=M} phi_j(0) phi_j(u) on [-1, 1], phi_j the orthonormal
//! Legendre polynomials. This is the minimal-degree polynomial with
//! integral 1 and vanishing moments of orders 1..M.
inline KernelSpec build_kernel(int order)
{
  if (order < 0)
    fail(ErrorKind::parameter, "kernel order must be nonnegative");
  const auto p = legendre_coefficients(order);
  std::vector<double> coeffs(static_cast<std::size_t>(order) + 1, 0.0);
  for (int j = 0; j <= order; ++j) {
    const auto& pj = p[static_cast<std::size_t>(j)];
    const double pj0 = pj.front();
    if (pj0 == 0.0)
      continue;
    const double scale = (2.0 * j + 1.0) / 2.0 * pj0;
    for (std::size_t k = 0; k < pj.size(); ++k)
      coeffs[k] += scale * pj[k];
  }
  while (coeffs.size() > 1 && coeffs.back() == 0.0)
    coeffs.pop_back();
  return KernelSpec(order, std::move(coeffs));
}

inline double kernel_eval(const KernelSpec& spec, double u)
{
  return spec(u);
}

//! Integral of K(u) u^l over [-1, 1] by an exact Gauss-Legendre rule.
inline double kernel_moment(const KernelSpec& spec, int l)
{
  if (l < 0)
    fail(ErrorKind::parameter, "moment order must be nonnegative");
  const int degree = spec.degree() + l;
  const int nodes = std::max(spec.order() + 2, (degree + 2) / 2);
  const GaussLegendre rule(nodes);
  return rule.integrate([&](double u) { return spec(u) * std::pow(u, l); }, -1.0, 1.0);
}

//! Per-coordinate bandwidths, each in (0, 1).
class BandwidthVector
{
public:
  explicit BandwidthVector(std::vector<double> h)
    : h_(std::move(h))
  {
    if (h_.empty())
      fail(ErrorKind::dimension, "bandwidth vector is empty");
    for (double v : h_) {
      if (!(v > 0.0 && v < 1.0))
        fail(ErrorKind::parameter, "bandwidths must lie in (0, 1), got " + std::to_string(v));
    }
  }

  BandwidthVector(std::initializer_list<double> h)
    : BandwidthVector(std::vector<double>(h))
  {}

  std::size_t size() const { return h_.size(); }
  double operator[](std::size_t i) const { return h_[i]; }
  const std::vector<double>& values() const { return h_; }

  double product() const
  {
    double p = 1.0;
    for (double v : h_)
      p *= v;
    return p;
  }

private:
  std::vector<double> h_;
};

//! K_h(v) = prod_l K(v_l / h_l) / h_l; exactly zero once any |v_l| > h_l.
inline double product_kernel(const KernelSpec& spec, const BandwidthVector& h, std::span<const double> v)
{
  if (v.size() != h.size())
    fail(ErrorKind::dimension, "displacement and bandwidth dimensions differ");
  double value = 1.0;
  for (std::size_t l = 0; l < v.size(); ++l) {
    if (!(std::abs(v[l]) <= h[l]))
      return 0.0;
    const double k = spec(v[l] / h[l]);
    if (k == 0.0)
      return 0.0;
    value *= k / h[l];
  }
  return value;
}

} // namespace invdens
