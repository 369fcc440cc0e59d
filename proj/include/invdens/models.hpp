#pragma once

// Diffusion models dX = b(X) dt + a(X) dW, numerical checks of the
// regularity (A1) and drift (A2) assumptions, and analytic invariant
// densities for the built-in families.

#include "invdens/error.hpp"

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace invdens {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

//! Bounds declared for assumption A1 (bounded, Lipschitz, uniformly elliptic).
struct A1Constants
{
  double a_min = 1.0;
  double a0 = 1.0;
  double a1 = 1.0;
  double b0 = 1.0;
  double b1 = 1.0;
};

//! Constants of the drift condition <x, b(x)> <= -c_b |x| for |x| >= rho_b.
struct A2Constants
{
  double c_b = 1.0;
  double rho_b = 1.0;
};

//! Ornstein-Uhlenbeck parameters: dX = -A X dt + S dW.
struct OuParams
{
  Matrix drift_matrix; // A, eigenvalues with positive real part
  Matrix noise;        // S

  bool diagonal() const
  {
    return drift_matrix.isDiagonal(0.0) && noise.isDiagonal(0.0);
  }
};

//! Gradient system with V(x) = scale * sqrt(1 + |x|^2) and a = sqrt(2) Id.
struct HyperbolicParams
{
  double scale = 1.0;
};

class DiffusionModel
{
public:
  using DriftFn = std::function<Vector(const Vector&)>;
  using DiffusionFn = std::function<Matrix(const Vector&)>;
  using DensityFn = std::function<double(const Vector&)>;

  DiffusionModel(std::string name,
                 int dimension,
                 DriftFn drift,
                 DiffusionFn diffusion,
                 A1Constants a1,
                 A2Constants a2,
                 std::optional<DensityFn> density = std::nullopt,
                 bool density_normalized = true)
    : name_(std::move(name))
    , dimension_(dimension)
    , drift_(std::move(drift))
    , diffusion_(std::move(diffusion))
    , a1_(a1)
    , a2_(a2)
    , density_(std::move(density))
    , density_normalized_(density_normalized)
  {
    if (dimension_ < 2)
      fail(ErrorKind::dimension, "diffusion models need d >= 2");
    if (!(a1_.a_min > 0.0) || a1_.a_min > a1_.a0)
      fail(ErrorKind::parameter, "A1 constants need 0 < a_min <= a0");
    if (!(a2_.c_b > 0.0) || !(a2_.rho_b > 0.0))
      fail(ErrorKind::parameter, "A2 constants must be positive");
  }

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  Vector drift(const Vector& x) const { return drift_(x); }
  Matrix diffusion(const Vector& x) const { return diffusion_(x); }
  const A1Constants& a1_constants() const { return a1_; }
  const A2Constants& a2_constants() const { return a2_; }
  bool has_density() const { return density_.has_value(); }
  bool density_normalized() const { return density_normalized_; }
  const std::optional<DensityFn>& density() const { return density_; }

  //! Set for models whose exact transition law is Gaussian (enables exact simulation).
  const std::optional<OuParams>& ou() const { return ou_; }
  const std::optional<HyperbolicParams>& hyperbolic() const { return hyperbolic_; }

  //! Notes attached by the factory, e.g. known assumption violations.
  const std::vector<std::string>& notes() const { return notes_; }

  DiffusionModel with_a1(A1Constants a1) const
  {
    DiffusionModel copy = *this;
    copy.a1_ = a1;
    return copy;
  }

  DiffusionModel with_a2(A2Constants a2) const
  {
    DiffusionModel copy = *this;
    copy.a2_ = a2;
    return copy;
  }

  DiffusionModel with_density(DensityFn density, bool normalized = true) const
  {
    DiffusionModel copy = *this;
    copy.density_ = std::move(density);
    copy.density_normalized_ = normalized;
    return copy;
  }

  DiffusionModel without_density() const
  {
    DiffusionModel copy = *this;
    copy.density_.reset();
    return copy;
  }

private:
  friend DiffusionModel make_ou(const Matrix&, const Matrix&);
  friend DiffusionModel make_hyperbolic_langevin(int, double);

  std::string name_;
  int dimension_;
  DriftFn drift_;
  DiffusionFn diffusion_;
  A1Constants a1_;
  A2Constants a2_;
  std::optional<DensityFn> density_;
  bool density_normalized_ = true;
  std::optional<OuParams> ou_;
  std::optional<HyperbolicParams> hyperbolic_;
  std::vector<std::string> notes_;
};

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck

//! Solves A X + X A^T = C for X (Kronecker form, small d).
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& c)
{
  const auto d = a.rows();
  const Matrix id = Matrix::Identity(d, d);
  Matrix op = Matrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      // column-major vec: vec(A X) = (I kron A) vec X, vec(X A^T) = (A kron I) vec X
      op.block(i * d, j * d, d, d) += id(i, j) * a;
      op.block(i * d, j * d, d, d) += a(i, j) * id;
    }
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(c.data(), d * d);
  const Eigen::VectorXd sol = op.fullPivLu().solve(rhs);
  Matrix x = Eigen::Map<const Matrix>(sol.data(), d, d);
  return 0.5 * (x + x.transpose());
}

//! Stationary covariance of the OU process.
inline Matrix ou_stationary_covariance(const OuParams& ou)
{
  return solve_lyapunov(ou.drift_matrix, ou.noise * ou.noise.transpose());
}

//! Density of N(0, cov) at x.
inline double gaussian_density(const Matrix& cov, const Vector& x)
{
  const Eigen::LLT<Matrix> llt(cov);
  const Vector z = llt.matrixL().solve(x);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double d = static_cast<double>(x.size());
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det -
                  0.5 * d * std::log(2.0 * boost::math::constants::pi<double>()));
}

//! OU model with general drift matrix A and noise S.
inline DiffusionModel make_ou(const Matrix& drift_matrix, const Matrix& noise)
{
  const auto d = static_cast<int>(drift_matrix.rows());
  if (drift_matrix.cols() != d || noise.rows() != d || noise.cols() != d)
    fail(ErrorKind::dimension, "OU drift and noise matrices must be d x d");
  const Eigen::VectorXcd eig = drift_matrix.eigenvalues();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (!(eig[i].real() > 0.0))
      fail(ErrorKind::parameter, "OU drift matrix must have eigenvalues with positive real part");
  }

  OuParams params{ drift_matrix, noise };
  const Matrix cov = ou_stationary_covariance(params);
  const Eigen::JacobiSVD<Matrix> svd_noise(noise);
  const Eigen::JacobiSVD<Matrix> svd_drift(drift_matrix);
  const double noise_max = svd_noise.singularValues().maxCoeff();
  const double noise_min = svd_noise.singularValues().minCoeff();
  const double drift_norm = svd_drift.singularValues().maxCoeff();
  if (!(noise_min > 0.0))
    fail(ErrorKind::parameter, "OU noise matrix must be nonsingular");

  // |b(x)| = |A x| is unbounded; b0 is only valid on the unit ball.
  A1Constants a1{ noise_min, noise_max, 1.0, drift_norm, drift_norm };
  // <x, -A x> <= -lambda_min(sym A) |x|^2 <= -lambda_min |x| for |x| >= 1.
  const Matrix sym = 0.5 * (drift_matrix + drift_matrix.transpose());
  const double lam = Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff();
  A2Constants a2{ lam > 0.0 ? lam : 1.0, 1.0 };

  std::ostringstream name;
  name << "ou(d=" << d << ")";
  DiffusionModel model(
    name.str(),
    d,
    [a = drift_matrix](const Vector& x) -> Vector { return -(a * x); },
    [s = noise](const Vector&) -> Matrix { return s; },
    a1,
    a2,
    [cov](const Vector& x) { return gaussian_density(cov, x); });
  model.ou_ = params;
  model.notes_.push_back(
    "OU drift is unbounded: assumption A1 (|b| <= b0) is violated globally; "
    "kept as an exactly solvable reference model");
  if (!(lam > 0.0))
    model.notes_.push_back("symmetric part of A is not positive definite: A2 not guaranteed");
  return model;
}

//! OU with independent coordinates: dX_i = -theta_i X_i dt + sigma_i dW_i.
inline DiffusionModel make_ou(const Vector& theta, const Vector& sigma)
{
  if (theta.size() != sigma.size())
    fail(ErrorKind::dimension, "theta and sigma must have equal length");
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > 0.0) || !(sigma[i] > 0.0))
      fail(ErrorKind::parameter, "OU theta and sigma must be positive");
  }
  return make_ou(Matrix(theta.asDiagonal()), Matrix(sigma.asDiagonal()));
}

inline DiffusionModel make_ou(int d, double theta, double sigma)
{
  return make_ou(Vector(Vector::Constant(d, theta)), Vector(Vector::Constant(d, sigma)));
}

// ---------------------------------------------------------------------------
// Hyperbolic Langevin

//! Normalising constant of exp(-scale * sqrt(1 + |x|^2)) over R^d.
inline double hyperbolic_normalizer(int d, double scale)
{
  using boost::math::constants::pi;
  const double dd = static_cast<double>(d);
  const double sphere = 2.0 * std::pow(pi<double>(), 0.5 * dd) / boost::math::tgamma(0.5 * dd);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double radial = integrator.integrate(
    [&](double r) {
      if (!std::isfinite(r))
        return 0.0;
      if (r == 0.0)
        return d == 1 ? std::exp(-scale) : 0.0;
      return std::exp((dd - 1.0) * std::log(r) - scale * std::hypot(1.0, r));
    },
    0.0,
    std::numeric_limits<double>::infinity(),
    1e-13);
  return sphere * radial;
}

//! b = -grad V, V(x) = scale * sqrt(1 + |x|^2), a = sqrt(2) Id, pi = exp(-V) / Z.
inline DiffusionModel make_hyperbolic_langevin(int d, double scale)
{
  if (!(scale > 0.0))
    fail(ErrorKind::parameter, "hyperbolic Langevin scale must be positive");
  const double z = hyperbolic_normalizer(d, scale);
  const double root2 = std::sqrt(2.0);
  std::ostringstream name;
  name << "hyperbolic-langevin(d=" << d << ", scale=" << scale << ")";
  DiffusionModel model(
    name.str(),
    d,
    [scale](const Vector& x) -> Vector { return -scale * x / std::sqrt(1.0 + x.squaredNorm()); },
    [root2, d](const Vector&) -> Matrix { return root2 * Matrix::Identity(d, d); },
    A1Constants{ root2, root2, 1.0, scale, scale },
    A2Constants{ scale / root2, 1.0 },
    [scale, z](const Vector& x) { return std::exp(-scale * std::sqrt(1.0 + x.squaredNorm())) / z; });
  model.hyperbolic_ = HyperbolicParams{ scale };
  return model;
}

//! The potential V of the hyperbolic model.
inline double hyperbolic_potential(double scale, const Vector& x)
{
  return scale * std::sqrt(1.0 + x.squaredNorm());
}

// ---------------------------------------------------------------------------
// Assumption checks

struct BoundCheck
{
  std::string name;
  double declared = 0.0;
  double observed = 0.0;
  bool pass = true;
  Vector worst_point;
};

struct AssumptionReport
{
  std::vector<BoundCheck> checks;
  std::string scope;
  std::vector<std::string> notes;

  bool pass() const
  {
    for (const auto& c : checks)
      if (!c.pass)
        return false;
    return true;
  }

  const BoundCheck& at(const std::string& name) const
  {
    for (const auto& c : checks)
      if (c.name == name)
        return c;
    fail(ErrorKind::parameter, "no check named " + name);
  }
};

namespace detail {

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kRelTolerance = 1e-12;

inline bool within(double observed, double declared)
{
  return observed <= declared * (1.0 + kRelTolerance);
}

inline std::string format_point(const Vector& x)
{
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i)
    os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

inline Vector checked_drift(const DiffusionModel& m, const Vector& x)
{
  Vector b = m.drift(x);
  if (b.size() != m.dimension() || !b.allFinite())
    fail(ErrorKind::coefficient_evaluation, "drift at " + format_point(x));
  return b;
}

inline Matrix checked_diffusion(const DiffusionModel& m, const Vector& x)
{
  Matrix a = m.diffusion(x);
  if (a.rows() != m.dimension() || a.cols() != m.dimension() || !a.allFinite())
    fail(ErrorKind::coefficient_evaluation, "diffusion at " + format_point(x));
  return a;
}

inline double operator_norm(const Matrix& a)
{
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

inline void track_max(BoundCheck& check, double value, const Vector& x)
{
  if (value > check.observed || check.worst_point.size() == 0) {
    check.observed = value;
    check.worst_point = x;
  }
}

inline void track_min(BoundCheck& check, double value, const Vector& x)
{
  if (value < check.observed || check.worst_point.size() == 0) {
    check.observed = value;
    check.worst_point = x;
  }
}

} // namespace detail

//! Samples A1 on the lattice {-w, -w + step, ...}^d. A pass is a statement
//! about the sampled box only.
inline AssumptionReport check_A1(const DiffusionModel& model, double box_halfwidth, double grid_step)
{
  if (!(grid_step > 0.0) || !(box_halfwidth > 0.0))
    fail(ErrorKind::parameter, "box half-width and grid step must be positive");

  const int d = model.dimension();
  const auto& k = model.a1_constants();
  const double fd = detail::kFiniteDifferenceStep;
  const auto per_axis = static_cast<long>(std::floor(2.0 * box_halfwidth / grid_step + 1e-9)) + 1;

  BoundCheck drift{ "drift bound |b| <= b0", k.b0, 0.0, true, {} };
  BoundCheck diff{ "diffusion bound |a| <= a0", k.a0, 0.0, true, {} };
  BoundCheck drift_d{ "drift derivative |db/dx_i| <= b1", k.b1, 0.0, true, {} };
  BoundCheck diff_d{ "diffusion derivative |da/dx_i| <= a1", k.a1, 0.0, true, {} };
  BoundCheck ellip{ "ellipticity lambda_min(a a^T) >= a_min^2", k.a_min * k.a_min, 0.0, true, {} };
  ellip.observed = std::numeric_limits<double>::infinity();

  std::vector<long> idx(static_cast<std::size_t>(d), 0);
  Vector x(d);
  for (;;) {
    for (int i = 0; i < d; ++i)
      x[i] = -box_halfwidth + static_cast<double>(idx[static_cast<std::size_t>(i)]) * grid_step;

    const Vector b = detail::checked_drift(model, x);
    const Matrix a = detail::checked_diffusion(model, x);
    detail::track_max(drift, b.norm(), x);
    detail::track_max(diff, detail::operator_norm(a), x);
    const Matrix at = a * a.transpose();
    detail::track_min(ellip, Eigen::SelfAdjointEigenSolver<Matrix>(at).eigenvalues().minCoeff(), x);

    for (int i = 0; i < d; ++i) {
      Vector xp = x;
      Vector xm = x;
      xp[i] += fd;
      xm[i] -= fd;
      const Vector db = (detail::checked_drift(model, xp) - detail::checked_drift(model, xm)) / (2.0 * fd);
      const Matrix da =
        (detail::checked_diffusion(model, xp) - detail::checked_diffusion(model, xm)) / (2.0 * fd);
      detail::track_max(drift_d, db.norm(), x);
      detail::track_max(diff_d, detail::operator_norm(da), x);
    }

    int axis = 0;
    while (axis < d && ++idx[static_cast<std::size_t>(axis)] == per_axis) {
      idx[static_cast<std::size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == d)
      break;
  }

  drift.pass = detail::within(drift.observed, drift.declared);
  diff.pass = detail::within(diff.observed, diff.declared);
  drift_d.pass = detail::within(drift_d.observed, drift_d.declared);
  diff_d.pass = detail::within(diff_d.observed, diff_d.declared);
  ellip.pass = ellip.observed >= ellip.declared * (1.0 - detail::kRelTolerance);

  AssumptionReport report;
  report.checks = { drift, diff, drift_d, diff_d, ellip };
  std::ostringstream scope;
  scope << "sampled lattice on [-" << box_halfwidth << ", " << box_halfwidth << "]^" << d
        << " with step " << grid_step << "; not a global verification";
  report.scope = scope.str();
  report.notes = model.notes();
  return report;
}

//! Deterministic set of unit directions in R^d.
inline std::vector<Vector> sphere_directions(int d, int count)
{
  using boost::math::constants::pi;
  std::vector<Vector> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double angle = 2.0 * pi<double>() * k / count;
      Vector v(2);
      v << std::cos(angle), std::sin(angle);
      dirs.push_back(v);
    }
  } else if (d == 3) {
    // Fibonacci lattice
    const double golden = pi<double>() * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vector v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      dirs.push_back(v);
    }
  } else {
    static constexpr int primes[] = { 2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53 };
    if (d > static_cast<int>(std::size(primes)))
      fail(ErrorKind::dimension, "sphere lattice supports d <= 16");
    const boost::math::normal_distribution<double> normal;
    for (int k = 0; k < count; ++k) {
      Vector v(d);
      for (int i = 0; i < d; ++i) {
        // radical inverse (Halton) mapped to a Gaussian coordinate
        double f = 1.0;
        double u = 0.0;
        for (int m = k + 1; m > 0; m /= primes[i]) {
          f /= primes[i];
          u += f * (m % primes[i]);
        }
        v[i] = boost::math::quantile(normal, u);
      }
      dirs.push_back(v.normalized());
    }
  }
  return dirs;
}

//! Checks <x, b(x)> <= -c_b |x| on spheres of the given radii. The check's
//! `observed` value is the largest <x, b(x)> + c_b |x| (positive = violated).
inline AssumptionReport check_A2(const DiffusionModel& model,
                                 const std::vector<double>& radii,
                                 int directions_per_radius)
{
  const auto& k = model.a2_constants();
  if (directions_per_radius <= 0)
    fail(ErrorKind::parameter, "directions_per_radius must be positive");
  if (radii.empty())
    fail(ErrorKind::parameter, "no radii given");
  for (double r : radii) {
    if (!(r >= k.rho_b))
      fail(ErrorKind::radius_inside_exempt_ball,
           "radius " + std::to_string(r) + " < rho_b = " + std::to_string(k.rho_b));
  }

  BoundCheck slack{ "drift condition <x,b(x)> <= -c_b|x|", k.c_b, 0.0, true, {} };
  slack.observed = -std::numeric_limits<double>::infinity();
  bool all_pass = true;
  const auto dirs = sphere_directions(model.dimension(), directions_per_radius);
  for (double r : radii) {
    for (const auto& u : dirs) {
      const Vector x = r * u;
      const Vector b = detail::checked_drift(model, x);
      const double s = x.dot(b) + k.c_b * x.norm();
      all_pass = all_pass && s <= detail::kRelTolerance * k.c_b * r;
      if (s > slack.observed) {
        slack.observed = s;
        slack.worst_point = x;
      }
    }
  }
  slack.pass = all_pass;

  AssumptionReport report;
  report.checks = { slack };
  report.scope = "sampled spheres only; not a global verification";
  report.notes = model.notes();
  return report;
}

//! Analytic invariant density pi(x).
inline double true_density(const DiffusionModel& model, const Vector& x)
{
  if (!model.has_density())
    fail(ErrorKind::no_analytic_density, model.name());
  if (x.size() != model.dimension())
    fail(ErrorKind::dimension, "point dimension does not match model");
  return (*model.density())(x);
}

} // namespace invdens
