#ifndef FUCIK_VALIDATION_HPP
#define FUCIK_VALIDATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fucik/assembly.hpp"
#include "fucik/functional.hpp"
#include "fucik/nonresonance.hpp"
#include "fucik/spectrum.hpp"
#include "fucik/sphere.hpp"

namespace fucik {

/// Outcome of one numerical invariant: `worst` is compared against `tolerance`.
struct Check
{
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

namespace detail {

inline std::string short_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline Check finish(std::string name, double worst, double tol, std::string detail = {})
{
  return Check{std::move(name), worst <= tol, worst, tol, std::move(detail)};
}

/// Gaussian vector whose entries all have magnitude at least `floor` and which changes sign.
inline Vector random_sign_changing(Eigen::Index n, std::mt19937_64& rng, double floor = 1e-3)
{
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;)
  {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = g(rng);
    if (v.cwiseAbs().minCoeff() >= floor && v.maxCoeff() > 0.0 && v.minCoeff() < 0.0)
      return v;
  }
}

/// Relative distance between a central-difference gradient of `f` and `grad` in the M_L^{-1} norm.
template <class F>
double gradient_mismatch(const GalerkinPair& gp, const F& f, const Vector& u, const Vector& grad, double eps)
{
  Vector fd(u.size());
  Vector w = u;
  for (Eigen::Index i = 0; i < u.size(); ++i)
  {
    w[i] = u[i] + eps;
    const double fp = f(w);
    w[i] = u[i] - eps;
    const double fm = f(w);
    w[i] = u[i];
    fd[i] = (fp - fm) / (2.0 * eps);
  }
  return fucik::dual_norm(gp.lumped, fd - grad) / std::max(1e-300, fucik::dual_norm(gp.lumped, grad));
}

} // namespace detail

/// J_p(phi1) = lambda1 - p and J_p(-phi1) = lambda1, phi1 the lumped principal vector.
inline Check endpoint_identities(const GalerkinPair& gp, const std::vector<double>& ps, double tol = 1e-10)
{
  const auto e = lowest_eigenpairs(gp, 1, 1e-10, MassKind::lumped).front();
  const auto phi = SpherePoint::normalize(e.vector, gp.lumped);
  double worst = 0.0;
  std::string where;
  for (double p : ps)
  {
    const double d = std::max(std::abs(jp(gp, p, phi) - (e.value - p)), std::abs(jp(gp, p, -phi) - e.value)) /
                     std::max(1.0, e.value);
    if (d >= worst)
    {
      worst = d;
      where = "p = " + detail::format_double(p);
    }
  }
  return detail::finish("endpoint identities", worst, tol, where);
}

/*
 * Strict local minimum at -phi1: the smallest J_p over `samples` sphere points
 * at lumped chord distance eps from -phi1 must exceed lambda1. `worst` is
 * lambda1 - min J_p, so the check passes when it is negative.
 */
inline Check ring_test(const GalerkinPair& gp, double p, double eps, int samples, std::mt19937_64& rng)
{
  const auto e = lowest_eigenpairs(gp, 1, 1e-10, MassKind::lumped).front();
  const Vector phi = SpherePoint::normalize(e.vector, gp.lumped).coefficients();
  const double theta = 2.0 * std::asin(0.5 * eps);
  std::normal_distribution<double> g(0.0, 1.0);
  double lowest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k)
  {
    Vector w(phi.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w[i] = g(rng) / std::sqrt(gp.lumped[i]);
    w -= lumped_inner(gp.lumped, w, phi) * phi;
    w /= lumped_norm(gp.lumped, w);
    const Vector u = -std::cos(theta) * phi + std::sin(theta) * w;
    lowest = std::min(lowest, jp(gp, p, u));
  }
  Check c = detail::finish("ring test eps=" + detail::short_double(eps), e.value - lowest, 0.0,
                           "min J_p - lambda1 = " + detail::format_double(lowest - e.value));
  c.passed = lowest > e.value;
  return c;
}

/// Central differences against grad_jp at `count` random sign-changing points.
inline Check gradient_check_jp(const GalerkinPair& gp, double p, int count, std::mt19937_64& rng, double eps = 1e-5,
                               double tol = 1e-6)
{
  double worst = 0.0;
  for (int k = 0; k < count; ++k)
  {
    const Vector u = detail::random_sign_changing(gp.size(), rng);
    const auto f = [&](const Vector& v) { return jp(gp, p, v); };
    worst = std::max(worst, detail::gradient_mismatch(gp, f, u, grad_jp(gp, p, u), eps));
  }
  return detail::finish("gradient J_p", worst, tol);
}

/// Central differences against grad_psi at `count` random sign-changing points.
inline Check gradient_check_psi(const GalerkinPair& gp, const NonlinearitySpec& spec, int count, std::mt19937_64& rng,
                                double eps = 1e-5, double tol = 1e-6)
{
  double worst = 0.0;
  for (int k = 0; k < count; ++k)
  {
    const Vector u = detail::random_sign_changing(gp.size(), rng);
    const auto f = [&](const Vector& v) { return psi(gp, spec, v); };
    worst = std::max(worst, detail::gradient_mismatch(gp, f, u, grad_psi(gp, spec, u), eps));
  }
  return detail::finish("gradient Psi", worst, tol);
}

/// energy(u) = energy(u+) + energy(u-) + 4 cross(u+, u-), relative to energy(u).
inline Check decomposition_check(const GalerkinPair& gp, int count, std::mt19937_64& rng, double tol = 1e-10)
{
  double worst = 0.0;
  for (int k = 0; k < count; ++k)
  {
    const Vector u = detail::random_sign_changing(gp.size(), rng);
    const Vector a = positive_part(u);
    const Vector b = negative_part(u);
    const double lhs = energy(gp, u);
    const double rhs = energy(gp, a) + energy(gp, b) + 4.0 * cross_term(gp, a, b);
    worst = std::max(worst, std::abs(lhs - rhs) / lhs);
  }
  return detail::finish("decomposition identity", worst, tol);
}

/// cross(a, b) = cross(b, a) and cross(a, b) >= 0 on disjointly supported nonnegative pairs.
inline Check cross_symmetry_check(const GalerkinPair& gp, int count, std::mt19937_64& rng, double tol = 1e-12)
{
  double worst = 0.0;
  bool nonnegative = true;
  for (int k = 0; k < count; ++k)
  {
    const Vector u = detail::random_sign_changing(gp.size(), rng);
    const Vector a = positive_part(u);
    const Vector b = negative_part(u);
    const double ab = cross_term(gp, a, b);
    const double ba = cross_term(gp, b, a);
    nonnegative = nonnegative && ab >= 0.0;
    worst = std::max(worst, std::abs(ab - ba) / std::max(1e-300, std::abs(ab)));
  }
  Check c = detail::finish("cross term symmetry", worst, tol, nonnegative ? "" : "negative cross term");
  c.passed = c.passed && nonnegative;
  return c;
}

} // namespace fucik

#endif
