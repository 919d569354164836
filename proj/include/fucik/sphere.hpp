#ifndef FUCIK_SPHERE_HPP
#define FUCIK_SPHERE_HPP

#include <cmath>
#include <string>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"

namespace fucik {

/// (a, b) weighted by the lumped mass.
inline double lumped_inner(const Vector& lumped, const Vector& a, const Vector& b)
{
  return (lumped.array() * a.array() * b.array()).sum();
}

inline double lumped_norm(const Vector& lumped, const Vector& a)
{
  return std::sqrt(lumped_inner(lumped, a, a));
}

/// Dual norm sqrt(g^T M_L^{-1} g) of a functional g.
inline double dual_norm(const Vector& lumped, const Vector& g)
{
  return std::sqrt((g.array().square() / lumped.array()).sum());
}

/*
 * Coefficient vector on the unit sphere of the lumped mass form,
 * u^T M_L u = 1.
 */
class SpherePoint
{
public:
  static constexpr double tolerance = 1e-12;

  static SpherePoint normalize(const Vector& v, const Vector& lumped)
  {
    if (v.size() != lumped.size())
      throw PreconditionError("SpherePoint: dimension mismatch");
    const double n = lumped_norm(lumped, v);
    if (!(n > 0.0) || !std::isfinite(n))
      throw PreconditionError("SpherePoint: cannot normalize a zero or non-finite vector");
    Vector u = v / n;
    // one correction pass keeps |u^T M_L u - 1| at rounding level
    u /= lumped_norm(lumped, u);
    return SpherePoint(std::move(u));
  }

  /// Wraps an already normalized vector; throws when it is off the sphere.
  static SpherePoint checked(Vector u, const Vector& lumped, double tol = tolerance)
  {
    if (u.size() != lumped.size())
      throw PreconditionError("SpherePoint: dimension mismatch");
    const double i = lumped_inner(lumped, u, u);
    if (!(std::abs(i - 1.0) <= tol))
      throw PreconditionError("SpherePoint: |u^T M_L u - 1| = " + std::to_string(std::abs(i - 1.0)) +
                              " exceeds tolerance");
    return SpherePoint(std::move(u));
  }

  const Vector& coefficients() const { return u_; }
  Eigen::Index size() const { return u_.size(); }

  SpherePoint operator-() const { return SpherePoint(-u_); }

  /// Strictly positive and strictly negative nodal values both present.
  bool changes_sign() const { return u_.maxCoeff() > 0.0 && u_.minCoeff() < 0.0; }

private:
  explicit SpherePoint(Vector u)
  : u_(std::move(u))
  {}

  Vector u_;
};

/// Number of sign changes in nodal order, ignoring exact zeros.
inline int sign_changes(const Vector& u)
{
  int changes = 0;
  int last = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
  {
    const int sg = (u[i] > 0.0) - (u[i] < 0.0);
    if (sg == 0)
      continue;
    if (last != 0 && sg != last)
      ++changes;
    last = sg;
  }
  return changes;
}

} // namespace fucik

#endif
