#ifndef FUCIK_FUNCTIONAL_HPP
#define FUCIK_FUNCTIONAL_HPP

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"
#include "fucik/sphere.hpp"

namespace fucik {

/*
 * J_p(u) = u^T A u - p (u+)^T M_L u+. Nodes with u_i = 0 belong to the
 * nonpositive set throughout.
 */
inline double jp(const GalerkinPair& gp, double p, const Vector& u)
{
  require_size(gp, u, "jp");
  const Vector up = positive_part(u);
  return u.dot(gp.stiffness * u) - p * lumped_inner(gp.lumped, up, up);
}

inline double jp(const GalerkinPair& gp, double p, const SpherePoint& u) { return jp(gp, p, u.coefficients()); }

/// g = 2 A u - 2 p M_L u+
inline Vector grad_jp(const GalerkinPair& gp, double p, const Vector& u)
{
  require_size(gp, u, "grad_jp");
  return 2.0 * (gp.stiffness * u) - 2.0 * p * (gp.lumped.array() * positive_part(u).array()).matrix();
}

inline Vector grad_jp(const GalerkinPair& gp, double p, const SpherePoint& u)
{
  return grad_jp(gp, p, u.coefficients());
}

struct Criticality
{
  double norm = 0.0;       ///< ||g - 2 t M_L u|| in the M_L^{-1} norm
  double multiplier = 0.0; ///< t = u^T g / 2
};

inline Criticality criticality(const GalerkinPair& gp, double p, const SpherePoint& u)
{
  const Vector& v = u.coefficients();
  const Vector g = grad_jp(gp, p, v);
  const double t = 0.5 * v.dot(g);
  return {dual_norm(gp.lumped, g - 2.0 * t * (gp.lumped.array() * v.array()).matrix()), t};
}

inline double criticality_norm(const GalerkinPair& gp, double p, const SpherePoint& u)
{
  return criticality(gp, p, u).norm;
}

/// A u - alpha M_L u+ + beta M_L u-
inline Vector fucik_operator(const GalerkinPair& gp, const Vector& u, double alpha, double beta)
{
  require_size(gp, u, "fucik_operator");
  const Eigen::ArrayXd w = gp.lumped.array();
  return gp.stiffness * u - (alpha * w * positive_part(u).array()).matrix() +
         (beta * w * negative_part(u).array()).matrix();
}

/// Discrete weak-solution residual of (alpha, beta, u) in the M_L^{-1} norm.
inline double fucik_residual(const GalerkinPair& gp, const Vector& u, double alpha, double beta)
{
  return dual_norm(gp.lumped, fucik_operator(gp, u, alpha, beta));
}

} // namespace fucik

#endif
