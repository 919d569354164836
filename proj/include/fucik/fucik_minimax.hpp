#ifndef FUCIK_FUCIK_MINIMAX_HPP
#define FUCIK_FUCIK_MINIMAX_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"
#include "fucik/fucik_continuation.hpp"
#include "fucik/functional.hpp"
#include "fucik/path_deformation.hpp"
#include "fucik/spectrum.hpp"
#include "fucik/sphere.hpp"

namespace fucik {

/*
 * J_p restricted to the lumped-mass sphere. The descent direction is the
 * Riesz representative of the projected gradient, M_L^{-1} g - (u^T g) u.
 * Along a chord the energy is J_p(w)/I(w) with w the linear interpolant,
 * since J_p is positively 2-homogeneous.
 */
class SphereLandscape
{
public:
  SphereLandscape(const GalerkinPair& gp, double p)
  : gp_(&gp)
  , p_(p)
  {
    if (!(p >= 0.0))
      throw PreconditionError("SphereLandscape: p must be nonnegative");
  }

  double p() const { return p_; }

  double value(const Vector& u) const { return jp(*gp_, p_, u); }

  Vector descent(const Vector& u) const
  {
    const Vector g = grad_jp(*gp_, p_, u);
    return (g.array() / gp_->lumped.array()).matrix() - u.dot(g) * u;
  }

  Vector retract(const Vector& v) const { return v / lumped_norm(gp_->lumped, v); }

  Vector project(const Vector& u, const Vector& v) const { return v - lumped_inner(gp_->lumped, u, v) * u; }

  double inner(const Vector& a, const Vector& b) const { return lumped_inner(gp_->lumped, a, b); }

  Vector interpolate(const Vector& a, const Vector& b, double tau) const
  {
    return retract((1.0 - tau) * a + tau * b);
  }

  double criticality(const Vector& u) const
  {
    return criticality_norm(*gp_, p_, SpherePoint::normalize(u, gp_->lumped));
  }

  auto segment(const Vector& a, const Vector& b) const
  {
    const Vector Aa = gp_->stiffness * a;
    const Vector Ab = gp_->stiffness * b;
    const double aa = a.dot(Aa);
    const double ab = a.dot(Ab);
    const double bb = b.dot(Ab);
    return [a, b, aa, ab, bb, p = p_, w = gp_->lumped](double tau) {
      const double s = 1.0 - tau;
      const Eigen::ArrayXd x = s * a.array() + tau * b.array();
      const double quad = s * s * aa + 2.0 * s * tau * ab + tau * tau * bb;
      const double pos = (w.array() * x.max(0.0).square()).sum();
      const double mass = (w.array() * x.square()).sum();
      return (quad - p * pos) / mass;
    };
  }

private:
  const GalerkinPair* gp_;
  double p_;
};

static_assert(DeformationLandscape<SphereLandscape>);

/// Largest eigenvalue of M_L^{-1} A by power iteration.
inline double max_lumped_eigenvalue(const GalerkinPair& gp, int iterations = 300)
{
  const Eigen::ArrayXd s = gp.lumped.array().sqrt();
  Vector x(gp.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = 1.0 + 0.5 * ((i % 2) ? -1.0 : 1.0) + 1e-3 * static_cast<double>(i);
  x.normalize();
  double rho = 0.0;
  for (int k = 0; k < iterations; ++k)
  {
    Vector y = (gp.stiffness * (x.array() / s).matrix()).array() / s;
    rho = x.dot(y);
    x = y / y.norm();
  }
  return rho;
}

/*
 * Quadratic Bezier from -phi1 through `via` to phi1, retracted to the sphere
 * and resampled to `n` points equally spaced in arclength.
 */
inline std::vector<Vector> initial_path(const GalerkinPair& gp, const Vector& phi1, const Vector& via, int n = 33)
{
  if (n < 3)
    throw PreconditionError("initial_path: at least three points are required");
  const SphereLandscape geo(gp, 0.0);
  const int fine = 16 * n;
  std::vector<Vector> curve;
  std::vector<double> arc{0.0};
  for (int k = 0; k <= fine; ++k)
  {
    const double tau = static_cast<double>(k) / fine;
    const double a = (1.0 - tau) * (1.0 - tau);
    const double b = 2.0 * tau * (1.0 - tau);
    const double c = tau * tau;
    curve.push_back(geo.retract(-a * phi1 + b * via + c * phi1));
    if (k > 0)
      arc.push_back(arc.back() + detail::distance(geo, curve[k - 1], curve[k]));
  }
  std::vector<Vector> out{geo.retract(-phi1)};
  std::size_t j = 1;
  for (int i = 1; i + 1 < n; ++i)
  {
    const double target = arc.back() * i / (n - 1);
    while (arc[j] < target)
      ++j;
    const double tau = (target - arc[j - 1]) / (arc[j] - arc[j - 1]);
    out.push_back(geo.interpolate(curve[j - 1], curve[j], tau));
  }
  out.push_back(geo.retract(phi1));
  return out;
}

/// Great-circle path -phi1 -> through -> phi1 with the through point orthogonalized against phi1.
inline std::vector<Vector> great_circle_path(const GalerkinPair& gp, const Vector& phi1, const Vector& through,
                                             int n = 33)
{
  if (n < 3)
    throw PreconditionError("great_circle_path: at least three points are required");
  const SphereLandscape geo(gp, 0.0);
  const Vector e1 = geo.retract(phi1);
  const Vector q = through - lumped_inner(gp.lumped, e1, through) * e1;
  if (lumped_norm(gp.lumped, q) < 1e-12)
    throw PreconditionError("great_circle_path: the through point is parallel to phi1");
  const Vector e2 = geo.retract(q);
  const double pi = std::acos(-1.0);
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i)
  {
    const double theta = pi * (1.0 - static_cast<double>(i) / (n - 1));
    out.push_back(std::cos(theta) * e1 + std::sin(theta) * e2);
  }
  out.front() = -e1;
  out.back() = e1;
  return out;
}

/*
 * Deforms a path with endpoints -phi1, phi1 on the sphere. `step_size` is
 * the initial descent step; growth is capped at 0.9 / lambda_max(M_L^{-1} A).
 */
inline DeformResult deform_path(const GalerkinPair& gp, double p, std::vector<Vector> path, int steps,
                                double step_size, double tol, DeformOptions base = {})
{
  if (!(step_size > 0.0) || !(tol > 0.0) || steps < 1)
    throw PreconditionError("deform_path: steps, step_size and tol must be positive");
  for (auto& x : path)
    require_size(gp, x, "deform_path");
  const SphereLandscape land(gp, p);
  const double cap = 0.9 / max_lumped_eigenvalue(gp);
  base.max_sweeps = steps;
  base.step = std::min(step_size, cap);
  base.max_step = std::max(cap, base.step);
  base.rel_tol = tol;
  return deform(land, std::move(path), base);
}

struct SaddleRefinement
{
  Vector u;
  double criticality = 0.0;
  int iterations = 0;
  bool converged = false;
};

/*
 * Projected Newton iteration on the sphere, in the coordinates
 * v = M_L^{1/2} u where the constraint is the Euclidean sphere. Hessian
 * eigenvalues keep their sign and have their magnitude floored, so the
 * iteration converges to nearby critical points of any index.
 */
inline SaddleRefinement refine_saddle(const GalerkinPair& gp, double p, const Vector& u0, double tol = 1e-6,
                                      int max_iter = 60, double max_step = 0.1)
{
  const auto n = gp.size();
  const Eigen::ArrayXd w = gp.lumped.array();
  const Eigen::ArrayXd s = w.sqrt();
  const Matrix Ah = (s.inverse().matrix().asDiagonal() * gp.stiffness) * s.inverse().matrix().asDiagonal();
  SaddleRefinement out;
  out.u = SpherePoint::normalize(u0, gp.lumped).coefficients();

  for (; out.iterations <= max_iter; ++out.iterations)
  {
    const Vector g = grad_jp(gp, p, out.u);
    const double t = 0.5 * out.u.dot(g);
    const Vector d = ((g.array() - 2.0 * t * w * out.u.array()) / s).matrix();
    out.criticality = d.norm();
    if (out.criticality < tol)
    {
      out.converged = true;
      break;
    }
    if (out.iterations == max_iter)
      break;

    const Vector v = (s * out.u.array()).matrix();
    Matrix H = 2.0 * Ah;
    for (Eigen::Index i = 0; i < n; ++i)
      H(i, i) -= 2.0 * (p * (out.u[i] > 0.0 ? 1.0 : 0.0) + t);
    const Matrix P = Matrix::Identity(n, n) - v * v.transpose();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(P * H * P);
    const auto& mu = eig.eigenvalues();
    const double floor = 1e-8 * mu.cwiseAbs().maxCoeff();
    Vector step = Vector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
      const auto q = eig.eigenvectors().col(k);
      if (std::abs(q.dot(v)) > 0.5)
        continue; // normal direction
      const double m = std::copysign(std::max(std::abs(mu[k]), floor), mu[k]);
      step -= (q.dot(d) / m) * q;
    }
    const double len = step.norm();
    if (len > max_step)
      step *= max_step / len;
    out.u = SpherePoint::normalize(out.u + (step.array() / s).matrix(), gp.lumped).coefficients();
  }
  return out;
}

struct MinimaxOptions
{
  int n_path = 33;
  int max_sweeps = 20000;
  double rel_tol = 1e-10;
  double criticality_tol = 1e-6;
  double eig_tol = 1e-10;
  NewtonOptions polish;
};

struct CriticalPoint
{
  SpherePoint u;
  double t = 0.0;           ///< multiplier
  double p = 0.0;
  double value = 0.0;       ///< J_p(u)
  double criticality = 0.0;
  double level = 0.0;       ///< final continuous path level before refinement
  bool polished = false;
  bool stalled = false;
  std::string quality;      ///< "polished", "refined" or "unpolished"
  std::vector<SweepRecord> history;

  double alpha() const { return p + value; }
  double beta() const { return value; }
};

/*
 * c(p) by path deformation from the Bezier path through phi2, followed by
 * saddle refinement of the peak and semismooth Newton polish.
 */
inline CriticalPoint c_of_p(const GalerkinPair& gp, double p, const MinimaxOptions& opt = {})
{
  if (!(p >= 0.0))
    throw PreconditionError("c_of_p: p must be nonnegative");
  const auto pairs = lowest_eigenpairs(gp, 2, opt.eig_tol, MassKind::lumped);
  const Vector& phi1 = pairs[0].vector;
  const Vector& phi2 = pairs[1].vector;

  auto path = initial_path(gp, phi1, phi2, opt.n_path);
  const auto res = deform_path(gp, p, std::move(path), opt.max_sweeps, 0.1 / pairs[1].value, opt.rel_tol);

  auto ref = refine_saddle(gp, p, res.path.peak, opt.criticality_tol);
  // a refinement that leaves the level of the path has changed branch
  if (ref.converged && std::abs(jp(gp, p, ref.u) - res.path.level) > 1e-3 * std::abs(res.path.level))
    ref = SaddleRefinement{res.path.peak, ref.criticality, ref.iterations, false};
  const SpherePoint peak = SpherePoint::normalize(ref.u, gp.lumped);
  const auto crit = criticality(gp, p, peak);

  CriticalPoint cp{.u = peak,
                   .t = crit.multiplier,
                   .p = p,
                   .value = jp(gp, p, peak),
                   .criticality = crit.norm,
                   .level = res.path.level,
                   .polished = false,
                   .stalled = res.path.stalled,
                   .quality = ref.converged ? "refined" : "unpolished",
                   .history = res.history};
  if (!ref.converged)
  {
    detail::warn("c_of_p: saddle refinement stopped at criticality " + std::to_string(ref.criticality));
    return cp;
  }
  try
  {
    auto pol = semismooth_newton(gp, p, peak, crit.multiplier, opt.polish);
    cp.u = pol.u;
    cp.t = pol.t;
    cp.value = jp(gp, p, pol.u);
    cp.criticality = criticality_norm(gp, p, pol.u);
    cp.polished = true;
    cp.quality = "polished";
  }
  catch (const Error& e)
  {
    detail::warn(std::string("c_of_p: polish failed: ") + e.what());
  }
  return cp;
}

/// The minimax result as a Fucik point.
inline FucikPoint to_fucik_point(const GalerkinPair& gp, const CriticalPoint& cp)
{
  FucikPoint f{.alpha = cp.p + cp.t,
               .beta = cp.t,
               .p = cp.p,
               .t = cp.t,
               .u = cp.u,
               .residual = 0.0,
               .method = Method::minimax,
               .iterations = static_cast<int>(cp.history.size()),
               .residual_history = {}};
  f.residual = fucik_residual(gp, cp.u.coefficients(), f.alpha, f.beta);
  return f;
}

} // namespace fucik

#endif
