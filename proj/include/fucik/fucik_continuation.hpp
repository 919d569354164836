#ifndef FUCIK_FUCIK_CONTINUATION_HPP
#define FUCIK_FUCIK_CONTINUATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"
#include "fucik/functional.hpp"
#include "fucik/spectrum.hpp"
#include "fucik/sphere.hpp"

namespace fucik {

enum class Method
{
  minimax,
  continuation
};

inline const char* to_string(Method m) { return m == Method::minimax ? "minimax" : "continuation"; }

/// A point (alpha, beta) of the first nontrivial curve with its eigenfunction.
struct FucikPoint
{
  double alpha = 0.0;
  double beta = 0.0;
  double p = 0.0;
  double t = 0.0;
  SpherePoint u;
  double residual = 0.0;
  Method method = Method::continuation;
  int iterations = 0;
  std::vector<double> residual_history;

  /// The symmetric point (beta, alpha) carried by -u.
  FucikPoint mirrored() const
  {
    FucikPoint m = *this;
    m.alpha = beta;
    m.beta = alpha;
    m.p = -p;
    m.t = alpha;
    m.u = -u;
    return m;
  }
};

/// Newton ran out of iterations; the last iterate is attached.
class NewtonError : public ConvergenceError
{
public:
  NewtonError(const std::string& what, Vector u, double t, double residual)
  : ConvergenceError(what)
  , last_u(std::move(u))
  , last_t(t)
  , last_residual(residual)
  {}

  Vector last_u;
  double last_t;
  double last_residual;
};

struct NewtonOptions
{
  double tol = 1e-11;
  int max_iter = 50;
};

namespace detail {

struct BorderedResidual
{
  Vector r;          ///< A u - p M_L u+ - t M_L u
  double c = 0.0;    ///< (u^T M_L u - 1) / 2
  double norm = 0.0; ///< sqrt(||r||_*^2 + c^2)
};

inline BorderedResidual bordered_residual(const GalerkinPair& gp, double p, const Vector& u, double t)
{
  const Eigen::ArrayXd w = gp.lumped.array();
  BorderedResidual f;
  f.r = gp.stiffness * u - (p * w * positive_part(u).array() + t * w * u.array()).matrix();
  f.c = 0.5 * ((w * u.array().square()).sum() - 1.0);
  f.norm = std::sqrt((f.r.array().square() / w).sum() + f.c * f.c);
  return f;
}

inline std::vector<char> active_set(const Vector& u)
{
  std::vector<char> d(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    d[i] = u[i] > 0.0;
  return d;
}

} // namespace detail

/*
 * Semismooth Newton for
 *   A u - (p + t) M_L u+ + t M_L u- = 0,  (u^T M_L u - 1) / 2 = 0
 * with generalized Jacobian [A - p M_L D - t M_L, -M_L u; (M_L u)^T, 0],
 * D the indicator of u_i > 0. Steps are damped by backtracking on the
 * residual norm; if the active set cycles with period two it is frozen in
 * the Jacobian.
 */
inline FucikPoint semismooth_newton(const GalerkinPair& gp, double p, const SpherePoint& seed, double t_seed,
                                    const NewtonOptions& opt = {})
{
  if (!(opt.tol > 0.0))
    throw PreconditionError("semismooth_newton: tol must be positive");
  if (opt.max_iter < 1)
    throw PreconditionError("semismooth_newton: max_iter must be positive");
  require_size(gp, seed.coefficients(), "semismooth_newton");
  if (!seed.changes_sign())
    throw PreconditionError("semismooth_newton: seed must change sign");

  const auto n = gp.size();
  const Eigen::ArrayXd w = gp.lumped.array();
  Vector u = seed.coefficients();
  double t = t_seed;
  auto f = detail::bordered_residual(gp, p, u, t);
  std::vector<double> history{f.norm};
  std::vector<std::vector<char>> sets;
  std::optional<std::vector<char>> frozen;

  int it = 0;
  for (; it < opt.max_iter && f.norm > opt.tol; ++it)
  {
    sets.push_back(detail::active_set(u));
    const auto k = sets.size();
    if (!frozen && k >= 3 && sets[k - 1] == sets[k - 3] && sets[k - 1] != sets[k - 2])
      frozen = sets[k - 1];
    const auto& D = frozen ? *frozen : sets.back();

    Matrix J = Matrix::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = gp.stiffness;
    for (Eigen::Index i = 0; i < n; ++i)
    {
      J(i, i) -= (p * (D[i] ? 1.0 : 0.0) + t) * w[i];
      J(i, n) = -w[i] * u[i];
      J(n, i) = w[i] * u[i];
    }
    Vector rhs(n + 1);
    rhs.head(n) = -f.r;
    rhs[n] = -f.c;
    const Eigen::PartialPivLU<Matrix> lu(J);
    const Vector step = lu.solve(rhs);
    if (!step.allFinite())
      throw NewtonError("semismooth_newton: singular generalized Jacobian at iteration " + std::to_string(it),
                        u, t, f.norm);

    double damping = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h, damping *= 0.5)
    {
      const Vector un = u + damping * step.head(n);
      const double tn = t + damping * step[n];
      auto fn = detail::bordered_residual(gp, p, un, tn);
      if (fn.norm <= (1.0 - 1e-4 * damping) * f.norm)
      {
        u = un;
        t = tn;
        f = std::move(fn);
        improved = true;
        break;
      }
    }
    if (!improved)
      throw NewtonError("semismooth_newton: line search failed at iteration " + std::to_string(it) +
                          " with residual " + std::to_string(f.norm),
                        u, t, f.norm);
    history.push_back(f.norm);
  }

  if (!(f.norm <= opt.tol))
    throw NewtonError("semismooth_newton: no convergence in " + std::to_string(opt.max_iter) +
                        " iterations, residual " + std::to_string(f.norm),
                      u, t, f.norm);

  FucikPoint out{.alpha = p + t,
                 .beta = t,
                 .p = p,
                 .t = t,
                 .u = SpherePoint::normalize(u, gp.lumped),
                 .residual = 0.0,
                 .method = Method::continuation,
                 .iterations = it,
                 .residual_history = std::move(history)};
  out.residual = fucik_residual(gp, out.u.coefficients(), out.alpha, out.beta);
  if (!out.u.changes_sign())
    throw ConvergenceError("semismooth_newton: converged to a sign-definite function (trivial line)");
  return out;
}

struct CurveSample
{
  std::vector<FucikPoint> branch; ///< ordered by p, p >= 0
  std::vector<FucikPoint> mirror; ///< (c(p), p + c(p)) carried by -u
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool truncated = false;
  std::string diagnostic;
};

struct ContinuationOptions
{
  NewtonOptions newton;
  int max_halvings = 6;
  double eig_tol = 1e-10;
};

/*
 * Natural-parameter continuation from (phi2, lambda2) at p = 0 to p_max.
 * The multiplier is predicted from dt/dp = -(u+)^T M_L u+, the function by
 * secant extrapolation. A correction whose multiplier moves faster than the
 * Lipschitz bound allows is treated as a branch jump and retried with half
 * the step.
 */
inline CurveSample trace_curve(const GalerkinPair& gp, double p_max, double dp, const ContinuationOptions& opt = {})
{
  if (!(p_max > 0.0))
    throw PreconditionError("trace_curve: p_max must be positive");
  if (!(dp > 0.0) || dp > p_max)
    throw PreconditionError("trace_curve: dp must lie in (0, p_max]");

  const auto pairs = lowest_eigenpairs(gp, 2, opt.eig_tol, MassKind::lumped);
  CurveSample cs;
  cs.lambda1 = pairs[0].value;
  cs.lambda2 = pairs[1].value;

  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor(p_max / dp + 1e-9));
  for (long k = 0; k <= steps; ++k)
    grid.push_back(static_cast<double>(k) * dp);
  if (p_max - grid.back() > 1e-9 * p_max)
    grid.push_back(p_max);

  const Eigen::ArrayXd w = gp.lumped.array();
  auto slope = [&](const FucikPoint& q) {
    return -(w * positive_part(q.u.coefficients()).array().square()).sum();
  };

  FucikPoint cur = semismooth_newton(gp, 0.0, SpherePoint::normalize(pairs[1].vector, gp.lumped), cs.lambda2,
                                     opt.newton);
  cs.branch.push_back(cur);
  std::optional<FucikPoint> prev;

  for (std::size_t g = 1; g < grid.size(); ++g)
  {
    const double target = grid[g];
    int halvings = 0;
    while (cur.p < target - 1e-14)
    {
      const double h = std::min(target - cur.p, (grid[g] - grid[g - 1]) / std::pow(2.0, halvings));
      const double pn = std::min(target, cur.p + h);
      const double dpn = pn - cur.p;
      const double t_pred = cur.t + dpn * slope(cur);
      Vector u_pred = cur.u.coefficients();
      if (prev && cur.p > prev->p)
        u_pred += (cur.u.coefficients() - prev->u.coefficients()) * (dpn / (cur.p - prev->p));

      std::string failure;
      try
      {
        auto next = semismooth_newton(gp, pn, SpherePoint::normalize(u_pred, gp.lumped), t_pred, opt.newton);
        if (std::abs(next.t - cur.t) > 1.5 * dpn + 1e-8)
          failure = "branch jump at p = " + std::to_string(pn);
        else
        {
          prev = std::move(cur);
          cur = std::move(next);
          continue;
        }
      }
      catch (const Error& e)
      {
        failure = e.what();
      }
      if (++halvings > opt.max_halvings)
      {
        cs.truncated = true;
        cs.diagnostic = "corrector failed after " + std::to_string(opt.max_halvings) + " halvings near p = " +
                        std::to_string(pn) + ": " + failure;
        break;
      }
    }
    if (cs.truncated)
      break;
    cs.branch.push_back(cur);
  }

  for (const auto& q : cs.branch)
    cs.mirror.push_back(q.mirrored());
  return cs;
}

struct PropertyCheck
{
  std::string name;
  bool passed = true;
  double worst = 0.0; ///< worst violation margin (positive means violated)
  std::string witness;
};

struct CurveReport
{
  std::vector<PropertyCheck> checks;

  bool passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
  }

  const PropertyCheck& operator[](const std::string& name) const
  {
    for (const auto& c : checks)
      if (c.name == name)
        return c;
    throw PreconditionError("CurveReport: no check named " + name);
  }
};

/// Lipschitz, monotonicity, lower-bound and asymptotic-approach checks on a traced branch.
inline CurveReport validate_curve(const CurveSample& cs, double lipschitz_slack = 1e-10)
{
  const auto& b = cs.branch;
  if (b.size() < 3)
    throw PreconditionError("validate_curve: at least three samples are required");
  CurveReport rep;
  auto at = [&](std::size_t i) { return "p = " + detail::format_double(b[i].p); };

  PropertyCheck lip{"lipschitz", true, -std::numeric_limits<double>::infinity(), {}};
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j)
    {
      const double excess = std::abs(b[i].beta - b[j].beta) - std::abs(b[i].p - b[j].p);
      if (excess > lip.worst)
      {
        lip.worst = excess;
        lip.witness = at(i) + ", " + at(j);
      }
    }
  lip.passed = lip.worst <= lipschitz_slack;
  rep.checks.push_back(lip);

  PropertyCheck mono{"monotone", true, -std::numeric_limits<double>::infinity(), {}};
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
  {
    const double m = std::max(b[i + 1].beta - b[i].beta, b[i].alpha - b[i + 1].alpha);
    if (m > mono.worst)
    {
      mono.worst = m;
      mono.witness = at(i) + " -> " + at(i + 1);
    }
  }
  mono.passed = mono.worst < 0.0;
  rep.checks.push_back(mono);

  PropertyCheck lower{"above_lambda1", true, -std::numeric_limits<double>::infinity(), {}};
  for (std::size_t i = 0; i < b.size(); ++i)
    if (cs.lambda1 - b[i].beta > lower.worst)
    {
      lower.worst = cs.lambda1 - b[i].beta;
      lower.witness = at(i);
    }
  lower.passed = lower.worst < 0.0;
  rep.checks.push_back(lower);

  // the gap to lambda1 must shrink step by step, and the far end must be closer than the middle
  PropertyCheck approach{"approach_lambda1", true, -std::numeric_limits<double>::infinity(), {}};
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
  {
    const double m = (b[i + 1].beta - cs.lambda1) - (b[i].beta - cs.lambda1);
    if (m > approach.worst)
    {
      approach.worst = m;
      approach.witness = at(i) + " -> " + at(i + 1);
    }
  }
  const double half = 0.5 * b.back().p;
  const auto mid = static_cast<std::size_t>(
    std::min_element(b.begin(), b.end(),
                     [&](const FucikPoint& x, const FucikPoint& y) { return std::abs(x.p - half) < std::abs(y.p - half); }) -
    b.begin());
  const double far_gap = b.back().beta - cs.lambda1;
  const double mid_gap = b[mid].beta - cs.lambda1;
  approach.passed = approach.worst < 0.0 && far_gap > 0.0 && far_gap < mid_gap;
  if (!(far_gap > 0.0 && far_gap < mid_gap))
    approach.witness += (approach.witness.empty() ? "" : "; ") + std::string("end gap ") +
                        detail::format_double(far_gap) + " vs mid gap " + detail::format_double(mid_gap);
  rep.checks.push_back(approach);
  return rep;
}

struct LineCheck
{
  double alpha = 0.0;
  double beta = 0.0;
  bool vertical = true; ///< alpha = lambda1 carried by phi1; otherwise beta = lambda1 carried by -phi1
  double residual = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct TrivialLinesReport
{
  double lambda1 = 0.0;
  double eigen_residual = 0.0;
  std::vector<LineCheck> lines;

  bool passed() const
  {
    return std::all_of(lines.begin(), lines.end(), [](const LineCheck& l) { return l.passed; });
  }
};

/*
 * (lambda1, beta) with u = phi1 and (beta, lambda1) with u = -phi1 for each
 * beta in the list. The bound is the eigensolver residual plus a rounding
 * allowance for the differently ordered products.
 */
inline TrivialLinesReport trivial_lines_check(const GalerkinPair& gp, const std::vector<double>& betas,
                                              double eig_tol = 1e-10)
{
  const auto e = lowest_eigenpairs(gp, 1, eig_tol, MassKind::lumped).front();
  TrivialLinesReport rep;
  rep.lambda1 = e.value;
  rep.eigen_residual = e.residual;
  const double bound = e.residual + 64.0 * std::numeric_limits<double>::epsilon() *
                                      dual_norm(gp.lumped, gp.stiffness * e.vector);
  for (double beta : betas)
  {
    LineCheck v{e.value, beta, true, fucik_residual(gp, e.vector, e.value, beta), bound, false};
    v.passed = v.residual <= bound;
    rep.lines.push_back(v);
    LineCheck hz{beta, e.value, false, fucik_residual(gp, -e.vector, beta, e.value), bound, false};
    hz.passed = hz.residual <= bound;
    rep.lines.push_back(hz);
  }
  return rep;
}

} // namespace fucik

#endif
