#ifndef FUCIK_NONRESONANCE_HPP
#define FUCIK_NONRESONANCE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"
#include "fucik/path_deformation.hpp"
#include "fucik/spectrum.hpp"
#include "fucik/sphere.hpp"

namespace fucik {

/// A hypothesis on the nonlinearity fails on the nodal grid.
class SpecViolation : public PreconditionError
{
public:
  using PreconditionError::PreconditionError;
};

using PointMap = std::function<double(double x, double s)>;
using Bound = std::function<double(double x)>;

/*
 * Nonlinearity f(x, s) with primitive F, nodal slope f_s and declared
 * asymptotic bounds: gamma/Gamma bracket f(x,s)/s, delta/Delta bracket
 * 2F(x,s)/s^2, each as s -> +inf (plus) and s -> -inf (minus).
 */
struct Nonlinearity
{
  std::string kind;
  PointMap f;
  PointMap F;
  PointMap fs;
  Bound gamma_plus, gamma_minus, Gamma_plus, Gamma_minus;
  Bound delta_plus, delta_minus, Delta_plus, Delta_minus;
};

namespace detail {

inline Bound constant(double c)
{
  return [c](double) { return c; };
}

inline double integrate_f(const PointMap& f, double x, double s)
{
  if (s == 0.0)
    return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
    [&](double t) { return f(x, t); }, 0.0, s, 15, 1e-13);
}

} // namespace detail

/// f(x, s) = m s + shift
inline Nonlinearity linear_shift(double m, double shift)
{
  Nonlinearity nl;
  nl.kind = "linear-shift";
  nl.f = [m, shift](double, double s) { return m * s + shift; };
  nl.F = [m, shift](double, double s) { return 0.5 * m * s * s + shift * s; };
  nl.fs = [m](double, double) { return m; };
  nl.gamma_plus = nl.gamma_minus = nl.Gamma_plus = nl.Gamma_minus = detail::constant(m);
  nl.delta_plus = nl.delta_minus = nl.Delta_plus = nl.Delta_minus = detail::constant(m);
  return nl;
}

/// f(x, s) = a s+ - b s- + arctan(s)
inline Nonlinearity piecewise_asymptotic(double a, double b)
{
  Nonlinearity nl;
  nl.kind = "piecewise-asymptotic";
  nl.f = [a, b](double, double s) { return (s > 0.0 ? a * s : b * s) + std::atan(s); };
  nl.F = [a, b](double, double s) {
    return 0.5 * (s > 0.0 ? a : b) * s * s + s * std::atan(s) - 0.5 * std::log1p(s * s);
  };
  nl.fs = [a, b](double, double s) { return (s > 0.0 ? a : b) + 1.0 / (1.0 + s * s); };
  nl.gamma_plus = nl.Gamma_plus = nl.delta_plus = nl.Delta_plus = detail::constant(a);
  nl.gamma_minus = nl.Gamma_minus = nl.delta_minus = nl.Delta_minus = detail::constant(b);
  return nl;
}

/*
 * x-independent f interpolating the table (s_k, f_k) linearly and continued
 * linearly beyond the ends with the end slopes. F is accumulated from 0 by
 * adaptive Gauss-Kronrod quadrature between knots, with a Gauss rule on the
 * last partial panel.
 */
inline Nonlinearity custom_table(std::vector<std::pair<double, double>> table)
{
  if (table.size() < 3)
    throw PreconditionError("custom_table: at least three points are required");
  std::sort(table.begin(), table.end());
  for (std::size_t k = 1; k < table.size(); ++k)
    if (!(table[k].first > table[k - 1].first))
      throw PreconditionError("custom_table: abscissae must be distinct");
  if (!(table.front().first < 0.0 && table.back().first > 0.0))
    throw PreconditionError("custom_table: the table must bracket s = 0");

  // knots including 0, so that every panel lies on one side of the origin
  std::vector<double> knots;
  for (const auto& [s, v] : table)
    knots.push_back(s);
  if (!std::binary_search(knots.begin(), knots.end(), 0.0))
    knots.insert(std::upper_bound(knots.begin(), knots.end(), 0.0), 0.0);

  auto f = [table](double s) {
    std::size_t k = std::upper_bound(table.begin(), table.end(), std::make_pair(s, -HUGE_VAL)) - table.begin();
    k = std::clamp<std::size_t>(k, 1, table.size() - 1);
    const double m = (table[k].second - table[k - 1].second) / (table[k].first - table[k - 1].first);
    return std::make_pair(table[k - 1].second + m * (s - table[k - 1].first), m);
  };

  const auto zero = static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), 0.0) - knots.begin());
  std::vector<double> Fk(knots.size(), 0.0);
  for (std::size_t k = zero + 1; k < knots.size(); ++k)
    Fk[k] = Fk[k - 1] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                          [&](double t) { return f(t).first; }, knots[k - 1], knots[k], 15, 1e-13);
  for (std::size_t k = zero; k-- > 0;)
    Fk[k] = Fk[k + 1] - boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                          [&](double t) { return f(t).first; }, knots[k], knots[k + 1], 15, 1e-13);

  const double lo = f(table.front().first).second;
  const double hi = f(table.back().first).second;

  Nonlinearity nl;
  nl.kind = "custom-table";
  nl.f = [f](double, double s) { return f(s).first; };
  nl.fs = [f](double, double s) { return f(s).second; };
  nl.F = [f, knots, Fk, zero](double, double s) {
    // nearest knot between 0 and s
    std::size_t k = zero;
    if (s > 0.0)
      while (k + 1 < knots.size() && knots[k + 1] <= s)
        ++k;
    else
      while (k > 0 && knots[k - 1] >= s)
        --k;
    return Fk[k] + boost::math::quadrature::gauss<double, 7>::integrate(
                     [&](double t) { return f(t).first; }, knots[k], s);
  };
  nl.gamma_plus = nl.Gamma_plus = nl.delta_plus = nl.Delta_plus = detail::constant(hi);
  nl.gamma_minus = nl.Gamma_minus = nl.delta_minus = nl.Delta_minus = detail::constant(lo);
  return nl;
}

/// Outcome of the hypothesis checks; the asymptotic part is a finite-sample heuristic.
struct HypothesisReport
{
  double lambda1 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  int strict_plus_nodes = 0;  ///< nodes with delta_+ > lambda1
  int strict_minus_nodes = 0; ///< nodes with delta_- > lambda1
  bool Delta_plus_below_alpha = false;
  bool Delta_minus_below_beta = false;
  double asymptotic_scale = 1e6;
  double asymptotic_worst = 0.0; ///< largest excursion of the sampled quotients outside their bounds
  double primitive_worst = 0.0;  ///< max |F - int f| / (1 + s^2) on the samples
};

/*
 * A nonlinearity validated against the first eigenvalue and a target point
 * (alpha, beta) of the first curve on the nodes of a mesh.
 */
class NonlinearitySpec
{
public:
  NonlinearitySpec(Nonlinearity nl, const Mesh& mesh, double lambda1, double alpha, double beta)
  : nl_(std::move(nl))
  , x_(mesh.coordinates())
  {
    rep_.lambda1 = lambda1;
    rep_.alpha = alpha;
    rep_.beta = beta;
    check();
  }

  const std::string& kind() const { return nl_.kind; }
  double f(double x, double s) const { return nl_.f(x, s); }
  double F(double x, double s) const { return nl_.F(x, s); }
  double fs(double x, double s) const { return nl_.fs(x, s); }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const std::vector<double>& nodes() const { return x_; }
  const HypothesisReport& report() const { return rep_; }
  double alpha() const { return rep_.alpha; }
  double beta() const { return rep_.beta; }

private:
  void check()
  {
    const double l1 = rep_.lambda1;
    const double a = rep_.alpha;
    const double b = rep_.beta;
    const double slack = 1e-12 * std::max({1.0, std::abs(l1), std::abs(a), std::abs(b)});
    auto fail = [](const std::string& which, double x, double lhs, double rhs) {
      throw SpecViolation("nonlinearity violates " + which + " at x = " + detail::format_double(x) + " (" +
                          detail::format_double(lhs) + " vs " + detail::format_double(rhs) + ")");
    };
    auto chain = [&](const char* eq, const char* lo, const char* hi, const Bound& g, const Bound& G, double top,
                     const char* top_name, double x) {
      const double gv = g(x);
      const double Gv = G(x);
      if (gv < l1 - slack)
        fail(std::string(eq) + ": lambda1 <= " + lo, x, l1, gv);
      if (gv > Gv + slack)
        fail(std::string(eq) + ": " + lo + " <= " + hi, x, gv, Gv);
      if (Gv > top + slack)
        fail(std::string(eq) + ": " + hi + " <= " + top_name, x, Gv, top);
    };

    bool all_plus_below = true;
    bool all_minus_below = true;
    for (double x : x_)
    {
      chain("the slope bounds", "gamma_+", "Gamma_+", nl_.gamma_plus, nl_.Gamma_plus, a, "alpha", x);
      chain("the slope bounds", "gamma_-", "Gamma_-", nl_.gamma_minus, nl_.Gamma_minus, b, "beta", x);
      chain("the primitive bounds", "delta_+", "Delta_+", nl_.delta_plus, nl_.Delta_plus, a, "alpha", x);
      chain("the primitive bounds", "delta_-", "Delta_-", nl_.delta_minus, nl_.Delta_minus, b, "beta", x);
      rep_.strict_plus_nodes += nl_.delta_plus(x) > l1 + slack;
      rep_.strict_minus_nodes += nl_.delta_minus(x) > l1 + slack;
      all_plus_below = all_plus_below && nl_.Delta_plus(x) < a - slack;
      all_minus_below = all_minus_below && nl_.Delta_minus(x) < b - slack;
    }
    rep_.Delta_plus_below_alpha = all_plus_below;
    rep_.Delta_minus_below_beta = all_minus_below;
    if (rep_.strict_plus_nodes == 0)
      throw SpecViolation("nonlinearity violates the primitive bounds: delta_+ > lambda1 on a set of positive measure");
    if (rep_.strict_minus_nodes == 0)
      throw SpecViolation("nonlinearity violates the primitive bounds: delta_- > lambda1 on a set of positive measure");
    if (!all_plus_below && !all_minus_below)
      throw SpecViolation("nonlinearity violates the primitive bounds: neither Delta_+ < alpha nor Delta_- < beta everywhere");

    // asymptotic limits sampled at a finite magnitude
    const double S = rep_.asymptotic_scale;
    auto excursion = [](double q, double lo, double hi) {
      return std::max({0.0, lo - q, q - hi}) / std::max(1.0, std::abs(hi));
    };
    for (double x : x_)
    {
      const double e = std::max({excursion(nl_.f(x, S) / S, nl_.gamma_plus(x), nl_.Gamma_plus(x)),
                                 excursion(nl_.f(x, -S) / -S, nl_.gamma_minus(x), nl_.Gamma_minus(x)),
                                 excursion(2.0 * nl_.F(x, S) / (S * S), nl_.delta_plus(x), nl_.Delta_plus(x)),
                                 excursion(2.0 * nl_.F(x, -S) / (S * S), nl_.delta_minus(x), nl_.Delta_minus(x))});
      rep_.asymptotic_worst = std::max(rep_.asymptotic_worst, e);
    }
    if (rep_.asymptotic_worst > 1e-3)
      throw SpecViolation("nonlinearity violates the asymptotic limits: sampled quotient at |s| = 1e6 leaves its bounds by " +
                          detail::format_double(rep_.asymptotic_worst));

    const std::size_t stride = std::max<std::size_t>(1, x_.size() / 4);
    for (std::size_t i = 0; i < x_.size(); i += stride)
      for (double s : {-10.0, -3.0, -1.0, -0.3, 0.3, 1.0, 3.0, 10.0})
      {
        const double err = std::abs(nl_.F(x_[i], s) - detail::integrate_f(nl_.f, x_[i], s)) / (1.0 + s * s);
        rep_.primitive_worst = std::max(rep_.primitive_worst, err);
      }
    if (rep_.primitive_worst > 1e-8)
      throw SpecViolation("nonlinearity: F is not a primitive of f (error " +
                          detail::format_double(rep_.primitive_worst) + ")");
  }

  Nonlinearity nl_;
  std::vector<double> x_;
  HypothesisReport rep_;
};

namespace detail {

inline void require_nodes(const GalerkinPair& gp, const NonlinearitySpec& spec)
{
  if (static_cast<Eigen::Index>(spec.nodes().size()) != gp.size())
    throw PreconditionError("nonlinearity was validated on a different mesh");
}

inline Vector nodal(const NonlinearitySpec& spec, const Vector& u, double (NonlinearitySpec::*m)(double, double) const)
{
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out[i] = (spec.*m)(spec.nodes()[i], u[i]);
  return out;
}

} // namespace detail

/// Psi(u) = u^T A u / 2 - sum_i w_i F(x_i, u_i)
inline double psi(const GalerkinPair& gp, const NonlinearitySpec& spec, const Vector& u)
{
  require_size(gp, u, "psi");
  detail::require_nodes(gp, spec);
  return 0.5 * u.dot(gp.stiffness * u) - gp.lumped.dot(detail::nodal(spec, u, &NonlinearitySpec::F));
}

/// A u - M_L f(x, u)
inline Vector grad_psi(const GalerkinPair& gp, const NonlinearitySpec& spec, const Vector& u)
{
  require_size(gp, u, "grad_psi");
  detail::require_nodes(gp, spec);
  return gp.stiffness * u - (gp.lumped.array() * detail::nodal(spec, u, &NonlinearitySpec::f).array()).matrix();
}

/// Phi(u) = u^T A u - sum w Delta_+ (u+)^2 - sum w Delta_- (u-)^2
inline double phi_functional(const GalerkinPair& gp, const NonlinearitySpec& spec, const Vector& u)
{
  require_size(gp, u, "phi_functional");
  detail::require_nodes(gp, spec);
  const auto& nl = spec.nonlinearity();
  double acc = u.dot(gp.stiffness * u);
  for (Eigen::Index i = 0; i < u.size(); ++i)
  {
    const double x = spec.nodes()[i];
    const double pos = std::max(u[i], 0.0);
    const double neg = std::max(-u[i], 0.0);
    acc -= gp.lumped[i] * (nl.Delta_plus(x) * pos * pos + nl.Delta_minus(x) * neg * neg);
  }
  return acc;
}

/// Psi in the M_L metric, without a constraint.
class EnergyLandscape
{
public:
  EnergyLandscape(const GalerkinPair& gp, const NonlinearitySpec& spec)
  : gp_(&gp)
  , spec_(&spec)
  {
    detail::require_nodes(gp, spec);
  }

  double value(const Vector& u) const { return psi(*gp_, *spec_, u); }
  Vector descent(const Vector& u) const { return (grad_psi(*gp_, *spec_, u).array() / gp_->lumped.array()).matrix(); }
  Vector retract(const Vector& v) const { return v; }
  Vector project(const Vector&, const Vector& v) const { return v; }
  double inner(const Vector& a, const Vector& b) const { return lumped_inner(gp_->lumped, a, b); }
  Vector interpolate(const Vector& a, const Vector& b, double tau) const { return (1.0 - tau) * a + tau * b; }
  double criticality(const Vector& u) const { return dual_norm(gp_->lumped, grad_psi(*gp_, *spec_, u)); }

  auto segment(const Vector& a, const Vector& b) const
  {
    const Vector Aa = gp_->stiffness * a;
    const Vector Ab = gp_->stiffness * b;
    const double aa = a.dot(Aa);
    const double ab = a.dot(Ab);
    const double bb = b.dot(Ab);
    return [a, b, aa, ab, bb, spec = spec_, w = gp_->lumped](double tau) {
      const double s = 1.0 - tau;
      double acc = 0.5 * (s * s * aa + 2.0 * s * tau * ab + tau * tau * bb);
      for (Eigen::Index i = 0; i < a.size(); ++i)
        acc -= w[i] * spec->F(spec->nodes()[i], s * a[i] + tau * b[i]);
      return acc;
    };
  }

private:
  const GalerkinPair* gp_;
  const NonlinearitySpec* spec_;
};

static_assert(DeformationLandscape<EnergyLandscape>);

struct RadiusSelection
{
  double R = 0.0;
  std::vector<double> radii;
  std::vector<double> psi_plus;  ///< Psi(R phi1)
  std::vector<double> psi_minus; ///< Psi(-R phi1)
};

/*
 * Smallest R in 1, 2, 4, ... with max Psi(+-R phi1) < Psi(0) - margin.
 * phi1 is the lumped principal eigenvector.
 */
inline RadiusSelection select_R(const GalerkinPair& gp, const NonlinearitySpec& spec, const Vector& phi1,
                                double margin = 1.0)
{
  require_size(gp, phi1, "select_R");
  RadiusSelection sel;
  const double base = psi(gp, spec, Vector::Zero(gp.size()));
  for (int k = 0; k <= 20; ++k)
  {
    const double R = std::ldexp(1.0, k);
    sel.radii.push_back(R);
    sel.psi_plus.push_back(psi(gp, spec, R * phi1));
    sel.psi_minus.push_back(psi(gp, spec, -R * phi1));
    if (std::max(sel.psi_plus.back(), sel.psi_minus.back()) < base - margin)
    {
      sel.R = R;
      return sel;
    }
  }
  throw ConvergenceError("select_R: no R up to 2^20 brings Psi(+-R phi1) below Psi(0) - " +
                         detail::format_double(margin) + "; the strict part of the primitive bounds is likely violated");
}

enum class Classification
{
  mountain_pass,
  minimizer,
  unknown
};

inline const char* to_string(Classification c)
{
  switch (c)
  {
    case Classification::mountain_pass: return "mountain-pass";
    case Classification::minimizer: return "minimizer";
    default: return "unknown";
  }
}

struct EnergyCritical
{
  Vector u;
  double value = 0.0;
  double gradient_norm = 0.0;
  Classification classification = Classification::unknown;
  int morse_index = -1;
  double R = 0.0;
  double endpoint_level = 0.0; ///< max Psi(+-R phi1)
  double path_level = 0.0;
  int newton_iterations = 0;
  bool converged = false;
  std::vector<SweepRecord> history;
};

struct NonresonanceOptions
{
  int n_path = 33;
  int max_sweeps = 5000;
  double rel_tol = 1e-10;
  int max_newton = 60;
  double margin = 1.0;
};

/// Number of negative eigenvalues of A - M_L diag(f_s(x, u)) relative to M_L.
inline int morse_index(const GalerkinPair& gp, const NonlinearitySpec& spec, const Vector& u)
{
  const Eigen::ArrayXd s = gp.lumped.array().sqrt();
  const Vector fs = detail::nodal(spec, u, &NonlinearitySpec::fs);
  Matrix H = (s.inverse().matrix().asDiagonal() * gp.stiffness) * s.inverse().matrix().asDiagonal();
  H.diagonal() -= fs;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  const auto& mu = eig.eigenvalues();
  const double eps = 1e-10 * mu.cwiseAbs().maxCoeff();
  return static_cast<int>((mu.array() < -eps).count());
}

/*
 * Mountain pass between -R phi1 and R phi1: path deformation from the
 * straight segment, then damped Newton on grad Psi with Jacobian
 * A - M_L diag(f_s(x, u)) and backtracking on ||grad Psi||.
 */
inline EnergyCritical solve_nonresonance(const GalerkinPair& gp, const NonlinearitySpec& spec, double tol = 1e-8,
                                         const NonresonanceOptions& opt = {})
{
  if (!(tol > 0.0))
    throw PreconditionError("solve_nonresonance: tol must be positive");
  detail::require_nodes(gp, spec);
  const auto pairs = lowest_eigenpairs(gp, 1, 1e-10, MassKind::lumped);
  const Vector& phi1 = pairs[0].vector;
  const auto sel = select_R(gp, spec, phi1, opt.margin);

  EnergyCritical out;
  out.R = sel.R;
  out.endpoint_level = std::max(sel.psi_plus.back(), sel.psi_minus.back());

  std::vector<Vector> path;
  for (int i = 0; i < opt.n_path; ++i)
    path.push_back((-1.0 + 2.0 * i / (opt.n_path - 1)) * sel.R * phi1);

  const EnergyLandscape land(gp, spec);
  const Eigen::ArrayXd rs = gp.lumped.array().sqrt();
  const Matrix Ah = (rs.inverse().matrix().asDiagonal() * gp.stiffness) * rs.inverse().matrix().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Matrix> spec_a(Ah, Eigen::EigenvaluesOnly);
  const double step = 0.9 / spec_a.eigenvalues().maxCoeff();
  DeformOptions dopt;
  dopt.max_sweeps = opt.max_sweeps;
  dopt.step = step;
  dopt.max_step = step;
  dopt.rel_tol = opt.rel_tol;
  dopt.max_chord = sel.R / 8.0;
  const auto res = deform(land, std::move(path), dopt);
  out.path_level = res.path.level;
  out.history = res.history;

  Vector u = res.path.peak;
  Vector g = grad_psi(gp, spec, u);
  double gn = dual_norm(gp.lumped, g);
  int it = 0;
  for (; it < opt.max_newton && gn > tol; ++it)
  {
    Matrix J = gp.stiffness;
    const Vector fs = detail::nodal(spec, u, &NonlinearitySpec::fs);
    J.diagonal() -= (gp.lumped.array() * fs.array()).matrix();
    const Vector d = Eigen::PartialPivLU<Matrix>(J).solve(-g);
    if (!d.allFinite())
      break;
    double lam = 1.0;
    bool moved = false;
    for (int h = 0; h < 40; ++h, lam *= 0.5)
    {
      const Vector un = u + lam * d;
      const Vector gnv = grad_psi(gp, spec, un);
      const double nn = dual_norm(gp.lumped, gnv);
      if (nn <= (1.0 - 1e-4 * lam) * gn)
      {
        u = un;
        g = gnv;
        gn = nn;
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
  }
  out.u = u;
  out.value = psi(gp, spec, u);
  out.gradient_norm = gn;
  out.newton_iterations = it;
  out.converged = gn <= tol;
  if (out.converged)
  {
    out.morse_index = morse_index(gp, spec, u);
    out.classification = out.morse_index == 1   ? Classification::mountain_pass
                         : out.morse_index == 0 ? Classification::minimizer
                                                : Classification::unknown;
  }
  else
    detail::warn("solve_nonresonance: Newton stopped at gradient norm " + detail::format_double(gn));
  return out;
}

} // namespace fucik

#endif
