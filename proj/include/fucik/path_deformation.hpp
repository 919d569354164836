#ifndef FUCIK_PATH_DEFORMATION_HPP
#define FUCIK_PATH_DEFORMATION_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"

namespace fucik {

/*
 * A landscape on which a discrete path can be deformed: an energy, a descent
 * direction in the metric given by `inner`, a retraction onto the constraint
 * set and the tangent projection. `segment(a, b)` returns a callable giving
 * the energy along `interpolate(a, b, tau)`, tau in [0, 1].
 */
template <class L>
concept DeformationLandscape = requires(const L& l, const Vector& u, const Vector& v, double tau) {
  { l.value(u) } -> std::convertible_to<double>;
  { l.descent(u) } -> std::convertible_to<Vector>;
  { l.retract(u) } -> std::convertible_to<Vector>;
  { l.project(u, v) } -> std::convertible_to<Vector>;
  { l.inner(u, v) } -> std::convertible_to<double>;
  { l.interpolate(u, v, tau) } -> std::convertible_to<Vector>;
  { l.criticality(u) } -> std::convertible_to<double>;
  { l.segment(u, v)(tau) } -> std::convertible_to<double>;
};

/*
 * Finite representation of a path with fixed endpoints. `level` is the
 * maximum of the energy over the continuous path obtained by joining
 * consecutive points with `interpolate`; `peak` is where it is attained.
 */
struct PathState
{
  std::vector<Vector> points;
  double level = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0; ///< index of the highest discrete point
  Vector peak;
  bool stalled = false;
};

struct SweepRecord
{
  int sweep = 0;
  double level = 0.0;
  double criticality = 0.0;
  double step = 0.0;
};

struct DeformOptions
{
  int max_sweeps = 20000;
  double step = 0.0;          ///< initial step; <= 0 lets the caller's default apply
  double max_step = 0.0;      ///< step growth cap; <= 0 means no growth beyond `step`
  double rel_tol = 1e-10;     ///< sweep-to-sweep relative level decrease regarded as stagnation
  int patience = 5;           ///< consecutive stagnant sweeps before stopping
  double window = 0.1;        ///< fraction of the level range deformed every sweep
  int lazy_period = 10;       ///< every n-th sweep deforms all interior points
  double max_chord = 0.25;    ///< chord length that triggers midpoint insertion
  std::size_t max_points = 513;
  int max_halvings = 60;
};

struct DeformResult
{
  PathState path;
  std::vector<SweepRecord> history;
  bool converged = false;
};

namespace detail {

template <DeformationLandscape L>
double distance(const L& l, const Vector& a, const Vector& b)
{
  const Vector d = b - a;
  return std::sqrt(l.inner(d, d));
}

/// Maximizes a profile on [0,1] by sampling followed by golden-section refinement.
template <class F>
std::pair<double, double> maximize_profile(const F& f)
{
  constexpr int samples = 8;
  double best_tau = 0.0;
  double best = f(0.0);
  for (int k = 1; k <= samples; ++k)
  {
    const double tau = static_cast<double>(k) / samples;
    const double v = f(tau);
    if (v > best)
    {
      best = v;
      best_tau = tau;
    }
  }
  double lo = std::max(0.0, best_tau - 1.0 / samples);
  double hi = std::min(1.0, best_tau + 1.0 / samples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-12)
  {
    if (f1 < f2)
    {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
    else
    {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  if (f1 > best)
  {
    best = f1;
    best_tau = x1;
  }
  if (f2 > best)
  {
    best = f2;
    best_tau = x2;
  }
  return {best_tau, best};
}

} // namespace detail

/// Evaluates level, argmax and peak of a path.
template <DeformationLandscape L>
PathState evaluate_path(const L& l, std::vector<Vector> points, double window = 0.25)
{
  if (points.size() < 2)
    throw PreconditionError("path: at least two points are required");
  PathState st;
  st.points = std::move(points);
  const auto n = st.points.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = l.value(st.points[i]);
  st.argmax = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double vmax = v[st.argmax];
  const double vmin = *std::min_element(v.begin(), v.end());
  st.level = vmax;
  st.peak = st.points[st.argmax];

  const double cut = vmax - window * (vmax - vmin);
  for (std::size_t i = 0; i + 1 < n; ++i)
  {
    const bool adjacent = i == st.argmax || i + 1 == st.argmax;
    if (!adjacent && std::max(v[i], v[i + 1]) < cut)
      continue;
    const auto prof = l.segment(st.points[i], st.points[i + 1]);
    const auto [tau, val] = detail::maximize_profile(prof);
    if (val > st.level)
    {
      st.level = val;
      st.peak = l.interpolate(st.points[i], st.points[i + 1], tau);
    }
  }
  return st;
}

/*
 * Mountain-pass path deformation. Each sweep moves interior points along the
 * descent direction with its component along the path tangent removed; the
 * points within `window` of the top of the level range move every sweep,
 * the others every `lazy_period` sweeps. A sweep is accepted only if the
 * continuous path level does not increase, otherwise the step is halved.
 * Chords longer than `max_chord` receive their midpoint, which leaves the
 * continuous path unchanged.
 */
template <DeformationLandscape L>
DeformResult deform(const L& l, std::vector<Vector> initial, const DeformOptions& opt)
{
  if (!(opt.step > 0.0))
    throw PreconditionError("deform: a positive initial step is required");

  DeformResult out;
  PathState cur = evaluate_path(l, std::move(initial));
  double step = opt.step;
  const double step_cap = std::max(opt.step, opt.max_step);
  int quiet = 0;

  auto record = [&](int sweep) {
    out.history.push_back({sweep, cur.level, l.criticality(cur.peak), step});
  };
  record(0);

  auto refine_chords = [&](PathState& st) {
    bool inserted = false;
    std::vector<Vector> pts;
    pts.reserve(st.points.size() * 2);
    for (std::size_t i = 0; i + 1 < st.points.size(); ++i)
    {
      pts.push_back(st.points[i]);
      if (st.points.size() + (pts.size() - i) < opt.max_points &&
          detail::distance(l, st.points[i], st.points[i + 1]) > opt.max_chord)
      {
        pts.push_back(l.interpolate(st.points[i], st.points[i + 1], 0.5));
        inserted = true;
      }
    }
    pts.push_back(st.points.back());
    if (inserted)
      st = evaluate_path(l, std::move(pts));
  };
  refine_chords(cur);

  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep)
  {
    const auto n = cur.points.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = l.value(cur.points[i]);
    const double vmax = *std::max_element(v.begin(), v.end());
    const double vmin = *std::min_element(v.begin(), v.end());
    const double cut = vmax - opt.window * (vmax - vmin);

    std::vector<std::size_t> window_idx, all_idx;
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
      all_idx.push_back(i);
      if (v[i] >= cut || i == cur.argmax)
        window_idx.push_back(i);
    }
    const bool lazy = opt.lazy_period > 0 && sweep % opt.lazy_period == 0;

    // perpendicular descent directions are fixed for the sweep
    std::vector<Vector> dir(n);
    for (std::size_t i : all_idx)
    {
      if (!lazy && !std::binary_search(window_idx.begin(), window_idx.end(), i))
        continue;
      Vector tan = l.project(cur.points[i], cur.points[i + 1] - cur.points[i - 1]);
      const double tn = std::sqrt(l.inner(tan, tan));
      Vector d = l.descent(cur.points[i]);
      if (tn > 0.0)
      {
        tan /= tn;
        d -= l.inner(d, tan) * tan;
      }
      dir[i] = std::move(d);
    }

    auto trial = [&](const std::vector<std::size_t>& idx, double eta) {
      std::vector<Vector> pts = cur.points;
      for (std::size_t i : idx)
        pts[i] = l.retract(cur.points[i] - eta * dir[i]);
      return evaluate_path(l, std::move(pts));
    };

    const double old_level = cur.level;
    bool accepted = false;
    PathState next;
    if (lazy)
    {
      next = trial(all_idx, step);
      accepted = next.level <= old_level;
    }
    for (int h = 0; !accepted && h <= opt.max_halvings; ++h)
    {
      next = trial(window_idx, step);
      accepted = next.level <= old_level;
      if (!accepted)
        step *= 0.5;
    }
    if (!accepted)
    {
      cur.stalled = true;
      break;
    }

    cur = std::move(next);
    refine_chords(cur);
    record(sweep);

    const double decrease = old_level - cur.level;
    quiet = decrease <= opt.rel_tol * std::abs(cur.level) ? quiet + 1 : 0;
    if (quiet >= opt.patience)
    {
      out.converged = true;
      break;
    }
    step = std::min(step * 1.25, step_cap);
  }

  out.path = std::move(cur);
  return out;
}

} // namespace fucik

#endif
