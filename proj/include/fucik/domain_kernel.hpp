#ifndef FUCIK_DOMAIN_KERNEL_HPP
#define FUCIK_DOMAIN_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fucik/errors.hpp"

namespace fucik {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t bytes,
                           std::uint64_t seed = 0xcbf29ce484222325ULL)
{
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i)
  {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Open interval (a, b).
struct Interval
{
  double a;
  double b;

  double length() const { return b - a; }
  bool contains(double x) const { return a < x && x < b; }
};

/*
 * Bounded open set made of finitely many disjoint open intervals, sorted
 * left to right with strictly positive gaps. Its complement carries the
 * exterior Dirichlet condition.
 */
class Domain
{
public:
  explicit Domain(std::vector<Interval> intervals)
  : intervals_(std::move(intervals))
  {
    if (intervals_.empty())
      throw PreconditionError("domain: at least one interval is required");
    for (const auto& iv : intervals_)
    {
      if (!std::isfinite(iv.a) || !std::isfinite(iv.b))
        throw PreconditionError("domain: interval endpoints must be finite");
      if (!(iv.a < iv.b))
        throw PreconditionError("domain: interval requires a < b, got [" +
                                detail::format_double(iv.a) + ", " +
                                detail::format_double(iv.b) + "]");
    }
    std::sort(intervals_.begin(), intervals_.end(),
              [](const Interval& l, const Interval& r) { return l.a < r.a; });
    for (std::size_t i = 1; i < intervals_.size(); ++i)
      if (!(intervals_[i - 1].b < intervals_[i].a))
        throw PreconditionError("domain: intervals must be disjoint with positive gaps");
  }

  static Domain interval(double a, double b) { return Domain({Interval{a, b}}); }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool connected() const { return intervals_.size() == 1; }

  double measure() const
  {
    double m = 0.0;
    for (const auto& iv : intervals_)
      m += iv.length();
    return m;
  }

  bool contains(double x) const
  {
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [x](const Interval& iv) { return iv.contains(x); });
  }

  /// Index of the interval containing x, or -1.
  int locate(double x) const
  {
    for (std::size_t i = 0; i < intervals_.size(); ++i)
      if (intervals_[i].contains(x))
        return static_cast<int>(i);
    return -1;
  }

  /// Connected components of the complement; the outer two are unbounded.
  std::vector<Interval> complement() const
  {
    std::vector<Interval> out;
    out.push_back({-infinity, intervals_.front().a});
    for (std::size_t i = 1; i < intervals_.size(); ++i)
      out.push_back({intervals_[i - 1].b, intervals_[i].a});
    out.push_back({intervals_.back().b, infinity});
    return out;
  }

  /// True when `inner` is a proper subset of this domain, every interval of
  /// `inner` sitting inside an interval of this domain.
  bool properly_contains(const Domain& inner, double slack = 1e-12) const
  {
    for (const auto& iv : inner.intervals())
    {
      const bool inside = std::any_of(intervals_.begin(), intervals_.end(), [&](const Interval& o) {
        return o.a <= iv.a + slack && iv.b - slack <= o.b;
      });
      if (!inside)
        return false;
    }
    return inner.measure() < measure() - slack;
  }

  std::uint64_t hash() const
  {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& iv : intervals_)
    {
      h = detail::fnv1a(&iv.a, sizeof(double), h);
      h = detail::fnv1a(&iv.b, sizeof(double), h);
    }
    return h;
  }

  /// Bracket notation, e.g. [[-1,1],[2,3]].
  std::string describe() const
  {
    std::string s = "[";
    for (std::size_t i = 0; i < intervals_.size(); ++i)
    {
      if (i)
        s += ",";
      s += "[" + detail::format_double(intervals_[i].a) + "," +
           detail::format_double(intervals_[i].b) + "]";
    }
    return s + "]";
  }

  bool operator==(const Domain& o) const
  {
    if (intervals_.size() != o.intervals_.size())
      return false;
    for (std::size_t i = 0; i < intervals_.size(); ++i)
      if (intervals_[i].a != o.intervals_[i].a || intervals_[i].b != o.intervals_[i].b)
        return false;
    return true;
  }

private:
  std::vector<Interval> intervals_;
};

enum class KernelVariant
{
  fractional,
  perturbed_fractional
};

inline const char* to_string(KernelVariant v)
{
  return v == KernelVariant::fractional ? "fractional" : "perturbed";
}

/*
 * Symmetric singular kernel K(z) = lambda * m(|z|) * |z|^-(1+2s) on the line.
 *
 * The fractional variant has m = 1. The perturbed variant uses the bounded
 * multiplier m(r) = 1 + mu * exp(-r / ell), which takes values in [1, 1+mu],
 * so the lower bound K(z) >= lambda |z|^-(1+2s) holds by construction.
 */
class Kernel
{
public:
  static Kernel fractional(double s, double lambda = 1.0, bool allow_high_order = false)
  {
    return Kernel(s, lambda, KernelVariant::fractional, 0.0, 1.0, allow_high_order);
  }

  static Kernel perturbed(double s, double lambda, double mu, double ell)
  {
    return Kernel(s, lambda, KernelVariant::perturbed_fractional, mu, ell, false);
  }

  double order() const { return s_; }
  double scale() const { return lambda_; }
  KernelVariant variant() const { return variant_; }
  double mu() const { return mu_; }
  double ell() const { return ell_; }
  bool high_order_override() const { return allow_high_order_; }

  /// m(r) for r > 0.
  double multiplier(double r) const
  {
    if (variant_ == KernelVariant::fractional)
      return 1.0;
    return 1.0 + mu_ * std::exp(-r / ell_);
  }

  double operator()(double z) const
  {
    if (z == 0.0)
      throw SingularityError("kernel: evaluated at its singularity z = 0");
    const double r = std::abs(z);
    return lambda_ * multiplier(r) * std::pow(r, -(1.0 + 2.0 * s_));
  }

  /// G(d) = integral of K over (d, inf), d > 0.
  double tail(double d) const { return regular_tail(d) * std::pow(d, -2.0 * s_); }

  /// d^{2s} G(d); bounded as d -> 0.
  double regular_tail(double d) const
  {
    const double two_s = 2.0 * s_;
    double r = lambda_ / two_s;
    if (variant_ == KernelVariant::perturbed_fractional && mu_ != 0.0)
    {
      const double x = d / ell_;
      r += lambda_ * mu_ / two_s *
           (std::exp(-x) - std::pow(x, two_s) * boost::math::tgamma(1.0 - two_s, x));
    }
    return r;
  }

  std::uint64_t hash() const
  {
    const double fields[5] = {s_, lambda_, static_cast<double>(variant_), mu_, ell_};
    return detail::fnv1a(fields, sizeof fields);
  }

private:
  Kernel(double s, double lambda, KernelVariant variant, double mu, double ell, bool allow_high_order)
  : s_(s), lambda_(lambda), variant_(variant), mu_(mu), ell_(ell), allow_high_order_(allow_high_order)
  {
    if (!(s > 0.0 && s < 1.0))
      throw PreconditionError("kernel: order s must lie in (0,1)");
    if (s >= 0.5 && !allow_high_order)
      throw PreconditionError("kernel: order s >= 1/2 violates n > 2s for n = 1 "
                              "(set kernel.allow_high_order to override)");
    if (s >= 0.5 && variant == KernelVariant::perturbed_fractional)
      throw PreconditionError("kernel: perturbed variant requires s < 1/2");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw PreconditionError("kernel: scale lambda must be positive");
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw PreconditionError("kernel: multiplier amplitude mu must be nonnegative");
    if (!(ell > 0.0) || !std::isfinite(ell))
      throw PreconditionError("kernel: multiplier length ell must be positive");
  }

  double s_;
  double lambda_;
  KernelVariant variant_;
  double mu_;
  double ell_;
  bool allow_high_order_;
};

inline double eval_kernel(const Kernel& k, double z) { return k(z); }

/*
 * kappa(x) = integral of K(x - y) over the complement of the domain.
 * Each complement component (c, d) contributes G(near) - G(far), with
 * G(inf) = 0 for the unbounded rays.
 */
inline double exterior_tail(const Kernel& k, const Domain& d, double x)
{
  const int owner = d.locate(x);
  if (owner < 0)
    throw DomainError("exterior_tail: point " + detail::format_double(x) + " lies outside the domain");

  const auto& iv = d.intervals()[owner];
  const double dist = std::min(x - iv.a, iv.b - x);
  if (dist <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
    detail::warn("exterior_tail: point " + detail::format_double(x) +
                 " is within machine epsilon of the boundary");

  double kappa = 0.0;
  for (const auto& c : d.complement())
  {
    if (c.b <= x)
    {
      kappa += k.tail(x - c.b);
      if (std::isfinite(c.a))
        kappa -= k.tail(x - c.a);
    }
    else
    {
      kappa += k.tail(c.a - x);
      if (std::isfinite(c.b))
        kappa -= k.tail(c.b - x);
    }
  }
  return kappa;
}

/*
 * Interior node layout of a piecewise-linear nodal basis. Nodes sit strictly
 * inside their interval; interval endpoints carry no degree of freedom.
 */
class Mesh
{
public:
  struct Element
  {
    double left;
    double right;
    int left_dof;  ///< -1 on the domain boundary
    int right_dof; ///< -1 on the domain boundary
    int interval;

    double width() const { return right - left; }
  };

  Mesh(Domain domain, std::vector<std::vector<double>> interior_nodes)
  : domain_(std::move(domain))
  {
    const auto& ivs = domain_.intervals();
    if (interior_nodes.size() != ivs.size())
      throw PreconditionError("mesh: one node list per interval is required");

    for (std::size_t k = 0; k < ivs.size(); ++k)
    {
      const auto& nodes = interior_nodes[k];
      if (nodes.empty())
        throw PreconditionError("mesh: every interval needs at least one interior node");
      double prev = ivs[k].a;
      int prev_dof = -1;
      for (double x : nodes)
      {
        if (!ivs[k].contains(x) || !(x > prev))
          throw PreconditionError("mesh: nodes must be strictly increasing and interior");
        const int dof = static_cast<int>(coords_.size());
        coords_.push_back(x);
        elements_.push_back({prev, x, prev_dof, dof, static_cast<int>(k)});
        prev = x;
        prev_dof = dof;
      }
      elements_.push_back({prev, ivs[k].b, prev_dof, -1, static_cast<int>(k)});
    }
    for (const auto& e : elements_)
      h_ = std::max(h_, e.width());
  }

  /// Uniform mesh with `elements` cells shared among the intervals in
  /// proportion to their length (at least two per interval).
  static Mesh uniform(const Domain& domain, int elements)
  {
    if (elements < 2)
      throw PreconditionError("mesh: at least two elements are required");
    const double total = domain.measure();
    std::vector<std::vector<double>> nodes;
    for (const auto& iv : domain.intervals())
    {
      const int n = std::max(2, static_cast<int>(std::lround(elements * iv.length() / total)));
      std::vector<double> xs;
      for (int j = 1; j < n; ++j)
        xs.push_back(iv.a + iv.length() * j / n);
      nodes.push_back(std::move(xs));
    }
    return Mesh(domain, std::move(nodes));
  }

  const Domain& domain() const { return domain_; }
  std::size_t dofs() const { return coords_.size(); }
  const std::vector<double>& coordinates() const { return coords_; }
  const std::vector<Element>& elements() const { return elements_; }
  std::size_t resolution() const { return elements_.size(); }
  double max_width() const { return h_; }

private:
  Domain domain_;
  std::vector<double> coords_;
  std::vector<Element> elements_;
  double h_ = 0.0;
};

} // namespace fucik

#endif
