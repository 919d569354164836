#ifndef FUCIK_ASSEMBLY_HPP
#define FUCIK_ASSEMBLY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fucik/domain_kernel.hpp"
#include "fucik/errors.hpp"
#include "fucik/quadrature.hpp"

namespace fucik {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/*
 * Discrete X0 inner product and L2 pairings on a nodal P1 basis.
 *
 *   stiffness(i,j) = int_Q (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) K(x-y) dx dy
 *   mass(i,j)      = int_Omega phi_i phi_j dx
 *   lumped(i)      = sum_j mass(i,j)
 */
struct GalerkinPair
{
  Matrix stiffness;
  Matrix mass;
  Vector lumped;
  Mesh mesh;
  Kernel kernel;

  Eigen::Index size() const { return stiffness.rows(); }
};

namespace detail {

/// Basis functions active on an element pair, with their end values on each element.
struct PairBasis
{
  std::array<int, 4> dof{};
  std::array<std::array<double, 2>, 4> on_x{}; // values at (left, right) of the x-element
  std::array<std::array<double, 2>, 4> on_y{}; // values at (left, right) of the y-element
  int count = 0;

  int add(int d)
  {
    for (int i = 0; i < count; ++i)
      if (dof[i] == d)
        return i;
    dof[count] = d;
    on_x[count] = {0.0, 0.0};
    on_y[count] = {0.0, 0.0};
    return count++;
  }
};

inline PairBasis pair_basis(const Mesh::Element& ex, const Mesh::Element& ey)
{
  PairBasis b;
  if (ex.left_dof >= 0)
    b.on_x[b.add(ex.left_dof)][0] = 1.0;
  if (ex.right_dof >= 0)
    b.on_x[b.add(ex.right_dof)][1] = 1.0;
  if (ey.left_dof >= 0)
    b.on_y[b.add(ey.left_dof)][0] = 1.0;
  if (ey.right_dof >= 0)
    b.on_y[b.add(ey.right_dof)][1] = 1.0;
  return b;
}

using Local = std::array<std::array<double, 4>, 4>;

/// int_0^1 t^{2-2s} m(c t) dt
inline double radial_moment(const Kernel& k, double c)
{
  const double s = k.order();
  if (k.variant() == KernelVariant::fractional)
    return 1.0 / (3.0 - 2.0 * s);
  const auto& r = quadrature::gauss_jacobi(16, 0.0, 2.0 - 2.0 * s);
  double acc = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q)
    acc += r.weights[q] * k.multiplier(c * r.nodes[q]);
  return acc;
}

/// int_e int_e (x-y)^2 K(x-y) dx dy for an element of width h.
inline double self_moment(const Kernel& k, double h)
{
  const double s = k.order();
  const double pre = 2.0 * k.scale() * std::pow(h, 3.0 - 2.0 * s);
  if (k.variant() == KernelVariant::fractional)
    return pre / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
  const auto& r = quadrature::gauss_jacobi(16, 1.0, 1.0 - 2.0 * s);
  double acc = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q)
    acc += r.weights[q] * k.multiplier(h * r.nodes[q]);
  return pre * acc;
}

/*
 * Moments int a^2 K(a+b), int ab K(a+b), int b^2 K(a+b) over [0,h1]x[0,h2].
 * The rectangle is split along its diagonal and each triangle is mapped with
 * a Duffy transform, which isolates the corner singularity in a radial factor
 * t^{2-2s} that is integrated exactly (or by Gauss-Jacobi for the multiplier).
 */
inline std::array<double, 3> touching_moments(const Kernel& k, double h1, double h2)
{
  const double s = k.order();
  const double e = -(1.0 + 2.0 * s);
  const auto& gl = quadrature::gauss_legendre(20);
  std::array<double, 3> m{0.0, 0.0, 0.0};
  for (std::size_t q = 0; q < gl.size(); ++q)
  {
    const double w = gl.nodes[q];
    const double wq = gl.weights[q];

    const double c1 = h1 + h2 * w; // a = h1 t, b = h2 t w
    const double f1 = wq * std::pow(c1, e) * radial_moment(k, c1);
    m[0] += f1 * h1 * h1;
    m[1] += f1 * h1 * h2 * w;
    m[2] += f1 * h2 * h2 * w * w;

    const double c2 = h1 * w + h2; // a = h1 t w, b = h2 t
    const double f2 = wq * std::pow(c2, e) * radial_moment(k, c2);
    m[0] += f2 * h1 * h1 * w * w;
    m[1] += f2 * h1 * h2 * w;
    m[2] += f2 * h2 * h2;
  }
  const double pre = k.scale() * h1 * h2;
  for (auto& v : m)
    v *= pre;
  return m;
}

inline int separated_order(double ratio)
{
  if (ratio >= 4.0)
    return 6;
  if (ratio >= 2.0)
    return 8;
  return 12;
}

/*
 * Tensor Gauss rule over a sub-rectangle [x0,x1]x[y0,y1] of a separated
 * element pair, bisecting the wider side while the gap is smaller than the
 * cell size.
 */
inline void separated_block(const Kernel& k, const PairBasis& b, const Mesh::Element& ex,
                            const Mesh::Element& ey, double x0, double x1, double y0, double y1,
                            Local& out, int depth = 0)
{
  const double wx = x1 - x0;
  const double wy = y1 - y0;
  const double gap = std::max(y0 - x1, x0 - y1);
  const double ratio = gap / std::max(wx, wy);
  if (ratio < 1.0 && depth < 30)
  {
    if (wx >= wy)
    {
      const double xm = 0.5 * (x0 + x1);
      separated_block(k, b, ex, ey, x0, xm, y0, y1, out, depth + 1);
      separated_block(k, b, ex, ey, xm, x1, y0, y1, out, depth + 1);
    }
    else
    {
      const double ym = 0.5 * (y0 + y1);
      separated_block(k, b, ex, ey, x0, x1, y0, ym, out, depth + 1);
      separated_block(k, b, ex, ey, x0, x1, ym, y1, out, depth + 1);
    }
    return;
  }

  const auto& r = quadrature::gauss_legendre(separated_order(ratio));
  const double hx = ex.width();
  const double hy = ey.width();
  std::array<double, 4> diff{};
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    const double x = x0 + wx * r.nodes[i];
    const double xi = (x - ex.left) / hx;
    for (std::size_t j = 0; j < r.size(); ++j)
    {
      const double y = y0 + wy * r.nodes[j];
      const double eta = (y - ey.left) / hy;
      const double w = r.weights[i] * r.weights[j] * wx * wy * k(x - y);
      for (int a = 0; a < b.count; ++a)
      {
        const double vx = b.on_x[a][0] * (1.0 - xi) + b.on_x[a][1] * xi;
        const double vy = b.on_y[a][0] * (1.0 - eta) + b.on_y[a][1] * eta;
        diff[a] = vx - vy;
      }
      for (int a = 0; a < b.count; ++a)
        for (int c = a; c < b.count; ++c)
          out[a][c] += w * diff[a] * diff[c];
    }
  }
}

/// Exterior-tail density with the singular terms of the owning interval optionally removed.
inline double kappa_without(const Kernel& k, const Domain& d, double x, double skip_left,
                            double skip_right)
{
  double kappa = 0.0;
  for (const auto& c : d.complement())
  {
    if (c.b <= x)
    {
      if (c.b != skip_left)
        kappa += k.tail(x - c.b);
      if (std::isfinite(c.a))
        kappa -= k.tail(x - c.a);
    }
    else
    {
      if (c.a != skip_right)
        kappa += k.tail(c.a - x);
      if (std::isfinite(c.b))
        kappa -= k.tail(c.b - x);
    }
  }
  return kappa;
}

} // namespace detail

/// Assembles stiffness, consistent mass and lumped mass on `mesh`.
inline GalerkinPair assemble(const Mesh& mesh, const Kernel& kernel)
{
  const auto n = static_cast<Eigen::Index>(mesh.dofs());
  const auto& elems = mesh.elements();
  const auto& dom = mesh.domain();
  Matrix A = Matrix::Zero(n, n);
  Matrix M = Matrix::Zero(n, n);

  auto scatter = [&](const detail::PairBasis& b, const detail::Local& loc, double factor,
                     std::size_t e, std::size_t f) {
    for (int a = 0; a < b.count; ++a)
      for (int c = a; c < b.count; ++c)
      {
        const double v = factor * loc[a][c];
        if (!std::isfinite(v))
          throw AssemblyError("assemble: non-finite quadrature value for element pair (" +
                              std::to_string(e) + ", " + std::to_string(f) + ")");
        const int i = std::min(b.dof[a], b.dof[c]);
        const int j = std::max(b.dof[a], b.dof[c]);
        A(i, j) += v;
      }
  };

  for (std::size_t e = 0; e < elems.size(); ++e)
  {
    const auto& ex = elems[e];

    // identical pair: psi(x) - psi(y) = slope * (x - y)
    {
      const auto b = detail::pair_basis(ex, ex);
      const double h = ex.width();
      const double mom = detail::self_moment(kernel, h);
      std::array<double, 4> slope{};
      for (int a = 0; a < b.count; ++a)
        slope[a] = (b.on_x[a][1] - b.on_x[a][0]) / h;
      detail::Local loc{};
      for (int a = 0; a < b.count; ++a)
        for (int c = a; c < b.count; ++c)
          loc[a][c] = slope[a] * slope[c] * mom;
      scatter(b, loc, 1.0, e, e);
    }

    for (std::size_t f = e + 1; f < elems.size(); ++f)
    {
      const auto& ey = elems[f];
      const auto b = detail::pair_basis(ex, ey);
      if (b.count == 0)
        continue;
      detail::Local loc{};
      const bool touching = ex.interval == ey.interval && f == e + 1;
      if (touching)
      {
        // x = x_k - a on ex, y = x_k + b on ey, psi(x) - psi(y) = -(sx a + sy b)
        const double h1 = ex.width();
        const double h2 = ey.width();
        const auto mom = detail::touching_moments(kernel, h1, h2);
        std::array<double, 4> sx{}, sy{};
        for (int a = 0; a < b.count; ++a)
        {
          const double at_shared = b.on_x[a][1];
          sx[a] = (at_shared - b.on_x[a][0]) / h1;
          sy[a] = (b.on_y[a][1] - at_shared) / h2;
        }
        for (int a = 0; a < b.count; ++a)
          for (int c = a; c < b.count; ++c)
            loc[a][c] = sx[a] * sx[c] * mom[0] + (sx[a] * sy[c] + sy[a] * sx[c]) * mom[1] +
                        sy[a] * sy[c] * mom[2];
      }
      else
      {
        detail::separated_block(kernel, b, ex, ey, ex.left, ex.right, ey.left, ey.right, loc);
      }
      scatter(b, loc, 2.0, e, f);
    }

    // exterior tail: 2 int_e psi_a psi_b kappa
    {
      const auto b = detail::pair_basis(ex, ex);
      const auto& iv = dom.intervals()[ex.interval];
      const double h = ex.width();
      const double s = kernel.order();
      const bool at_left = ex.left_dof < 0;
      const bool at_right = ex.right_dof < 0;
      detail::Local loc{};

      if (at_left || at_right)
      {
        // only the interior hat lives here and equals dist/h
        const auto& gj = quadrature::gauss_jacobi(16, 0.0, 2.0 - 2.0 * s);
        double acc = 0.0;
        for (std::size_t q = 0; q < gj.size(); ++q)
          acc += gj.weights[q] * kernel.regular_tail(h * gj.nodes[q]);
        const int a = 0;
        loc[a][a] += 2.0 * std::pow(h, 1.0 - 2.0 * s) * acc;
      }

      const double skip_l = at_left ? iv.a : std::numeric_limits<double>::quiet_NaN();
      const double skip_r = at_right ? iv.b : std::numeric_limits<double>::quiet_NaN();
      const double near = std::min(ex.left - iv.a, iv.b - ex.right);
      const auto& gl = quadrature::gauss_legendre(near < 3.0 * h ? 12 : 6);
      for (std::size_t q = 0; q < gl.size(); ++q)
      {
        const double xi = gl.nodes[q];
        const double x = ex.left + h * xi;
        const double w = 2.0 * gl.weights[q] * h * detail::kappa_without(kernel, dom, x, skip_l, skip_r);
        std::array<double, 4> v{};
        for (int a = 0; a < b.count; ++a)
          v[a] = b.on_x[a][0] * (1.0 - xi) + b.on_x[a][1] * xi;
        for (int a = 0; a < b.count; ++a)
          for (int c = a; c < b.count; ++c)
            loc[a][c] += w * v[a] * v[c];
      }
      scatter(b, loc, 1.0, e, e);
    }

    // consistent mass
    {
      const double h = ex.width();
      if (ex.left_dof >= 0)
        M(ex.left_dof, ex.left_dof) += h / 3.0;
      if (ex.right_dof >= 0)
        M(ex.right_dof, ex.right_dof) += h / 3.0;
      if (ex.left_dof >= 0 && ex.right_dof >= 0)
      {
        M(ex.left_dof, ex.right_dof) += h / 6.0;
        M(ex.right_dof, ex.left_dof) += h / 6.0;
      }
    }
  }

  A.triangularView<Eigen::StrictlyLower>() = A.transpose().triangularView<Eigen::StrictlyLower>();
  Vector lumped = M.rowwise().sum();
  return GalerkinPair{std::move(A), std::move(M), std::move(lumped), mesh, kernel};
}

inline void require_size(const GalerkinPair& gp, const Vector& u, const char* op)
{
  if (u.size() != gp.size())
    throw PreconditionError(std::string(op) + ": vector of size " + std::to_string(u.size()) +
                            " does not match " + std::to_string(gp.size()) + " degrees of freedom");
}

/// Squared X0 norm u^T A u.
inline double energy(const GalerkinPair& gp, const Vector& u)
{
  require_size(gp, u, "energy");
  return u.dot(gp.stiffness * u);
}

inline Vector positive_part(const Vector& u) { return u.cwiseMax(0.0); }

/// u^- = max(-u, 0), so that u = u^+ - u^-.
inline Vector negative_part(const Vector& u) { return (-u).cwiseMax(0.0); }

/*
 * Interaction int_Q a(x) b(y) K(x-y) of two nodally nonnegative functions
 * with disjoint nodal supports, taken from the assembled form:
 * -(a, b)_{X0} / 2. It satisfies
 *   E(a - b) = E(a) + E(b) + 4 cross(a, b).
 */
inline double cross_term(const GalerkinPair& gp, const Vector& a, const Vector& b)
{
  require_size(gp, a, "cross_term");
  require_size(gp, b, "cross_term");
  for (Eigen::Index i = 0; i < a.size(); ++i)
  {
    if (a[i] < 0.0 || b[i] < 0.0)
      throw PreconditionError("cross_term: arguments must be nodally nonnegative");
    if (a[i] * b[i] != 0.0)
      throw PreconditionError("cross_term: supports overlap at node " + std::to_string(i));
  }
  return -0.5 * a.dot(gp.stiffness * b);
}

} // namespace fucik

#endif
