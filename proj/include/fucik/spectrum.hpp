#ifndef FUCIK_SPECTRUM_HPP
#define FUCIK_SPECTRUM_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"

namespace fucik {

/// Which L2 pairing defines the eigenproblem A u = lambda M u.
enum class MassKind
{
  consistent,
  lumped
};

struct EigenPair
{
  double value = 0.0;
  Vector vector;          ///< normalized: u^T M u = 1
  int index = 0;          ///< 1 = principal
  double residual = 0.0;  ///< ||A u - lambda M u|| in the dual (M^{-1}) norm
};

namespace detail {

inline Matrix mass_matrix(const GalerkinPair& gp, MassKind kind)
{
  if (kind == MassKind::consistent)
    return gp.mass;
  return gp.lumped.asDiagonal();
}

/// sqrt(r^T M^{-1} r)
inline double dual_norm(const GalerkinPair& gp, MassKind kind, const Vector& r)
{
  if (kind == MassKind::lumped)
    return std::sqrt((r.array().square() / gp.lumped.array()).sum());
  return std::sqrt(r.dot(gp.mass.llt().solve(r)));
}

} // namespace detail

/*
 * Lowest `count` eigenpairs of A u = lambda M u, ascending. Vectors are
 * M-normalized and sign-normalized so that the entry of largest magnitude is
 * positive. Throws MultiplicityError when the principal eigenvalue is not
 * simple and ConvergenceError when a residual exceeds tol * ||A u||.
 */
inline std::vector<EigenPair> lowest_eigenpairs(const GalerkinPair& gp, int count, double tol = 1e-10,
                                                MassKind kind = MassKind::consistent)
{
  if (count < 1)
    throw PreconditionError("lowest_eigenpairs: count must be at least 1");
  if (!(tol > 0.0))
    throw PreconditionError("lowest_eigenpairs: tol must be positive");
  if (count > gp.size())
    throw PreconditionError("lowest_eigenpairs: count exceeds the number of degrees of freedom");

  const Matrix M = detail::mass_matrix(gp, kind);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(gp.stiffness, M);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("lowest_eigenpairs: generalized eigensolver did not converge");

  const auto& values = solver.eigenvalues();
  if (gp.size() > 1 && values[1] - values[0] < 1e-10 * std::abs(values[0]))
    throw MultiplicityError("lowest_eigenpairs: principal eigenvalue is not simple (gap " +
                            std::to_string(values[1] - values[0]) + ")");

  std::vector<EigenPair> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k)
  {
    Vector u = solver.eigenvectors().col(k);
    Eigen::Index imax;
    u.cwiseAbs().maxCoeff(&imax);
    if (u[imax] < 0.0)
      u = -u;
    u /= std::sqrt(u.dot(M * u));

    EigenPair e;
    e.value = values[k];
    e.index = k + 1;
    const Vector Au = gp.stiffness * u;
    e.residual = detail::dual_norm(gp, kind, Au - e.value * (M * u));
    if (e.residual > tol * detail::dual_norm(gp, kind, Au))
      throw ConvergenceError("lowest_eigenpairs: residual of pair " + std::to_string(k + 1) +
                             " exceeds tolerance");
    e.vector = std::move(u);
    out.push_back(std::move(e));
  }
  return out;
}

/*
 * min v^T A v / v^T M_w v with M_w the mass form weighted by the nodal
 * weight w (linear interpolation of w on each element for the consistent
 * form, boundary values copied from the adjacent node).
 */
inline double weighted_principal(const GalerkinPair& gp, const Vector& w,
                                 MassKind kind = MassKind::lumped)
{
  require_size(gp, w, "weighted_principal");
  if ((w.array() <= 0.0).any())
    throw PreconditionError("weighted_principal: weights must be strictly positive");

  Matrix Mw;
  if (kind == MassKind::lumped)
    Mw = (gp.lumped.array() * w.array()).matrix().asDiagonal();
  else
  {
    Mw = Matrix::Zero(gp.size(), gp.size());
    for (const auto& e : gp.mesh.elements())
    {
      const double wl = e.left_dof >= 0 ? w[e.left_dof] : w[e.right_dof];
      const double wr = e.right_dof >= 0 ? w[e.right_dof] : w[e.left_dof];
      const double h = e.width();
      if (e.left_dof >= 0)
        Mw(e.left_dof, e.left_dof) += h * (3.0 * wl + wr) / 12.0;
      if (e.right_dof >= 0)
        Mw(e.right_dof, e.right_dof) += h * (wl + 3.0 * wr) / 12.0;
      if (e.left_dof >= 0 && e.right_dof >= 0)
      {
        Mw(e.left_dof, e.right_dof) += h * (wl + wr) / 12.0;
        Mw(e.right_dof, e.left_dof) += h * (wl + wr) / 12.0;
      }
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(gp.stiffness, Mw, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("weighted_principal: generalized eigensolver did not converge");
  return solver.eigenvalues()[0];
}

/*
 * Principal eigenvalues (lambda1(inner), lambda1(outer)) for a proper
 * subdomain inner of the connected domain outer. Each domain is meshed
 * uniformly with `elements` cells and carries the exterior condition on its
 * own complement.
 */
inline std::pair<double, double> domain_monotonicity(const Kernel& kernel, const Domain& inner,
                                                     const Domain& outer, int elements,
                                                     MassKind kind = MassKind::consistent)
{
  if (!outer.connected())
    throw PreconditionError("domain_monotonicity: outer domain must be connected");
  if (inner == outer)
    throw PreconditionError("domain_monotonicity: domains are equal, strict containment required");
  if (!outer.properly_contains(inner))
    throw PreconditionError("domain_monotonicity: inner domain is not a proper subset of outer");

  const auto lam = [&](const Domain& d) {
    const auto gp = assemble(Mesh::uniform(d, elements), kernel);
    return lowest_eigenpairs(gp, 1, 1e-9, kind).front().value;
  };
  return {lam(inner), lam(outer)};
}

} // namespace fucik

#endif
