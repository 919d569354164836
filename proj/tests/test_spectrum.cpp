#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fucik/spectrum.hpp"
#include "oracles/reference.hpp"

using namespace fucik;

namespace {

GalerkinPair unit_pair(int n, double s = 0.25)
{
  return assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), n), Kernel::fractional(s));
}

} // namespace

TEST(Spectrum, AscendingNormalizedPairs)
{
  const auto gp = unit_pair(128);
  for (auto kind : {MassKind::consistent, MassKind::lumped})
  {
    const auto pairs = lowest_eigenpairs(gp, 4, 1e-10, kind);
    ASSERT_EQ(pairs.size(), 4u);
    const Matrix M = detail::mass_matrix(gp, kind);
    for (std::size_t k = 0; k < pairs.size(); ++k)
    {
      EXPECT_EQ(pairs[k].index, static_cast<int>(k) + 1);
      EXPECT_NEAR(pairs[k].vector.dot(M * pairs[k].vector), 1.0, 1e-12);
      if (k)
        EXPECT_GT(pairs[k].value, pairs[k - 1].value);
    }
  }
}

TEST(Spectrum, RayleighBound)
{
  const auto gp = unit_pair(64);
  const double l1 = lowest_eigenpairs(gp, 1).front().value;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k)
  {
    Vector u(gp.size());
    for (auto& x : u)
      x = g(rng);
    u /= std::sqrt(u.dot(gp.mass * u));
    EXPECT_GE(energy(gp, u), l1 * (1.0 - 1e-12));
  }
}

TEST(Spectrum, PrincipalVectorPositiveSecondChangesSign)
{
  const auto gp = unit_pair(256);
  const auto pairs = lowest_eigenpairs(gp, 2);
  EXPECT_GT(pairs[0].vector.minCoeff(), 0.0);
  EXPECT_GT(pairs[1].vector.maxCoeff(), 0.0);
  EXPECT_LT(pairs[1].vector.minCoeff(), 0.0);
}

TEST(Spectrum, ConvergesToFrozenReference)
{
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {128, 256, 512})
  {
    const double l = lowest_eigenpairs(unit_pair(n), 1, 1e-9).front().value;
    EXPECT_LT(l, prev) << "N=" << n;
    prev = l;
  }
  EXPECT_NEAR(prev, oracle::lambda1_n512, 1e-9);
  EXPECT_LT(std::abs(prev - oracle::lambda1_richardson) / oracle::lambda1_richardson, 1e-3);
}

TEST(Spectrum, Preconditions)
{
  const auto gp = unit_pair(16);
  EXPECT_THROW(lowest_eigenpairs(gp, 0), PreconditionError);
  EXPECT_THROW(lowest_eigenpairs(gp, 100), PreconditionError);
  EXPECT_THROW(lowest_eigenpairs(gp, 1, 0.0), PreconditionError);
}

TEST(WeightedPrincipal, UnitAndConstantWeights)
{
  const auto gp = unit_pair(64);
  for (auto kind : {MassKind::consistent, MassKind::lumped})
  {
    const double l1 = lowest_eigenpairs(gp, 1, 1e-10, kind).front().value;
    const Vector one = Vector::Ones(gp.size());
    EXPECT_NEAR(weighted_principal(gp, one, kind), l1, 1e-10 * l1);
    EXPECT_NEAR(weighted_principal(gp, 3.0 * one, kind), l1 / 3.0, 1e-10 * l1);
  }
}

TEST(WeightedPrincipal, IndicatorWeightMatchesDirectSolve)
{
  const auto gp = unit_pair(64);
  const auto& x = gp.mesh.coordinates();
  Vector w(gp.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w[i] = x[static_cast<std::size_t>(i)] < 0.0 ? 2.0 : 1.0;
  const double l1 = lowest_eigenpairs(gp, 1, 1e-10, MassKind::lumped).front().value;
  const double lw = weighted_principal(gp, w, MassKind::lumped);
  EXPECT_GT(lw, l1 / 2.0);
  EXPECT_LT(lw, l1);

  // independent route: symmetric reduction with the weighted lumped mass
  const Eigen::ArrayXd d = (gp.lumped.array() * w.array()).rsqrt();
  const Matrix H = d.matrix().asDiagonal() * gp.stiffness * d.matrix().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  EXPECT_NEAR(lw, eig.eigenvalues()[0], 1e-10 * lw);
  EXPECT_THROW(weighted_principal(gp, -w), PreconditionError);
}

TEST(DomainMonotonicity, SubintervalHasLargerEigenvalue)
{
  const auto k = Kernel::fractional(0.25);
  const auto [inner, outer] = domain_monotonicity(k, Domain::interval(-0.5, 0.5), Domain::interval(-1.0, 1.0), 128);
  EXPECT_GT(inner, outer);
  // homogeneity of the pure fractional kernel: lambda1((-r, r)) = r^{-2s} lambda1((-1, 1))
  EXPECT_NEAR(inner / outer, std::pow(0.5, -0.5), 1e-10);
}

TEST(DomainMonotonicity, RequiresStrictContainment)
{
  const auto k = Kernel::fractional(0.25);
  const auto d = Domain::interval(-1.0, 1.0);
  EXPECT_THROW(domain_monotonicity(k, d, d, 32), PreconditionError);
  EXPECT_THROW(domain_monotonicity(k, Domain::interval(0.0, 2.0), d, 32), PreconditionError);
}
