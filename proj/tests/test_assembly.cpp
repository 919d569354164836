#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fucik/assembly.hpp"
#include "oracles/adaptive.hpp"
#include "oracles/closed_form.hpp"

using namespace fucik;

namespace {

Vector random_vector(Eigen::Index n, std::mt19937_64& rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (auto& x : v)
    x = g(rng);
  return v;
}

double max_rel_diff(const Matrix& a, const Matrix& b)
{
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

} // namespace

TEST(Assembly, QuadratureMatchesClosedFormSingleInterval)
{
  for (double s : {0.1, 0.25, 0.4})
  {
    const auto mesh = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
    const auto gp = assemble(mesh, Kernel::fractional(s));
    const auto ref = oracle::closed_form_stiffness(mesh, s, 1.0);
    EXPECT_LT(max_rel_diff(gp.stiffness, ref), 1e-10) << "s=" << s;
  }
}

TEST(Assembly, MultiIntervalMatchesClosedForm)
{
  const auto mesh = Mesh::uniform(Domain({{-1.0, 0.0}, {0.5, 1.0}}), 48);
  const auto gp = assemble(mesh, Kernel::fractional(0.25, 2.0));
  EXPECT_LT(max_rel_diff(gp.stiffness, oracle::closed_form_stiffness(mesh, 0.25, 2.0)), 1e-10);
}

TEST(Assembly, HatEnergyMatchesAdaptiveQuadrature)
{
  const auto mesh = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  const auto gp = assemble(mesh, Kernel::fractional(0.25));
  const Eigen::Index center = gp.size() / 2;
  EXPECT_NEAR(mesh.coordinates()[static_cast<std::size_t>(center)], 0.0, 1e-15);
  const double ref = oracle::hat_energy(0.25, 2.0 / 64);
  EXPECT_NEAR(gp.stiffness(center, center), ref, 1e-4 * ref);
}

TEST(Assembly, SymmetricAndDefinite)
{
  for (double s : {0.1, 0.25, 0.4})
  {
    const auto gp = assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), 64), Kernel::fractional(s));
    EXPECT_EQ((gp.stiffness - gp.stiffness.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gp.stiffness, Eigen::EigenvaluesOnly);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << "s=" << s;
  }
}

TEST(Assembly, MassAndLumpedMass)
{
  const auto gp = assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), 32), Kernel::fractional(0.25));
  const double h = 2.0 / 32;
  EXPECT_NEAR(gp.mass(3, 3), 2.0 * h / 3.0, 1e-15);
  EXPECT_NEAR(gp.mass(3, 4), h / 6.0, 1e-15);
  EXPECT_NEAR(gp.lumped.sum(), gp.mass.sum(), 1e-13);
  EXPECT_NEAR(gp.lumped[5], h, 1e-15);
}

TEST(Assembly, PerturbedDominatesFractional)
{
  const auto mesh = Mesh::uniform(Domain::interval(-1.0, 1.0), 32);
  const auto a = assemble(mesh, Kernel::fractional(0.25));
  const auto b = assemble(mesh, Kernel::perturbed(0.25, 1.0, 0.5, 0.5));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k)
  {
    const Vector u = random_vector(a.size(), rng);
    EXPECT_GE(energy(b, u), energy(a, u));
    EXPECT_LE(energy(b, u), 1.5 * energy(a, u));
  }
}

TEST(Energy, BasicProperties)
{
  const auto gp = assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), 64), Kernel::fractional(0.25));
  EXPECT_EQ(energy(gp, Vector::Zero(gp.size())), 0.0);
  EXPECT_GT(energy(gp, Vector::Unit(gp.size(), 0)), 0.0);
  std::mt19937_64 rng(11);
  const Vector u = random_vector(gp.size(), rng);
  EXPECT_DOUBLE_EQ(energy(gp, u), energy(gp, -u));
  EXPECT_THROW(energy(gp, Vector::Zero(3)), PreconditionError);
}

TEST(Energy, DecompositionIdentity)
{
  const auto gp = assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), 64), Kernel::fractional(0.25));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k)
  {
    const Vector u = random_vector(gp.size(), rng);
    const Vector a = positive_part(u), b = negative_part(u);
    const double c = cross_term(gp, a, b);
    EXPECT_GE(c, 0.0);
    EXPECT_NEAR(c, cross_term(gp, b, a), 1e-14 * c);
    EXPECT_NEAR(energy(gp, u), energy(gp, a) + energy(gp, b) + 4.0 * c, 1e-10 * energy(gp, u));
  }
}

TEST(CrossTerm, ZeroAndPreconditions)
{
  const auto gp = assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), 32), Kernel::fractional(0.25));
  const Vector z = Vector::Zero(gp.size());
  const Vector one = Vector::Ones(gp.size());
  EXPECT_EQ(cross_term(gp, z, one), 0.0);
  EXPECT_THROW(cross_term(gp, one, one), PreconditionError);
  EXPECT_THROW(cross_term(gp, -one, z), PreconditionError);
}
