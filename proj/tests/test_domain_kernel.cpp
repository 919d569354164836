#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fucik/domain_kernel.hpp"
#include "oracles/adaptive.hpp"

using namespace fucik;

TEST(Kernel, FractionalValues)
{
  const auto k = Kernel::fractional(0.25);
  EXPECT_DOUBLE_EQ(eval_kernel(k, 1.0), 1.0);
  EXPECT_NEAR(eval_kernel(k, 2.0), std::pow(2.0, -1.5), 1e-15);
  EXPECT_NEAR(eval_kernel(Kernel::fractional(0.25, 3.0), 2.0), 3.0 * std::pow(2.0, -1.5), 1e-15);
}

TEST(Kernel, EvenInZ)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> z(1e-3, 10.0);
  for (const auto& k : {Kernel::fractional(0.25), Kernel::perturbed(0.3, 2.0, 0.5, 0.4)})
    for (int i = 0; i < 100; ++i)
    {
      const double v = z(rng);
      EXPECT_EQ(eval_kernel(k, v), eval_kernel(k, -v));
    }
}

TEST(Kernel, PerturbedStaysBetweenBounds)
{
  const auto k = Kernel::perturbed(0.25, 1.0, 0.5, 0.3);
  const auto base = Kernel::fractional(0.25);
  for (double z : {1e-3, 0.1, 0.3, 1.0, 5.0})
  {
    EXPECT_GE(k(z), base(z));
    EXPECT_LE(k(z), 1.5 * base(z) * (1.0 + 1e-15));
  }
}

TEST(Kernel, RejectsInvalidParameters)
{
  EXPECT_THROW(Kernel::fractional(0.0), PreconditionError);
  EXPECT_THROW(Kernel::fractional(1.0), PreconditionError);
  EXPECT_THROW(Kernel::fractional(0.7), PreconditionError);
  EXPECT_NO_THROW(Kernel::fractional(0.7, 1.0, true));
  EXPECT_THROW(Kernel::fractional(0.25, -1.0), PreconditionError);
  EXPECT_THROW(Kernel::perturbed(0.25, 1.0, -0.1, 1.0), PreconditionError);
  EXPECT_THROW(Kernel::perturbed(0.25, 1.0, 0.1, 0.0), PreconditionError);
  EXPECT_THROW(eval_kernel(Kernel::fractional(0.25), 0.0), SingularityError);
}

TEST(Kernel, HashDistinguishesParameters)
{
  EXPECT_EQ(Kernel::fractional(0.25).hash(), Kernel::fractional(0.25).hash());
  EXPECT_NE(Kernel::fractional(0.25).hash(), Kernel::fractional(0.3).hash());
  EXPECT_NE(Kernel::fractional(0.25).hash(), Kernel::perturbed(0.25, 1.0, 0.0, 1.0).hash());
}

TEST(Domain, ValidatesIntervals)
{
  EXPECT_THROW(Domain({}), PreconditionError);
  EXPECT_THROW(Domain::interval(1.0, 0.0), PreconditionError);
  EXPECT_THROW(Domain({{-1.0, 0.0}, {0.0, 1.0}}), PreconditionError);
  const Domain d({{0.5, 1.0}, {-1.0, 0.0}});
  EXPECT_EQ(d.intervals().front().a, -1.0);
  EXPECT_FALSE(d.connected());
  EXPECT_DOUBLE_EQ(d.measure(), 1.5);
  EXPECT_EQ(d.describe(), "[[-1,0],[0.5,1]]");
  EXPECT_EQ(d.locate(0.25), -1);
  EXPECT_EQ(d.locate(0.75), 1);
}

TEST(Domain, ProperContainment)
{
  const auto outer = Domain::interval(-1.0, 1.0);
  EXPECT_TRUE(outer.properly_contains(Domain::interval(-0.5, 0.5)));
  EXPECT_FALSE(outer.properly_contains(outer));
  EXPECT_FALSE(outer.properly_contains(Domain::interval(-0.5, 1.5)));
}

TEST(ExteriorTail, CenterOfUnitInterval)
{
  const auto k = Kernel::fractional(0.25);
  const auto d = Domain::interval(-1.0, 1.0);
  EXPECT_NEAR(exterior_tail(k, d, 0.0), 4.0, 1e-12);
  EXPECT_NEAR(exterior_tail(k, d, 0.0), oracle::tail_unit_interval(0.25, 0.0), 1e-10);
}

TEST(ExteriorTail, MatchesAdaptiveQuadratureAndIsEven)
{
  const auto k = Kernel::fractional(0.25);
  const auto d = Domain::interval(-1.0, 1.0);
  for (double x : {0.1, 0.5, 0.9, 0.999})
  {
    const double ref = oracle::tail_unit_interval(0.25, x);
    EXPECT_NEAR(exterior_tail(k, d, x), ref, 1e-10 * ref) << "x=" << x;
    EXPECT_NEAR(exterior_tail(k, d, x), exterior_tail(k, d, -x), 1e-13 * ref);
  }
}

TEST(ExteriorTail, MultiIntervalSumsGaps)
{
  const double s = 0.25;
  const auto k = Kernel::fractional(s);
  const Domain d({{-1.0, 0.0}, {0.5, 1.0}});
  const auto pw = [s](double t) { return std::pow(t, -2.0 * s) / (2.0 * s); };
  for (double x : {-0.5, -0.1, 0.7})
  {
    // (-inf,-1), (0,0.5), (1,inf)
    const double closed = pw(std::abs(x + 1.0)) + std::abs(pw(std::abs(x)) - pw(std::abs(x - 0.5))) + pw(std::abs(1.0 - x));
    const double quad = oracle::integrate([&](double y) { return std::pow(std::abs(x - y), -1.5); }, 0.0, 0.5) +
                        oracle::integrate_to_infinity([&](double y) { return std::pow(y + x, -1.5); }, 1.0) +
                        oracle::integrate_to_infinity([&](double y) { return std::pow(y - x, -1.5); }, 1.0);
    EXPECT_NEAR(exterior_tail(k, d, x), closed, 1e-12 * closed) << "x=" << x;
    EXPECT_NEAR(closed, quad, 1e-9 * closed) << "x=" << x;
  }
  EXPECT_THROW(exterior_tail(k, d, 0.25), DomainError);
}

TEST(Mesh, UniformCoversDomain)
{
  const auto m = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  EXPECT_EQ(m.elements().size(), 64u);
  EXPECT_EQ(m.dofs(), 63u);
  EXPECT_NEAR(m.coordinates().front(), -1.0 + 2.0 / 64, 1e-15);
  const auto two = Mesh::uniform(Domain({{-1.0, 0.0}, {0.5, 1.0}}), 48);
  EXPECT_EQ(two.elements().size(), 48u);
  EXPECT_EQ(two.dofs(), 46u);
}
