#include <cmath>

#include <gtest/gtest.h>

#include "fucik/fucik_continuation.hpp"

using namespace fucik;

namespace {

const GalerkinPair& pair128()
{
  static const auto gp = assemble(Mesh::uniform(Domain::interval(-1.0, 1.0), 128), Kernel::fractional(0.25));
  return gp;
}

const CurveSample& default_curve()
{
  static const auto cs = trace_curve(pair128(), 5.0, 0.1);
  return cs;
}

FucikPoint synthetic(double p, double beta, const SpherePoint& u)
{
  return FucikPoint{.alpha = p + beta, .beta = beta, .p = p, .t = beta, .u = u};
}

} // namespace

TEST(SemismoothNewton, ZeroShiftFromSecondPairConvergesQuickly)
{
  const auto& gp = pair128();
  const auto pairs = lowest_eigenpairs(gp, 2, 1e-10, MassKind::lumped);
  const auto pt = semismooth_newton(gp, 0.0, SpherePoint::normalize(pairs[1].vector, gp.lumped), pairs[1].value);
  EXPECT_LE(pt.iterations, 3);
  EXPECT_NEAR(pt.t, pairs[1].value, 1e-8 * pairs[1].value);
}

TEST(SemismoothNewton, TestingAgainstPositivePart)
{
  const auto& gp = pair128();
  const auto& q = default_curve().branch[20];
  const Vector& u = q.u.coefficients();
  const Vector a = positive_part(u), b = negative_part(u);
  const double lhs = energy(gp, a) + 2.0 * cross_term(gp, a, b);
  const double rhs = q.alpha * lumped_inner(gp.lumped, a, a);
  EXPECT_NEAR(lhs, rhs, 1e-9 * rhs);
  // and against the negative part
  const double lhs2 = energy(gp, b) + 2.0 * cross_term(gp, a, b);
  EXPECT_NEAR(lhs2, q.beta * lumped_inner(gp.lumped, b, b), 1e-9 * lhs2);
}

TEST(SemismoothNewton, QuadraticTail)
{
  const auto& gp = pair128();
  const auto& q = default_curve().branch[10];
  const auto pt = semismooth_newton(gp, q.p + 0.05, q.u, q.t - 0.03);
  const auto& h = pt.residual_history;
  ASSERT_GE(h.size(), 3u);
  // last informative step: r_{k+1} <= C r_k^2
  std::size_t k = h.size() - 2;
  while (k > 0 && h[k] < 1e-12)
    --k;
  EXPECT_LE(h[k + 1], 10.0 * h[k] * h[k] + 1e-12);
}

TEST(SemismoothNewton, Preconditions)
{
  const auto& gp = pair128();
  const auto one = SpherePoint::normalize(Vector::Ones(gp.size()), gp.lumped);
  EXPECT_THROW(semismooth_newton(gp, 0.0, one, 10.0), PreconditionError);
}

TEST(TraceCurve, DefaultCurvePassesAllChecks)
{
  const auto& cs = default_curve();
  ASSERT_FALSE(cs.truncated) << cs.diagnostic;
  EXPECT_EQ(cs.branch.size(), 51u);
  const auto rep = validate_curve(cs);
  for (const auto& c : rep.checks)
    EXPECT_TRUE(c.passed) << c.name << ": " << c.witness;
  EXPECT_TRUE(rep.passed());
}

TEST(TraceCurve, ResidualsAndMultiplierIdentity)
{
  const auto& gp = pair128();
  for (const auto& q : default_curve().branch)
  {
    EXPECT_LT(fucik_residual(gp, q.u.coefficients(), q.alpha, q.beta), 1e-8);
    EXPECT_NEAR(q.t, jp(gp, q.p, q.u), 1e-8);
    EXPECT_LE(q.beta, q.alpha);
  }
}

TEST(TraceCurve, MirrorSatisfiesSwappedSystem)
{
  const auto& gp = pair128();
  const auto& cs = default_curve();
  ASSERT_EQ(cs.mirror.size(), cs.branch.size());
  for (std::size_t i = 0; i < cs.mirror.size(); ++i)
  {
    const auto& m = cs.mirror[i];
    EXPECT_EQ(m.alpha, cs.branch[i].beta);
    EXPECT_EQ(m.beta, cs.branch[i].alpha);
    EXPECT_LT(fucik_residual(gp, m.u.coefficients(), m.alpha, m.beta), 1e-8);
  }
}

TEST(TraceCurve, ApproachesLambda1)
{
  const auto& cs = default_curve();
  const auto& b = cs.branch;
  const double end = b.back().beta - cs.lambda1;
  const double mid = b[b.size() / 2].beta - cs.lambda1;
  EXPECT_GT(end, 0.0);
  EXPECT_LT(end, mid);
}

TEST(TraceCurve, SingleSignChangeAtZeroShift)
{
  EXPECT_EQ(sign_changes(default_curve().branch.front().u.coefficients()), 1);
}

TEST(TraceCurve, Preconditions)
{
  EXPECT_THROW(trace_curve(pair128(), 0.0, 0.1), PreconditionError);
  EXPECT_THROW(trace_curve(pair128(), 1.0, 2.0), PreconditionError);
}

TEST(ValidateCurve, ConstantCurveFailsMonotonicity)
{
  const auto& base = default_curve();
  CurveSample cs;
  cs.lambda1 = base.lambda1;
  for (int i = 0; i < 4; ++i)
    cs.branch.push_back(synthetic(0.5 * i, 13.0, base.branch[0].u));
  const auto rep = validate_curve(cs);
  EXPECT_FALSE(rep["monotone"].passed);
  EXPECT_TRUE(rep["above_lambda1"].passed);
}

TEST(ValidateCurve, SampleBelowLambda1FailsLowerBound)
{
  const auto& base = default_curve();
  CurveSample cs;
  cs.lambda1 = base.lambda1;
  for (int i = 0; i < 4; ++i)
    cs.branch.push_back(synthetic(0.5 * i, base.lambda1 + 1.0 - 0.4 * i, base.branch[0].u));
  const auto rep = validate_curve(cs);
  EXPECT_FALSE(rep["above_lambda1"].passed);
  EXPECT_FALSE(rep.passed());
}

TEST(ValidateCurve, SteepCurveFailsLipschitz)
{
  const auto& base = default_curve();
  CurveSample cs;
  cs.lambda1 = base.lambda1;
  for (int i = 0; i < 4; ++i)
    cs.branch.push_back(synthetic(0.1 * i, 20.0 - 1.0 * i, base.branch[0].u));
  EXPECT_FALSE(validate_curve(cs)["lipschitz"].passed);
  EXPECT_THROW(validate_curve(cs)["nonexistent"], PreconditionError);
}

TEST(TrivialLines, ResidualIndependentOfOtherSlope)
{
  const auto rep = trivial_lines_check(pair128(), {0.0, 9.0, 1e3});
  ASSERT_EQ(rep.lines.size(), 6u);
  for (const auto& l : rep.lines)
  {
    EXPECT_TRUE(l.passed) << l.alpha << "," << l.beta;
    EXPECT_LE(l.residual, l.bound);
  }
  EXPECT_NEAR(rep.lines[0].residual, rep.lines[2].residual, 1e-12);
}
