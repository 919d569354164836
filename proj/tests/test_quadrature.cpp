#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "fucik/quadrature.hpp"

using fucik::quadrature::gauss_jacobi;
using fucik::quadrature::gauss_legendre;

TEST(Quadrature, LegendreIntegratesPolynomialsExactly)
{
  const auto& r = gauss_legendre(6);
  for (int deg = 0; deg <= 11; ++deg)
  {
    double acc = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q)
      acc += r.weights[q] * std::pow(r.nodes[q], deg);
    EXPECT_NEAR(acc, 1.0 / (deg + 1), 1e-14) << "degree " << deg;
  }
}

TEST(Quadrature, JacobiMatchesBetaFunction)
{
  // int_0^1 t^k (1-t)^alpha t^beta dt = B(k + beta + 1, alpha + 1)
  for (double alpha : {0.0, 1.0})
    for (double beta : {-0.5, 0.5, 1.5, 1.8})
    {
      const auto& r = gauss_jacobi(10, alpha, beta);
      for (int k = 0; k < 20; ++k)
      {
        double acc = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q)
          acc += r.weights[q] * std::pow(r.nodes[q], k);
        const double exact = boost::math::beta(k + beta + 1.0, alpha + 1.0);
        EXPECT_NEAR(acc / exact, 1.0, 1e-12) << alpha << " " << beta << " " << k;
      }
    }
}

TEST(Quadrature, NodesInsideUnitInterval)
{
  const auto& r = gauss_jacobi(16, 1.0, 0.5);
  for (double t : r.nodes)
  {
    EXPECT_GT(t, 0.0);
    EXPECT_LT(t, 1.0);
  }
}

TEST(Quadrature, RejectsInvalidParameters)
{
  EXPECT_THROW(gauss_jacobi(0, 0.0, 0.0), fucik::PreconditionError);
  EXPECT_THROW(gauss_jacobi(4, -1.0, 0.0), fucik::PreconditionError);
}
