#ifndef FUCIK_QUADRATURE_HPP
#define FUCIK_QUADRATURE_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "fucik/errors.hpp"

namespace fucik::quadrature {

/// Nodes and weights of a rule on the unit interval [0,1].
struct Rule
{
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

/*
 * Golub-Welsch construction for the weight (1-x)^alpha (1+x)^beta on [-1,1],
 * mapped to (1-t)^alpha t^beta on [0,1].
 */
inline Rule golub_welsch_jacobi(int n, double alpha, double beta)
{
  if (n < 1)
    throw PreconditionError("quadrature: rule size must be positive");
  if (alpha <= -1.0 || beta <= -1.0)
    throw PreconditionError("quadrature: Jacobi exponents must exceed -1");

  const double ab = alpha + beta;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k)
  {
    const double s = 2.0 * k + ab;
    double diag;
    if (k == 0)
      diag = (beta - alpha) / (ab + 2.0);
    else
      diag = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    J(k, k) = diag;
    if (k > 0)
    {
      const double kk = k;
      const double num = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab);
      const double den = s * s * (s + 1.0) * (s - 1.0);
      const double off = std::sqrt(num / den);
      J(k, k - 1) = off;
      J(k - 1, k) = off;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                              std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  const double to_unit = std::exp(-(ab + 1.0) * std::log(2.0));

  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i)
  {
    const double v0 = es.eigenvectors()(0, i);
    rule.nodes[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    rule.weights[i] = mu0 * v0 * v0 * to_unit;
  }
  return rule;
}

} // namespace detail

/// Gauss-Jacobi rule for the weight (1-t)^alpha t^beta on [0,1]; cached.
inline const Rule& gauss_jacobi(int n, double alpha, double beta)
{
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, Rule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(n, alpha, beta);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, detail::golub_welsch_jacobi(n, alpha, beta)).first;
  return it->second;
}

/// Gauss-Legendre rule on [0,1]; cached.
inline const Rule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

} // namespace fucik::quadrature

#endif
