#ifndef FUCIK_IO_RUN_HPP
#define FUCIK_IO_RUN_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "fucik/fucik_continuation.hpp"
#include "fucik/fucik_minimax.hpp"
#include "fucik/io/cache.hpp"
#include "fucik/io/config.hpp"
#include "fucik/io/output.hpp"
#include "fucik/nonresonance.hpp"
#include "fucik/spectrum.hpp"
#include "fucik/validation.hpp"

namespace fucik::io {

struct RunReport
{
  Task task = Task::spectrum;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  bool cache_hit = false;

  std::size_t passed() const
  {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.passed; }));
  }
  int exit_code() const { return passed() == checks.size() ? 0 : 1; }
};

namespace detail {

inline Check flag(std::string name, bool ok, std::string detail = {})
{
  return Check{std::move(name), ok, ok ? 0.0 : 1.0, 0.0, std::move(detail)};
}

inline Check bounded(std::string name, double worst, double tol, std::string detail = {})
{
  return fucik::detail::finish(std::move(name), worst, tol, std::move(detail));
}

inline Check from_property(const PropertyCheck& pc)
{
  return Check{"curve " + pc.name, pc.passed, pc.worst, 0.0, pc.witness};
}

class Runner
{
public:
  Runner(const RunConfig& cfg, std::ostream& log)
  : cfg_(cfg)
  , log_(log)
  , out_(cfg.output_dir)
  , rng_(cfg.seed)
  {}

  RunReport operator()()
  {
    rep_.task = cfg_.task;
    const Mesh mesh = Mesh::uniform(cfg_.domain(), cfg_.N);
    gp_ = std::make_unique<GalerkinPair>(assemble_cached(mesh, cfg_.kernel(), out_, cfg_.cache, &rep_.cache_hit));
    header_ = provenance(*gp_);
    log_ << header_.substr(2) << '\n';
    log_ << "assembly: " << gp_->size() << " dofs" << (rep_.cache_hit ? " (cache hit)" : "") << '\n';

    switch (cfg_.task)
    {
      case Task::spectrum: spectrum(); break;
      case Task::minimax: minimax(); break;
      case Task::curve: curve(); break;
      case Task::nonres: nonres(); break;
      case Task::validate: validate(); break;
    }

    for (const auto& c : rep_.checks)
      log_ << (c.passed ? "  pass  " : "  FAIL  ") << c.name << "  worst=" << fucik::detail::format_double(c.worst)
           << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
    log_ << "pass " << rep_.passed() << "/" << rep_.checks.size() << '\n';
    return std::move(rep_);
  }

private:
  const GalerkinPair& gp() const { return *gp_; }

  void write(const Table& t, const std::string& name)
  {
    const auto path = out_ / name;
    t.write(path, header_);
    rep_.files.push_back(path);
    log_ << "wrote " << path.string() << '\n';
  }

  void add(Check c) { rep_.checks.push_back(std::move(c)); }

  double dp() const
  {
    if (!std::isnan(cfg_.dp))
      return cfg_.dp;
    const double l1 = lowest_eigenpairs(gp(), 1, cfg_.eig_tol, MassKind::lumped).front().value;
    return std::min(cfg_.p_max, 0.1 * l1);
  }

  ContinuationOptions continuation_options() const
  {
    ContinuationOptions o;
    o.newton.tol = cfg_.curve_tol;
    o.eig_tol = cfg_.eig_tol;
    return o;
  }

  MinimaxOptions minimax_options() const
  {
    MinimaxOptions o;
    o.n_path = cfg_.n_path;
    o.max_sweeps = cfg_.max_sweeps;
    o.rel_tol = cfg_.minimax_tol;
    o.eig_tol = cfg_.eig_tol;
    return o;
  }

  void spectrum()
  {
    const auto pairs = lowest_eigenpairs(gp(), cfg_.spectrum_k, cfg_.eig_tol, cfg_.spectrum_mass);
    Table t({"index", "lambda", "residual"});
    for (const auto& e : pairs)
      t.add({static_cast<long>(e.index), e.value, e.residual});
    write(t, "spectrum.csv");
    if (cfg_.eigenfunctions)
    {
      std::vector<std::string> cols{"x"};
      for (const auto& e : pairs)
        cols.push_back("phi_" + std::to_string(e.index));
      Table f(cols);
      const auto& x = gp().mesh.coordinates();
      for (std::size_t i = 0; i < x.size(); ++i)
      {
        std::vector<Cell> row{x[i]};
        for (const auto& e : pairs)
          row.emplace_back(e.vector[static_cast<Eigen::Index>(i)]);
        f.add(std::move(row));
      }
      write(f, "eigenfunctions.csv");
    }
    const Vector& phi1 = pairs.front().vector;
    add(flag("principal vector of one sign", phi1.minCoeff() >= 0.0));
    if (pairs.size() > 1)
      add(flag("second vector changes sign", pairs[1].vector.maxCoeff() > 0.0 && pairs[1].vector.minCoeff() < 0.0,
               std::to_string(sign_changes(pairs[1].vector)) + " sign changes"));
    double worst = 0.0;
    for (const auto& e : pairs)
      worst = std::max(worst, e.residual / std::max(1.0, e.value));
    add(bounded("eigen residuals", worst, cfg_.eig_tol));
  }

  void minimax()
  {
    const double p = cfg_.minimax_p;
    const auto cp = c_of_p(gp(), p, minimax_options());
    const double l1 = lowest_eigenpairs(gp(), 1, cfg_.eig_tol, MassKind::lumped).front().value;
    log_ << "c(" << fucik::detail::format_double(p) << ") = " << fucik::detail::format_double(cp.value)
         << "  quality=" << cp.quality << "  sweeps=" << cp.history.size() - 1 << '\n';

    Table h({"sweep", "level", "criticality", "step"});
    bool monotone = true;
    for (std::size_t k = 0; k < cp.history.size(); ++k)
    {
      const auto& r = cp.history[k];
      h.add({static_cast<long>(r.sweep), r.level, r.criticality, r.step});
      monotone = monotone && (k == 0 || r.level <= cp.history[k - 1].level);
    }
    write(h, "minimax_history.csv");

    Table u({"x", "u"});
    const auto& x = gp().mesh.coordinates();
    for (std::size_t i = 0; i < x.size(); ++i)
      u.add({x[i], cp.u.coefficients()[static_cast<Eigen::Index>(i)]});
    write(u, "minimax_u.csv");

    add(flag("level non-increasing", monotone));
    add(bounded("criticality", cp.criticality, 1e-6));
    add(flag("c(p) above lambda1", cp.value > l1, "c - lambda1 = " + fucik::detail::format_double(cp.value - l1)));
    add(flag("critical point changes sign", cp.u.changes_sign()));
    add(bounded("multiplier identity", std::abs(cp.t - cp.value), 1e-8));
    add(flag("semismooth polish", cp.polished, cp.quality));
  }

  CurveSample trace(double p_max, double step) const
  {
    return trace_curve(gp(), p_max, std::min(step, p_max), continuation_options());
  }

  void curve_checks(const CurveSample& cs)
  {
    add(flag("curve complete", !cs.truncated, cs.diagnostic));
    for (const auto& pc : validate_curve(cs).checks)
      add(from_property(pc));
    double res = 0.0, mult = 0.0;
    for (const auto* side : {&cs.branch, &cs.mirror})
      for (const auto& q : *side)
      {
        res = std::max(res, fucik_residual(gp(), q.u.coefficients(), q.alpha, q.beta));
        mult = std::max(mult, std::abs(q.t - jp(gp(), q.p, q.u)));
      }
    add(bounded("curve residuals", res, 1e-8));
    add(bounded("curve multiplier identity", mult, 1e-8));
    const auto lines = trivial_lines_check(gp(), {0.0, cs.lambda1, 1e3}, cfg_.eig_tol);
    bool ok = true;
    double worst = 0.0;
    for (const auto& l : lines.lines)
    {
      ok = ok && l.passed;
      worst = std::max(worst, l.residual);
    }
    add(Check{"trivial lines", ok, worst, lines.eigen_residual, {}});
  }

  void curve()
  {
    const auto cs = trace(cfg_.p_max, dp());
    log_ << "lambda1 = " << fucik::detail::format_double(cs.lambda1)
         << "  lambda2 = " << fucik::detail::format_double(cs.lambda2) << "  points = " << cs.branch.size() << '\n';
    Table t({"p", "alpha", "beta", "residual", "method"});
    for (const auto* side : {&cs.branch, &cs.mirror})
      for (const auto& q : *side)
        t.add({q.p, q.alpha, q.beta, q.residual, std::string(to_string(q.method))});
    write(t, "curve.csv");
    const auto svg = out_ / "curve.svg";
    Table::write_text(svg, curve_svg(cs));
    rep_.files.push_back(svg);
    log_ << "wrote " << svg.string() << '\n';
    curve_checks(cs);
  }

  /// Target (alpha, beta) on the first curve.
  std::pair<double, double> target(double l2) const
  {
    if (!std::isnan(cfg_.target_alpha))
      return {cfg_.target_alpha, cfg_.target_beta};
    if (!cfg_.target_curve_csv.empty())
    {
      const auto rows = read_curve_csv(cfg_.target_curve_csv);
      const double p = cfg_.target_p;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        if (rows[i][0] <= p && p <= rows[i + 1][0])
        {
          const double w = rows[i + 1][0] > rows[i][0] ? (p - rows[i][0]) / (rows[i + 1][0] - rows[i][0]) : 0.0;
          return {rows[i][1] + w * (rows[i + 1][1] - rows[i][1]), rows[i][2] + w * (rows[i + 1][2] - rows[i][2])};
        }
      throw ConfigError("target.p: " + fucik::detail::format_double(p) + " lies outside the rows of " +
                        cfg_.target_curve_csv);
    }
    if (cfg_.target_p == 0.0)
      return {l2, l2};
    const auto cs = trace(cfg_.target_p, dp());
    if (cs.truncated)
      throw ConvergenceError("nonres: target curve truncated: " + cs.diagnostic);
    return {cs.branch.back().alpha, cs.branch.back().beta};
  }

  Nonlinearity nonlinearity(double l1, double l2, double a, double b) const
  {
    if (cfg_.f_kind == "linear-shift")
      return linear_shift(std::isnan(cfg_.f_m) ? 0.5 * (l1 + l2) : cfg_.f_m, cfg_.f_shift);
    if (cfg_.f_kind == "piecewise-asymptotic")
      return piecewise_asymptotic(std::isnan(cfg_.f_alpha_plus) ? 0.5 * (l1 + a) : cfg_.f_alpha_plus,
                                  std::isnan(cfg_.f_alpha_minus) ? 0.5 * (l1 + b) : cfg_.f_alpha_minus);
    return custom_table(cfg_.f_table);
  }

  void nonres()
  {
    const auto pairs = lowest_eigenpairs(gp(), 2, cfg_.eig_tol, MassKind::lumped);
    const double l1 = pairs[0].value;
    const auto [a, b] = target(pairs[1].value);
    log_ << "target (alpha, beta) = (" << fucik::detail::format_double(a) << ", " << fucik::detail::format_double(b)
         << ")\n";
    const NonlinearitySpec spec(nonlinearity(l1, pairs[1].value, a, b), gp().mesh, l1, a, b);
    const auto& hr = spec.report();
    log_ << "hypotheses: strict nodes +" << hr.strict_plus_nodes << " -" << hr.strict_minus_nodes
         << "; asymptotic excursion at |s|=" << fucik::detail::format_double(hr.asymptotic_scale) << ": "
         << fucik::detail::format_double(hr.asymptotic_worst) << " (finite-sample heuristic)\n";

    const auto sol = solve_nonresonance(gp(), spec, cfg_.nonres_tol);
    log_ << "R = " << fucik::detail::format_double(sol.R) << "  Psi = " << fucik::detail::format_double(sol.value)
         << "  " << to_string(sol.classification) << "  morse index " << sol.morse_index << '\n';

    Table t({"x", "u", "f"});
    const auto& x = gp().mesh.coordinates();
    for (std::size_t i = 0; i < x.size(); ++i)
    {
      const double ui = sol.u[static_cast<Eigen::Index>(i)];
      t.add({x[i], ui, spec.f(x[i], ui)});
    }
    write(t, "nonres_solution.csv");
    Table h({"sweep", "level", "criticality", "step"});
    for (const auto& r : sol.history)
      h.add({static_cast<long>(r.sweep), r.level, r.criticality, r.step});
    write(h, "nonres_log.csv");

    add(flag("Newton converged", sol.converged));
    add(bounded("gradient norm", sol.gradient_norm, cfg_.nonres_tol));
    add(flag("mountain-pass level above endpoints", sol.path_level > sol.endpoint_level,
             fucik::detail::format_double(sol.path_level) + " vs " + fucik::detail::format_double(sol.endpoint_level)));
    if (cfg_.f_kind == "linear-shift")
    {
      const double m = std::isnan(cfg_.f_m) ? 0.5 * (l1 + pairs[1].value) : cfg_.f_m;
      Matrix K = gp().stiffness;
      K.diagonal() -= m * gp().lumped;
      const Vector direct = Eigen::PartialPivLU<Matrix>(K).solve((cfg_.f_shift * gp().lumped.array()).matrix());
      add(bounded("direct solve agreement", lumped_norm(gp().lumped, sol.u - direct) /
                                                std::max(1.0, lumped_norm(gp().lumped, direct)),
                  1e-6));
    }
  }

  void validate()
  {
    auto& rng = rng_;
    add(endpoint_identities(gp(), {0.0, 1.0, 5.0}));
    for (double eps : {1e-2, 1e-1})
      add(ring_test(gp(), 1.0, eps, 200, rng));
    add(gradient_check_jp(gp(), 1.0, 20, rng));
    add(decomposition_check(gp(), 20, rng));
    add(cross_symmetry_check(gp(), 20, rng));

    const auto pairs = lowest_eigenpairs(gp(), 2, cfg_.eig_tol, MassKind::lumped);
    const double l1 = pairs[0].value, l2 = pairs[1].value;
    add(flag("second vector changes sign", sign_changes(pairs[1].vector) >= 1));

    const auto cs = trace(cfg_.p_max, dp());
    curve_checks(cs);

    double worst = 0.0;
    std::string where;
    for (double p : {0.0, 1.0, 2.0})
    {
      if (p > cs.branch.back().p)
        break;
      const auto it = std::min_element(cs.branch.begin(), cs.branch.end(), [p](const auto& x, const auto& y) {
        return std::abs(x.p - p) < std::abs(y.p - p);
      });
      if (std::abs(it->p - p) > 1e-12)
        continue;
      const double d = std::abs(c_of_p(gp(), p, minimax_options()).value - it->t) / std::max(1.0, it->t);
      if (d >= worst)
      {
        worst = d;
        where = "p = " + fucik::detail::format_double(p);
      }
    }
    add(bounded("minimax vs continuation", worst, 1e-6, where));

    const NonlinearitySpec lin(linear_shift(0.5 * (l1 + l2), 1.0), gp().mesh, l1, l2, l2);
    auto gl = gradient_check_psi(gp(), lin, 20, rng);
    gl.name += " linear-shift";
    add(std::move(gl));
    const NonlinearitySpec pw(piecewise_asymptotic(0.5 * (l1 + l2), 0.5 * (l1 + l2)), gp().mesh, l1, l2, l2);
    auto gw = gradient_check_psi(gp(), pw, 20, rng);
    gw.name += " piecewise-asymptotic";
    add(std::move(gw));
    const auto sol = solve_nonresonance(gp(), lin, cfg_.nonres_tol);
    add(bounded("nonresonance gradient norm", sol.gradient_norm, cfg_.nonres_tol));
    add(flag("nonresonance level above endpoints", sol.path_level > sol.endpoint_level));

    Table t({"check", "passed", "worst", "tolerance"});
    for (const auto& c : rep_.checks)
      t.add({c.name, static_cast<long>(c.passed), c.worst, c.tolerance});
    write(t, "validate.csv");
  }

  const RunConfig& cfg_;
  std::ostream& log_;
  std::filesystem::path out_;
  std::mt19937_64 rng_;
  std::unique_ptr<GalerkinPair> gp_;
  std::string header_;
  RunReport rep_;
};

} // namespace detail

/*
 * Executes the configured task: assembly through the cache, the task
 * pipeline, table output and validators. Module errors propagate with the
 * task name prefixed; failed validators show up in the exit code.
 */
inline RunReport run(const RunConfig& cfg, std::ostream& log)
{
  try
  {
    return detail::Runner(cfg, log)();
  }
  catch (const ConfigError&)
  {
    throw;
  }
  catch (const Error& e)
  {
    throw Error(std::string(to_string(cfg.task)) + ": " + e.what());
  }
}

} // namespace fucik::io

#endif
