#ifndef FUCIK_IO_CONFIG_HPP
#define FUCIK_IO_CONFIG_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fucik/domain_kernel.hpp"
#include "fucik/errors.hpp"
#include "fucik/spectrum.hpp"

namespace fucik::io {

/// A configuration entry is missing, malformed or out of range; the message names the key.
class ConfigError : public PreconditionError
{
public:
  using PreconditionError::PreconditionError;
};

enum class Task
{
  spectrum,
  minimax,
  curve,
  nonres,
  validate
};

inline const char* to_string(Task t)
{
  switch (t)
  {
    case Task::spectrum: return "spectrum";
    case Task::minimax: return "minimax";
    case Task::curve: return "curve";
    case Task::nonres: return "nonres";
    default: return "validate";
  }
}

inline Task parse_task(const std::string& name)
{
  for (Task t : {Task::spectrum, Task::minimax, Task::curve, Task::nonres, Task::validate})
    if (name == to_string(t))
      return t;
  throw ConfigError("task: unknown task '" + name + "' (expected spectrum, minimax, curve, nonres or validate)");
}

inline constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct RunConfig
{
  Task task = Task::spectrum;

  // kernel
  double s = 0.25;
  double lambda = 1.0;
  KernelVariant variant = KernelVariant::fractional;
  double mu = 0.0;
  double ell = 1.0;
  bool allow_high_order = false;

  std::vector<Interval> intervals{{-1.0, 1.0}};
  int N = 256;

  int spectrum_k = 3;
  MassKind spectrum_mass = MassKind::consistent;
  bool eigenfunctions = true;
  double eig_tol = 1e-10;

  double minimax_p = 1.0;
  int n_path = 33;
  int max_sweeps = 20000;
  double minimax_tol = 1e-10;

  double p_max = 5.0;
  double dp = unset; ///< unset: 0.1 lambda1
  double curve_tol = 1e-11;

  double nonres_tol = 1e-8;
  std::string f_kind = "linear-shift";
  double f_m = unset;           ///< unset: (lambda1 + lambda2) / 2
  double f_shift = 1.0;
  double f_alpha_plus = unset;  ///< unset: midway between lambda1 and the target alpha
  double f_alpha_minus = unset; ///< unset: midway between lambda1 and the target beta
  std::vector<std::pair<double, double>> f_table;

  double target_alpha = unset;
  double target_beta = unset;
  std::string target_curve_csv;
  double target_p = 0.0;

  std::string output_dir = "out";
  bool cache = true;
  std::uint64_t seed = 20240611;

  Kernel kernel() const
  {
    return variant == KernelVariant::fractional ? Kernel::fractional(s, lambda, allow_high_order)
                                                : Kernel::perturbed(s, lambda, mu, ell);
  }

  Domain domain() const { return Domain(intervals); }
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Entries
{
public:
  explicit Entries(const std::string& text)
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos)
        line.erase(hash);
      line = trim(line);
      if (line.empty())
        continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
      if (!values_.emplace(key, value).second)
        throw ConfigError(key + ": given more than once");
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string take_string(const std::string& key)
  {
    auto v = take(key);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
      v = v.substr(1, v.size() - 2);
    return v;
  }

  double take_double(const std::string& key)
  {
    const auto v = take(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || !std::isfinite(d))
      throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    return d;
  }

  int take_int(const std::string& key)
  {
    const auto v = take(key);
    char* end = nullptr;
    const long n = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || n < std::numeric_limits<int>::min() ||
        n > std::numeric_limits<int>::max())
      throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(n);
  }

  bool take_bool(const std::string& key)
  {
    const auto v = take(key);
    if (v == "true")
      return true;
    if (v == "false")
      return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }

  nlohmann::json take_list(const std::string& key)
  {
    const auto v = take(key);
    nlohmann::json j;
    try
    {
      j = nlohmann::json::parse(v);
    }
    catch (const nlohmann::json::exception&)
    {
      throw ConfigError(key + ": malformed list '" + v + "'");
    }
    if (!j.is_array())
      throw ConfigError(key + ": expected a bracketed list");
    return j;
  }

  void reject_leftovers() const
  {
    if (!values_.empty())
      throw ConfigError(values_.begin()->first + ": unknown key");
  }

private:
  std::string take(const std::string& key)
  {
    const auto it = values_.find(key);
    auto v = std::move(it->second);
    values_.erase(it);
    return v;
  }

  std::map<std::string, std::string> values_;
};

inline std::vector<std::pair<double, double>> pairs_of(const nlohmann::json& j, const std::string& key)
{
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j)
  {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ConfigError(key + ": expected a list of [x, y] number pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

} // namespace detail

/*
 * Parses flat `section.key = value` lines. `#` starts a comment; lists use
 * bracket syntax, e.g. `domain.intervals = [[-1, 0], [0.5, 1]]`.
 */
inline RunConfig parse_config(const std::string& text)
{
  detail::Entries e(text);
  RunConfig c;

  auto num = [&](const char* key, double& field) {
    if (e.has(key))
      field = e.take_double(key);
  };
  auto integer = [&](const char* key, int& field) {
    if (e.has(key))
      field = e.take_int(key);
  };
  auto flag = [&](const char* key, bool& field) {
    if (e.has(key))
      field = e.take_bool(key);
  };
  auto str = [&](const char* key, std::string& field) {
    if (e.has(key))
      field = e.take_string(key);
  };
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0))
      throw ConfigError(std::string(key) + ": must be positive");
  };

  if (e.has("task"))
    c.task = parse_task(e.take_string("task"));

  num("kernel.s", c.s);
  num("kernel.lambda", c.lambda);
  if (e.has("kernel.variant"))
  {
    const auto v = e.take_string("kernel.variant");
    if (v == "fractional")
      c.variant = KernelVariant::fractional;
    else if (v == "perturbed_fractional" || v == "perturbed-fractional")
      c.variant = KernelVariant::perturbed_fractional;
    else
      throw ConfigError("kernel.variant: expected fractional or perturbed_fractional, got '" + v + "'");
  }
  num("kernel.mu", c.mu);
  num("kernel.ell", c.ell);
  flag("kernel.allow_high_order", c.allow_high_order);

  if (e.has("domain.intervals"))
  {
    c.intervals.clear();
    for (const auto& [a, b] : detail::pairs_of(e.take_list("domain.intervals"), "domain.intervals"))
      c.intervals.push_back({a, b});
  }
  integer("mesh.N", c.N);

  integer("spectrum.k", c.spectrum_k);
  if (e.has("spectrum.mass"))
  {
    const auto v = e.take_string("spectrum.mass");
    if (v == "consistent")
      c.spectrum_mass = MassKind::consistent;
    else if (v == "lumped")
      c.spectrum_mass = MassKind::lumped;
    else
      throw ConfigError("spectrum.mass: expected consistent or lumped, got '" + v + "'");
  }
  flag("spectrum.eigenfunctions", c.eigenfunctions);
  num("spectrum.tol", c.eig_tol);

  num("minimax.p", c.minimax_p);
  integer("minimax.n_path", c.n_path);
  integer("minimax.max_sweeps", c.max_sweeps);
  num("minimax.tol", c.minimax_tol);

  num("curve.p_max", c.p_max);
  num("curve.dp", c.dp);
  num("curve.tol", c.curve_tol);

  num("nonres.tol", c.nonres_tol);
  str("f.kind", c.f_kind);
  num("f.m", c.f_m);
  num("f.shift", c.f_shift);
  num("f.alpha_plus", c.f_alpha_plus);
  num("f.alpha_minus", c.f_alpha_minus);
  if (e.has("f.table"))
    c.f_table = detail::pairs_of(e.take_list("f.table"), "f.table");

  num("target.alpha", c.target_alpha);
  num("target.beta", c.target_beta);
  str("target.curve_csv", c.target_curve_csv);
  num("target.p", c.target_p);

  str("output.dir", c.output_dir);
  flag("cache.enabled", c.cache);
  if (e.has("run.seed"))
  {
    const int seed = e.take_int("run.seed");
    if (seed < 0)
      throw ConfigError("run.seed: must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
  }

  e.reject_leftovers();

  // range checks, each naming its key
  if (c.N < 16)
    throw ConfigError("mesh.N: must be at least 16, got " + std::to_string(c.N));
  try
  {
    (void)c.kernel();
  }
  catch (const PreconditionError& err)
  {
    const std::string what = err.what();
    const char* key = what.find("lambda") != std::string::npos ? "kernel.lambda"
                      : what.find(" mu ") != std::string::npos ? "kernel.mu"
                      : what.find(" ell ") != std::string::npos ? "kernel.ell"
                                                               : "kernel.s";
    throw ConfigError(std::string(key) + ": " + what);
  }
  try
  {
    (void)c.domain();
  }
  catch (const PreconditionError& err)
  {
    throw ConfigError(std::string("domain.intervals: ") + err.what());
  }
  if (c.spectrum_k < 1)
    throw ConfigError("spectrum.k: must be at least 1");
  positive("spectrum.tol", c.eig_tol);
  if (!(c.minimax_p >= 0.0))
    throw ConfigError("minimax.p: must be nonnegative");
  if (c.n_path < 3)
    throw ConfigError("minimax.n_path: must be at least 3");
  if (c.max_sweeps < 1)
    throw ConfigError("minimax.max_sweeps: must be positive");
  positive("minimax.tol", c.minimax_tol);
  positive("curve.p_max", c.p_max);
  if (!std::isnan(c.dp) && !(c.dp > 0.0 && c.dp <= c.p_max))
    throw ConfigError("curve.dp: must lie in (0, curve.p_max]");
  positive("curve.tol", c.curve_tol);
  positive("nonres.tol", c.nonres_tol);
  if (c.f_kind != "linear-shift" && c.f_kind != "piecewise-asymptotic" && c.f_kind != "custom-table")
    throw ConfigError("f.kind: expected linear-shift, piecewise-asymptotic or custom-table, got '" + c.f_kind + "'");
  if (c.f_kind == "custom-table" && c.f_table.size() < 3)
    throw ConfigError("f.table: custom-table needs at least three [s, f] pairs");
  if (!(c.target_p >= 0.0))
    throw ConfigError("target.p: must be nonnegative");
  if (std::isnan(c.target_alpha) != std::isnan(c.target_beta))
    throw ConfigError("target.alpha: target.alpha and target.beta must be given together");
  if (c.output_dir.empty())
    throw ConfigError("output.dir: must not be empty");
  return c;
}

inline RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

} // namespace fucik::io

#endif
