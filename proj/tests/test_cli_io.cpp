#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fucik/io/cache.hpp"
#include "fucik/io/config.hpp"
#include "fucik/io/output.hpp"
#include "fucik/io/run.hpp"

using namespace fucik;
using namespace fucik::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("fucik_cli_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text)
{
  try
  {
    parse_config(text);
  }
  catch (const ConfigError& e)
  {
    return e.what();
  }
  return {};
}

/// Silences and records the warning sink for the lifetime of the object.
struct CaptureWarnings
{
  std::vector<std::string> seen;
  fucik::detail::WarningHandler previous;
  CaptureWarnings()
  : previous(set_warning_handler([this](std::string_view m) { seen.emplace_back(m); }))
  {}
  ~CaptureWarnings() { set_warning_handler(std::move(previous)); }
};

} // namespace

TEST(Config, MinimalSpectrumUsesDefaults)
{
  const auto c = parse_config("task = spectrum\n");
  EXPECT_EQ(c.task, Task::spectrum);
  EXPECT_EQ(c.N, 256);
  EXPECT_EQ(c.s, 0.25);
  ASSERT_EQ(c.intervals.size(), 1u);
  EXPECT_EQ(c.intervals[0].a, -1.0);
  EXPECT_EQ(c.intervals[0].b, 1.0);
  EXPECT_TRUE(c.cache);
}

TEST(Config, ParsesEveryKey)
{
  const auto c = parse_config(R"(# comment
task = nonres
kernel.s = 0.3          # trailing comment
kernel.lambda = 2
kernel.variant = perturbed_fractional
kernel.mu = 0.4
kernel.ell = 0.2
domain.intervals = [[-1, 0], [0.5, 1]]
mesh.N = 64
spectrum.k = 5
spectrum.mass = lumped
spectrum.eigenfunctions = false
spectrum.tol = 1e-9
minimax.p = 2
minimax.n_path = 17
minimax.max_sweeps = 100
minimax.tol = 1e-9
curve.p_max = 3
curve.dp = 0.25
curve.tol = 1e-10
nonres.tol = 1e-7
f.kind = custom-table
f.table = [[-1, -12], [0, 0.5], [1, 13]]
target.alpha = 17
target.beta = 15
target.p = 1
output.dir = "results"
cache.enabled = false
run.seed = 42
)");
  EXPECT_EQ(c.task, Task::nonres);
  EXPECT_EQ(c.variant, KernelVariant::perturbed_fractional);
  EXPECT_EQ(c.kernel().mu(), 0.4);
  EXPECT_EQ(c.domain().intervals().size(), 2u);
  EXPECT_EQ(c.spectrum_mass, MassKind::lumped);
  EXPECT_FALSE(c.eigenfunctions);
  EXPECT_EQ(c.dp, 0.25);
  EXPECT_EQ(c.f_table.size(), 3u);
  EXPECT_EQ(c.output_dir, "results");
  EXPECT_FALSE(c.cache);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, ErrorsNameTheKey)
{
  EXPECT_NE(config_error("kernel.s = 0.7").find("kernel.s"), std::string::npos);
  EXPECT_NO_THROW(parse_config("kernel.s = 0.7\nkernel.allow_high_order = true"));
  EXPECT_NE(config_error("domain.intervals = [[1, 0]]").find("domain.intervals"), std::string::npos);
  EXPECT_NE(config_error("mesh.N = 8").find("mesh.N"), std::string::npos);
  EXPECT_NE(config_error("mesh.N = eight").find("mesh.N"), std::string::npos);
  EXPECT_NE(config_error("curve.tol = -1").find("curve.tol"), std::string::npos);
  EXPECT_NE(config_error("kernel.lambda = 0").find("kernel.lambda"), std::string::npos);
  EXPECT_NE(config_error("kernel.variant = perturbed_fractional\nkernel.mu = -1").find("kernel.mu"),
            std::string::npos);
  EXPECT_NE(config_error("mesh.colour = red").find("mesh.colour: unknown key"), std::string::npos);
  EXPECT_NE(config_error("mesh.N = 32\nmesh.N = 64").find("mesh.N"), std::string::npos);
  EXPECT_NE(config_error("task = dance").find("task"), std::string::npos);
  EXPECT_NE(config_error("target.alpha = 3").find("target.alpha"), std::string::npos);
  EXPECT_NE(config_error("f.kind = custom-table").find("f.table"), std::string::npos);
  EXPECT_NE(config_error("domain.intervals = [[0, 1], ").find("domain.intervals"), std::string::npos);
  EXPECT_NE(config_error("just some words").find("line 1"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/fucik.cfg"), ConfigError);
}

TEST(Cache, RoundTripAndCorruption)
{
  const auto dir = scratch("cache");
  const auto mesh = Mesh::uniform(Domain::interval(-1.0, 1.0), 32);
  const auto kernel = Kernel::fractional(0.25);
  bool hit = true;
  const auto first = assemble_cached(mesh, kernel, dir, true, &hit);
  EXPECT_FALSE(hit);
  const auto second = assemble_cached(mesh, kernel, dir, true, &hit);
  EXPECT_TRUE(hit);
  EXPECT_EQ(first.stiffness, second.stiffness);
  EXPECT_EQ(first.mass, second.mass);
  EXPECT_EQ(first.lumped, second.lumped);

  const auto path = cache_path(dir, mesh, kernel);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    f.put('\x7f');
  }
  CaptureWarnings w;
  const auto third = assemble_cached(mesh, kernel, dir, true, &hit);
  EXPECT_FALSE(hit);
  ASSERT_EQ(w.seen.size(), 1u);
  EXPECT_NE(w.seen[0].find("corrupted"), std::string::npos);
  EXPECT_EQ(third.stiffness, first.stiffness);
  assemble_cached(mesh, kernel, dir, true, &hit);
  EXPECT_TRUE(hit);
}

TEST(Cache, KeyDependsOnInputs)
{
  const auto a = Mesh::uniform(Domain::interval(-1.0, 1.0), 32);
  const auto b = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  const auto k = Kernel::fractional(0.25);
  EXPECT_NE(cache_key(a, k), cache_key(b, k));
  EXPECT_NE(cache_key(a, k), cache_key(a, Kernel::fractional(0.3)));
  const auto gp = assemble(a, k);
  auto bytes = serialize(gp);
  EXPECT_TRUE(deserialize(bytes, a, k).has_value());
  EXPECT_FALSE(deserialize(bytes, a, Kernel::fractional(0.3)).has_value());
  bytes.pop_back();
  EXPECT_FALSE(deserialize(bytes, a, k).has_value());
}

TEST(Output, TableFormatAndCurveReader)
{
  const auto dir = scratch("table");
  Table t({"p", "alpha", "beta", "note"});
  t.add({0.1, 1.0 / 3.0, 2.0, std::string("x")});
  EXPECT_THROW(t.add({1.0}), PreconditionError);
  t.write(dir / "t.csv", "# header");
  EXPECT_EQ(slurp(dir / "t.csv"), "# header\np,alpha,beta,note\n0.10000000000000001,0.33333333333333331,2,x\n");
  const auto rows = read_curve_csv(dir / "t.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][1], 1.0 / 3.0);
  Table::write_text(dir / "bad.csv", "x,y\n1,2\n");
  EXPECT_THROW(read_curve_csv(dir / "bad.csv"), PreconditionError);
}

TEST(Run, CurveTaskIsDeterministicWithCache)
{
  const auto dir = scratch("curve");
  auto cfg = parse_config("task = curve\nmesh.N = 64\ncurve.p_max = 2\n");
  cfg.output_dir = dir.string();
  std::ostringstream log1, log2;
  const auto r1 = run(cfg, log1);
  EXPECT_EQ(r1.exit_code(), 0) << log1.str();
  EXPECT_FALSE(r1.cache_hit);
  ASSERT_TRUE(fs::exists(dir / "curve.csv"));
  ASSERT_TRUE(fs::exists(dir / "curve.svg"));
  const auto csv = slurp(dir / "curve.csv");
  const auto r2 = run(cfg, log2);
  EXPECT_TRUE(r2.cache_hit);
  EXPECT_EQ(slurp(dir / "curve.csv"), csv);

  EXPECT_EQ(csv.rfind("# s=0.25 lambda=1 kernel=fractional N=64 domain=[[-1,1]] version=", 0), 0u);
  EXPECT_NE(csv.find("\np,alpha,beta,residual,method\n"), std::string::npos);
  const auto svg = slurp(dir / "curve.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"8,4\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"2,3\""), std::string::npos);
}

TEST(Run, EveryTaskWritesHeaderedTables)
{
  for (const char* task : {"spectrum", "minimax", "nonres"})
  {
    const auto dir = scratch(task);
    auto cfg = parse_config(std::string("task = ") + task + "\nmesh.N = 64\n");
    cfg.output_dir = dir.string();
    std::ostringstream log;
    const auto rep = run(cfg, log);
    EXPECT_EQ(rep.exit_code(), 0) << task << "\n" << log.str();
    EXPECT_FALSE(rep.files.empty());
    for (const auto& f : rep.files)
    {
      const auto text = slurp(f);
      EXPECT_EQ(text.rfind("# s=", 0), 0u) << f;
      EXPECT_NE(text.find("version="), std::string::npos) << f;
    }
  }
}

TEST(Run, ValidateSuiteReportsPassCounts)
{
  const auto dir = scratch("validate");
  auto cfg = parse_config("task = validate\nmesh.N = 64\ncurve.p_max = 2\n");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  const auto rep = run(cfg, log);
  EXPECT_GE(rep.checks.size(), 15u);
  EXPECT_EQ(rep.passed(), rep.checks.size()) << log.str();
  EXPECT_NE(log.str().find("pass " + std::to_string(rep.passed()) + "/" + std::to_string(rep.checks.size())),
            std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "validate.csv"));
}

TEST(Run, FailedValidatorGivesNonzeroExit)
{
  RunReport r;
  r.checks.push_back({"a", true, 0.0, 0.0, {}});
  EXPECT_EQ(r.exit_code(), 0);
  r.checks.push_back({"b", false, 1.0, 0.0, {}});
  EXPECT_EQ(r.exit_code(), 1);
}

TEST(Run, ModuleErrorsCarryTaskContext)
{
  const auto dir = scratch("error");
  auto cfg = parse_config("task = nonres\nmesh.N = 32\nf.kind = linear-shift\nf.m = 1\n");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  try
  {
    run(cfg, log);
    FAIL() << "expected an error";
  }
  catch (const Error& e)
  {
    EXPECT_EQ(std::string(e.what()).rfind("nonres: ", 0), 0u) << e.what();
  }
}
