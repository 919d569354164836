#include <cmath>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fucik/io/config.hpp"
#include "fucik/io/run.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Fucik spectrum laboratory for nonlocal operators"};
  app.set_version_flag("--version", fucik::io::version());

  std::string task;
  std::string config;
  std::string out;
  bool no_cache = false;
  double p = std::nan("");
  app.add_option("task", task, "spectrum, minimax, curve, nonres or validate")->required();
  app.add_option("--config", config, "configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides output.dir)");
  app.add_flag("--no-cache", no_cache, "assemble without reading or writing the matrix cache");
  app.add_option("--p", p, "shift p for the minimax task (overrides minimax.p)");

  CLI11_PARSE(app, argc, argv);

  try
  {
    auto cfg = fucik::io::load_config(config);
    cfg.task = fucik::io::parse_task(task);
    if (!out.empty())
      cfg.output_dir = out;
    if (no_cache)
      cfg.cache = false;
    if (!std::isnan(p))
    {
      if (!(p >= 0.0))
        throw fucik::io::ConfigError("--p: must be nonnegative");
      cfg.minimax_p = p;
    }
    const auto report = fucik::io::run(cfg, std::cout);
    return report.exit_code();
  }
  catch (const fucik::io::ConfigError& e)
  {
    std::cerr << "fucik-lab: config error: " << e.what() << '\n';
    return 2;
  }
  catch (const fucik::Error& e)
  {
    std::cerr << "fucik-lab: " << e.what() << '\n';
    return 3;
  }
  catch (const std::exception& e)
  {
    std::cerr << "fucik-lab: " << e.what() << '\n';
    return 4;
  }
}
