#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "xysim/harness.hpp"
#include "xysim/parallel.hpp"
#include "xysim/propagator.hpp"

int main(int argc, char** argv) {
  CLI::App app{"xysim: sector-exact 2D XY-model dynamics and analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long long seed_override = -1;
  int threads = 0;

  const std::vector<std::string> protocols = {"quench", "kz", "excitations", "dimer", "scan"};
  for (const auto& name : protocols) {
    auto* sub = app.add_subcommand(name, "run the " + name + " protocol");
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker thread count (0 = hardware)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string protocol = app.get_subcommands()[0]->get_name();

  try {
    xysim::set_num_threads(threads);
    xysim::Config cfg = xysim::Config::parse_file(config_path);
    cfg.set("protocol", protocol);
    if (seed_override >= 0) cfg.set("seed", std::to_string(seed_override));
    return xysim::run_protocol(cfg, out_dir);
  } catch (const xysim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const xysim::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
