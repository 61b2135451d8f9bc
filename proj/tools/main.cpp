#include "commands.hpp"

#include "yr/parallel.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Common
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  std::vector<std::string> params;
};

yr::Json load_config(const Common &c) {
  yr::Json raw = yr::Json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) {
      throw std::runtime_error("cannot open config " + c.config);
    }
    raw = yr::Json::parse(in);
    if (!raw.is_object()) {
      throw std::invalid_argument("config must be a JSON object");
    }
  }
  for (const std::string &p : c.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--param expects key=value, got '" + p + "'");
    }
    const std::string key = p.substr(0, eq), value = p.substr(eq + 1);
    yr::Json v = yr::Json::parse(value, nullptr, false);
    raw[key] = v.is_discarded() ? yr::Json(value) : v;
  }
  if (c.seed) {
    raw["seed"] = *c.seed;
  }
  return raw;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Averaged fields and regularisation by noise for Young SDEs"};
  app.require_subcommand(1);

  struct Entry
  {
    std::string name;
    std::string help;
    yr::cli::Command run;
  };
  const std::vector<Entry> commands = {
      {"fbm", "sample one fBm path", yr::cli::cmd_fbm},
      {"average", "tabulate T^w b", yr::cli::cmd_average},
      {"gamma", "tabulate Gamma^w b", yr::cli::cmd_gamma},
      {"solve", "solve x = x0 + int b(x) dbeta + w", yr::cli::cmd_solve},
      {"flow", "flow map over a grid of initial conditions", yr::cli::cmd_flow},
      {"check-conditions", "evaluate the well-posedness conditions", yr::cli::cmd_check_conditions},
      {"demo-nonuniqueness", "two solutions from 0 when w = 0", yr::cli::cmd_demo_nonuniqueness},
      {"demo-regularization", "mollified solutions converge when w is rough", yr::cli::cmd_demo_regularization},
      {"scaling-study", "L^p moment exponents over (H, delta, alpha)", yr::cli::cmd_scaling_study},
  };
  Common common;
  std::vector<CLI::App *> subs;
  for (const Entry &e : commands) {
    const std::string &name = e.name;
    CLI::App *sub = app.add_subcommand(name, e.help);
    sub->add_option("--config", common.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "base seed (overrides the config)");
    sub->add_option("--out", common.out, "output directory")->default_str("out/" + name);
    sub->add_option("--threads", common.threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
    sub->add_option("--param", common.params, "config override key=value (value parsed as JSON)");
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) {
        continue;
      }
      if (common.threads > 0) {
        yr::set_num_threads(common.threads);
      }
      yr::cli::Config cfg(load_config(common));
      const std::string out = common.out.empty() ? "out/" + commands[i].name : common.out;
      return commands[i].run(cfg, out);
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
