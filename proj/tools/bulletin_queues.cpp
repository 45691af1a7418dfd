#include <iostream>

#include <CLI11.hpp>

#include "bq/commands.hpp"

namespace {

void add_common(CLI::App* sub, bq::CommandOptions& opts, std::optional<std::string>& config) {
  sub->add_option("--config", config, "configuration file (built-in defaults when omitted)");
  sub->add_option("--out", opts.out, "output directory")->capture_default_str();
}

void add_sweep_flags(CLI::App* sub, bq::CommandOptions& opts) {
  sub->add_option("--seed", opts.seed, "base seed");
  sub->add_option("--replications", opts.replications, "replications per cell");
  sub->add_option("--policy", opts.policy, "on, off or both")->check(CLI::IsMember({"on", "off", "both"}));
  sub->add_option("--intervals", opts.intervals, "dispatch intervals in seconds")->delimiter(',');
  sub->add_option("--lambdas", opts.lambdas, "total arrival rates")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-queue impatient-tenant simulation and service-rate optimization"};
  app.set_version_flag("--version", BQ_VERSION);
  app.require_subcommand(1);

  bq::CommandOptions opts;
  std::optional<std::string> config;
  std::optional<std::string> in;

  auto* sweep = app.add_subcommand("sweep", "run the replication sweep and write CSV/JSON results");
  add_common(sweep, opts, config);
  add_sweep_flags(sweep, opts);

  auto* optimize = app.add_subcommand("optimize", "grid search, KKT and Hessian checks per interval");
  add_common(optimize, opts, config);

  auto* charts = app.add_subcommand("charts", "render SVG charts from sweep and optimize outputs");
  add_common(charts, opts, config);
  charts->add_option("--in", in, "directory holding replications.csv (defaults to --out)");
  charts->add_option("--box-grouping", opts.box_grouping, "pooled or interval")
      ->check(CLI::IsMember({"pooled", "interval"}))
      ->capture_default_str();

  auto* conformance = app.add_subcommand("conformance", "closed-form vs numeric jockeying probability");
  add_common(conformance, opts, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bq::kExitConfig;
  }
  if (config) opts.config = *config;
  if (in) opts.in = *in;

  if (*sweep) return bq::cmd_sweep(opts, std::cerr);
  if (*optimize) return bq::cmd_optimize(opts, std::cerr);
  if (*charts) return bq::cmd_charts(opts, std::cerr);
  return bq::cmd_conformance(opts, std::cerr);
}
