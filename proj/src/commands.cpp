#include "bq/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "bq/charts.hpp"
#include "bq/errors.hpp"
#include "bq/impatience.hpp"
#include "bq/parallel.hpp"
#include "bq/report.hpp"

#ifndef BQ_VERSION
#define BQ_VERSION "0.0.0"
#endif

namespace bq {
namespace {

namespace fs = std::filesystem;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string interval_tag(double r) { return fmt_num(r); }

// Files written by one command; removed again if the command fails.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path write(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    write_file(path, text);
    written_.push_back(path);
    return path;
  }

  void rollback() noexcept {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

  nlohmann::json names() const {
    auto out = nlohmann::json::array();
    for (const auto& p : written_) out.push_back(p.lexically_relative(dir_).generic_string());
    return out;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

nlohmann::json overrides_json(const CommandOptions& opts) {
  nlohmann::json j = nlohmann::json::object();
  if (opts.config) j["config"] = opts.config->string();
  if (opts.seed) j["seed"] = *opts.seed;
  if (opts.replications) j["replications"] = *opts.replications;
  if (opts.policy) j["policy"] = *opts.policy;
  if (opts.intervals) j["intervals"] = *opts.intervals;
  if (opts.lambdas) j["lambdas"] = *opts.lambdas;
  return j;
}

void write_manifest(OutputSet& out, const std::string& command, const CommandOptions& opts,
                    const AppConfig& cfg, const std::string& started) {
  nlohmann::json m;
  m["tool"] = "bulletin-queues";
  m["version"] = BQ_VERSION;
  m["command"] = command;
  m["config_digest"] = config_digest(cfg);
  m["base_seed"] = cfg.sweep.base_seed;
  m["replications"] = cfg.sweep.replications;
  m["threads"] = parallel_threads();
  m["overrides"] = overrides_json(opts);
  m["config"] = serialize_config(cfg);
  m["started_at"] = started;
  m["finished_at"] = utc_now();
  m["outputs"] = out.names();
  out.write("manifest.json", m.dump(2) + "\n");
}

// Runs body with the shared exit-code mapping and output rollback.
template <class Body>
int guarded(const CommandOptions& opts, std::ostream& log, const std::string& command, Body&& body) {
  AppConfig cfg;
  try {
    cfg = resolve_config(opts);
  } catch (const InvalidConfig& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  OutputSet out(opts.out);
  const auto started = utc_now();
  try {
    body(cfg, out);
    write_manifest(out, command, opts, cfg, started);
  } catch (const std::exception& e) {
    out.rollback();
    log << command << " failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_num(const std::string& s) {
  if (s == "nan" || s.empty()) return std::nan("");
  return std::stod(s);
}

std::vector<LandscapePoint> read_landscape(const fs::path& path) {
  auto rows = read_csv_rows(path);
  std::vector<LandscapePoint> pts;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& c = rows[i];
    if (c.size() < 4) throw ParseError(static_cast<int>(i + 1), "short landscape row in " + path.string());
    pts.push_back({to_num(c[0]), to_num(c[1]), to_num(c[2]), c[3] == "1" || c[3] == "true"});
  }
  return pts;
}

}  // namespace

AppConfig resolve_config(const CommandOptions& opts) {
  AppConfig cfg = opts.config ? parse_config(*opts.config) : default_config();
  if (opts.seed) cfg.sweep.base_seed = *opts.seed;
  if (opts.replications) cfg.sweep.replications = *opts.replications;
  if (opts.intervals) cfg.sweep.intervals = *opts.intervals;
  if (opts.lambdas) cfg.sweep.lambdas = *opts.lambdas;
  if (opts.policy) {
    if (*opts.policy == "on") cfg.sweep.policies = {true};
    else if (*opts.policy == "off") cfg.sweep.policies = {false};
    else if (*opts.policy == "both") cfg.sweep.policies = {false, true};
    else throw ValidationError("policy", "expected on|off|both");
  }
  if (opts.box_grouping != "pooled" && opts.box_grouping != "interval")
    throw ValidationError("box-grouping", "expected pooled|interval");
  finalize(cfg);
  validate(cfg);
  return cfg;
}

int cmd_sweep(const CommandOptions& opts, std::ostream& log) {
  return guarded(opts, log, "sweep", [&](const AppConfig& cfg, OutputSet& out) {
    const auto& sw = cfg.sweep;
    log << fmt::format("sweep: {} intervals x {} arrival rates x {} policies x {} replications ({} threads)\n",
                       sw.intervals.size(), sw.lambdas.size(), sw.policies.size(), sw.replications,
                       parallel_threads());
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_experiment(cfg.sim, sw);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << fmt::format("sweep: {} replications in {:.1f}s\n", result.replications.size(), secs);

    out.write("replications.csv", replications_csv(result.replications));
    out.write("waits_by_model.csv", waits_by_model_csv(result.replications));
    out.write("aggregates.json", aggregates_json(result).dump(2) + "\n");

    // Trace of the first replication in every policy-on cell.
    for (double r : sw.intervals)
      for (double lambda : sw.lambdas) {
        if (std::find(sw.policies.begin(), sw.policies.end(), true) == sw.policies.end()) continue;
        auto c = cell_config(cfg.sim, sw, r, lambda, true, 0);
        c.record_trace = true;
        const auto m = run_replication(c);
        out.write(fmt::format("traces/policy_r{}_lambda{}.csv", interval_tag(r), fmt_num(lambda)),
                  policy_trace_csv(m.trace));
      }
  });
}

int cmd_optimize(const CommandOptions& opts, std::ostream& log) {
  return guarded(opts, log, "optimize", [&](const AppConfig& cfg, OutputSet& out) {
    std::vector<OptimizationResult> results;
    const auto table = build_summary(cfg.optimize, cfg.sim.bp, cfg.sim.weights, &results);
    out.write("summary.csv", table.to_csv());
    out.write("summary.txt", table.to_text());
    log << table.to_text();

    auto kkt = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& res = results[i];
      const double r = table.rows[i].r;
      if (res.landscape.empty()) continue;
      out.write(fmt::format("landscape_r{}.csv", interval_tag(r)), landscape_csv(res.landscape));
      nlohmann::json k;
      k["interval"] = r;
      k["mu_i"] = res.kkt.mu_i;
      k["mu_j"] = res.kkt.mu_j;
      k["gamma_i"] = res.kkt.gamma_i;
      k["gamma_j"] = res.kkt.gamma_j;
      k["stationarity_residuals"] = res.kkt.stationarity_residuals;
      k["slackness_residuals"] = res.kkt.slackness_residuals;
      k["slackness_pass"] = res.slackness.pass;
      k["primal_feasible"] = res.slackness.primal_feasible;
      k["dual_feasible"] = res.slackness.dual_feasible;
      if (res.hessian) {
        k["hessian"] = res.hessian->h;
        k["hessian_eig_min"] = res.hessian->eig_min;
        k["hessian_eig_max"] = res.hessian->eig_max;
        k["hessian_psd"] = res.hessian->psd;
      } else {
        k["hessian"] = nullptr;
      }
      kkt.push_back(std::move(k));
    }
    out.write("kkt.json", kkt.dump(2) + "\n");
  });
}

int cmd_charts(const CommandOptions& opts, std::ostream& log) {
  return guarded(opts, log, "charts", [&](const AppConfig&, OutputSet& out) {
    const fs::path in = opts.in.value_or(opts.out);
    const auto rows = read_replications_csv(in / "replications.csv");

    // Render everything before writing anything.
    std::vector<std::pair<std::string, std::string>> files;
    std::set<double> intervals;
    std::set<bool> policies;
    for (const auto& r : rows) {
      intervals.insert(r.r);
      policies.insert(r.policy);
    }
    for (double r : intervals)
      for (bool p : policies) {
        auto series = rate_series(rows, r, p);
        files.emplace_back(fmt::format("rates_r{}_policy_{}.svg", interval_tag(r), p ? "on" : "off"),
                           line_chart_svg(fmt::format("Renege and jockey rates, interval {} s, policy {}",
                                                      fmt_num(r), p ? "on" : "off"),
                                          "arrival rate", "events per second", series));
      }

    // Box groups: policy x outcome, split by bulletin kind when available.
    const bool by_model = fs::exists(in / "waits_by_model.csv");
    std::vector<std::vector<std::string>> model_rows;
    if (by_model) model_rows = read_csv_rows(in / "waits_by_model.csv");
    auto groups_for = [&](std::optional<double> only_r) {
      std::map<std::string, std::vector<double>> g;
      if (by_model) {
        for (std::size_t i = 1; i < model_rows.size(); ++i) {
          const auto& c = model_rows[i];
          if (c.size() < 7) continue;
          if (only_r && to_num(c[0]) != *only_r) continue;
          const std::string pol = c[2] == "on" ? "on" : "off";
          g[fmt::format("{} {} policy {}", c[4], c[5], pol)].push_back(to_num(c[6]));
        }
      } else {
        for (const auto& r : rows) {
          if (only_r && r.r != *only_r) continue;
          const std::string pol = r.policy ? "on" : "off";
          g["reneged policy " + pol].push_back(r.wait_median_reneged);
          g["jockeyed policy " + pol].push_back(r.wait_median_jockeyed);
        }
      }
      std::vector<BoxGroup> out_groups;
      for (auto& [label, values] : g) out_groups.push_back({label, std::move(values)});
      return out_groups;
    };
    if (opts.box_grouping == "interval") {
      for (double r : intervals)
        files.emplace_back(fmt::format("waits_box_r{}.svg", interval_tag(r)),
                           box_plot_svg(fmt::format("Median waiting time, interval {} s", fmt_num(r)),
                                        "seconds", groups_for(r)));
    } else {
      files.emplace_back("waits_box.svg",
                         box_plot_svg("Median waiting time by outcome", "seconds", groups_for(std::nullopt)));
    }

    // Heatmaps need an optimize run in the same directory.
    if (fs::exists(in / "summary.csv")) {
      const auto summary = read_csv_rows(in / "summary.csv");
      for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& c = summary[i];
        if (c.size() < 7) continue;
        double r = 0.0;
        try {
          r = std::stod(c[0]);
        } catch (const std::exception&) {
          continue;  // footer rows
        }
        const auto land = in / fmt::format("landscape_r{}.csv", c[0]);
        if (!fs::exists(land)) continue;
        std::vector<Marker> markers;
        if (std::isfinite(to_num(c[3]))) markers.push_back({"optimized", to_num(c[3]), to_num(c[4])});
        markers.push_back({"non-optimized", to_num(c[5]), to_num(c[6])});
        files.emplace_back(fmt::format("heatmap_r{}.svg", interval_tag(r)),
                           heatmap_svg(fmt::format("Objective landscape, interval {} s", fmt_num(r)),
                                       read_landscape(land), markers));
      }
    }

    for (const auto& [name, svg] : files) out.write(name, svg);
    log << fmt::format("charts: wrote {} files to {}\n", files.size(), out.dir().string());
  });
}

int cmd_conformance(const CommandOptions& opts, std::ostream& log) {
  return guarded(opts, log, "conformance", [&](const AppConfig&, OutputSet& out) {
    const std::vector<std::size_t> ells{1, 2, 3, 4, 5, 6};
    const std::vector<std::size_t> ks{1, 2, 3, 4, 5, 6};
    const std::vector<double> xis{0.5, 1.0, 2.0, 4.0};
    const auto rows = conformance_report(ells, ks, xis);
    out.write("conformance.csv", conformance_csv(rows));
    double worst = 0.0;
    std::size_t over = 0;
    for (const auto& r : rows) {
      if (std::isfinite(r.abs_diff)) worst = std::max(worst, r.abs_diff);
      if (!(r.abs_diff <= 1e-3)) ++over;
    }
    log << fmt::format("conformance: {} cases, {} differ by more than 1e-3, max |diff| {:.6g}\n",
                       rows.size(), over, worst);
  });
}

}  // namespace bq
