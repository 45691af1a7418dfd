#include "bq/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "bq/errors.hpp"

namespace bq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw MissingInput("bad numeric cell '" + s + "'");
  return v;
}

nlohmann::json stat_json(const Stat& s) {
  auto val = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"mean", val(s.mean)}, {"median", val(s.median)}, {"std", val(s.std)}, {"n", s.n}};
}

}  // namespace

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

static const char* kReplicationHeader =
    "r,lambda,policy,seed,renege_rate_fsd,renege_rate_icd,jockey_rate_fsd,jockey_rate_icd,"
    "wait_median_reneged,wait_median_jockeyed,wait_median_served,mu_i_final,mu_j_final";

std::string replications_csv(const std::vector<ReplicationSummary>& rows) {
  std::string out = std::string(kReplicationHeader) + "\n";
  for (const auto& s : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", fmt_num(s.r), fmt_num(s.lambda),
                       s.policy ? "on" : "off", s.seed, fmt_num(s.renege_rate_fsd),
                       fmt_num(s.renege_rate_icd), fmt_num(s.jockey_rate_fsd),
                       fmt_num(s.jockey_rate_icd), fmt_num(s.wait_median_reneged),
                       fmt_num(s.wait_median_jockeyed), fmt_num(s.wait_median_served),
                       fmt_num(s.mu_i_final), fmt_num(s.mu_j_final));
  }
  return out;
}

std::vector<ReplicationSummary> read_replications_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kReplicationHeader)
    throw MissingInput(path.string() + " is not a replication CSV");
  std::vector<ReplicationSummary> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 13) throw MissingInput("malformed row in " + path.string());
    ReplicationSummary s;
    s.r = parse_double(c[0]);
    s.lambda = parse_double(c[1]);
    s.policy = c[2] == "on";
    s.seed = std::stoull(c[3]);
    s.renege_rate_fsd = parse_double(c[4]);
    s.renege_rate_icd = parse_double(c[5]);
    s.jockey_rate_fsd = parse_double(c[6]);
    s.jockey_rate_icd = parse_double(c[7]);
    s.wait_median_reneged = parse_double(c[8]);
    s.wait_median_jockeyed = parse_double(c[9]);
    s.wait_median_served = parse_double(c[10]);
    s.mu_i_final = parse_double(c[11]);
    s.mu_j_final = parse_double(c[12]);
    rows.push_back(s);
  }
  if (rows.empty()) throw MissingInput(path.string() + " has no data rows");
  return rows;
}

std::string waits_by_model_csv(const std::vector<ReplicationSummary>& rows) {
  std::string out = "r,lambda,policy,seed,model,outcome,median\n";
  for (const auto& s : rows)
    for (ModelKind k : {ModelKind::FSD, ModelKind::ICD}) {
      const auto i = static_cast<std::size_t>(k);
      for (const auto& [name, value] : {std::pair{"reneged", s.wait_median_reneged_by_kind[i]},
                                        std::pair{"jockeyed", s.wait_median_jockeyed_by_kind[i]}})
        out += fmt::format("{},{},{},{},{},{},{}\n", fmt_num(s.r), fmt_num(s.lambda),
                           s.policy ? "on" : "off", s.seed, to_string(k), name, fmt_num(value));
    }
  return out;
}

nlohmann::json aggregates_json(const ExperimentResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"r", c.r},
                     {"lambda", c.lambda},
                     {"policy", c.policy ? "on" : "off"},
                     {"renege_rate_fsd", stat_json(c.renege_rate_fsd)},
                     {"renege_rate_icd", stat_json(c.renege_rate_icd)},
                     {"jockey_rate_fsd", stat_json(c.jockey_rate_fsd)},
                     {"jockey_rate_icd", stat_json(c.jockey_rate_icd)},
                     {"wait_median_reneged", stat_json(c.wait_median_reneged)},
                     {"wait_median_jockeyed", stat_json(c.wait_median_jockeyed)},
                     {"wait_median_served", stat_json(c.wait_median_served)},
                     {"wait_median_impatient", stat_json(c.wait_median_impatient)}});
  }
  return {{"cells", cells}};
}

std::string landscape_csv(const std::vector<LandscapePoint>& points) {
  std::string out = "mu_i,mu_j,objective,feasible\n";
  for (const auto& p : points)
    out += fmt::format("{},{},{},{}\n", fmt_num(p.mu_i), fmt_num(p.mu_j), fmt_num(p.objective),
                       p.feasible ? 1 : 0);
  return out;
}

std::string conformance_csv(const std::vector<ConformanceRow>& rows) {
  std::string out = "ell,k,xi_i,xi_j,numeric,closed,abs_diff\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{}\n", r.ell, r.k, fmt_num(r.xi_i), fmt_num(r.xi_j),
                       fmt_num(r.numeric), fmt_num(r.closed), fmt_num(r.abs_diff));
  return out;
}

std::string policy_trace_csv(const std::vector<PolicyTraceRow>& rows) {
  std::string out = "time,mu_i,mu_j,utility,predicted_renege,predicted_jockey\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{}\n", fmt_num(r.time), fmt_num(r.mu_i), fmt_num(r.mu_j),
                       fmt_num(r.utility), fmt_num(r.predicted_renege), fmt_num(r.predicted_jockey));
  return out;
}

FooterStats footer_stats(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) return {kNaN, kNaN, kNaN, kNaN};
  FooterStats f;
  double sum = 0.0;
  for (double x : v) sum += x;
  f.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - f.mean) * (x - f.mean);
  f.std = std::sqrt(ss / static_cast<double>(v.size()));
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  f.min = *lo;
  f.max = *hi;
  return f;
}

FooterStats SummaryTable::optimized() const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.opt_value);
  return footer_stats(v);
}

FooterStats SummaryTable::non_optimized() const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.nonopt_value);
  return footer_stats(v);
}

double SummaryTable::average_improvement() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (!std::isfinite(r.opt_value) || !std::isfinite(r.nonopt_value)) continue;
    sum += r.nonopt_value - r.opt_value;
    ++n;
  }
  return n > 0 ? sum / n : kNaN;
}

std::string SummaryTable::to_csv() const {
  std::string out = "interval,opt_obj,nonopt_obj,opt_mu_i,opt_mu_j,nonopt_mu_i,nonopt_mu_j,note\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", fmt_num(r.r), fmt_num(r.opt_value),
                       fmt_num(r.nonopt_value), fmt_num(r.opt_mu_i), fmt_num(r.opt_mu_j),
                       fmt_num(r.ref_mu_i), fmt_num(r.ref_mu_j), r.note);
  const auto o = optimized();
  const auto n = non_optimized();
  out += fmt::format("mean,{},{},,,,,\n", fmt_num(o.mean), fmt_num(n.mean));
  out += fmt::format("std,{},{},,,,,\n", fmt_num(o.std), fmt_num(n.std));
  out += fmt::format("min,{},{},,,,,\n", fmt_num(o.min), fmt_num(n.min));
  out += fmt::format("max,{},{},,,,,\n", fmt_num(o.max), fmt_num(n.max));
  out += fmt::format("avg_improvement,{},,,,,,\n", fmt_num(average_improvement()));
  return out;
}

std::string SummaryTable::to_text() const {
  auto cell = [](double v) { return std::isfinite(v) ? fmt::format("{:.4f}", v) : std::string("n/a"); };
  auto pair = [](double a, double b) { return fmt::format("({:.2f}, {:.2f})", a, b); };
  std::string out = fmt::format("{:>8}  {:>10}  {:>12}  {:>16}  {:>16}\n", "Interval", "Opt. Obj.",
                                "Non-Opt. Obj.", "Opt. (mu_i,mu_j)", "Non-Opt. pair");
  for (const auto& r : rows) {
    out += fmt::format("{:>7}s  {:>10}  {:>12}  {:>16}  {:>16}", fmt_num(r.r), cell(r.opt_value),
                       cell(r.nonopt_value), std::isfinite(r.opt_value) ? pair(r.opt_mu_i, r.opt_mu_j) : "-",
                       pair(r.ref_mu_i, r.ref_mu_j));
    if (!r.note.empty()) out += "  " + r.note;
    out += "\n";
  }
  const auto o = optimized();
  const auto n = non_optimized();
  out += fmt::format("{:>8}  {:>10}  {:>12}  Avg. Impr.: {}\n", "Mean", cell(o.mean), cell(n.mean),
                     cell(average_improvement()));
  out += fmt::format("{:>8}  {:>10}  {:>12}\n", "Std Dev", cell(o.std), cell(n.std));
  out += fmt::format("{:>8}  {:>10}  {:>12}\n", "Min", cell(o.min), cell(n.min));
  out += fmt::format("{:>8}  {:>10}  {:>12}\n", "Max", cell(o.max), cell(n.max));
  return out;
}

SummaryTable build_summary(const OptimizeSpec& spec, const BehaviorParams& base,
                           const ObjectiveWeights& w, std::vector<OptimizationResult>* results) {
  SummaryTable table;
  for (const auto& ref : spec.references) {
    BehaviorParams bp = base;
    bp.r = ref.r;
    SummaryRow row;
    row.r = ref.r;
    row.ref_mu_i = ref.mu_i;
    row.ref_mu_j = ref.mu_j;
    try {
      auto res = optimize(spec.grid, spec.system, bp, w);
      row.opt_value = res.best_value;
      row.opt_mu_i = res.best_mu_i;
      row.opt_mu_j = res.best_mu_j;
      if (results) results->push_back(std::move(res));
    } catch (const NoFeasiblePoint&) {
      row.opt_value = kNaN;
      row.opt_mu_i = row.opt_mu_j = kNaN;
      row.note = "no feasible grid point";
      if (results) results->emplace_back();
    }
    if (spec.system.feasible(ref.mu_i, ref.mu_j)) {
      row.nonopt_value = objective(ref.mu_i, ref.mu_j, spec.system, bp, w);
    } else {
      row.nonopt_value = kNaN;
      row.note += row.note.empty() ? "reference pair infeasible" : "; reference pair infeasible";
    }
    table.rows.push_back(row);
  }
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bq
