#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bq/charts.hpp"
#include "bq/errors.hpp"
#include "bq/report.hpp"

using namespace bq;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bq_report_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ReplicationSummary row(double r, double lambda, bool policy, std::uint64_t seed, double ren) {
  ReplicationSummary s;
  s.r = r;
  s.lambda = lambda;
  s.policy = policy;
  s.seed = seed;
  s.renege_rate_fsd = ren;
  s.jockey_rate_icd = 0.1 * seed;
  s.wait_median_reneged = NAN;
  s.wait_median_jockeyed = 0.25 * seed;
  s.wait_median_served = 1.0 / 3.0;
  s.mu_i_final = 4.5;
  s.mu_j_final = 3.0;
  return s;
}

}  // namespace

TEST(ReplicationCsv, HeaderAndRoundTrip) {
  const std::vector<ReplicationSummary> rows{row(3, 5, false, 1, 0.125), row(3, 5, true, 2, 1e-7)};
  const auto text = replications_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "r,lambda,policy,seed,renege_rate_fsd,renege_rate_icd,jockey_rate_fsd,jockey_rate_icd,"
            "wait_median_reneged,wait_median_jockeyed,wait_median_served,mu_i_final,mu_j_final");
  const auto dir = scratch("roundtrip");
  write_file(dir / "r.csv", text);
  const auto back = read_replications_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].renege_rate_fsd, 1e-7);
  EXPECT_EQ(back[0].wait_median_served, 1.0 / 3.0);
  EXPECT_TRUE(std::isnan(back[0].wait_median_reneged));
  EXPECT_TRUE(back[1].policy);
  EXPECT_EQ(replications_csv(back), text);
}

TEST(ReplicationCsv, MissingOrEmptyInput) {
  const auto dir = scratch("missing");
  EXPECT_THROW(read_replications_csv(dir / "nope.csv"), MissingInput);
  write_file(dir / "empty.csv", "");
  EXPECT_THROW(read_replications_csv(dir / "empty.csv"), MissingInput);
  write_file(dir / "header.csv", replications_csv({}));
  EXPECT_THROW(read_replications_csv(dir / "header.csv"), MissingInput);
}

TEST(SummaryTable, FootersRecomputeFromRows) {
  SummaryTable t;
  t.rows = {{3, 0.12, 0.2, 6, 15, 4.5, 2.5, ""}, {5, 0.3, 2.3, 5, 15, 2.5, 0.5, ""},
            {7, 0.5, 0.4, 4, 15, 6.5, 5.5, ""}, {9, 0.8, 0.9, 5, 15, 8.5, 6.5, ""}};
  EXPECT_NEAR(t.optimized().mean, (0.12 + 0.3 + 0.5 + 0.8) / 4, 1e-12);
  EXPECT_DOUBLE_EQ(t.optimized().min, 0.12);
  EXPECT_DOUBLE_EQ(t.non_optimized().max, 2.3);
  EXPECT_NEAR(t.average_improvement(), ((0.2 - 0.12) + (2.3 - 0.3) + (0.4 - 0.5) + (0.9 - 0.8)) / 4, 1e-12);
  t.rows[0].opt_value = 0.02;
  EXPECT_NEAR(t.optimized().mean, (0.02 + 0.3 + 0.5 + 0.8) / 4, 1e-12);
  const auto csv = t.to_csv();
  EXPECT_NE(csv.find("mean,"), std::string::npos);
  EXPECT_NE(t.to_text().find("Avg. Impr."), std::string::npos);
}

TEST(SummaryTable, PopulationStd) {
  // Worked rows with a population std of exactly 1.
  const auto f = footer_stats({1.0, 3.0, 1.0, 3.0});
  EXPECT_DOUBLE_EQ(f.mean, 2.0);
  EXPECT_DOUBLE_EQ(f.std, 1.0);
  EXPECT_TRUE(std::isnan(footer_stats({NAN}).mean));
}

TEST(SummaryTable, BuildFromOptimizer) {
  OptimizeSpec spec;
  spec.system.lambda_i = 0.25;
  spec.system.lambda_j = 0.25;
  BehaviorParams bp;
  const auto table = build_summary(spec, bp, {});
  ASSERT_EQ(table.rows.size(), 4u);
  const double expected_r[] = {3, 5, 7, 9};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(table.rows[k].r, expected_r[k]);
    EXPECT_LE(table.rows[k].opt_value, table.rows[k].nonopt_value);
  }
  EXPECT_EQ(table.rows[0].ref_mu_i, 4.5);
  EXPECT_EQ(table.rows[1].ref_mu_j, 0.5);
  double mean = 0.0;
  for (const auto& r : table.rows) mean += r.opt_value;
  EXPECT_NEAR(table.optimized().mean, mean / 4, 1e-12);
}

TEST(SummaryTable, InfeasibleReferenceIsMarked) {
  OptimizeSpec spec;
  spec.system.lambda_i = 1.0;
  spec.system.lambda_j = 1.0;
  spec.references = {{5.0, 2.5, 0.5}};
  const auto table = build_summary(spec, BehaviorParams{}, {});
  EXPECT_TRUE(std::isnan(table.rows[0].nonopt_value));
  EXPECT_FALSE(table.rows[0].note.empty());
  EXPECT_TRUE(std::isfinite(table.rows[0].opt_value));
}

TEST(Charts, BoxStatsMatchManualQuartiles) {
  const auto b = box_stats({4, 1, 3, 2, NAN, 100});
  EXPECT_EQ(b.n, 5u);
  EXPECT_DOUBLE_EQ(b.median, 3.0);
  EXPECT_DOUBLE_EQ(b.q1, 2.0);
  EXPECT_DOUBLE_EQ(b.q3, 4.0);
  EXPECT_DOUBLE_EQ(b.whisker_hi, 4.0);
  EXPECT_DOUBLE_EQ(b.whisker_lo, 1.0);
}

TEST(Charts, DeterministicSvg) {
  std::vector<BoxGroup> g{{"a", {1, 2, 3}}, {"b <&>", {2, 5}}};
  EXPECT_EQ(box_plot_svg("t", "s", g), box_plot_svg("t", "s", g));
  const auto svg = box_plot_svg("t", "s", g);
  EXPECT_NE(svg.find("b &lt;&amp;&gt;"), std::string::npos);
  EXPECT_NE(svg.find("viewBox=\"0 0 720 480\""), std::string::npos);
  const auto rows = std::vector<ReplicationSummary>{row(3, 5, false, 1, 0.1), row(3, 7, false, 2, 0.3)};
  const auto series = rate_series(rows, 3, false);
  ASSERT_EQ(series.size(), 4u);
  EXPECT_EQ(series[0].x, (std::vector<double>{5, 7}));
  EXPECT_EQ(line_chart_svg("x", "y", "z", series), line_chart_svg("x", "y", "z", series));
}

TEST(WriteFile, ReplacesAtomically) {
  const auto dir = scratch("write");
  write_file(dir / "sub" / "a.txt", "one");
  write_file(dir / "sub" / "a.txt", "two");
  std::ifstream in(dir / "sub" / "a.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "two");
  EXPECT_FALSE(fs::exists(dir / "sub" / "a.txt.tmp"));
}
