#include <gtest/gtest.h>

#include "bq/config.hpp"
#include "bq/errors.hpp"

using namespace bq;

namespace {

const char* kMinimal = "[system]\nlambda = 6\n[simulation]\nhorizon = 1500\n";

int parse_error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto cfg = parse_config_text(kMinimal);
  EXPECT_DOUBLE_EQ(cfg.sim.lambda, 6.0);
  EXPECT_DOUBLE_EQ(cfg.sim.horizon, 1500.0);
  EXPECT_DOUBLE_EQ(cfg.sim.split, 0.5);
  EXPECT_DOUBLE_EQ(cfg.sim.bp.t_local, 5.0);
  EXPECT_DOUBLE_EQ(cfg.sim.bp.eta, 0.3);
  EXPECT_DOUBLE_EQ(cfg.sim.bp.d, 1.0);
  EXPECT_DOUBLE_EQ(cfg.sim.weights.tau, 1.0);
  EXPECT_DOUBLE_EQ(cfg.sim.policy_alpha, 0.2);
  EXPECT_EQ(cfg.sweep.replications, 300);
  EXPECT_EQ(cfg.sweep.intervals, (std::vector<double>{3, 5, 7, 9}));
  EXPECT_EQ(cfg.sweep.policies, (std::vector<bool>{false, true}));
  EXPECT_EQ(cfg.optimize.references.size(), 4u);
  EXPECT_DOUBLE_EQ(cfg.optimize.system.mu_max, 15.0);
}

TEST(Config, RequiredKeys) {
  EXPECT_THROW(parse_config_text("[system]\nlambda = 4\n"), ValidationError);
  EXPECT_THROW(parse_config_text("[simulation]\nhorizon = 4\n"), ValidationError);
}

TEST(Config, StabilityViolationNamesField) {
  const std::string text = "[system]\nlambda = 6\nmu_i = 2\nmu_j = 9\n[simulation]\nhorizon = 100\n";
  try {
    parse_config_text(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "mu_i");
    EXPECT_NE(std::string(e.what()).find("stability"), std::string::npos);
  }
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("[system]\nlambda = 4\nbogus = 1\n"), 3);
  EXPECT_EQ(parse_error_line("[nowhere]\n"), 1);
  EXPECT_EQ(parse_error_line("[system]\nlambda = 4\nlambda = 5\n"), 3);
  EXPECT_EQ(parse_error_line("[system]\nlambda =\n"), 2);
  EXPECT_EQ(parse_error_line("lambda = 4\n"), 1);
  EXPECT_EQ(parse_error_line("[system]\n\n# note\nlambda = four\n"), 4);
  EXPECT_EQ(parse_error_line("[policy]\nmode = sometimes\n"), 2);
}

TEST(Config, CommentsAndWhitespace) {
  const auto cfg = parse_config_text(
      "# top\n[system]   \n  lambda = 6   ; inline\n\n[simulation]\nhorizon=1500\nbulletins = fsd\n");
  EXPECT_EQ(cfg.sim.bulletins, BulletinMode::FsdOnly);
}

TEST(Config, RoundTripDigest) {
  const auto cfg = parse_config_text(
      "[system]\nlambda = 6\nsplit = 0.4\nmu_i = 4\nmu_j = 6.5\n[behavior]\nt_local = 2.5\neta = 0.1\n"
      "[simulation]\nhorizon = 900\nseed = 17\n[sweep]\nintervals = 3, 9\nlambdas = 4,6\nreplications = 12\n"
      "[policy]\nmode = on\nalpha = 0.3\n[weights]\npsi = 2\n"
      "[optimize]\nlambda_i = 1\nlambda_j = 0.5\nreference = 3:4.5:2.5, 9:8.5:6.5\n");
  const auto text = serialize_config(cfg);
  const auto again = parse_config_text(text);
  EXPECT_EQ(config_digest(cfg), config_digest(again));
  EXPECT_EQ(serialize_config(again), text);
  EXPECT_EQ(again.sweep.replications, 12);
  EXPECT_EQ(again.optimize.references.size(), 2u);
  EXPECT_EQ(again.optimize.references[1], (ReferencePair{9.0, 8.5, 6.5}));
  EXPECT_EQ(config_digest(cfg).size(), 16u);
}

TEST(Config, DigestChangesWithContent) {
  const auto a = parse_config_text(kMinimal);
  const auto b = parse_config_text("[system]\nlambda = 6\n[simulation]\nhorizon = 1501\n");
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(Config, NumberList) {
  EXPECT_EQ(parse_number_list("3, 5,7 ,9"), (std::vector<double>{3, 5, 7, 9}));
  EXPECT_TRUE(parse_number_list("").empty());
}

TEST(Config, DefaultConfigIsValid) {
  const auto cfg = default_config();
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_EQ(cfg.sweep.base_seed, cfg.sim.seed);
}
