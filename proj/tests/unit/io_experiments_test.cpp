#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include <json.hpp>

#include "netgame/errors.hpp"
#include "netgame/experiments.hpp"
#include "netgame/instance_io.hpp"

namespace netgame {
namespace {

TEST(InstanceIo, RoundTripsEveryField) {
  const PlannerInstance src = sample_planner_instance(3, 3, LinkSign::kMixed);
  InstanceFile inst{src.params, WelfareSpec::weighted_action_sum((Vector(3) << 1.0, 2.0, 0.5).finished()),
                    src.budget, PowerFamilySpec::uniform(3, 2.5, 1.5, 2.0)};
  const InstanceFile back = parse_instance(instance_to_json(inst));
  EXPECT_EQ(back.params.b(), inst.params.b());
  EXPECT_EQ(back.params.c(), inst.params.c());
  EXPECT_EQ(back.params.s(), inst.params.s());
  EXPECT_EQ(back.params.f(), inst.params.f());
  EXPECT_EQ(back.params.rho(), inst.params.rho());
  EXPECT_EQ(back.welfare.weights(), inst.welfare.weights());
  EXPECT_EQ(back.budget, inst.budget);
  ASSERT_TRUE(back.general.has_value());
  EXPECT_EQ(back.general->gamma, inst.general->gamma);
  EXPECT_EQ(back.general->kappa, inst.general->kappa);
}

TEST(InstanceIo, ScalarsBroadcast) {
  const InstanceFile inst = parse_instance(
      R"({"n": 2, "b": [0.1, 0.2], "c": 1.5, "s": [[0, 0.1], [0.1, 0]], "f": 2, "rho": 0.3,
          "welfare": {"kind": "link_weight_sum"}, "general": {"gamma": 3}})");
  EXPECT_EQ(inst.params.c(), Vector::Constant(2, 1.5));
  EXPECT_EQ(inst.params.f()(0, 1), 2.0);
  EXPECT_EQ(inst.welfare.kind(), WelfareSpec::Kind::kLinkWeightSum);
  EXPECT_FALSE(inst.budget.has_value());
  EXPECT_EQ(inst.general->gamma(1, 0), 3.0);
  EXPECT_EQ(inst.general->eta(0), 2.0);
}

TEST(InstanceIo, MalformedInputsAreConfigErrors) {
  EXPECT_THROW(parse_instance("{"), InvalidParameters);
  EXPECT_THROW(parse_instance(R"({"n": 2})"), InvalidParameters);
  EXPECT_THROW(parse_instance(R"({"n": 2, "b": [1], "c": 1, "s": 0, "f": 1, "rho": 0.1})"), InvalidParameters);
  EXPECT_THROW(parse_instance(R"({"n": 2, "b": 1, "c": 1, "s": 0, "f": 1, "rho": "x"})"), InvalidParameters);
  EXPECT_THROW(
      parse_instance(R"({"n": 2, "b": 1, "c": 1, "s": 0, "f": 1, "rho": 0.1, "welfare": {"kind": "utilitarian"}})"),
      InvalidParameters);
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), InvalidParameters);
}

TEST(InstanceIo, OptimizationJsonCarriesVerdicts) {
  const PlannerInstance inst = sample_planner_instance(2, 2, LinkSign::kNonNegative);
  OptimizerOptions o;
  o.random_starts = 4;
  const OptimizationResult res = optimize_intervention(inst.params, inst.welfare, inst.budget, o);
  const StructureReport rep = check_theorem1_structure(inst.params, inst.welfare, res);
  const auto j = nlohmann::json::parse(optimization_to_json(res, &rep));
  EXPECT_EQ(j.at("mode"), "full");
  EXPECT_EQ(j.at("link_structure").size(), 1u);
  EXPECT_EQ(j.at("link_structure")[0].at("verdict"), "pass");
  EXPECT_EQ(j.at("trace").size(), res.trace.size());
}

TEST(Example1, InstanceStreamsIgnoreGenerationOrder) {
  const PlannerInstance a = generate_example1_instance(5, replication_seed(9, 5, 3));
  (void)generate_example1_instance(7, replication_seed(9, 7, 0));
  const PlannerInstance b = generate_example1_instance(5, replication_seed(9, 5, 3));
  EXPECT_EQ(a.params.b(), b.params.b());
  EXPECT_EQ(a.params.s(), b.params.s());
  EXPECT_EQ(a.params.c(), Vector::Constant(5, 10.0));
  EXPECT_EQ(a.params.rho(), 1.0);
  EXPECT_EQ(a.budget, 0.01);
  EXPECT_TRUE((a.params.b().array() >= 0.0).all() && (a.params.b().array() <= 0.01).all());

  std::set<std::uint64_t> seeds;
  for (int n = 2; n <= 10; ++n) {
    for (int rep = 0; rep < 20; ++rep) seeds.insert(replication_seed(9, n, rep));
  }
  EXPECT_EQ(seeds.size(), 9u * 20u);
}

TEST(Example1, CsvIsIdenticalAcrossThreadCounts) {
  Example1Config cfg;
  cfg.n_min = 2;
  cfg.n_max = 4;
  cfg.replications = 3;
  cfg.seed = 42;
  cfg.threads = 1;
  const std::string serial = example1_csv(run_example1(cfg));
  cfg.threads = 3;
  const std::string parallel = example1_csv(run_example1(cfg));
  EXPECT_EQ(serial, parallel);
  std::istringstream in(serial);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,rep,seed,w_opt,w_linkonly,ratio,kkt_clean");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
}

TEST(Example1, RatiosNeverBelowOne) {
  Example1Config cfg;
  cfg.n_min = 2;
  cfg.n_max = 5;
  cfg.replications = 2;
  cfg.threads = 1;
  for (const Example1Row& row : run_example1(cfg)) {
    EXPECT_GE(row.ratio, 1.0 - 1e-9) << row.n << "/" << row.rep;
    EXPECT_GE(row.w_linkonly, 0.0);
  }
  cfg.n_min = 4;
  cfg.n_max = 3;
  EXPECT_THROW(run_example1(cfg), InvalidParameters);
}

TEST(Campaign, JsonIsDeterministic) {
  CampaignConfig cfg;
  cfg.theorem = 2;
  cfg.replications = 3;
  cfg.seed = 5;
  cfg.threads = 1;
  const std::string a = campaign_json(run_theorem_campaign(cfg));
  cfg.threads = 2;
  const std::string b = campaign_json(run_theorem_campaign(cfg));
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j.at("theorem"), 2);
  EXPECT_EQ(j.at("blocks")[0].at("runs"), 3);
  cfg.theorem = 4;
  EXPECT_THROW(run_theorem_campaign(cfg), InvalidParameters);
}

}  // namespace
}  // namespace netgame
