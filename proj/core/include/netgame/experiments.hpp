#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netgame/equilibrium.hpp"
#include "netgame/general_model.hpp"
#include "netgame/model.hpp"
#include "netgame/optimizer.hpp"
#include "netgame/parallel.hpp"

namespace netgame {

struct PlannerInstance {
  GameParameters params;
  WelfareSpec welfare;
  double budget;
  std::uint64_t seed;
};

// b ~ U[0, 0.01], s ~ U[0, 0.01] per unordered pair, c = f = 10, rho = 1,
// budget 0.01, welfare = sum of link weights. Draws come from a counter
// stream keyed by `seed`: b_0..b_{n-1}, then s over PairIndex order.
PlannerInstance generate_example1_instance(int n, std::uint64_t seed);

// Stream key of replication `rep` at size `n` under a campaign seed.
std::uint64_t replication_seed(std::uint64_t campaign_seed, int n, int rep);

struct Example1Config {
  int n_min = 2;
  int n_max = 10;
  int replications = 20;
  std::uint64_t seed = 0;
  int threads = default_thread_count();
  OptimizerOptions optimizer;  // seed and extra starts are filled per replication
  SolverOptions solver;
};

struct Example1Row {
  int n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double w_opt = 0.0;
  double w_linkonly = 0.0;
  double ratio = 0.0;
  bool kkt_clean = false;
};

// The full optimizer is warm-started from the links-only optimum, so each
// ratio is at least one up to the budget retraction's round-off.
std::vector<Example1Row> run_example1(const Example1Config& cfg);

// Header `n,rep,seed,w_opt,w_linkonly,ratio,kkt_clean`; floats with 17
// significant digits.
std::string example1_csv(const std::vector<Example1Row>& rows);
// Per-n mean, min and max ratio and clean counts, one line per n.
std::string example1_summary(const std::vector<Example1Row>& rows);

enum class LinkSign { kNonNegative, kNegative, kMixed };

// Quadratic economy with action-sum welfare and a baseline equilibrium;
// negative link incentives are small enough that links can still form
// once both endpoints act.
PlannerInstance sample_planner_instance(std::uint64_t seed, int n, LinkSign sign);
PlannerInstance sample_benchmark_instance(std::uint64_t seed, int n);

struct GeneralInstance {
  PowerFamilySpec spec;
  GameParameters params;
  WelfareSpec welfare;
  double budget;
  std::uint64_t seed;
};

GeneralInstance sample_general_instance(std::uint64_t seed, int n, double gamma, double kappa,
                                        LinkSign sign);

// The quadratic economy as a member of the power family: every exponent at
// its quadratic value and link cost scales halved.
GeneralInstance nest_quadratic(const PlannerInstance& inst);

// Single-threaded multi-start settings keyed by the instance seed.
OptimizerOptions campaign_optimizer(std::uint64_t seed);
// The general model differentiates numerically, so each start costs 2 * dim
// equilibrium solves per gradient; fewer starts keep campaigns at desk scale.
OptimizerOptions general_optimizer(std::uint64_t seed);

struct CampaignRun {
  std::string block;
  int n = 0;
  std::uint64_t seed = 0;
  bool optimized = false;  // false when the optimizer threw
  std::string error;
  bool kkt_clean = false;
  double welfare = 0.0;
  double max_sigma = 0.0;
  int pass = 0;
  int violation = 0;
  int not_applicable = 0;
  int flagged = 0;
  int disagreements = 0;  // nesting block: pairs whose verdicts differ across models
};

struct CampaignBlock {
  std::string name;
  std::vector<CampaignRun> runs;
  int count_clean() const;
  int count_violations() const;
};

struct CampaignConfig {
  int theorem = 1;
  int replications = 10;
  std::uint64_t seed = 0;
  int threads = default_thread_count();
  SolverOptions solver;
};

struct CampaignSummary {
  int theorem = 0;
  std::vector<CampaignBlock> blocks;
  int hard_violations() const;
};

CampaignSummary run_theorem_campaign(const CampaignConfig& cfg);
std::string campaign_json(const CampaignSummary& summary);

}  // namespace netgame
