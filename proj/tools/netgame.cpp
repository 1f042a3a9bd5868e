// Command-line front end: solve and optimize single instances, reproduce the
// link-objective ratio experiment and run the structure-check campaigns.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "netgame/benchmark.hpp"
#include "netgame/errors.hpp"
#include "netgame/experiments.hpp"
#include "netgame/instance_io.hpp"
#include "netgame/planner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw netgame::InvalidParameters("cannot write '" + path + "'");
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace netgame;
  CLI::App app{"Network games with endogenous links: equilibria, optimal subsidies, experiments"};
  app.require_subcommand(1);

  std::string instance_path;
  auto* solve = app.add_subcommand("solve", "Solve the unsubsidized equilibrium of an instance");
  solve->add_option("--instance", instance_path, "JSON instance file")->required();

  double budget = 0.0;
  std::string mode_name = "full";
  std::string model = "endogenous";
  std::uint64_t opt_seed = 0;
  auto* optimize = app.add_subcommand("optimize", "Optimal budget-constrained subsidies");
  optimize->add_option("--instance", instance_path, "JSON instance file")->required();
  optimize->add_option("--budget", budget, "Planner budget (overrides the instance)");
  optimize->add_option("--mode", mode_name, "full, actions or links")
      ->check(CLI::IsMember({"full", "actions", "links"}));
  optimize->add_option("--model", model, "endogenous, benchmark or general")
      ->check(CLI::IsMember({"endogenous", "benchmark", "general"}));
  optimize->add_option("--seed", opt_seed, "Multi-start seed");

  Example1Config ex;
  std::string out_path;
  auto* example = app.add_subcommand("example1", "Optimal vs links-only welfare ratio by n");
  example->add_option("--n-min", ex.n_min, "Smallest number of agents")->capture_default_str();
  example->add_option("--n-max", ex.n_max, "Largest number of agents")->capture_default_str();
  example->add_option("--reps", ex.replications, "Replications per n")->capture_default_str();
  example->add_option("--seed", ex.seed, "Campaign seed")->capture_default_str();
  example->add_option("--threads", ex.threads, "Worker threads");
  example->add_option("--out", out_path, "CSV output file")->required();

  CampaignConfig camp;
  auto* campaign = app.add_subcommand("campaign", "Structure checks on sampled optima");
  campaign->add_option("--theorem", camp.theorem, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  campaign->add_option("--reps", camp.replications, "Instances per block")->capture_default_str();
  campaign->add_option("--seed", camp.seed, "Campaign seed")->capture_default_str();
  campaign->add_option("--threads", camp.threads, "Worker threads");
  campaign->add_option("--out", out_path, "JSON output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const SolverOptions solver = solver_options_from_environment();

    if (*solve) {
      const InstanceFile inst = load_instance(instance_path);
      const Intervention none = Intervention::zero(inst.params.n());
      const EquilibriumReport rep =
          inst.general ? solve_general_equilibrium(*inst.general, inst.params, none, solver)
                       : solve_equilibrium(inst.params, none, solver);
      std::cout << equilibrium_to_json(rep) << '\n';
      return kExitOk;
    }

    if (*optimize) {
      const InstanceFile inst = load_instance(instance_path);
      if (optimize->count("--budget") == 0) {
        if (!inst.budget) throw InvalidParameters("no --budget given and the instance has none");
        budget = *inst.budget;
      }
      if (inst.general && optimize->count("--model") == 0) model = "general";
      const SubsidyMode mode = subsidy_mode_from_string(mode_name);
      OptimizerOptions opts;
      opts.seed = opt_seed;

      int violations = 0;
      if (model == "general") {
        if (!inst.general) throw InvalidParameters("--model general needs a 'general' block");
        const OptimizationResult res =
            optimize_general(*inst.general, inst.params, inst.welfare, budget, mode, opts, solver);
        const RegimeReport rep = check_theorem3(*inst.general, inst.params, inst.welfare, res);
        violations = rep.count(Verdict::kViolation);
        std::cout << optimization_to_json(res) << '\n';
      } else if (model == "benchmark") {
        const OptimizationResult res =
            optimize_benchmark(inst.params, inst.welfare, budget, mode, opts, solver);
        violations = check_theorem2(inst.params, res).count(Verdict::kViolation);
        std::cout << optimization_to_json(res) << '\n';
      } else {
        const OptimizationResult res =
            mode == SubsidyMode::kFull
                ? optimize_intervention(inst.params, inst.welfare, budget, opts, solver)
                : restricted_optimize(inst.params, inst.welfare, budget, mode, opts, solver);
        const StructureReport rep = check_theorem1_structure(inst.params, inst.welfare, res);
        violations = mode == SubsidyMode::kFull ? rep.count(Verdict::kViolation) : 0;
        std::cout << optimization_to_json(res, &rep) << '\n';
      }
      return violations > 0 ? kExitViolation : kExitOk;
    }

    if (*example) {
      ex.solver = solver;
      const auto rows = run_example1(ex);
      write_file(out_path, example1_csv(rows));
      std::cout << example1_summary(rows);
      return kExitOk;
    }

    if (*campaign) {
      camp.solver = solver;
      const CampaignSummary summary = run_theorem_campaign(camp);
      write_file(out_path, campaign_json(summary));
      for (const auto& b : summary.blocks) {
        std::printf("%-28s runs=%zu clean=%d violations=%d\n", b.name.c_str(), b.runs.size(),
                    b.count_clean(), b.count_violations());
      }
      return summary.hard_violations() > 0 ? kExitViolation : kExitOk;
    }
  } catch (const InvalidParameters& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
