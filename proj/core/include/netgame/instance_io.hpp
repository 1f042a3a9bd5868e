#pragma once

#include <optional>
#include <string>

#include "netgame/benchmark.hpp"
#include "netgame/equilibrium.hpp"
#include "netgame/general_model.hpp"
#include "netgame/model.hpp"
#include "netgame/planner.hpp"

namespace netgame {

/// One economy as read from a JSON instance file:
///
///   {"n": 2, "b": [...], "c": [...], "s": [[...]], "f": [[...]], "rho": 0.5,
///    "budget": 0.05,
///    "welfare": {"kind": "weighted_action_sum", "weights": [...]},
///    "general": {"eta": [...], "gamma": [[...]], "kappa": [[...]], "omega": [[...]]}}
///
/// `c` and `f` may also be scalars; `welfare` defaults to the plain action
/// sum; any `general` entry may be a scalar that applies to every agent or
/// pair (omega defaults to 1).
struct InstanceFile {
  GameParameters params;
  WelfareSpec welfare;
  std::optional<double> budget;
  std::optional<PowerFamilySpec> general;
};

InstanceFile parse_instance(const std::string& json_text);
InstanceFile load_instance(const std::string& path);
std::string instance_to_json(const InstanceFile& inst);

std::string equilibrium_to_json(const EquilibriumReport& report);
std::string optimization_to_json(const OptimizationResult& result,
                                 const StructureReport* structure = nullptr);

}  // namespace netgame
