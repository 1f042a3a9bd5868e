#include "netgame/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "netgame/errors.hpp"

namespace netgame {

using nlohmann::json;

namespace {

Vector read_vector(const json& j, int n, const char* name) {
  if (j.is_number()) return Vector::Constant(n, j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw InvalidParameters(std::string("'") + name + "' must be a number or an array of length n");
  }
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = j[i].get<double>();
  return v;
}

Matrix read_matrix(const json& j, int n, const char* name) {
  if (j.is_number()) return Matrix::Constant(n, n, j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw InvalidParameters(std::string("'") + name + "' must be a number or an n x n array");
  }
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) {
      throw InvalidParameters(std::string("row ") + std::to_string(i) + " of '" + name +
                              "' has the wrong length");
    }
    for (int k = 0; k < n; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

const json& required(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidParameters(std::string("instance is missing '") + key + "'");
  return j.at(key);
}

}  // namespace

InstanceFile parse_instance(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidParameters(std::string("instance is not valid JSON: ") + e.what());
  }
  try {
    const int n = required(j, "n").get<int>();
    if (n < 2) throw InvalidParameters("n must be at least 2");
    GameParameters params(read_vector(required(j, "b"), n, "b"), read_vector(required(j, "c"), n, "c"),
                          read_matrix(required(j, "s"), n, "s"), read_matrix(required(j, "f"), n, "f"),
                          required(j, "rho").get<double>());

    WelfareSpec w = WelfareSpec::action_sum(n);
    if (j.contains("welfare")) {
      const json& wj = j.at("welfare");
      const std::string kind = wj.value("kind", std::string("weighted_action_sum"));
      if (kind == "weighted_action_sum") {
        w = WelfareSpec::weighted_action_sum(
            wj.contains("weights") ? read_vector(wj.at("weights"), n, "weights") : Vector::Ones(n));
      } else if (kind == "link_weight_sum") {
        w = WelfareSpec::link_weight_sum();
      } else {
        throw InvalidParameters("unknown welfare kind '" + kind + "'");
      }
    }

    InstanceFile out{std::move(params), std::move(w), std::nullopt, std::nullopt};
    if (j.contains("budget")) out.budget = j.at("budget").get<double>();
    if (j.contains("general")) {
      const json& g = j.at("general");
      PowerFamilySpec spec;
      spec.eta = read_vector(g.value("eta", json(2.0)), n, "eta");
      spec.gamma = read_matrix(g.value("gamma", json(2.0)), n, "gamma");
      spec.kappa = read_matrix(g.value("kappa", json(1.0)), n, "kappa");
      spec.omega = read_matrix(g.value("omega", json(1.0)), n, "omega");
      spec.validate(n);
      out.general = std::move(spec);
    }
    return out;
  } catch (const json::exception& e) {
    throw InvalidParameters(std::string("malformed instance: ") + e.what());
  }
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameters("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string instance_to_json(const InstanceFile& inst) {
  const GameParameters& p = inst.params;
  json j;
  j["n"] = p.n();
  j["b"] = to_json(p.b());
  j["c"] = to_json(p.c());
  j["s"] = to_json(p.s());
  j["f"] = to_json(p.f());
  j["rho"] = p.rho();
  if (inst.welfare.kind() == WelfareSpec::Kind::kLinkWeightSum) {
    j["welfare"] = {{"kind", "link_weight_sum"}};
  } else {
    j["welfare"] = {{"kind", "weighted_action_sum"}, {"weights", to_json(inst.welfare.weights())}};
  }
  if (inst.budget) j["budget"] = *inst.budget;
  if (inst.general) {
    j["general"] = {{"eta", to_json(inst.general->eta)},
                    {"gamma", to_json(inst.general->gamma)},
                    {"kappa", to_json(inst.general->kappa)},
                    {"omega", to_json(inst.general->omega)}};
  }
  return j.dump(2);
}

namespace {

json report_json(const EquilibriumReport& r) {
  json j;
  j["status"] = to_string(r.status);
  j["converged"] = r.converged;
  j["exists"] = r.exists;
  j["iterations"] = r.iterations;
  j["foc_residual_max"] = r.foc_residual_max;
  j["a"] = to_json(r.profile.a);
  j["g"] = to_json(r.profile.g);
  j["binding_actions"] = r.binding_actions;
  json links = json::array();
  for (const auto& [i, k] : r.binding_links) links.push_back({i, k});
  j["binding_links"] = links;
  return j;
}

}  // namespace

std::string equilibrium_to_json(const EquilibriumReport& report) { return report_json(report).dump(2); }

std::string optimization_to_json(const OptimizationResult& result, const StructureReport* structure) {
  json j;
  j["mode"] = to_string(result.mode);
  j["beta"] = to_json(result.best.beta());
  j["sigma"] = to_json(result.best.sigma());
  j["budget"] = result.best.budget();
  j["welfare"] = result.welfare_value;
  j["payment"] = result.payment;
  j["lambda_hat"] = result.lambda_hat;
  j["kkt_clean"] = result.kkt_clean();
  if (result.kkt) {
    j["kkt"] = {{"max_residual", result.kkt->max_residual},
                {"route_discrepancy", result.kkt->route_discrepancy},
                {"budget_binding", result.kkt->budget_binding},
                {"lambda_from_actions", result.kkt->lambda_from_actions}};
  } else {
    j["kkt_error"] = result.kkt_error;
  }
  if (result.grid_welfare) j["grid_welfare"] = *result.grid_welfare;
  j["equilibrium"] = report_json(result.equilibrium);
  json trace = json::array();
  for (const auto& t : result.trace) {
    trace.push_back({{"start", t.start},
                     {"origin", t.origin},
                     {"iterations", t.iterations},
                     {"welfare", t.welfare},
                     {"stationarity", t.stationarity},
                     {"converged", t.converged},
                     {"feasible", t.feasible}});
  }
  j["trace"] = trace;
  if (structure) {
    json pairs = json::array();
    for (const auto& v : structure->pairs) {
      pairs.push_back({{"i", v.i},
                       {"j", v.j},
                       {"part", v.part},
                       {"s", v.s},
                       {"sigma", v.sigma},
                       {"expected", v.expected},
                       {"verdict", to_string(v.verdict)}});
    }
    j["link_structure"] = pairs;
  }
  return j.dump(2);
}

}  // namespace netgame
