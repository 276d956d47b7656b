#include "choicekit/configs.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace choicekit {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

std::vector<double> parse_grid(const json& g, const std::string& where) {
  std::vector<double> out;
  if (g.is_array()) {
    for (const auto& v : g) out.push_back(v.get<double>());
  } else if (g.is_object()) {
    reject_unknown(g, {"from", "to", "points"}, where);
    const double from = g.at("from").get<double>();
    const double to = g.at("to").get<double>();
    const int points = g.at("points").get<int>();
    if (points < 2) throw std::runtime_error("config: grid needs at least 2 points in " + where);
    for (int i = 0; i < points; ++i)
      out.push_back(from + (to - from) * static_cast<double>(i) / (points - 1));
  } else {
    throw std::runtime_error("config: grid must be an array or {from,to,points} in " + where);
  }
  if (out.empty()) throw std::runtime_error("config: empty grid in " + where);
  return out;
}

std::map<std::string, double> parse_value_map(const json& j) {
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<double>();
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text, const AttributeSchema& schema) {
  const json root = json::parse(json_text);
  reject_unknown(root, {"schema_version", "name", "baseline", "mixing_draws", "seed", "sweeps"},
                 "top level");
  if (!root.contains("schema_version") || root["schema_version"].get<int>() != 1)
    throw std::runtime_error("config: schema_version 1 required");

  ScenarioConfig cfg;
  cfg.name = root.value("name", std::string("scenario"));
  if (root.contains("mixing_draws")) cfg.mixing_draws = root["mixing_draws"].get<int>();
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();

  const json& b = root.at("baseline");
  reject_unknown(b, {"mode", "design", "values", "reference_pivot_minutes"}, "baseline");
  const std::string mode = b.at("mode").get<std::string>();
  if (mode == "design") {
    cfg.mode = ScenarioConfig::BaselineMode::design;
    cfg.design_ref = b.value("design", std::string("reference"));
  } else if (mode == "explicit") {
    cfg.mode = ScenarioConfig::BaselineMode::explicit_values;
    cfg.values = parse_value_map(b.at("values"));
    for (const auto& [name, v] : cfg.values) {
      (void)v;
      if (schema.index_of(name) < 0)
        throw std::runtime_error("config: baseline names unknown attribute '" + name + "'");
    }
  } else {
    throw std::runtime_error("config: baseline mode must be 'design' or 'explicit'");
  }
  if (b.contains("reference_pivot_minutes"))
    cfg.ref_pivot_minutes = b["reference_pivot_minutes"].get<double>();

  for (const auto& s : root.at("sweeps")) {
    reject_unknown(s, {"label", "attribute", "grid", "overrides", "covariates", "group"},
                   "sweep '" + s.value("label", std::string("?")) + "'");
    SweepConfig sc;
    sc.label = s.at("label").get<std::string>();
    sc.sweep.attribute = s.at("attribute").get<std::string>();
    if (schema.index_of(sc.sweep.attribute) < 0)
      throw std::runtime_error("config: sweep '" + sc.label + "' names unknown attribute '" +
                               sc.sweep.attribute + "'");
    sc.sweep.grid = parse_grid(s.at("grid"), "sweep '" + sc.label + "'");
    if (s.contains("overrides")) {
      sc.sweep.overrides = parse_value_map(s["overrides"]);
      for (const auto& [name, v] : sc.sweep.overrides) {
        (void)v;
        if (schema.index_of(name) < 0)
          throw std::runtime_error("config: sweep '" + sc.label + "' overrides unknown attribute '" +
                                   name + "'");
      }
    }
    if (s.contains("covariates")) sc.sweep.covariates = parse_value_map(s["covariates"]);
    if (s.contains("group")) sc.group = parse_value_map(s["group"]);
    sc.sweep.mixing_draws = cfg.mixing_draws;
    sc.sweep.seed = cfg.seed;
    cfg.sweeps.push_back(std::move(sc));
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario_config(ss.str(), schema);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Baseline scenario_baseline(const ScenarioConfig& cfg, const AttributeSchema& schema,
                           const ModelSpec& spec) {
  if (cfg.mode == ScenarioConfig::BaselineMode::explicit_values)
    return explicit_baseline(schema, spec, cfg.values, cfg.ref_pivot_minutes);
  const DesignPlan plan =
      cfg.design_ref == "reference" ? reference_design() : load_design_csv(cfg.design_ref, schema);
  return design_baseline(plan, schema, spec, cfg.ref_pivot_minutes);
}

SimConfig parse_sim_config(const std::string& json_text, const AttributeSchema& schema) {
  const json root = json::parse(json_text);
  reject_unknown(root,
                 {"schema_version", "n_respondents", "design", "seed", "pivot_minutes",
                  "pivot_weights", "covariates", "model", "parameters", "sigmas", "mechanism"},
                 "top level");
  if (!root.contains("schema_version") || root["schema_version"].get<int>() != 1)
    throw std::runtime_error("config: schema_version 1 required");

  SimConfig cfg;
  cfg.schema = schema;
  cfg.n_respondents = root.at("n_respondents").get<int>();
  const std::string design_ref = root.value("design", std::string("reference"));
  cfg.design = design_ref == "reference" ? reference_design() : load_design_csv(design_ref, schema);
  cfg.seed = root.value("seed", std::uint64_t{1});
  if (root.contains("pivot_minutes")) {
    cfg.pivot_minutes.clear();
    for (const auto& v : root["pivot_minutes"]) cfg.pivot_minutes.push_back(v.get<double>());
  }
  if (root.contains("pivot_weights")) {
    cfg.pivot_weights.clear();
    for (const auto& v : root["pivot_weights"]) cfg.pivot_weights.push_back(v.get<double>());
  } else if (root.contains("pivot_minutes")) {
    cfg.pivot_weights.assign(cfg.pivot_minutes.size(),
                             1.0 / static_cast<double>(cfg.pivot_minutes.size()));
  }
  if (root.contains("covariates")) {
    for (auto it = root["covariates"].begin(); it != root["covariates"].end(); ++it) {
      cfg.covariate_names.push_back(it.key());
      cfg.covariate_rates.push_back(it.value().get<double>());
    }
  }
  const std::string mech = root.value("mechanism", std::string("gumbel"));
  if (mech == "gumbel") cfg.mechanism = ChoiceMechanism::gumbel;
  else if (mech == "probability_inversion") cfg.mechanism = ChoiceMechanism::probability_inversion;
  else throw std::runtime_error("config: mechanism must be gumbel or probability_inversion");

  cfg.spec = parse_model_config(root.at("model").dump(), schema, cfg.covariate_names);

  const auto params = root.at("parameters");
  for (std::size_t k = 0; k < cfg.spec.n_terms(); ++k) {
    const std::string& name = cfg.spec.terms[k].name;
    if (!params.contains(name))
      throw std::runtime_error("config: missing true parameter '" + name + "'");
    cfg.spec.mixing[k].mu = params[name].get<double>();
  }
  const auto sigmas = root.value("sigmas", json::object());
  for (int k : cfg.spec.random_term_indices()) {
    const std::string& name = cfg.spec.terms[static_cast<std::size_t>(k)].name;
    if (!sigmas.contains(name))
      throw std::runtime_error("config: missing true sigma for '" + name + "'");
    cfg.spec.mixing[static_cast<std::size_t>(k)].sigma = sigmas[name].get<double>();
  }
  return cfg;
}

SimConfig load_sim_config(const std::string& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_sim_config(ss.str(), schema);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace choicekit
