#include "choicekit/model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace choicekit {

void ModelSpec::validate(const AttributeSchema& schema,
                         const std::vector<std::string>& covariate_names) const {
  if (terms.empty()) throw std::runtime_error("model spec: at least one term required");
  if (mixing.size() != terms.size())
    throw std::runtime_error("model spec: mixing rules not aligned with terms");
  if (asc_on < 1) throw std::runtime_error("model spec: asc_on must be a 1-based alternative");

  auto has_cov = [&](const std::string& c) {
    for (const auto& n : covariate_names)
      if (n == c) return true;
    return false;
  };

  int asc_count = 0;
  std::set<std::string> names;
  std::set<std::string> signatures;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (t.name.empty()) throw std::runtime_error("model spec: unnamed term");
    if (!names.insert(t.name).second)
      throw std::runtime_error("model spec: duplicate coefficient name '" + t.name + "'");
    std::string sig;
    switch (t.kind) {
      case TermKind::asc:
        ++asc_count;
        sig = "asc";
        break;
      case TermKind::main:
        if (schema.index_of(t.attribute) < 0)
          throw std::runtime_error("model spec: term '" + t.name + "' references unknown attribute '" +
                                   t.attribute + "'");
        sig = "main:" + t.attribute;
        break;
      case TermKind::attr_x_attr: {
        for (const auto& a : {t.attribute, t.attribute_b})
          if (schema.index_of(a) < 0)
            throw std::runtime_error("model spec: term '" + t.name +
                                     "' references unknown attribute '" + a + "'");
        if (t.attribute == t.attribute_b)
          throw std::runtime_error("model spec: term '" + t.name + "' interacts an attribute with itself");
        // symmetric signature so (a,b) and (b,a) duplicates are caught
        sig = "axa:" + std::min(t.attribute, t.attribute_b) + "*" + std::max(t.attribute, t.attribute_b);
        break;
      }
      case TermKind::attr_x_cov:
        if (schema.index_of(t.attribute) < 0)
          throw std::runtime_error("model spec: term '" + t.name + "' references unknown attribute '" +
                                   t.attribute + "'");
        if (!has_cov(t.covariate))
          throw std::runtime_error("model spec: term '" + t.name + "' references unknown covariate '" +
                                   t.covariate + "'");
        sig = "axc:" + t.attribute + "*" + t.covariate;
        break;
    }
    if (!signatures.insert(sig).second)
      throw std::runtime_error("model spec: duplicate term (" + sig + ")");
    if (mixing[i].is_random() && t.kind != TermKind::main)
      throw std::runtime_error("model spec: mixing rule on non-main term '" + t.name + "'");
    if (mixing[i].sigma < 0)
      throw std::runtime_error("model spec: sigma must be >= 0 on '" + t.name + "'");
  }
  if (asc_count > 1) throw std::runtime_error("model spec: ASC appears more than once");
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

MixingRule parse_mixing(const json& m, const std::string& where) {
  reject_unknown_keys(m, {"family", "sign", "mu", "sigma"}, where);
  MixingRule rule;
  const std::string fam = m.at("family").get<std::string>();
  if (fam == "fixed") rule.family = MixingFamily::fixed;
  else if (fam == "normal") rule.family = MixingFamily::normal;
  else if (fam == "lognormal") rule.family = MixingFamily::lognormal;
  else throw std::runtime_error("config: unknown mixing family '" + fam + "' in " + where);
  if (m.contains("sign")) {
    rule.sign = m["sign"].get<int>();
    if (rule.sign != 1 && rule.sign != -1)
      throw std::runtime_error("config: mixing sign must be +1 or -1 in " + where);
  }
  if (m.contains("mu")) rule.mu = m["mu"].get<double>();
  if (m.contains("sigma")) rule.sigma = m["sigma"].get<double>();
  return rule;
}

}  // namespace

ModelSpec parse_model_config(const std::string& json_text, const AttributeSchema& schema,
                             const std::vector<std::string>& covariate_names) {
  json root = json::parse(json_text);
  reject_unknown_keys(root, {"schema_version", "name", "asc_on", "terms", "mixing"}, "top level");
  if (!root.contains("schema_version") || root["schema_version"].get<int>() != 1)
    throw std::runtime_error("config: schema_version 1 required");

  ModelSpec spec;
  if (root.contains("name")) spec.name = root["name"].get<std::string>();
  if (root.contains("asc_on")) spec.asc_on = root["asc_on"].get<int>();

  for (const auto& t : root.at("terms")) {
    TermSpec term;
    const std::string kind = t.at("kind").get<std::string>();
    const std::string where = "term '" + t.value("name", std::string("?")) + "'";
    term.name = t.at("name").get<std::string>();
    if (kind == "asc") {
      reject_unknown_keys(t, {"kind", "name"}, where);
      term.kind = TermKind::asc;
    } else if (kind == "main") {
      reject_unknown_keys(t, {"kind", "name", "attribute"}, where);
      term.kind = TermKind::main;
      term.attribute = t.at("attribute").get<std::string>();
    } else if (kind == "attr_x_attr") {
      reject_unknown_keys(t, {"kind", "name", "a", "b"}, where);
      term.kind = TermKind::attr_x_attr;
      term.attribute = t.at("a").get<std::string>();
      term.attribute_b = t.at("b").get<std::string>();
    } else if (kind == "attr_x_cov") {
      reject_unknown_keys(t, {"kind", "name", "attribute", "covariate"}, where);
      term.kind = TermKind::attr_x_cov;
      term.attribute = t.at("attribute").get<std::string>();
      term.covariate = t.at("covariate").get<std::string>();
    } else {
      throw std::runtime_error("config: unknown term kind '" + kind + "'");
    }
    spec.terms.push_back(std::move(term));
    spec.mixing.push_back(MixingRule{});
  }

  if (root.contains("mixing")) {
    for (auto it = root["mixing"].begin(); it != root["mixing"].end(); ++it) {
      const int idx = spec.term_index(it.key());
      if (idx < 0)
        throw std::runtime_error("config: mixing rule for unknown coefficient '" + it.key() + "'");
      spec.mixing[static_cast<std::size_t>(idx)] =
          parse_mixing(it.value(), "mixing '" + it.key() + "'");
    }
  }

  spec.validate(schema, covariate_names);
  return spec;
}

ModelSpec load_model_config(const std::string& path, const AttributeSchema& schema,
                            const std::vector<std::string>& covariate_names) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model_config(ss.str(), schema, covariate_names);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<std::string> study_covariate_names() {
  return {"age_below_40",
          "male",
          "unemployed_or_retired",
          "full_time_employed",
          "married",
          "income_above_10k",
          "bachelor_degree",
          "asian_or_asian_british",
          "satisfied_govt_covid",
          "tested_covid_positive",
          "mask_helps_control_covid",
          "wears_mask_always",
          "mask_respiratory_issues",
          "worried_vaccine_side_effects",
          "vaccine_not_powerful_long_term"};
}

namespace {

void add_main(ModelSpec& s, const std::string& attr, MixingRule mix = {}) {
  s.terms.push_back({TermKind::main, "b_" + attr, attr, "", ""});
  s.mixing.push_back(mix);
}
void add_axa(ModelSpec& s, const std::string& a, const std::string& b) {
  s.terms.push_back({TermKind::attr_x_attr, "d_" + a + "_x_" + b, a, b, ""});
  s.mixing.push_back({});
}
void add_axc(ModelSpec& s, const std::string& a, const std::string& c) {
  s.terms.push_back({TermKind::attr_x_cov, "g_" + a + "_x_" + c, a, "", c});
  s.mixing.push_back({});
}

}  // namespace

ModelSpec mnl_main_effects_spec(const AttributeSchema& schema) {
  ModelSpec s;
  s.name = "mnl-main-effects";
  s.terms.push_back({TermKind::asc, "asc_alt2", "", "", ""});
  s.mixing.push_back({});
  for (const auto& a : schema.attributes) add_main(s, a.name);
  s.validate(schema, {});
  return s;
}

ModelSpec mnl_interactions_spec(const AttributeSchema& schema) {
  ModelSpec s;
  s.name = "mnl-interactions";
  s.terms.push_back({TermKind::asc, "asc_alt2", "", "", ""});
  s.mixing.push_back({});
  for (const auto& a : schema.attributes)
    if (a.name != "standing") add_main(s, a.name);
  add_axa(s, "travel_time", "mask");
  add_axa(s, "crowding", "vaccine");
  add_axa(s, "travel_time", "covid_cases");
  s.validate(schema, {});
  return s;
}

ModelSpec mxl_interactions_spec(const AttributeSchema& schema) {
  ModelSpec s;
  s.name = "mxl-interactions";
  s.terms.push_back({TermKind::asc, "asc_alt2", "", "", ""});
  s.mixing.push_back({});
  add_main(s, "crowding", {MixingFamily::lognormal, -1, 0.0, 0.0});
  add_main(s, "travel_time", {MixingFamily::lognormal, -1, 0.0, 0.0});
  add_main(s, "covid_cases", {MixingFamily::lognormal, -1, 0.0, 0.0});
  add_main(s, "mask", {MixingFamily::normal, +1, 0.0, 0.0});
  add_main(s, "vaccine", {MixingFamily::lognormal, +1, 0.0, 0.0});
  add_axa(s, "travel_time", "mask");
  add_axa(s, "crowding", "vaccine");
  s.validate(schema, {});
  return s;
}

ModelSpec mxl_covariates_spec(const AttributeSchema& schema,
                              const std::vector<std::string>& covariate_names) {
  ModelSpec s = mxl_interactions_spec(schema);
  s.name = "mxl-covariates";
  add_axc(s, "crowding", "age_below_40");
  add_axc(s, "crowding", "unemployed_or_retired");
  add_axc(s, "crowding", "satisfied_govt_covid");
  add_axc(s, "crowding", "tested_covid_positive");
  add_axc(s, "crowding", "bachelor_degree");
  add_axc(s, "crowding", "married");
  add_axc(s, "travel_time", "mask_helps_control_covid");
  add_axc(s, "covid_cases", "full_time_employed");
  add_axc(s, "covid_cases", "wears_mask_always");
  add_axc(s, "mask", "age_below_40");
  add_axc(s, "mask", "male");
  add_axc(s, "mask", "unemployed_or_retired");
  add_axc(s, "mask", "mask_helps_control_covid");
  add_axc(s, "mask", "wears_mask_always");
  add_axc(s, "mask", "mask_respiratory_issues");
  add_axc(s, "mask", "income_above_10k");
  add_axc(s, "vaccine", "worried_vaccine_side_effects");
  add_axc(s, "vaccine", "vaccine_not_powerful_long_term");
  add_axc(s, "vaccine", "mask_helps_control_covid");
  add_axc(s, "vaccine", "asian_or_asian_british");
  s.validate(schema, covariate_names);
  return s;
}

}  // namespace choicekit
