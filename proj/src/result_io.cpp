#include "choicekit/result_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace choicekit {

using nlohmann::ordered_json;

MxlResult ModelResult::as_mxl() const {
  MxlResult r;
  r.spec = spec;
  r.packing = packing;
  r.theta = theta;
  if (vcov) r.vcov = *vcov;
  r.loglik = loglik;
  r.null_loglik = null_loglik;
  r.converged = true;
  r.r_draws = r_draws;
  r.seed = seed;
  for (const auto& t : spec.terms) r.names.push_back(t.name);
  for (int k : packing.random_terms)
    r.names.push_back("sigma_" + spec.terms[static_cast<std::size_t>(k)].name);
  return r;
}

ModelResult model_result_from(const EstimationResult& fit, const ModelSpec& spec) {
  ModelResult r;
  r.engine = "mnl";
  r.spec = spec;
  for (std::size_t k = 0; k < r.spec.n_terms(); ++k) {
    r.spec.mixing[k].mu = fit.theta[static_cast<Eigen::Index>(k)];
    r.spec.mixing[k].sigma = 0.0;
  }
  r.packing = make_packing(r.spec);
  r.theta = fit.theta;
  r.vcov = fit.vcov;
  r.loglik = fit.loglik;
  r.null_loglik = fit.null_loglik;
  return r;
}

ModelResult model_result_from(const MxlResult& fit) {
  ModelResult r;
  r.engine = "mxl";
  r.spec = fit.spec;  // carries the estimated (mu, sigma)
  r.packing = fit.packing;
  r.theta = fit.theta;
  if (fit.vcov.size() > 0) r.vcov = fit.vcov;
  r.loglik = fit.loglik;
  r.null_loglik = fit.null_loglik;
  r.r_draws = fit.r_draws;
  r.seed = fit.seed;
  return r;
}

namespace {

const char* family_name(MixingFamily f) {
  switch (f) {
    case MixingFamily::fixed: return "fixed";
    case MixingFamily::normal: return "normal";
    case MixingFamily::lognormal: return "lognormal";
  }
  return "fixed";
}

const char* kind_name(TermKind k) {
  switch (k) {
    case TermKind::asc: return "asc";
    case TermKind::main: return "main";
    case TermKind::attr_x_attr: return "attr_x_attr";
    case TermKind::attr_x_cov: return "attr_x_cov";
  }
  return "main";
}

}  // namespace

std::string result_to_json(const ModelResult& r) {
  ordered_json j;
  j["schema_version"] = 1;
  j["engine"] = r.engine;
  j["model"]["schema_version"] = 1;
  j["model"]["name"] = r.spec.name;
  j["model"]["asc_on"] = r.spec.asc_on;
  j["model"]["terms"] = ordered_json::array();
  for (const auto& t : r.spec.terms) {
    ordered_json jt;
    jt["kind"] = kind_name(t.kind);
    jt["name"] = t.name;
    if (t.kind == TermKind::main) jt["attribute"] = t.attribute;
    if (t.kind == TermKind::attr_x_attr) {
      jt["a"] = t.attribute;
      jt["b"] = t.attribute_b;
    }
    if (t.kind == TermKind::attr_x_cov) {
      jt["attribute"] = t.attribute;
      jt["covariate"] = t.covariate;
    }
    j["model"]["terms"].push_back(jt);
  }
  ordered_json mixing = ordered_json::object();
  for (std::size_t k = 0; k < r.spec.n_terms(); ++k) {
    const auto& rule = r.spec.mixing[k];
    if (!rule.is_random()) continue;
    ordered_json jm;
    jm["family"] = family_name(rule.family);
    jm["sign"] = rule.sign;
    jm["mu"] = rule.mu;
    jm["sigma"] = rule.sigma;
    mixing[r.spec.terms[k].name] = jm;
  }
  j["model"]["mixing"] = mixing;

  ordered_json coeffs = ordered_json::object();
  for (std::size_t k = 0; k < r.spec.n_terms(); ++k)
    coeffs[r.spec.terms[k].name] = r.theta[static_cast<Eigen::Index>(k)];
  j["coefficients"] = coeffs;
  ordered_json sigmas = ordered_json::object();
  for (std::size_t i = 0; i < r.packing.random_terms.size(); ++i)
    sigmas[r.spec.terms[static_cast<std::size_t>(r.packing.random_terms[i])].name] =
        r.theta[r.packing.n_terms + static_cast<Eigen::Index>(i)];
  j["sigmas"] = sigmas;
  j["loglik"] = r.loglik;
  j["null_loglik"] = r.null_loglik;
  j["r_draws"] = r.r_draws;
  j["seed"] = r.seed;
  if (r.vcov) {
    ordered_json v = ordered_json::array();
    for (Eigen::Index i = 0; i < r.vcov->rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < r.vcov->cols(); ++c) row.push_back((*r.vcov)(i, c));
      v.push_back(row);
    }
    j["vcov"] = v;
  }
  return j.dump(2) + "\n";
}

ModelResult result_from_json(const std::string& json_text, const AttributeSchema& schema,
                             const std::vector<std::string>& covariate_names) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw std::runtime_error("result: schema_version 1 required");

  ModelResult r;
  r.engine = j.at("engine").get<std::string>();

  // reuse the model-config parser for the embedded spec
  r.spec = parse_model_config(j.at("model").dump(), schema, covariate_names);
  r.packing = make_packing(r.spec);
  r.theta.resize(r.packing.size());

  const auto& coeffs = j.at("coefficients");
  for (std::size_t k = 0; k < r.spec.n_terms(); ++k) {
    const std::string& name = r.spec.terms[k].name;
    if (!coeffs.contains(name))
      throw std::runtime_error("result: missing coefficient '" + name + "'");
    r.theta[static_cast<Eigen::Index>(k)] = coeffs[name].get<double>();
  }
  const auto sigmas = j.value("sigmas", nlohmann::json::object());
  for (std::size_t i = 0; i < r.packing.random_terms.size(); ++i) {
    const std::string& name =
        r.spec.terms[static_cast<std::size_t>(r.packing.random_terms[i])].name;
    if (!sigmas.contains(name))
      throw std::runtime_error("result: missing sigma for random coefficient '" + name + "'");
    r.theta[r.packing.n_terms + static_cast<Eigen::Index>(i)] = sigmas[name].get<double>();
  }
  // keep the spec's mixing rules in sync with the packed values
  for (std::size_t k = 0; k < r.spec.n_terms(); ++k) {
    r.spec.mixing[k].mu = r.theta[static_cast<Eigen::Index>(k)];
    const int slot = r.packing.sigma_slot(static_cast<int>(k));
    r.spec.mixing[k].sigma = slot >= 0 ? r.theta[slot] : 0.0;
  }

  r.loglik = j.value("loglik", 0.0);
  r.null_loglik = j.value("null_loglik", 0.0);
  r.r_draws = j.value("r_draws", 0);
  r.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("vcov")) {
    const auto& v = j["vcov"];
    Eigen::MatrixXd m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t c = 0; c < v[i].size(); ++c)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[i][c].get<double>();
    r.vcov = m;
  }
  return r;
}

ModelResult load_result(const std::string& path, const AttributeSchema& schema,
                        const std::vector<std::string>& covariate_names) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return result_from_json(ss.str(), schema, covariate_names);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace choicekit
