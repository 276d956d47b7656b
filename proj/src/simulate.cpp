#include "choicekit/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "choicekit/halton.hpp"
#include "choicekit/math.hpp"
#include "choicekit/mixing.hpp"
#include "choicekit/rng.hpp"
#include "choicekit/tensor.hpp"

namespace choicekit {

namespace {

void check_config(const SimConfig& cfg) {
  if (cfg.n_respondents < 1) throw std::runtime_error("simulate: N must be >= 1");
  if (cfg.pivot_minutes.empty() || cfg.pivot_minutes.size() != cfg.pivot_weights.size())
    throw std::runtime_error("simulate: pivot support and weights must align");
  double wsum = 0.0;
  for (double w : cfg.pivot_weights) {
    if (w < 0) throw std::runtime_error("simulate: negative pivot weight");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9)
    throw std::runtime_error("simulate: pivot weights must sum to 1");
  if (cfg.covariate_names.size() != cfg.covariate_rates.size())
    throw std::runtime_error("simulate: covariate names and rates must align");
  cfg.design.validate(cfg.schema);
  cfg.spec.validate(cfg.schema, cfg.covariate_names);
}

// utility of one design row under realized coefficients
double row_utility(const DesignRow& row, const AttributeSchema& schema, const ModelSpec& spec,
                   const Eigen::VectorXd& beta, const Respondent& resp, const ChoiceDataset& ds) {
  const auto transformed = transform_levels(row.levels, schema, resp.pivot_travel_time);
  double v = 0.0;
  for (std::size_t k = 0; k < spec.n_terms(); ++k)
    v += beta[static_cast<Eigen::Index>(k)] *
         term_value(spec.terms[k], schema, transformed, resp, ds, row.alternative, spec.asc_on);
  return v;
}

}  // namespace

ChoiceDataset simulate_dataset(const SimConfig& cfg) {
  check_config(cfg);

  ChoiceDataset ds;
  ds.schema = cfg.schema;
  ds.design = cfg.design;
  ds.covariate_names = cfg.covariate_names;
  ds.situations_per_respondent = cfg.design.situations_per_block;
  ds.n_alternatives = cfg.design.n_alternatives;

  const auto random_terms = cfg.spec.random_term_indices();
  Eigen::VectorXd mus(static_cast<Eigen::Index>(cfg.spec.n_terms()));
  Eigen::VectorXd sigmas(static_cast<Eigen::Index>(cfg.spec.n_terms()));
  for (std::size_t k = 0; k < cfg.spec.n_terms(); ++k) {
    mus[static_cast<Eigen::Index>(k)] = cfg.spec.mixing[k].mu;
    sigmas[static_cast<Eigen::Index>(k)] = cfg.spec.mixing[k].sigma;
  }

  ds.respondents.reserve(static_cast<std::size_t>(cfg.n_respondents));
  ds.observations.reserve(static_cast<std::size_t>(cfg.n_respondents) *
                          static_cast<std::size_t>(cfg.design.situations_per_block));

  for (int n = 0; n < cfg.n_respondents; ++n) {
    // one substream per respondent keeps generation order-independent
    RandomStream stream(cfg.seed, static_cast<std::uint64_t>(n) + 1);

    Respondent r;
    r.id = "sim" + std::to_string(n + 1);
    r.block = 1 + static_cast<int>(stream.next_below(static_cast<std::uint64_t>(cfg.design.n_blocks)));
    {
      const double u = stream.next_uniform();
      double acc = 0.0;
      r.pivot_travel_time = cfg.pivot_minutes.back();
      for (std::size_t i = 0; i < cfg.pivot_minutes.size(); ++i) {
        acc += cfg.pivot_weights[i];
        if (u <= acc) {
          r.pivot_travel_time = cfg.pivot_minutes[i];
          break;
        }
      }
    }
    r.response_time = 120.0;
    r.household_size = 2;
    r.n_children = 0;
    r.n_workers = 1;
    for (double rate : cfg.covariate_rates)
      r.covariates.push_back(stream.next_uniform() < rate ? 1.0 : 0.0);

    // one coefficient draw per respondent, shared across the 8 situations
    Eigen::VectorXd z(static_cast<Eigen::Index>(random_terms.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.next_normal();
    Eigen::VectorXd beta;
    realize_betas(cfg.spec, mus, sigmas, z, beta);

    const int resp_idx = static_cast<int>(ds.respondents.size());
    ds.respondents.push_back(r);

    for (int s = 1; s <= cfg.design.situations_per_block; ++s) {
      Observation obs;
      obs.respondent_idx = resp_idx;
      obs.situation = s;
      obs.levels.resize(static_cast<std::size_t>(cfg.design.n_alternatives));
      std::vector<double> v(static_cast<std::size_t>(cfg.design.n_alternatives));
      for (int j = 1; j <= cfg.design.n_alternatives; ++j) {
        const DesignRow& row = cfg.design.row(r.block, s, j);
        obs.levels[static_cast<std::size_t>(j - 1)] = row.levels;
        v[static_cast<std::size_t>(j - 1)] = row_utility(row, cfg.schema, cfg.spec, beta, r, ds);
      }
      if (cfg.mechanism == ChoiceMechanism::gumbel) {
        int best = 0;
        double best_u = -1e308;
        for (int j = 0; j < cfg.design.n_alternatives; ++j) {
          const double u = v[static_cast<std::size_t>(j)] + stream.next_gumbel();
          if (u > best_u) {
            best_u = u;
            best = j;
          }
        }
        obs.chosen = best + 1;
      } else {
        // draw directly from the implied choice probabilities
        const double lse = log_sum_exp(v.data(), v.size());
        const double u = stream.next_uniform();
        double acc = 0.0;
        obs.chosen = cfg.design.n_alternatives;
        for (int j = 0; j < cfg.design.n_alternatives; ++j) {
          acc += std::exp(v[static_cast<std::size_t>(j)] - lse);
          if (u <= acc) {
            obs.chosen = j + 1;
            break;
          }
        }
      }
      ds.observations.push_back(std::move(obs));
    }
  }
  ds.validate();
  return ds;
}

std::vector<SetProbability> simulate_choice_probabilities(const SimConfig& cfg, int r_draws) {
  check_config(cfg);
  for (const auto& t : cfg.spec.terms)
    if (t.kind == TermKind::attr_x_cov)
      throw std::runtime_error(
          "simulate_choice_probabilities: covariate interactions are not supported here");
  if (r_draws < 1) throw std::runtime_error("simulate_choice_probabilities: R must be >= 1");

  const auto random_terms = cfg.spec.random_term_indices();
  Eigen::VectorXd mus(static_cast<Eigen::Index>(cfg.spec.n_terms()));
  Eigen::VectorXd sigmas(static_cast<Eigen::Index>(cfg.spec.n_terms()));
  for (std::size_t k = 0; k < cfg.spec.n_terms(); ++k) {
    mus[static_cast<Eigen::Index>(k)] = cfg.spec.mixing[k].mu;
    sigmas[static_cast<Eigen::Index>(k)] = cfg.spec.mixing[k].sigma;
  }
  const DrawMatrix draws = random_terms.empty()
                               ? DrawMatrix{Eigen::MatrixXd::Zero(r_draws, 1), "none", cfg.seed, 0}
                               : make_draws(r_draws, static_cast<int>(random_terms.size()), cfg.seed);

  ChoiceDataset dummy;  // term_value needs a dataset context for covariates only
  dummy.covariate_names = cfg.covariate_names;
  Respondent resp;
  resp.covariates.assign(cfg.covariate_names.size(), 0.0);

  std::vector<SetProbability> out;
  Eigen::VectorXd beta;
  for (int b = 1; b <= cfg.design.n_blocks; ++b)
    for (int s = 1; s <= cfg.design.situations_per_block; ++s) {
      double p1 = 0.0;
      for (std::size_t pi = 0; pi < cfg.pivot_minutes.size(); ++pi) {
        resp.pivot_travel_time = cfg.pivot_minutes[pi];
        double p_pivot = 0.0;
        for (int r = 0; r < r_draws; ++r) {
          Eigen::VectorXd z(static_cast<Eigen::Index>(random_terms.size()));
          for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = draws.z(r, i);
          realize_betas(cfg.spec, mus, sigmas, z, beta);
          const double v1 =
              row_utility(cfg.design.row(b, s, 1), cfg.schema, cfg.spec, beta, resp, dummy);
          const double v2 =
              row_utility(cfg.design.row(b, s, 2), cfg.schema, cfg.spec, beta, resp, dummy);
          p_pivot += 1.0 / (1.0 + std::exp(v2 - v1));
        }
        p1 += cfg.pivot_weights[pi] * p_pivot / static_cast<double>(r_draws);
      }
      out.push_back({b, s, p1});
    }
  return out;
}

}  // namespace choicekit
