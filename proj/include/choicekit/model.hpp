#pragma once

#include <string>
#include <vector>

#include "choicekit/schema.hpp"

namespace choicekit {

enum class MixingFamily { fixed, normal, lognormal };

// Distribution of one random coefficient. For the lognormal, `sign` is the
// utility-side sign applied to the always-positive variate; (mu, sigma)
// always parameterize the underlying normal.
struct MixingRule {
  MixingFamily family = MixingFamily::fixed;
  int sign = +1;  // only meaningful for lognormal
  double mu = 0.0;
  double sigma = 0.0;

  bool is_random() const { return family != MixingFamily::fixed; }
};

enum class TermKind { asc, main, attr_x_attr, attr_x_cov };

struct TermSpec {
  TermKind kind = TermKind::main;
  std::string name;        // coefficient name
  std::string attribute;   // main / interactions / covariate terms
  std::string attribute_b; // attr_x_attr only
  std::string covariate;   // attr_x_cov only
};

// Declarative utility specification: ordered terms plus a mixing rule per
// coefficient ("fixed" for plain MNL coefficients).
struct ModelSpec {
  std::string name;
  std::vector<TermSpec> terms;
  std::vector<MixingRule> mixing;  // aligned with terms
  int asc_on = 2;                  // alternative the ASC attaches to

  std::size_t n_terms() const { return terms.size(); }

  int term_index(const std::string& coefficient_name) const {
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i].name == coefficient_name) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> random_term_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < mixing.size(); ++i)
      if (mixing[i].is_random()) out.push_back(static_cast<int>(i));
    return out;
  }

  void validate(const AttributeSchema& schema,
                const std::vector<std::string>& covariate_names) const;
};

// Parses the documented JSON model configuration (schema_version 1).
// Unknown keys are errors.
ModelSpec parse_model_config(const std::string& json_text, const AttributeSchema& schema,
                             const std::vector<std::string>& covariate_names);
ModelSpec load_model_config(const std::string& path, const AttributeSchema& schema,
                            const std::vector<std::string>& covariate_names);

// Ready-made specifications mirroring the published model tables.
ModelSpec mnl_main_effects_spec(const AttributeSchema& schema);   // ASC + 6 mains
ModelSpec mnl_interactions_spec(const AttributeSchema& schema);   // spec with 3 two-way interactions
ModelSpec mxl_interactions_spec(const AttributeSchema& schema);   // 5 random mains + 2 interactions
ModelSpec mxl_covariates_spec(const AttributeSchema& schema,
                              const std::vector<std::string>& covariate_names);

// Canonical covariate order used by shipped configs and the simulator.
std::vector<std::string> study_covariate_names();

}  // namespace choicekit
