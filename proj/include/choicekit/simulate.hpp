#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "choicekit/dataset.hpp"
#include "choicekit/design.hpp"
#include "choicekit/model.hpp"

namespace choicekit {

enum class ChoiceMechanism { gumbel, probability_inversion };

// Generating process for synthetic respondents: uniform block assignment,
// weighted pivot times, independent Bernoulli covariates, one coefficient
// draw per respondent shared across the 8 situations, and Gumbel-noise
// choices (or direct sampling from the implied probabilities).
struct SimConfig {
  int n_respondents = 0;
  DesignPlan design;
  AttributeSchema schema;
  std::vector<double> pivot_minutes = {15, 30, 45, 60};
  std::vector<double> pivot_weights = {0.25, 0.25, 0.25, 0.25};
  std::vector<std::string> covariate_names;
  std::vector<double> covariate_rates;
  ModelSpec spec;  // mixing rules carry the true (mu, sigma); fixed terms use mu
  std::uint64_t seed = 1;
  ChoiceMechanism mechanism = ChoiceMechanism::gumbel;
};

ChoiceDataset simulate_dataset(const SimConfig& cfg);

struct SetProbability {
  int block = 0, situation = 0;
  double p1 = 0.0;  // choice probability of alternative 1, averaged over
                    // mixing draws and the pivot distribution
};

// Mixing-averaged per-set probabilities (the closed-form oracle for simulated
// choice frequencies). Requires a spec without covariate interactions.
std::vector<SetProbability> simulate_choice_probabilities(const SimConfig& cfg, int r_draws);

}  // namespace choicekit
