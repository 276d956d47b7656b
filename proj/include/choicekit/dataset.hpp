#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choicekit/design.hpp"
#include "choicekit/schema.hpp"

namespace choicekit {

struct Respondent {
  std::string id;
  int block = 0;
  double pivot_travel_time = 0.0;  // minutes
  double response_time = 0.0;      // seconds
  int household_size = 0;
  int n_children = 0;
  int n_workers = 0;
  std::vector<double> covariates;  // aligned with ChoiceDataset::covariate_names, values 0/1
};

// One answered choice situation. Raw attribute levels are stored per
// alternative so a dataset is self-contained even without a linked design.
struct Observation {
  int respondent_idx = -1;  // index into ChoiceDataset::respondents
  int situation = 0;        // 1..situations_per_block within the respondent's block
  int chosen = 0;           // alternative index, 1-based
  std::vector<std::vector<double>> levels;  // [alternative][attribute], raw units
};

struct ChoiceDataset {
  AttributeSchema schema;
  std::optional<DesignPlan> design;
  std::vector<std::string> covariate_names;
  std::vector<Respondent> respondents;
  std::vector<Observation> observations;  // grouped by respondent, situation order

  int n_alternatives = 2;
  int situations_per_respondent = 8;

  const Respondent& respondent_of(const Observation& o) const {
    return respondents[static_cast<std::size_t>(o.respondent_idx)];
  }
  int covariate_index(const std::string& name) const {
    for (std::size_t i = 0; i < covariate_names.size(); ++i)
      if (covariate_names[i] == name) return static_cast<int>(i);
    return -1;
  }

  void validate() const;
};

// Loads the long-format choice CSV plus the respondent metadata CSV.
// If a design is supplied, every observation's block/situation/levels are
// checked against it.
ChoiceDataset load_responses(const std::string& choices_path,
                             const std::string& respondents_path,
                             const AttributeSchema& schema,
                             const std::optional<DesignPlan>& design = std::nullopt);

void save_responses(const ChoiceDataset& ds, const std::string& choices_path,
                    const std::string& respondents_path);

struct FilterResult {
  ChoiceDataset retained;
  std::vector<std::string> excluded_ids;
};

// Excludes respondents with response time below fraction * median(response
// time), the median taken over the input dataset before any exclusion.
FilterResult filter_fast_responders(const ChoiceDataset& ds, double fraction = 0.40);

// Excludes respondents who chose the same alternative in all their situations.
FilterResult filter_straight_liners(const ChoiceDataset& ds);

// Excludes respondents whose household size is below children + workers.
FilterResult filter_inconsistent(const ChoiceDataset& ds);

struct ScreeningReport {
  std::vector<std::string> fast_responders;
  std::vector<std::string> straight_liners;
  std::vector<std::string> inconsistent;
  std::vector<std::string> excluded_union;
  std::size_t n_input = 0;
  std::size_t n_retained = 0;
};

// Applies all three rules to the raw dataset and removes the union of the
// exclusion sets, which makes the result independent of rule order.
std::pair<ChoiceDataset, ScreeningReport> screen_dataset(const ChoiceDataset& ds,
                                                         double fast_fraction = 0.40);

// Keeps only the respondents whose ids are NOT in `exclude` (helper shared by
// the filters; preserves respondent order).
ChoiceDataset drop_respondents(const ChoiceDataset& ds,
                               const std::vector<std::string>& exclude);

}  // namespace choicekit
