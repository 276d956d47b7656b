#pragma once

// Shared test fixtures: small in-memory datasets built on the reference design.

#include <string>
#include <vector>

#include "choicekit/dataset.hpp"
#include "choicekit/design.hpp"
#include "choicekit/schema.hpp"

namespace ckt {

struct FixtureRespondent {
  std::string id;
  int block = 1;
  double pivot = 30.0;
  double response_time = 100.0;
  int household_size = 2;
  int n_children = 0;
  int n_workers = 1;
  std::vector<int> chosen = {1, 2, 1, 2, 1, 2, 1, 2};  // one per situation
  std::vector<double> covariates = {};
};

inline choicekit::ChoiceDataset make_dataset(const std::vector<FixtureRespondent>& people,
                                             std::vector<std::string> covariate_names = {}) {
  using namespace choicekit;
  ChoiceDataset ds;
  ds.schema = study_schema();
  ds.design = reference_design();
  ds.covariate_names = std::move(covariate_names);
  for (const auto& p : people) {
    Respondent r;
    r.id = p.id;
    r.block = p.block;
    r.pivot_travel_time = p.pivot;
    r.response_time = p.response_time;
    r.household_size = p.household_size;
    r.n_children = p.n_children;
    r.n_workers = p.n_workers;
    r.covariates = p.covariates;
    r.covariates.resize(ds.covariate_names.size(), 0.0);
    const int idx = static_cast<int>(ds.respondents.size());
    ds.respondents.push_back(r);
    for (int s = 1; s <= 8; ++s) {
      Observation o;
      o.respondent_idx = idx;
      o.situation = s;
      o.chosen = p.chosen[static_cast<std::size_t>(s - 1)];
      o.levels = {ds.design->row(p.block, s, 1).levels, ds.design->row(p.block, s, 2).levels};
      ds.observations.push_back(std::move(o));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace ckt
