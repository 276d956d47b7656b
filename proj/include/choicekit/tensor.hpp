#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "choicekit/dataset.hpp"
#include "choicekit/model.hpp"

namespace choicekit {

// Model design matrix: one row per (respondent, situation, alternative), one
// column per term of the ModelSpec, in transformed regressor units.
struct DesignTensor {
  int n_respondents = 0;
  int n_situations = 0;   // per respondent
  int n_alternatives = 0;
  int n_terms = 0;
  Eigen::MatrixXd x;          // (N*S*J) x K
  std::vector<int> chosen;    // per (n, s), 0-based alternative index

  Eigen::Index row(int n, int s, int j) const {
    return (static_cast<Eigen::Index>(n) * n_situations + s) * n_alternatives + j;
  }
  int choice(int n, int s) const { return chosen[static_cast<std::size_t>(n) * n_situations + s]; }
};

// Raw profile -> transformed attribute vector for one respondent.
std::vector<double> transform_levels(const std::vector<double>& raw,
                                     const AttributeSchema& schema,
                                     std::optional<double> pivot_minutes);

// Evaluates one term's column value from transformed attributes.
double term_value(const TermSpec& term, const AttributeSchema& schema,
                  const std::vector<double>& transformed, const Respondent& respondent,
                  const ChoiceDataset& ds, int alternative_1based, int asc_on);

DesignTensor expand(const ChoiceDataset& ds, const ModelSpec& spec);

}  // namespace choicekit
