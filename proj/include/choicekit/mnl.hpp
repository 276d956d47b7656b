#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "choicekit/model.hpp"
#include "choicekit/tensor.hpp"

namespace choicekit {

// Binary logit probabilities from two systematic utilities, computed through
// the utility difference so large |V| cannot overflow.
std::pair<double, double> mnl_probability(double v1, double v2);

struct EstimationResult {
  std::vector<std::string> names;
  Eigen::VectorXd theta;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd z_values;
  double loglik = 0.0;
  double null_loglik = 0.0;  // constant-only reference fit
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string message;
};

double mnl_loglikelihood(const DesignTensor& t, const Eigen::VectorXd& theta);
Eigen::VectorXd mnl_loglik_gradient(const DesignTensor& t, const Eigen::VectorXd& theta);
Eigen::MatrixXd mnl_loglik_hessian(const DesignTensor& t, const Eigen::VectorXd& theta);

struct MnlOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  double collinearity_threshold = 1e10;  // condition number of X'X
  bool compute_null = true;              // also fit the constant-only model
};

// Maximum likelihood from a zero start; covariance from the inverse observed
// information. Throws on collinear columns; reports non-convergence and
// singular Hessians in the result.
EstimationResult estimate_mnl(const ChoiceDataset& ds, const ModelSpec& spec,
                              const MnlOptions& options = {});

struct LrTest {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Likelihood-ratio test of nested fits: 2*(ll_full - ll_restricted) ~ chi2(df).
LrTest lr_test(double loglik_restricted, double loglik_full, int df, double tolerance = 1e-6);

struct AblationRow {
  std::string attribute;  // empty for the constant-only reference row
  double loglik = 0.0;
  double gain_over_null = 0.0;
  bool converged = false;
};

// Fits {ASC + one attribute} per attribute, against the constant-only
// reference, ranking attributes by likelihood gain.
std::vector<AblationRow> per_attribute_ablation(const ChoiceDataset& ds,
                                                const MnlOptions& options = {});

}  // namespace choicekit
