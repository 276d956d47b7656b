#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "choicekit/design.hpp"
#include "choicekit/model.hpp"

namespace choicekit {

// Multivariate-normal prior over the design-model coefficients, integrated by
// quasi-random draws for the Bayesian D-error.
struct PriorSpec {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;  // diagonal
  int n_draws = 64;
  std::uint64_t seed = 20210301;
};

// Main effects plus all two-way attribute interactions, no ASC: the model the
// study design was built to identify.
ModelSpec design_model_spec(const AttributeSchema& schema);

// Documented default prior: directional means from the main-effects fit
// scaled to regressor units, zero on standing/mask and on interactions, with
// generous sign-uncertainty variances.
PriorSpec default_design_prior(const ModelSpec& design_spec);

// det(I(theta))^(-1/p) with I summed over all choice sets; +infinity when the
// information matrix is singular (rank_out then reports the achieved rank).
// Pivoted attributes are transformed at `ref_pivot_minutes`.
double d_error(const DesignPlan& plan, const AttributeSchema& schema, const ModelSpec& spec,
               const Eigen::VectorXd& theta, double ref_pivot_minutes = 30.0,
               int* rank_out = nullptr);

// Mean d_error over seeded quasi-random prior draws (fixed draw set).
double bayesian_d_error(const DesignPlan& plan, const AttributeSchema& schema,
                        const ModelSpec& spec, const PriorSpec& prior,
                        double ref_pivot_minutes = 30.0);

struct ImproveOptions {
  int iterations = 2000;
  std::uint64_t seed = 1;
  double ref_pivot_minutes = 30.0;
};

struct ImproveResult {
  DesignPlan plan;
  double start_d_error = 0.0;
  double final_d_error = 0.0;
  int accepted_moves = 0;
  int proposed_moves = 0;
};

// Constrained coordinate exchange over levels and over which attributes are
// held constant per set. Every accepted move keeps the plan feasible and
// keeps exactly the starting number of constant attributes per set.
ImproveResult improve_design(const DesignPlan& start, const AttributeSchema& schema,
                             const std::vector<LevelConstraint>& constraints,
                             const ModelSpec& spec, const PriorSpec& prior,
                             const ImproveOptions& options = {});

}  // namespace choicekit
