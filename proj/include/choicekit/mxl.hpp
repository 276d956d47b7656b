#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "choicekit/halton.hpp"
#include "choicekit/mixing.hpp"
#include "choicekit/mnl.hpp"
#include "choicekit/tensor.hpp"

namespace choicekit {

// Packed parameter vector for the mixed logit: the mean (or fixed value) of
// every term in spec order, followed by one sigma per random coefficient in
// term order.
struct MxlPacking {
  int n_terms = 0;
  std::vector<int> random_terms;  // term indices with a mixing distribution

  int size() const { return n_terms + static_cast<int>(random_terms.size()); }
  int sigma_slot(int term_index) const {
    for (std::size_t i = 0; i < random_terms.size(); ++i)
      if (random_terms[i] == term_index) return n_terms + static_cast<int>(i);
    return -1;
  }
};

MxlPacking make_packing(const ModelSpec& spec);

void unpack_params(const MxlPacking& packing, const Eigen::VectorXd& theta,
                   Eigen::VectorXd& mus, Eigen::VectorXd& sigmas);

// Panel simulated loglikelihood: per respondent, the situation product of
// choice probabilities is averaged over the draw rows (one shared coefficient
// draw per respondent per row), all in log space.
double simulated_panel_loglik(const DesignTensor& t, const ModelSpec& spec,
                              const MxlPacking& packing, const Eigen::VectorXd& theta,
                              const DrawMatrix& draws, int n_threads = 1);

// Analytic gradient of the simulated loglikelihood w.r.t. the packed
// parameters.
Eigen::VectorXd simulated_panel_loglik_gradient(const DesignTensor& t, const ModelSpec& spec,
                                                const MxlPacking& packing,
                                                const Eigen::VectorXd& theta,
                                                const DrawMatrix& draws, int n_threads = 1);

struct MxlOptions {
  int r_draws = 500;
  std::uint64_t seed = 20210301;
  int max_iterations = 400;
  double gradient_tolerance = 1e-6;
  int n_threads = 1;
  bool compute_null = true;
  bool compute_vcov = true;
};

struct MxlResult {
  ModelSpec spec;  // mixing rules carry the estimated (mu, sigma)
  MxlPacking packing;
  std::vector<std::string> names;  // packed parameter names
  Eigen::VectorXd theta;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd z_values;
  double loglik = 0.0;
  double null_loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string message;
  std::vector<std::string> diagnostics;  // e.g. sigma at the zero boundary
  // draw provenance
  int r_draws = 0;
  std::uint64_t seed = 0;
  std::string generator;

  double mu_of(const std::string& coefficient) const;
  double sigma_of(const std::string& coefficient) const;
};

// Maximum simulated likelihood with a warm start from the MNL fit. Sigmas are
// sign-normalized to >= 0; the covariance comes from the finite-differenced
// observed information of the simulated likelihood.
MxlResult estimate_mxl(const ChoiceDataset& ds, const ModelSpec& spec,
                       const MxlOptions& options = {});

}  // namespace choicekit
