#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "choicekit/model.hpp"

namespace choicekit {

// Coefficient value for one standard-normal draw under a mixing rule:
// normal -> mu + sigma z, lognormal -> sign * exp(mu + sigma z), fixed -> mu.
double realize_beta(const MixingRule& rule, double z);

// Realizes all coefficients of a spec for one draw row; `z` holds one value
// per random coefficient in term order, `theta` the packed parameters (see
// mxl.hpp for the packing).
void realize_betas(const ModelSpec& spec, const Eigen::VectorXd& mus,
                   const Eigen::VectorXd& sigmas, const Eigen::VectorXd& z,
                   Eigen::VectorXd& beta_out);

struct DistributionSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  double p5 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;

  std::vector<double> as_vector() const { return {mean, std_dev, p5, p50, p95}; }
};

// Closed-form summaries of the lognormal implied by underlying-normal (mu,
// sigma); `sign` maps to the utility-side convention.
DistributionSummary lognormal_summary(double mu, double sigma, int sign = +1);
DistributionSummary normal_summary(double mu, double sigma);

// P(coefficient < 0) for a normal coefficient whose mean is shifted by an
// interaction: Phi(-(mu + shift) / sigma).
double share_negative(double mu, double sigma, double shift = 0.0);

// Simulation standard error of a summary functional: draws M parameter
// vectors from N(theta_hat, vcov) and returns the sample standard deviation
// of stat(theta).
double summary_std_error(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& vcov,
                         const std::function<double(const Eigen::VectorXd&)>& stat,
                         int m_draws = 10000, std::uint64_t seed = 20210301);

// Factorized multivariate-normal sampler reused across summary functionals so
// all statistics see the same parameter draws.
class ParameterSampler {
 public:
  ParameterSampler(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& vcov,
                   int m_draws, std::uint64_t seed);
  const Eigen::MatrixXd& draws() const { return draws_; }  // M x p
  double std_error(const std::function<double(const Eigen::VectorXd&)>& stat) const;

 private:
  Eigen::MatrixXd draws_;
};

}  // namespace choicekit
