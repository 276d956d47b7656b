#include "choicekit/mixing.hpp"

#include <cmath>
#include <stdexcept>

#include "choicekit/math.hpp"
#include "choicekit/rng.hpp"

namespace choicekit {

namespace {
const double kZ05 = -1.6448536269514722;  // 5th percentile of the standard normal
}

double realize_beta(const MixingRule& rule, double z) {
  switch (rule.family) {
    case MixingFamily::fixed: return rule.mu;
    case MixingFamily::normal: return rule.mu + rule.sigma * z;
    case MixingFamily::lognormal: return rule.sign * std::exp(rule.mu + rule.sigma * z);
  }
  return rule.mu;
}

void realize_betas(const ModelSpec& spec, const Eigen::VectorXd& mus,
                   const Eigen::VectorXd& sigmas, const Eigen::VectorXd& z,
                   Eigen::VectorXd& beta_out) {
  beta_out.resize(static_cast<Eigen::Index>(spec.n_terms()));
  Eigen::Index zi = 0;
  for (std::size_t k = 0; k < spec.n_terms(); ++k) {
    MixingRule rule = spec.mixing[k];
    rule.mu = mus[static_cast<Eigen::Index>(k)];
    rule.sigma = sigmas[static_cast<Eigen::Index>(k)];
    beta_out[static_cast<Eigen::Index>(k)] = realize_beta(rule, rule.is_random() ? z[zi++] : 0.0);
  }
  if (zi != z.size()) throw std::runtime_error("realize_betas: draw length mismatch");
}

DistributionSummary lognormal_summary(double mu, double sigma, int sign) {
  if (sigma < 0) throw std::domain_error("lognormal_summary: sigma must be >= 0");
  DistributionSummary s;
  const double mean = std::exp(mu + 0.5 * sigma * sigma);
  s.mean = sign * mean;
  s.std_dev = mean * std::sqrt(std::exp(sigma * sigma) - 1.0);
  s.p5 = sign * std::exp(mu + sigma * kZ05);
  s.p50 = sign * std::exp(mu);
  s.p95 = sign * std::exp(mu - sigma * kZ05);
  if (sign < 0) std::swap(s.p5, s.p95);
  return s;
}

DistributionSummary normal_summary(double mu, double sigma) {
  if (sigma < 0) throw std::domain_error("normal_summary: sigma must be >= 0");
  DistributionSummary s;
  s.mean = mu;
  s.std_dev = sigma;
  s.p5 = mu + sigma * kZ05;
  s.p50 = mu;
  s.p95 = mu - sigma * kZ05;
  return s;
}

double share_negative(double mu, double sigma, double shift) {
  const double mu_eff = mu + shift;
  if (sigma == 0.0) return mu_eff < 0.0 ? 1.0 : 0.0;
  if (sigma < 0.0) throw std::domain_error("share_negative: sigma must be >= 0");
  return normal_cdf(-mu_eff / sigma);
}

ParameterSampler::ParameterSampler(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& vcov,
                                   int m_draws, std::uint64_t seed) {
  const Eigen::Index p = theta_hat.size();
  if (vcov.rows() != p || vcov.cols() != p)
    throw std::runtime_error("parameter sampler: vcov dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vcov);
  const double min_eig = es.eigenvalues().minCoeff();
  const double max_eig = es.eigenvalues().maxCoeff();
  if (min_eig < -1e-8 * std::max(1.0, max_eig))
    throw std::runtime_error("parameter sampler: vcov not positive semidefinite (smallest eigenvalue " +
                             std::to_string(min_eig) + ")");
  const Eigen::MatrixXd factor =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  draws_.resize(m_draws, p);
  for (int m = 0; m < m_draws; ++m) {
    RandomStream stream(seed, static_cast<std::uint64_t>(m) + 1);
    Eigen::VectorXd u(p);
    for (Eigen::Index i = 0; i < p; ++i) u[i] = stream.next_normal();
    draws_.row(m) = (theta_hat + factor * u).transpose();
  }
}

double ParameterSampler::std_error(const std::function<double(const Eigen::VectorXd&)>& stat) const {
  const Eigen::Index m = draws_.rows();
  double sum = 0.0, sum2 = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = stat(draws_.row(i).transpose());
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / static_cast<double>(m);
  const double var = std::max(0.0, sum2 / static_cast<double>(m) - mean * mean);
  return std::sqrt(var * static_cast<double>(m) / static_cast<double>(m - 1));
}

double summary_std_error(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& vcov,
                         const std::function<double(const Eigen::VectorXd&)>& stat, int m_draws,
                         std::uint64_t seed) {
  return ParameterSampler(theta_hat, vcov, m_draws, seed).std_error(stat);
}

}  // namespace choicekit
