#include "choicekit/mnl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "choicekit/math.hpp"
#include "choicekit/optim.hpp"

namespace choicekit {

std::pair<double, double> mnl_probability(double v1, double v2) {
  if (!std::isfinite(v1) || !std::isfinite(v2))
    throw std::domain_error("mnl_probability: non-finite utility");
  const double p1 = 1.0 / (1.0 + std::exp(v2 - v1));
  return {p1, 1.0 - p1};
}

namespace {

// per-situation choice probabilities for general J, stable in log space
inline void situation_log_probs(const DesignTensor& t, const Eigen::VectorXd& theta, int n, int s,
                                Eigen::VectorXd& v_buf) {
  const int J = t.n_alternatives;
  for (int j = 0; j < J; ++j) v_buf[j] = t.x.row(t.row(n, s, j)).dot(theta);
  const double lse = log_sum_exp(v_buf.data(), static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) v_buf[j] -= lse;
}

}  // namespace

double mnl_loglikelihood(const DesignTensor& t, const Eigen::VectorXd& theta) {
  double ll = 0.0;
  Eigen::VectorXd v(t.n_alternatives);
  for (int n = 0; n < t.n_respondents; ++n)
    for (int s = 0; s < t.n_situations; ++s) {
      situation_log_probs(t, theta, n, s, v);
      ll += v[t.choice(n, s)];
    }
  return ll;
}

Eigen::VectorXd mnl_loglik_gradient(const DesignTensor& t, const Eigen::VectorXd& theta) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(t.n_terms);
  Eigen::VectorXd v(t.n_alternatives);
  for (int n = 0; n < t.n_respondents; ++n)
    for (int s = 0; s < t.n_situations; ++s) {
      situation_log_probs(t, theta, n, s, v);
      const int y = t.choice(n, s);
      for (int j = 0; j < t.n_alternatives; ++j) {
        const double w = (j == y ? 1.0 : 0.0) - std::exp(v[j]);
        grad.noalias() += w * t.x.row(t.row(n, s, j)).transpose();
      }
    }
  return grad;
}

Eigen::MatrixXd mnl_loglik_hessian(const DesignTensor& t, const Eigen::VectorXd& theta) {
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(t.n_terms, t.n_terms);
  Eigen::VectorXd v(t.n_alternatives);
  Eigen::VectorXd xbar(t.n_terms);
  for (int n = 0; n < t.n_respondents; ++n)
    for (int s = 0; s < t.n_situations; ++s) {
      situation_log_probs(t, theta, n, s, v);
      xbar.setZero();
      for (int j = 0; j < t.n_alternatives; ++j)
        xbar.noalias() += std::exp(v[j]) * t.x.row(t.row(n, s, j)).transpose();
      for (int j = 0; j < t.n_alternatives; ++j) {
        const double pj = std::exp(v[j]);
        const auto xj = t.x.row(t.row(n, s, j));
        hess.noalias() -= pj * xj.transpose() * xj;
      }
      hess.noalias() += xbar * xbar.transpose();
    }
  return hess;
}

namespace {

void check_collinearity(const DesignTensor& t, const std::vector<std::string>& names,
                        double threshold) {
  // condition number of the cross-product matrix of utility differences
  // (columns constant across alternatives carry no choice information)
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(t.n_terms, t.n_terms);
  for (int n = 0; n < t.n_respondents; ++n)
    for (int s = 0; s < t.n_situations; ++s)
      for (int j = 1; j < t.n_alternatives; ++j) {
        const Eigen::VectorXd d = (t.x.row(t.row(n, s, j)) - t.x.row(t.row(n, s, 0))).transpose();
        xtx.noalias() += d * d.transpose();
      }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xtx);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > threshold) {
    // name the coefficient loading hardest on the degenerate direction
    Eigen::Index worst = 0;
    es.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
    throw std::runtime_error(
        "design matrix is collinear or unidentified (condition number above threshold); "
        "check coefficient '" + names[static_cast<std::size_t>(worst)] + "'");
  }
}

EstimationResult fit_tensor(const DesignTensor& t, const std::vector<std::string>& names,
                            const MnlOptions& opt) {
  Objective obj = [&t](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    grad = -mnl_loglik_gradient(t, x);
    return -mnl_loglikelihood(t, x);
  };
  OptimOptions oo;
  oo.max_iterations = opt.max_iterations;
  oo.gradient_tolerance = opt.gradient_tolerance;
  const OptimResult r = minimize_bfgs(obj, Eigen::VectorXd::Zero(t.n_terms), oo);

  EstimationResult res;
  res.names = names;
  res.theta = r.x;
  res.loglik = -r.f;
  res.converged = r.converged;
  res.iterations = r.iterations;
  res.gradient_norm = r.gradient.norm();
  res.message = r.message;

  const Eigen::MatrixXd info = -mnl_loglik_hessian(t, r.x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    Eigen::Index worst = 0;
    es.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
    res.converged = false;
    res.message = "singular information matrix; weakest direction loads on '" +
                  names[static_cast<std::size_t>(worst)] + "'";
    res.vcov = Eigen::MatrixXd::Constant(t.n_terms, t.n_terms,
                                         std::numeric_limits<double>::quiet_NaN());
    res.std_errors = Eigen::VectorXd::Constant(t.n_terms, std::numeric_limits<double>::quiet_NaN());
    res.z_values = res.std_errors;
    return res;
  }
  res.vcov = info.llt().solve(Eigen::MatrixXd::Identity(t.n_terms, t.n_terms));
  res.std_errors = res.vcov.diagonal().cwiseSqrt();
  res.z_values = res.theta.array() / res.std_errors.array();
  return res;
}

DesignTensor constant_only_tensor(const ChoiceDataset& ds, int asc_on) {
  ModelSpec null_spec;
  null_spec.name = "constant-only";
  null_spec.asc_on = asc_on;
  null_spec.terms.push_back({TermKind::asc, "asc_alt2", "", "", ""});
  null_spec.mixing.push_back({});
  return expand(ds, null_spec);
}

}  // namespace

EstimationResult estimate_mnl(const ChoiceDataset& ds, const ModelSpec& spec,
                              const MnlOptions& opt) {
  const DesignTensor t = expand(ds, spec);
  std::vector<std::string> names;
  for (const auto& term : spec.terms) names.push_back(term.name);
  check_collinearity(t, names, opt.collinearity_threshold);

  EstimationResult res = fit_tensor(t, names, opt);
  if (opt.compute_null) {
    const DesignTensor t0 = constant_only_tensor(ds, spec.asc_on);
    MnlOptions null_opt = opt;
    null_opt.compute_null = false;
    res.null_loglik = fit_tensor(t0, {"asc_alt2"}, null_opt).loglik;
  }
  return res;
}

LrTest lr_test(double loglik_restricted, double loglik_full, int df, double tolerance) {
  if (loglik_full < loglik_restricted - tolerance)
    throw std::runtime_error("lr_test: full model loglikelihood below restricted model's");
  LrTest out;
  out.statistic = std::max(0.0, 2.0 * (loglik_full - loglik_restricted));
  out.df = df;
  out.p_value = chi_square_sf(out.statistic, df);
  return out;
}

std::vector<AblationRow> per_attribute_ablation(const ChoiceDataset& ds, const MnlOptions& opt) {
  std::vector<AblationRow> rows;

  MnlOptions local = opt;
  local.compute_null = false;

  ModelSpec null_spec;
  null_spec.name = "constant-only";
  null_spec.terms.push_back({TermKind::asc, "asc_alt2", "", "", ""});
  null_spec.mixing.push_back({});
  const EstimationResult null_fit = estimate_mnl(ds, null_spec, local);
  rows.push_back({"", null_fit.loglik, 0.0, null_fit.converged});

  for (const auto& a : ds.schema.attributes) {
    ModelSpec spec;
    spec.name = "asc+" + a.name;
    spec.terms.push_back({TermKind::asc, "asc_alt2", "", "", ""});
    spec.mixing.push_back({});
    spec.terms.push_back({TermKind::main, "b_" + a.name, a.name, "", ""});
    spec.mixing.push_back({});
    const EstimationResult fit = estimate_mnl(ds, spec, local);
    rows.push_back({a.name, fit.loglik, fit.loglik - null_fit.loglik, fit.converged});
  }
  return rows;
}

}  // namespace choicekit
