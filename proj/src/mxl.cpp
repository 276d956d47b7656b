#include "choicekit/mxl.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "choicekit/math.hpp"
#include "choicekit/optim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace choicekit {

MxlPacking make_packing(const ModelSpec& spec) {
  MxlPacking p;
  p.n_terms = static_cast<int>(spec.n_terms());
  p.random_terms = spec.random_term_indices();
  return p;
}

void unpack_params(const MxlPacking& packing, const Eigen::VectorXd& theta,
                   Eigen::VectorXd& mus, Eigen::VectorXd& sigmas) {
  mus = theta.head(packing.n_terms);
  sigmas = Eigen::VectorXd::Zero(packing.n_terms);
  for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
    sigmas[packing.random_terms[i]] = theta[packing.n_terms + static_cast<Eigen::Index>(i)];
}

namespace {

// Per-respondent evaluation used by both the loglikelihood and its gradient.
// grad_out, when non-null, receives d loglik_n / d theta (packed).
double respondent_loglik(const DesignTensor& t, const ModelSpec& spec, const MxlPacking& packing,
                         const Eigen::VectorXd& mus, const Eigen::VectorXd& sigmas,
                         const DrawMatrix& draws, int n, Eigen::VectorXd* grad_out) {
  const int S = t.n_situations;
  const int J = t.n_alternatives;
  const int K = packing.n_terms;
  const int R = static_cast<int>(draws.z.rows());
  const int n_random = static_cast<int>(packing.random_terms.size());

  Eigen::VectorXd beta(K), v(J);
  std::vector<double> log_panel(static_cast<std::size_t>(R));
  // score w.r.t. beta per draw, kept for the chain rule
  Eigen::MatrixXd score_beta;
  if (grad_out) score_beta = Eigen::MatrixXd::Zero(R, K);

  for (int r = 0; r < R; ++r) {
    // realize this draw's coefficient vector: means first, then the random
    // coefficients from their draw columns
    beta = mus;
    for (int i = 0; i < n_random; ++i) {
      const int k = packing.random_terms[static_cast<std::size_t>(i)];
      const MixingRule& rule = spec.mixing[static_cast<std::size_t>(k)];
      const double z = draws.z(r, i);
      beta[k] = (rule.family == MixingFamily::normal)
                    ? mus[k] + sigmas[k] * z
                    : rule.sign * std::exp(mus[k] + sigmas[k] * z);
    }

    double lp = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int j = 0; j < J; ++j) v[j] = t.x.row(t.row(n, s, j)).dot(beta);
      const double lse = log_sum_exp(v.data(), static_cast<std::size_t>(J));
      const int y = t.choice(n, s);
      lp += v[y] - lse;
      if (grad_out) {
        for (int j = 0; j < J; ++j) {
          const double w = (j == y ? 1.0 : 0.0) - std::exp(v[j] - lse);
          score_beta.row(r).noalias() += w * t.x.row(t.row(n, s, j));
        }
      }
    }
    log_panel[static_cast<std::size_t>(r)] = lp;
  }

  const double lse_r = log_sum_exp(log_panel.data(), log_panel.size());
  const double loglik_n = lse_r - std::log(static_cast<double>(R));

  if (grad_out) {
    grad_out->setZero();
    for (int r = 0; r < R; ++r) {
      const double w_r = std::exp(log_panel[static_cast<std::size_t>(r)] - lse_r);
      if (w_r == 0.0) continue;
      // chain rule from beta space into the packed (mu, sigma) space
      for (int k = 0; k < K; ++k) {
        const MixingRule& rule = spec.mixing[static_cast<std::size_t>(k)];
        const double sb = score_beta(r, k);
        if (!rule.is_random()) {
          (*grad_out)[k] += w_r * sb;  // d beta / d mu = 1
          continue;
        }
        int zi = -1;
        for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
          if (packing.random_terms[i] == k) { zi = static_cast<int>(i); break; }
        const double z = draws.z(r, zi);
        const int slot = packing.sigma_slot(k);
        if (rule.family == MixingFamily::normal) {
          (*grad_out)[k] += w_r * sb;
          (*grad_out)[slot] += w_r * sb * z;
        } else {
          const double beta_k = rule.sign * std::exp(mus[k] + sigmas[k] * z);
          (*grad_out)[k] += w_r * sb * beta_k;
          (*grad_out)[slot] += w_r * sb * beta_k * z;
        }
      }
    }
  }
  return loglik_n;
}

template <typename PerRespondent>
void parallel_over_respondents(int n_respondents, int n_threads, PerRespondent&& body) {
#ifdef _OPENMP
  if (n_threads > 1) {
#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (int n = 0; n < n_respondents; ++n) body(n);
    return;
  }
#endif
  (void)n_threads;
  for (int n = 0; n < n_respondents; ++n) body(n);
}

}  // namespace

double simulated_panel_loglik(const DesignTensor& t, const ModelSpec& spec,
                              const MxlPacking& packing, const Eigen::VectorXd& theta,
                              const DrawMatrix& draws, int n_threads) {
  Eigen::VectorXd mus, sigmas;
  unpack_params(packing, theta, mus, sigmas);
  if (draws.z.cols() < static_cast<Eigen::Index>(packing.random_terms.size()))
    throw std::runtime_error("simulated_panel_loglik: draw matrix has too few columns");

  // per-respondent slots + fixed-order reduction keep the result identical
  // across thread counts
  std::vector<double> per_n(static_cast<std::size_t>(t.n_respondents));
  parallel_over_respondents(t.n_respondents, n_threads, [&](int n) {
    per_n[static_cast<std::size_t>(n)] =
        respondent_loglik(t, spec, packing, mus, sigmas, draws, n, nullptr);
  });
  double ll = 0.0;
  for (double v : per_n) ll += v;
  return ll;
}

Eigen::VectorXd simulated_panel_loglik_gradient(const DesignTensor& t, const ModelSpec& spec,
                                                const MxlPacking& packing,
                                                const Eigen::VectorXd& theta,
                                                const DrawMatrix& draws, int n_threads) {
  Eigen::VectorXd mus, sigmas;
  unpack_params(packing, theta, mus, sigmas);

  std::vector<Eigen::VectorXd> per_n(static_cast<std::size_t>(t.n_respondents));
  parallel_over_respondents(t.n_respondents, n_threads, [&](int n) {
    Eigen::VectorXd g(packing.size());
    respondent_loglik(t, spec, packing, mus, sigmas, draws, n, &g);
    per_n[static_cast<std::size_t>(n)] = std::move(g);
  });
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(packing.size());
  for (const auto& g : per_n) grad += g;
  return grad;
}

double MxlResult::mu_of(const std::string& coefficient) const {
  const int idx = spec.term_index(coefficient);
  if (idx < 0) throw std::runtime_error("unknown coefficient '" + coefficient + "'");
  return theta[idx];
}

double MxlResult::sigma_of(const std::string& coefficient) const {
  const int idx = spec.term_index(coefficient);
  if (idx < 0) throw std::runtime_error("unknown coefficient '" + coefficient + "'");
  const int slot = packing.sigma_slot(idx);
  if (slot < 0) throw std::runtime_error("coefficient '" + coefficient + "' has no mixing sigma");
  return theta[slot];
}

MxlResult estimate_mxl(const ChoiceDataset& ds, const ModelSpec& spec, const MxlOptions& opt) {
  if (spec.random_term_indices().empty())
    throw std::runtime_error("estimate_mxl: spec has no random coefficients (use the MNL engine)");

  const DesignTensor t = expand(ds, spec);
  const MxlPacking packing = make_packing(spec);
  const DrawMatrix draws =
      make_draws(opt.r_draws, static_cast<int>(packing.random_terms.size()), opt.seed);

  // warm start: fixed/interaction coefficients from the MNL fit; lognormal
  // means mapped through log|beta|; sigmas at 0.1
  MnlOptions mnl_opt;
  mnl_opt.compute_null = opt.compute_null;
  const EstimationResult mnl_fit = estimate_mnl(ds, spec, mnl_opt);

  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(packing.size());
  for (int k = 0; k < packing.n_terms; ++k) {
    const MixingRule& rule = spec.mixing[static_cast<std::size_t>(k)];
    const double b = mnl_fit.theta[k];
    if (rule.family == MixingFamily::lognormal)
      theta0[k] = std::log(std::max(std::fabs(b), 1e-3));
    else
      theta0[k] = b;
  }
  for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
    theta0[packing.n_terms + static_cast<Eigen::Index>(i)] = 0.1;

  Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    grad = -simulated_panel_loglik_gradient(t, spec, packing, x, draws, opt.n_threads);
    return -simulated_panel_loglik(t, spec, packing, x, draws, opt.n_threads);
  };
  OptimOptions oo;
  oo.max_iterations = opt.max_iterations;
  oo.gradient_tolerance = opt.gradient_tolerance;
  const OptimResult r = minimize_bfgs(obj, theta0, oo);

  MxlResult res;
  res.spec = spec;
  res.packing = packing;
  res.theta = r.x;
  res.loglik = -r.f;
  res.null_loglik = mnl_fit.null_loglik;
  res.converged = r.converged;
  res.iterations = r.iterations;
  res.gradient_norm = r.gradient.norm();
  res.message = r.message;
  res.r_draws = opt.r_draws;
  res.seed = opt.seed;
  res.generator = draws.generator;

  // the likelihood is even in each sigma; report the positive branch
  for (std::size_t i = 0; i < packing.random_terms.size(); ++i) {
    const Eigen::Index slot = packing.n_terms + static_cast<Eigen::Index>(i);
    res.theta[slot] = std::fabs(res.theta[slot]);
    const int k = packing.random_terms[i];
    if (res.theta[slot] < 1e-4)
      res.diagnostics.push_back("sigma of '" + spec.terms[static_cast<std::size_t>(k)].name +
                                "' at the zero boundary");
  }

  for (const auto& term : spec.terms) res.names.push_back(term.name);
  for (int k : packing.random_terms)
    res.names.push_back("sigma_" + spec.terms[static_cast<std::size_t>(k)].name);

  // estimated mixing rules back into the spec copy
  Eigen::VectorXd mus, sigmas;
  unpack_params(packing, res.theta, mus, sigmas);
  for (int k = 0; k < packing.n_terms; ++k) {
    res.spec.mixing[static_cast<std::size_t>(k)].mu = mus[k];
    res.spec.mixing[static_cast<std::size_t>(k)].sigma = sigmas[k];
  }

  if (opt.compute_vcov) {
    // observed information via central differences of the analytic gradient
    const Eigen::Index p = res.theta.size();
    Eigen::MatrixXd hess(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double h = 1e-4 * std::max(1.0, std::fabs(res.theta[i]));
      Eigen::VectorXd tp = res.theta, tm = res.theta;
      tp[i] += h;
      tm[i] -= h;
      const Eigen::VectorXd gp =
          simulated_panel_loglik_gradient(t, spec, packing, tp, draws, opt.n_threads);
      const Eigen::VectorXd gm =
          simulated_panel_loglik_gradient(t, spec, packing, tm, draws, opt.n_threads);
      hess.col(i) = (gp - gm) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose().eval());
    const Eigen::MatrixXd info = -hess;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      res.diagnostics.push_back("observed information not positive definite at the optimum");
      // pseudo-inverse on the positive part keeps the report usable
      Eigen::VectorXd inv = es.eigenvalues();
      for (Eigen::Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > 1e-10 ? 1.0 / inv[i] : 0.0;
      res.vcov = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    } else {
      res.vcov = info.llt().solve(Eigen::MatrixXd::Identity(p, p));
    }
    res.std_errors = res.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
    res.z_values.resize(p);
    for (Eigen::Index i = 0; i < p; ++i)
      res.z_values[i] = res.std_errors[i] > 0 ? res.theta[i] / res.std_errors[i]
                                              : std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

}  // namespace choicekit
