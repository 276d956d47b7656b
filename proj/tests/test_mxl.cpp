#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "choicekit/mnl.hpp"
#include "choicekit/mxl.hpp"
#include "choicekit/simulate.hpp"
#include "fixtures.hpp"

using namespace choicekit;

namespace {

SimConfig mxl_sim(int n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.schema = study_schema();
  cfg.design = reference_design();
  cfg.n_respondents = n;
  cfg.seed = seed;
  cfg.pivot_minutes = {30};
  cfg.pivot_weights = {1.0};
  cfg.spec = mxl_interactions_spec(cfg.schema);
  const std::vector<double> mus = {-0.17, -1.06, -1.32, -0.09, 1.45, -0.11, -0.70, 0.35};
  const std::vector<double> sigmas = {0, 0.87, 2.41, 0.82, 1.33, 1.47, 0, 0};
  for (std::size_t k = 0; k < cfg.spec.n_terms(); ++k) {
    cfg.spec.mixing[k].mu = mus[k];
    cfg.spec.mixing[k].sigma = sigmas[k];
  }
  return cfg;
}

}  // namespace

TEST_CASE("degenerate mixing with one draw equals the plain logit") {
  const auto ds = ckt::make_dataset({{.id = "a"}, {.id = "b", .block = 2}, {.id = "c", .block = 3}});
  // all-normal mixing keeps mu on the coefficient scale
  ModelSpec spec = mnl_main_effects_spec(ds.schema);
  for (auto& m : spec.mixing) m.family = MixingFamily::normal;

  const DesignTensor t = expand(ds, spec);
  const MxlPacking packing = make_packing(spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(packing.size());
  for (int k = 0; k < packing.n_terms; ++k) theta[k] = 0.1 * (k + 1);
  // sigmas stay zero
  const DrawMatrix draws = make_draws(1, static_cast<int>(packing.random_terms.size()), 5);
  const double simulated = simulated_panel_loglik(t, spec, packing, theta, draws);
  const double exact = mnl_loglikelihood(t, theta.head(packing.n_terms));
  CHECK(simulated == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("panel loglikelihood agrees with a naive reference implementation") {
  const auto ds = ckt::make_dataset({{.id = "a", .block = 2}});
  const ModelSpec spec = [&] {
    ModelSpec s = mxl_interactions_spec(ds.schema);
    const std::vector<double> mus = {-0.17, -1.06, -1.32, -0.09, 1.45, -0.11, -0.70, 0.35};
    const std::vector<double> sigmas = {0, 0.87, 1.2, 0.82, 1.33, 1.47, 0, 0};
    for (std::size_t k = 0; k < s.n_terms(); ++k) {
      s.mixing[k].mu = mus[k];
      s.mixing[k].sigma = sigmas[k];
    }
    return s;
  }();
  const DesignTensor t = expand(ds, spec);
  const MxlPacking packing = make_packing(spec);
  Eigen::VectorXd theta(packing.size());
  Eigen::VectorXd mus(packing.n_terms), sigmas(packing.n_terms);
  for (int k = 0; k < packing.n_terms; ++k) theta[k] = spec.mixing[static_cast<std::size_t>(k)].mu;
  for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
    theta[packing.n_terms + static_cast<Eigen::Index>(i)] =
        spec.mixing[static_cast<std::size_t>(packing.random_terms[i])].sigma;

  const int R = 64;
  const DrawMatrix draws = make_draws(R, static_cast<int>(packing.random_terms.size()), 17);

  // naive reference: plain products and averages, no log-space tricks
  double avg = 0.0;
  for (int r = 0; r < R; ++r) {
    Eigen::VectorXd beta(packing.n_terms);
    int zi = 0;
    for (int k = 0; k < packing.n_terms; ++k) {
      const MixingRule& rule = spec.mixing[static_cast<std::size_t>(k)];
      if (!rule.is_random()) {
        beta[k] = theta[k];
      } else {
        const double z = draws.z(r, zi);
        const double sg = theta[packing.sigma_slot(k)];
        beta[k] = rule.family == MixingFamily::normal ? theta[k] + sg * z
                                                      : rule.sign * std::exp(theta[k] + sg * z);
        ++zi;
      }
    }
    double prod = 1.0;
    for (int s = 0; s < 8; ++s) {
      const double v1 = t.x.row(t.row(0, s, 0)).dot(beta);
      const double v2 = t.x.row(t.row(0, s, 1)).dot(beta);
      const double p1 = std::exp(v1) / (std::exp(v1) + std::exp(v2));
      prod *= (t.choice(0, s) == 0) ? p1 : 1.0 - p1;
    }
    avg += prod;
  }
  const double naive = std::log(avg / R);
  const double fast = simulated_panel_loglik(t, spec, packing, theta, draws);
  CHECK(fast == doctest::Approx(naive).epsilon(1e-10));
}

TEST_CASE("loglikelihood is invariant to permuting draw rows") {
  const ChoiceDataset ds = simulate_dataset(mxl_sim(20, 21));
  const ModelSpec& spec = mxl_sim(20, 21).spec;
  const DesignTensor t = expand(ds, spec);
  const MxlPacking packing = make_packing(spec);
  Eigen::VectorXd theta(packing.size());
  for (int k = 0; k < packing.n_terms; ++k) theta[k] = spec.mixing[static_cast<std::size_t>(k)].mu;
  for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
    theta[packing.n_terms + static_cast<Eigen::Index>(i)] =
        spec.mixing[static_cast<std::size_t>(packing.random_terms[i])].sigma;

  DrawMatrix draws = make_draws(32, static_cast<int>(packing.random_terms.size()), 3);
  const double base = simulated_panel_loglik(t, spec, packing, theta, draws);
  std::vector<int> perm(32);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  DrawMatrix shuffled = draws;
  for (int r = 0; r < 32; ++r) shuffled.z.row(r) = draws.z.row(perm[static_cast<std::size_t>(r)]);
  const double permuted = simulated_panel_loglik(t, spec, packing, theta, shuffled);
  CHECK(permuted == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches finite differences in mu and sigma") {
  const SimConfig cfg = mxl_sim(25, 33);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const DesignTensor t = expand(ds, cfg.spec);
  const MxlPacking packing = make_packing(cfg.spec);
  const DrawMatrix draws = make_draws(40, static_cast<int>(packing.random_terms.size()), 13);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> jitter(0.0, 0.15);
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::VectorXd theta(packing.size());
    for (int k = 0; k < packing.n_terms; ++k)
      theta[k] = cfg.spec.mixing[static_cast<std::size_t>(k)].mu + jitter(rng);
    for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
      theta[packing.n_terms + static_cast<Eigen::Index>(i)] =
          std::fabs(cfg.spec.mixing[static_cast<std::size_t>(packing.random_terms[i])].sigma *
                    0.5) + 0.1 + std::fabs(jitter(rng));

    const Eigen::VectorXd g = simulated_panel_loglik_gradient(t, cfg.spec, packing, theta, draws);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::fabs(theta[i]));
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      const double fd = (simulated_panel_loglik(t, cfg.spec, packing, tp, draws) -
                         simulated_panel_loglik(t, cfg.spec, packing, tm, draws)) /
                        (2.0 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("the panel product over situations is load-bearing") {
  const SimConfig cfg = mxl_sim(30, 44);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const DesignTensor t = expand(ds, cfg.spec);
  const MxlPacking packing = make_packing(cfg.spec);
  Eigen::VectorXd theta(packing.size());
  for (int k = 0; k < packing.n_terms; ++k)
    theta[k] = cfg.spec.mixing[static_cast<std::size_t>(k)].mu;
  for (std::size_t i = 0; i < packing.random_terms.size(); ++i)
    theta[packing.n_terms + static_cast<Eigen::Index>(i)] =
        cfg.spec.mixing[static_cast<std::size_t>(packing.random_terms[i])].sigma;
  const DrawMatrix draws = make_draws(64, static_cast<int>(packing.random_terms.size()), 5);

  // cross-section view: every situation becomes its own one-situation panel
  DesignTensor cross = t;
  cross.n_respondents = t.n_respondents * t.n_situations;
  cross.n_situations = 1;

  const double panel = simulated_panel_loglik(t, cfg.spec, packing, theta, draws);
  const double pooled = simulated_panel_loglik(cross, cfg.spec, packing, theta, draws);
  CHECK(std::fabs(panel - pooled) > 1.0);
}

TEST_CASE("loglikelihood and gradient are identical across thread counts") {
  const SimConfig cfg = mxl_sim(40, 55);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const DesignTensor t = expand(ds, cfg.spec);
  const MxlPacking packing = make_packing(cfg.spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(packing.size(), 0.2);
  const DrawMatrix draws = make_draws(32, static_cast<int>(packing.random_terms.size()), 2);

  const double l1 = simulated_panel_loglik(t, cfg.spec, packing, theta, draws, 1);
  const double l4 = simulated_panel_loglik(t, cfg.spec, packing, theta, draws, 4);
  CHECK(l1 == l4);  // bitwise: per-respondent slots, fixed-order reduction
  const Eigen::VectorXd g1 = simulated_panel_loglik_gradient(t, cfg.spec, packing, theta, draws, 1);
  const Eigen::VectorXd g4 = simulated_panel_loglik_gradient(t, cfg.spec, packing, theta, draws, 4);
  CHECK((g1 - g4).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("estimation runs on a small instance and normalizes sigma") {
  SimConfig cfg = mxl_sim(80, 66);
  const ChoiceDataset ds = simulate_dataset(cfg);
  MxlOptions opt;
  opt.r_draws = 50;
  opt.seed = 9;
  opt.compute_null = false;
  opt.max_iterations = 300;
  const MxlResult fit = estimate_mxl(ds, cfg.spec, opt);
  CHECK(fit.converged);
  for (std::size_t i = 0; i < fit.packing.random_terms.size(); ++i)
    CHECK(fit.theta[fit.packing.n_terms + static_cast<Eigen::Index>(i)] >= 0.0);
  CHECK(fit.r_draws == 50);
  CHECK(fit.seed == 9);
}

TEST_CASE("a fixed-coefficient generating process yields insignificant sigmas") {
  SimConfig cfg;
  cfg.schema = study_schema();
  cfg.design = reference_design();
  cfg.n_respondents = 400;
  cfg.seed = 77;
  cfg.pivot_minutes = {30};
  cfg.pivot_weights = {1.0};
  cfg.spec = [&] {
    ModelSpec s;
    s.terms = {
        {TermKind::asc, "asc_alt2", "", "", ""},
        {TermKind::main, "b_mask", "mask", "", ""},
        {TermKind::main, "b_vaccine", "vaccine", "", ""},
    };
    s.mixing = {{}, {MixingFamily::normal, +1, 0.74, 0.0}, {MixingFamily::normal, +1, 1.51, 0.0}};
    s.mixing[0].mu = -0.11;
    return s;
  }();
  const ChoiceDataset ds = simulate_dataset(cfg);
  MxlOptions opt;
  opt.r_draws = 100;
  opt.seed = 4;
  opt.compute_null = false;
  const MxlResult fit = estimate_mxl(ds, cfg.spec, opt);
  REQUIRE(fit.converged);
  for (std::size_t i = 0; i < fit.packing.random_terms.size(); ++i) {
    const Eigen::Index slot = fit.packing.n_terms + static_cast<Eigen::Index>(i);
    const double sg = fit.theta[slot];
    const double se = fit.std_errors[slot];
    // boundary estimates count as insignificant
    CHECK((sg < 0.05 || sg / se < 1.96));
  }
}

TEST_CASE("estimating with no random coefficients is refused") {
  const auto ds = ckt::make_dataset({{.id = "a"}});
  const ModelSpec spec = mnl_main_effects_spec(ds.schema);
  CHECK_THROWS_WITH_AS(estimate_mxl(ds, spec), doctest::Contains("no random coefficients"),
                       std::runtime_error);
}
