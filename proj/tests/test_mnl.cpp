#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "choicekit/configs.hpp"
#include "choicekit/mnl.hpp"
#include "choicekit/simulate.hpp"
#include "fixtures.hpp"

using namespace choicekit;

namespace {

SimConfig spec1_sim(int n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.schema = study_schema();
  cfg.design = reference_design();
  cfg.n_respondents = n;
  cfg.seed = seed;
  cfg.pivot_minutes = {30};
  cfg.pivot_weights = {1.0};
  cfg.spec = mnl_main_effects_spec(cfg.schema);
  const std::vector<double> truth = {-0.11, -0.17, -0.10, -1.55, -1.08, 0.74, 1.51};
  for (std::size_t k = 0; k < cfg.spec.n_terms(); ++k) cfg.spec.mixing[k].mu = truth[k];
  return cfg;
}

}  // namespace

TEST_CASE("binary logit probabilities") {
  auto [p1, p2] = mnl_probability(1.0, 1.0);
  CHECK(p1 == doctest::Approx(0.5));
  CHECK(p1 + p2 == doctest::Approx(1.0).epsilon(1e-12));

  auto [q1, q2] = mnl_probability(std::log(3.0), 0.0);
  CHECK(q1 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(q2 == doctest::Approx(0.25).epsilon(1e-12));

  auto [r1, r2] = mnl_probability(800.0, 0.0);
  CHECK(r1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r2 == doctest::Approx(0.0));
  CHECK(std::isfinite(r1));

  CHECK_THROWS(mnl_probability(std::nan(""), 0.0));
}

TEST_CASE("zero-parameter loglikelihood is N*S*log(1/2)") {
  const SimConfig cfg = spec1_sim(961, 3);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const ModelSpec spec = mnl_main_effects_spec(ds.schema);
  const DesignTensor t = expand(ds, spec);
  const double ll = mnl_loglikelihood(t, Eigen::VectorXd::Zero(t.n_terms));
  CHECK(ll == doctest::Approx(7688.0 * std::log(0.5)).epsilon(1e-12));
  CHECK(ll == doctest::Approx(-5328.9155).epsilon(1e-7));
}

TEST_CASE("single-respondent loglikelihood matches a hand computation") {
  const auto ds = ckt::make_dataset({{.id = "a", .chosen = {1, 1, 1, 1, 1, 1, 1, 1}}});
  ModelSpec spec;
  spec.terms = {{TermKind::main, "b_vaccine", "vaccine", "", ""}};
  spec.mixing.assign(1, MixingRule{});
  const DesignTensor t = expand(ds, spec);
  Eigen::VectorXd theta(1);
  theta << 2.0;
  double expect = 0.0;
  for (int s = 0; s < 8; ++s) {
    const double v1 = t.x(t.row(0, s, 0), 0) * theta[0];
    const double v2 = t.x(t.row(0, s, 1), 0) * theta[0];
    expect += std::log(std::exp(v1) / (std::exp(v1) + std::exp(v2)));
  }
  CHECK(mnl_loglikelihood(t, theta) == doctest::Approx(expect).epsilon(1e-12));

  // gradient = sum (y - p) x over situations
  double gexp = 0.0;
  for (int s = 0; s < 8; ++s) {
    const double x1 = t.x(t.row(0, s, 0), 0), x2 = t.x(t.row(0, s, 1), 0);
    const double p1 = 1.0 / (1.0 + std::exp((x2 - x1) * theta[0]));
    gexp += (1.0 - p1) * x1 + (0.0 - (1.0 - p1)) * x2;
  }
  CHECK(mnl_loglik_gradient(t, theta)[0] == doctest::Approx(gexp).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  const SimConfig cfg = spec1_sim(40, 4);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const ModelSpec spec = mnl_main_effects_spec(ds.schema);
  const DesignTensor t = expand(ds, spec);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> draw(0.0, 0.5);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd theta(t.n_terms);
    for (int i = 0; i < t.n_terms; ++i) theta[i] = draw(rng);
    const Eigen::VectorXd g = mnl_loglik_gradient(t, theta);
    for (int i = 0; i < t.n_terms; ++i) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += 1e-5;
      tm[i] -= 1e-5;
      const double fd = (mnl_loglikelihood(t, tp) - mnl_loglikelihood(t, tm)) / 2e-5;
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("gradient vanishes at the optimum") {
  const SimConfig cfg = spec1_sim(200, 5);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const EstimationResult fit = estimate_mnl(ds, mnl_main_effects_spec(ds.schema));
  CHECK(fit.converged);
  CHECK(fit.gradient_norm <= 1e-6 * (1.0 + std::fabs(fit.loglik)));
}

TEST_CASE("constant-only model on balanced choices gives ASC near zero") {
  const auto ds = ckt::make_dataset({
      {.id = "a", .chosen = {1, 2, 1, 2, 1, 2, 1, 2}},
      {.id = "b", .chosen = {2, 1, 2, 1, 2, 1, 2, 1}},
  });
  ModelSpec null_spec;
  null_spec.terms = {{TermKind::asc, "asc_alt2", "", "", ""}};
  null_spec.mixing.assign(1, MixingRule{});
  MnlOptions opt;
  opt.compute_null = false;
  const EstimationResult fit = estimate_mnl(ds, null_spec, opt);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.theta[0]) < 1e-6);
}

TEST_CASE("perfectly separable data is reported, not silently returned") {
  // chosen = alternative with the higher vaccine share; likelihood is
  // unbounded in that coefficient
  std::vector<ckt::FixtureRespondent> people;
  const DesignPlan plan = reference_design();
  for (int i = 0; i < 4; ++i) {
    ckt::FixtureRespondent p;
    p.id = "r" + std::to_string(i);
    p.block = 1 + i % 3;
    for (int s = 1; s <= 8; ++s) {
      const double v1 = plan.row(p.block, s, 1).levels[5];
      const double v2 = plan.row(p.block, s, 2).levels[5];
      p.chosen[static_cast<std::size_t>(s - 1)] = v1 >= v2 ? 1 : 2;
    }
    people.push_back(p);
  }
  const auto ds = ckt::make_dataset(people);
  ModelSpec spec;
  spec.terms = {{TermKind::main, "b_vaccine", "vaccine", "", ""}};
  spec.mixing.assign(1, MixingRule{});
  MnlOptions opt;
  opt.compute_null = false;
  const EstimationResult fit = estimate_mnl(ds, spec, opt);
  CHECK_FALSE(fit.converged);
  CHECK(fit.message.find("divergence") != std::string::npos);
}

TEST_CASE("collinear columns are detected before estimation") {
  // a covariate equal to one for everybody makes crowding x covariate an
  // exact copy of the crowding main effect
  const auto ds = ckt::make_dataset(
      {{.id = "a", .covariates = {1.0}}, {.id = "b", .block = 2, .covariates = {1.0}}},
      {"always_one"});
  ModelSpec spec;
  spec.terms = {
      {TermKind::main, "b_crowding", "crowding", "", ""},
      {TermKind::attr_x_cov, "g_c1", "crowding", "", "always_one"},
  };
  spec.mixing.assign(2, MixingRule{});
  CHECK_THROWS_WITH_AS(estimate_mnl(ds, spec), doctest::Contains("collinear"),
                       std::runtime_error);
}

TEST_CASE("likelihood ratio test reproduces the published arithmetic") {
  const LrTest a = lr_test(-4664.9, -4645.4, 2);
  CHECK(a.statistic == doctest::Approx(39.0).epsilon(1e-12));
  CHECK(a.p_value == doctest::Approx(3.4e-9).epsilon(0.05));

  const LrTest b = lr_test(-5318.0, -5317.7, 1);
  CHECK(b.statistic == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(b.p_value == doctest::Approx(0.44).epsilon(0.02));

  const LrTest c = lr_test(-4645.4, -4397.6, 4);
  CHECK(c.statistic == doctest::Approx(495.6).epsilon(1e-12));

  const LrTest d = lr_test(-4397.6, -4256.9, 20);
  CHECK(d.statistic == doctest::Approx(281.4).epsilon(1e-12));

  CHECK_THROWS(lr_test(-100.0, -101.0, 1));          // full below restricted
  CHECK_NOTHROW(lr_test(-100.0, -100.0000001, 1));   // within tolerance
}

TEST_CASE("per-attribute ablation ranks mask and vaccine first on spec-1 data") {
  const SimConfig cfg = spec1_sim(961, 6);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const auto rows = per_attribute_ablation(ds);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0].attribute.empty());
  CHECK(rows[0].gain_over_null == doctest::Approx(0.0));

  std::vector<std::pair<double, std::string>> gains;
  for (std::size_t i = 1; i < rows.size(); ++i)
    gains.emplace_back(rows[i].gain_over_null, rows[i].attribute);
  std::sort(gains.rbegin(), gains.rend());
  const std::set<std::string> top2 = {gains[0].second, gains[1].second};
  CHECK(top2 == std::set<std::string>{"mask", "vaccine"});
}

TEST_CASE("ablation gain is near zero for a zero-coefficient attribute") {
  SimConfig cfg = spec1_sim(961, 8);
  cfg.spec.mixing[2].mu = 0.0;  // standing has no effect in the generator
  const ChoiceDataset ds = simulate_dataset(cfg);
  const auto rows = per_attribute_ablation(ds);
  for (const auto& row : rows)
    if (row.attribute == "standing")
      CHECK(2.0 * row.gain_over_null < 6.635);  // chi2(1) 1% critical value
}

TEST_CASE("loglikelihood is concave") {
  const SimConfig cfg = spec1_sim(30, 10);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const DesignTensor t = expand(ds, mnl_main_effects_spec(ds.schema));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> draw(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd theta(t.n_terms);
    for (int i = 0; i < t.n_terms; ++i) theta[i] = draw(rng);
    const Eigen::MatrixXd h = mnl_loglik_hessian(t, theta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("estimates are invariant to respondent ordering") {
  const SimConfig cfg = spec1_sim(120, 12);
  const ChoiceDataset ds = simulate_dataset(cfg);
  const ModelSpec spec = mnl_main_effects_spec(ds.schema);
  const EstimationResult a = estimate_mnl(ds, spec, MnlOptions{.compute_null = false});

  // reverse respondent order
  ChoiceDataset rev;
  rev.schema = ds.schema;
  rev.design = ds.design;
  rev.covariate_names = ds.covariate_names;
  for (auto it = ds.respondents.rbegin(); it != ds.respondents.rend(); ++it)
    rev.respondents.push_back(*it);
  const int n = static_cast<int>(ds.respondents.size());
  for (const auto& o : ds.observations) {
    Observation copy = o;
    copy.respondent_idx = n - 1 - o.respondent_idx;
    rev.observations.push_back(copy);
  }
  const EstimationResult b = estimate_mnl(rev, spec, MnlOptions{.compute_null = false});
  CHECK(a.loglik == doctest::Approx(b.loglik).epsilon(1e-9));
  CHECK((a.theta - b.theta).lpNorm<Eigen::Infinity>() < 2e-6);
}

TEST_CASE("probabilities are translation invariant") {
  const auto ds = ckt::make_dataset({{.id = "a"}});
  const ModelSpec spec = mnl_main_effects_spec(ds.schema);
  DesignTensor t = expand(ds, spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(t.n_terms, 0.25);
  const double before = mnl_loglikelihood(t, theta);
  // add the same constant to every alternative's utility via a shifted column
  for (int n = 0; n < t.n_respondents; ++n)
    for (int s = 0; s < t.n_situations; ++s)
      for (int j = 0; j < t.n_alternatives; ++j) t.x(t.row(n, s, j), 3) += 7.0;
  CHECK(mnl_loglikelihood(t, theta) == doctest::Approx(before).epsilon(1e-12));
}
