#include <doctest.h>

#include "choicekit/model.hpp"
#include "choicekit/tensor.hpp"
#include "fixtures.hpp"

using namespace choicekit;

TEST_CASE("transforms map raw levels to regressor units") {
  const AttributeSchema schema = study_schema();
  // (crowding, standing, ratio, cases, mask, vaccine)
  const std::vector<double> raw = {6, 1, 1.15, 90, 1, 80};
  const auto x = transform_levels(raw, schema, 30.0);
  CHECK(x[0] == doctest::Approx(6.0));          // persons/m2 unchanged
  CHECK(x[1] == doctest::Approx(1.0));          // standing 0/1
  CHECK(x[2] == doctest::Approx(0.345));        // 30 * 1.15 / 100 minutes
  CHECK(x[3] == doctest::Approx(0.90));         // cases per 1e5 / 100
  CHECK(x[4] == doctest::Approx(1.0));          // mask 0/1
  CHECK(x[5] == doctest::Approx(0.80));         // vaccine share of 1

  CHECK_THROWS(transform_levels({3, 1, 1.15, 90, 1, 80}, schema, 30.0));  // unknown level
  CHECK_THROWS(transform_levels(raw, schema, std::nullopt));             // pivot missing
}

TEST_CASE("expansion produces term columns") {
  const auto ds = ckt::make_dataset({{.id = "a", .block = 1, .pivot = 30.0}});
  ModelSpec spec;
  spec.name = "toy";
  spec.terms = {
      {TermKind::asc, "asc_alt2", "", "", ""},
      {TermKind::main, "b_crowding", "crowding", "", ""},
      {TermKind::attr_x_attr, "d_tm", "travel_time", "mask", ""},
  };
  spec.mixing.assign(3, MixingRule{});
  const DesignTensor t = expand(ds, spec);

  // block 1 situation 3 alternative 1: crowding 6, ratio 0.7, mask No
  CHECK(t.x(t.row(0, 2, 0), 1) == doctest::Approx(6.0));
  CHECK(t.x(t.row(0, 2, 0), 2) == doctest::Approx(0.0));  // mask 0 annihilates
  // block 1 situation 2 alternative 1: ratio 0.7, mask Yes -> 0.21 * 1
  CHECK(t.x(t.row(0, 1, 0), 2) == doctest::Approx(0.21));
  // ASC column: 1 on alternative 2 only
  CHECK(t.x(t.row(0, 0, 0), 0) == doctest::Approx(0.0));
  CHECK(t.x(t.row(0, 0, 1), 0) == doctest::Approx(1.0));
}

TEST_CASE("covariate interaction annihilates for zero indicator") {
  auto ds = ckt::make_dataset({{.id = "a", .covariates = {0.0}}, {.id = "b", .covariates = {1.0}}},
                              {"age_below_40"});
  ModelSpec spec;
  spec.terms = {
      {TermKind::main, "b_crowding", "crowding", "", ""},
      {TermKind::attr_x_cov, "g_ca", "crowding", "", "age_below_40"},
  };
  spec.mixing.assign(2, MixingRule{});
  const DesignTensor t = expand(ds, spec);
  for (int s = 0; s < 8; ++s)
    for (int j = 0; j < 2; ++j) {
      CHECK(t.x(t.row(0, s, j), 1) == doctest::Approx(0.0));
      CHECK(t.x(t.row(1, s, j), 1) == doctest::Approx(t.x(t.row(1, s, j), 0)));
    }
}

TEST_CASE("interaction columns are symmetric in the attribute order") {
  const auto ds = ckt::make_dataset({{.id = "a"}});
  ModelSpec ab, ba;
  ab.terms = {{TermKind::attr_x_attr, "d", "crowding", "vaccine", ""}};
  ab.mixing.assign(1, MixingRule{});
  ba.terms = {{TermKind::attr_x_attr, "d", "vaccine", "crowding", ""}};
  ba.mixing.assign(1, MixingRule{});
  const DesignTensor t1 = expand(ds, ab);
  const DesignTensor t2 = expand(ds, ba);
  CHECK((t1.x - t2.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("expansion is linear in an attribute's scaling") {
  // doubling the crowding column scales its main and interaction columns by 2
  auto schema = study_schema();
  const auto ds = ckt::make_dataset({{.id = "a"}});
  ModelSpec spec;
  spec.terms = {
      {TermKind::main, "b_crowding", "crowding", "", ""},
      {TermKind::main, "b_mask", "mask", "", ""},
      {TermKind::attr_x_attr, "d_cm", "crowding", "mask", ""},
  };
  spec.mixing.assign(3, MixingRule{});
  const DesignTensor base = expand(ds, spec);

  auto scaled_ds = ds;
  for (auto& o : scaled_ds.observations)
    for (auto& lv : o.levels) lv[0] *= 2.0;  // raw crowding doubled
  // permit the doubled levels
  for (auto& a : scaled_ds.schema.attributes)
    if (a.name == "crowding") a.levels = {0, 2, 4, 8, 12};
  scaled_ds.design.reset();
  const DesignTensor doubled = expand(scaled_ds, spec);
  CHECK((doubled.x.col(0) - 2.0 * base.x.col(0)).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((doubled.x.col(2) - 2.0 * base.x.col(2)).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((doubled.x.col(1) - base.x.col(1)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("model config parsing enforces the schema") {
  const AttributeSchema schema = study_schema();
  CHECK_THROWS_WITH_AS(
      parse_model_config(R"({"schema_version":1,"terms":[],"unknown_key":1})", schema, {}),
      doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_model_config(R"({"schema_version":2,"terms":[]})", schema, {}),
      doctest::Contains("schema_version"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_model_config(
          R"({"schema_version":1,"terms":[{"kind":"main","attribute":"bogus","name":"b"}]})",
          schema, {}),
      doctest::Contains("unknown attribute"), std::runtime_error);
  // duplicate term under symmetric signature
  CHECK_THROWS_WITH_AS(
      parse_model_config(R"({"schema_version":1,"terms":[
        {"kind":"attr_x_attr","a":"crowding","b":"mask","name":"d1"},
        {"kind":"attr_x_attr","a":"mask","b":"crowding","name":"d2"}]})",
                         schema, {}),
      doctest::Contains("duplicate term"), std::runtime_error);
  // mixing on an interaction is rejected (main effects only)
  CHECK_THROWS_WITH_AS(
      parse_model_config(R"({"schema_version":1,"terms":[
        {"kind":"attr_x_attr","a":"crowding","b":"mask","name":"d1"}],
        "mixing":{"d1":{"family":"normal"}}})",
                         schema, {}),
      doctest::Contains("non-main term"), std::runtime_error);
}

TEST_CASE("utility differences ignore a constant added to a term column") {
  // adding a constant to both alternatives' columns of one term leaves
  // V1 - V2 unchanged (logit identification)
  const auto ds = ckt::make_dataset({{.id = "a"}});
  const ModelSpec spec = mnl_main_effects_spec(ds.schema);
  DesignTensor t = expand(ds, spec);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(t.n_terms, 0.3);
  Eigen::VectorXd before(8), after(8);
  for (int s = 0; s < 8; ++s)
    before[s] = (t.x.row(t.row(0, s, 0)) - t.x.row(t.row(0, s, 1))).dot(theta);
  t.x.col(2).array() += 5.0;  // shift one column for both alternatives
  for (int s = 0; s < 8; ++s)
    after[s] = (t.x.row(t.row(0, s, 0)) - t.x.row(t.row(0, s, 1))).dot(theta);
  CHECK((before - after).lpNorm<Eigen::Infinity>() < 1e-12);
}
