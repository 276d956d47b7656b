#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "choicekit/dataset.hpp"
#include "fixtures.hpp"

using namespace choicekit;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
  const fs::path p = fs::temp_directory_path() / "choicekit_tests";
  fs::create_directories(p);
  return p;
}

// writes the dataset, optionally rewrites one cell of the choices file, and
// loads it back
ChoiceDataset roundtrip(const ChoiceDataset& ds, const std::string& find = "",
                        const std::string& replace = "") {
  const auto dir = tmpdir();
  const std::string choices = (dir / "choices.csv").string();
  const std::string resp = (dir / "respondents.csv").string();
  save_responses(ds, choices, resp);
  if (!find.empty()) {
    std::ifstream in(choices);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const auto pos = text.find(find);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, find.size(), replace);
    std::ofstream out(choices);
    out << text;
  }
  return load_responses(choices, resp, ds.schema, ds.design);
}

std::vector<std::string> ids(const ChoiceDataset& ds) {
  std::vector<std::string> out;
  for (const auto& r : ds.respondents) out.push_back(r.id);
  return out;
}

}  // namespace

TEST_CASE("well-formed fixture round-trips") {
  const auto ds = ckt::make_dataset({{.id = "a", .block = 1}, {.id = "b", .block = 2}});
  const auto back = roundtrip(ds);
  CHECK(back.respondents.size() == 2);
  CHECK(back.observations.size() == 16);
  CHECK(back.respondents[0].id == "a");
  CHECK(back.observations[0].chosen == ds.observations[0].chosen);
  CHECK(back.observations[5].levels == ds.observations[5].levels);
}

TEST_CASE("chosen alternative outside 1..2 is rejected with the row named") {
  const auto ds = ckt::make_dataset({{.id = "a"}});
  // first data row: a,1,1,1,...  -> chosen becomes 3
  CHECK_THROWS_WITH_AS(roundtrip(ds, "a,1,1,1", "a,1,1,3"),
                       doctest::Contains("choices.csv:2"), std::runtime_error);
}

TEST_CASE("unknown block is rejected") {
  auto ds = ckt::make_dataset({{.id = "a"}});
  ds.respondents[0].block = 4;
  CHECK_THROWS_WITH_AS(ds.validate(), doctest::Contains("unknown block"), std::runtime_error);
}

TEST_CASE("duplicate (respondent, situation, alternative) is rejected") {
  const auto ds = ckt::make_dataset({{.id = "a"}});
  const auto dir = tmpdir();
  const std::string choices = (dir / "dup_choices.csv").string();
  const std::string resp = (dir / "dup_respondents.csv").string();
  save_responses(ds, choices, resp);
  {
    std::ifstream in(choices);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    // duplicate the first data row
    const auto first = text.find('\n');
    const auto second = text.find('\n', first + 1);
    text.insert(second + 1, text.substr(first + 1, second - first));
    std::ofstream out(choices);
    out << text;
  }
  CHECK_THROWS_WITH_AS(load_responses(choices, resp, ds.schema, ds.design),
                       doctest::Contains("duplicate"), std::runtime_error);
}

TEST_CASE("missing covariate cells are rejected at load") {
  const auto ds = ckt::make_dataset({{.id = "a", .covariates = {1.0}}}, {"age_below_40"});
  const auto dir = tmpdir();
  const std::string choices = (dir / "mc_choices.csv").string();
  const std::string resp = (dir / "mc_respondents.csv").string();
  save_responses(ds, choices, resp);
  {
    std::ifstream in(resp);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    text.replace(text.rfind(",1"), 2, ",");  // blank the covariate cell
    std::ofstream out(resp);
    out << text;
  }
  CHECK_THROWS_WITH_AS(load_responses(choices, resp, ds.schema, ds.design),
                       doctest::Contains("missing covariate"), std::runtime_error);
}

TEST_CASE("fast-responder rule uses the pre-exclusion median and strict inequality") {
  SUBCASE("median 100, threshold 40, respondent at 39 excluded") {
    const auto ds = ckt::make_dataset({{.id = "a", .response_time = 100},
                                       {.id = "b", .response_time = 100},
                                       {.id = "c", .response_time = 100},
                                       {.id = "d", .response_time = 39}});
    const auto res = filter_fast_responders(ds);
    CHECK(res.excluded_ids == std::vector<std::string>{"d"});
    CHECK(res.retained.respondents.size() == 3);
  }
  SUBCASE("respondent exactly at the threshold is retained") {
    const auto ds = ckt::make_dataset({{.id = "a", .response_time = 100},
                                       {.id = "b", .response_time = 100},
                                       {.id = "c", .response_time = 100},
                                       {.id = "d", .response_time = 40}});
    CHECK(filter_fast_responders(ds).excluded_ids.empty());
  }
  SUBCASE("odd count median") {
    const auto ds = ckt::make_dataset({{.id = "a", .response_time = 50},
                                       {.id = "b", .response_time = 100},
                                       {.id = "c", .response_time = 150}});
    CHECK(filter_fast_responders(ds).excluded_ids.empty());
  }
  SUBCASE("empty dataset is an error") {
    ChoiceDataset empty;
    empty.schema = study_schema();
    CHECK_THROWS(filter_fast_responders(empty));
  }
}

TEST_CASE("straight-liner rule") {
  const auto ds = ckt::make_dataset({
      {.id = "all1", .chosen = {1, 1, 1, 1, 1, 1, 1, 1}},
      {.id = "almost", .chosen = {2, 2, 2, 2, 2, 2, 2, 1}},
      {.id = "alt", .chosen = {1, 2, 1, 2, 1, 2, 1, 2}},
      {.id = "all2", .chosen = {2, 2, 2, 2, 2, 2, 2, 2}},
  });
  const auto res = filter_straight_liners(ds);
  CHECK(res.excluded_ids == std::vector<std::string>{"all1", "all2"});
}

TEST_CASE("household consistency rule") {
  const auto ds = ckt::make_dataset({
      {.id = "bad", .household_size = 3, .n_children = 2, .n_workers = 2},
      {.id = "equal", .household_size = 4, .n_children = 2, .n_workers = 2},
      {.id = "ok", .household_size = 1, .n_children = 0, .n_workers = 1},
  });
  const auto res = filter_inconsistent(ds);
  CHECK(res.excluded_ids == std::vector<std::string>{"bad"});
}

TEST_CASE("filters are idempotent and preserve cardinality") {
  const auto ds = ckt::make_dataset({
      {.id = "fast", .response_time = 10},
      {.id = "a", .response_time = 100},
      {.id = "b", .response_time = 100},
      {.id = "sl", .response_time = 100, .chosen = {1, 1, 1, 1, 1, 1, 1, 1}},
      {.id = "bad", .response_time = 100, .household_size = 1, .n_children = 2, .n_workers = 2},
  });
  using Filter = std::function<FilterResult(const ChoiceDataset&)>;
  const std::vector<std::pair<Filter, bool>> filters = {
      {[](const ChoiceDataset& d) { return filter_fast_responders(d); }, true},
      {[](const ChoiceDataset& d) { return filter_straight_liners(d); }, false},
      {[](const ChoiceDataset& d) { return filter_inconsistent(d); }, false},
  };
  for (const auto& [filter, median_based] : filters) {
    const auto once = filter(ds);
    CHECK(once.retained.respondents.size() + once.excluded_ids.size() == ds.respondents.size());
    const auto twice = filter(once.retained);
    // re-filtering the retained set is stable for the non-median rules; the
    // fast-responder rule can shift because the median moves
    if (!median_based) CHECK(twice.excluded_ids.empty());
  }
}

TEST_CASE("screening removes the union and is permutation invariant") {
  const auto ds = ckt::make_dataset({
      {.id = "fast", .response_time = 10},
      {.id = "both", .response_time = 11, .chosen = {1, 1, 1, 1, 1, 1, 1, 1}},
      {.id = "sl", .response_time = 100, .chosen = {2, 2, 2, 2, 2, 2, 2, 2}},
      {.id = "bad", .response_time = 100, .household_size = 1, .n_children = 1, .n_workers = 1},
      {.id = "a", .response_time = 100},
      {.id = "b", .response_time = 120},
      {.id = "c", .response_time = 90},
  });
  auto [retained, rep] = screen_dataset(ds);
  CHECK(rep.n_input == 7);
  CHECK(rep.fast_responders == std::vector<std::string>{"fast", "both"});
  CHECK(rep.straight_liners == std::vector<std::string>{"both", "sl"});
  CHECK(rep.inconsistent == std::vector<std::string>{"bad"});
  // overlapping violator counted once in the union
  CHECK(rep.excluded_union.size() == 4);
  CHECK(rep.n_retained == 3);

  // any order of rule application on the raw dataset yields the same set
  const auto run = [&](int a, int b, int c) {
    std::set<std::string> excluded;
    const FilterResult r0 = a == 0   ? filter_fast_responders(ds)
                            : a == 1 ? filter_straight_liners(ds)
                                     : filter_inconsistent(ds);
    const FilterResult r1 = b == 0   ? filter_fast_responders(ds)
                            : b == 1 ? filter_straight_liners(ds)
                                     : filter_inconsistent(ds);
    const FilterResult r2 = c == 0   ? filter_fast_responders(ds)
                            : c == 1 ? filter_straight_liners(ds)
                                     : filter_inconsistent(ds);
    for (const auto& r : {r0, r1, r2})
      excluded.insert(r.excluded_ids.begin(), r.excluded_ids.end());
    return excluded;
  };
  const auto reference = run(0, 1, 2);
  int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (auto& p : perm) CHECK(run(p[0], p[1], p[2]) == reference);
  // screening result equals the reference union
  std::set<std::string> uni(rep.excluded_union.begin(), rep.excluded_union.end());
  CHECK(uni == reference);
}

TEST_CASE("levels disagreeing with the linked design are rejected") {
  auto ds = ckt::make_dataset({{.id = "a"}});
  ds.observations[0].levels[0][0] = 2.0;  // crowding differs from the design row
  CHECK_THROWS_WITH_AS(ds.validate(), doctest::Contains("disagrees with the design"),
                       std::runtime_error);
}
