#include "choicekit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "choicekit/csv.hpp"

namespace choicekit {

void ChoiceDataset::validate() const {
  schema.validate();
  std::set<std::string> ids;
  for (const auto& r : respondents) {
    if (r.id.empty()) throw std::runtime_error("respondent with empty id");
    if (!ids.insert(r.id).second)
      throw std::runtime_error("duplicate respondent id '" + r.id + "'");
    const int max_block = design ? design->n_blocks : 3;
    if (r.block < 1 || r.block > max_block)
      throw std::runtime_error("respondent '" + r.id + "': unknown block " +
                               std::to_string(r.block));
    if (!(r.pivot_travel_time > 0))
      throw std::runtime_error("respondent '" + r.id + "': pivot travel time must be > 0");
    if (!(r.response_time > 0))
      throw std::runtime_error("respondent '" + r.id + "': response time must be > 0");
    if (r.household_size < 1 || r.n_children < 0 || r.n_workers < 0)
      throw std::runtime_error("respondent '" + r.id + "': bad household fields");
    if (r.covariates.size() != covariate_names.size())
      throw std::runtime_error("respondent '" + r.id + "': covariate count mismatch");
    for (double c : r.covariates)
      if (c != 0.0 && c != 1.0)
        throw std::runtime_error("respondent '" + r.id + "': covariate values must be 0/1");
  }

  std::vector<int> per_respondent(respondents.size(), 0);
  std::set<std::pair<int, int>> seen;
  for (const auto& o : observations) {
    if (o.respondent_idx < 0 || o.respondent_idx >= static_cast<int>(respondents.size()))
      throw std::runtime_error("observation with bad respondent index");
    if (o.chosen < 1 || o.chosen > n_alternatives)
      throw std::runtime_error("observation with chosen alternative " + std::to_string(o.chosen) +
                               " outside 1.." + std::to_string(n_alternatives));
    if (!seen.insert({o.respondent_idx, o.situation}).second)
      throw std::runtime_error("duplicate (respondent '" +
                               respondents[static_cast<std::size_t>(o.respondent_idx)].id +
                               "', situation " + std::to_string(o.situation) + ")");
    if (o.levels.size() != static_cast<std::size_t>(n_alternatives))
      throw std::runtime_error("observation missing alternative levels");
    for (const auto& lv : o.levels)
      if (lv.size() != schema.size())
        throw std::runtime_error("observation level count does not match schema");
    per_respondent[static_cast<std::size_t>(o.respondent_idx)] += 1;
    if (design) {
      const auto& r = respondents[static_cast<std::size_t>(o.respondent_idx)];
      if (!design->has_situation(r.block, o.situation))
        throw std::runtime_error("respondent '" + r.id + "': situation " +
                                 std::to_string(o.situation) + " not in block " +
                                 std::to_string(r.block) + " of the design");
      for (int j = 1; j <= n_alternatives; ++j) {
        const auto& expect = design->row(r.block, o.situation, j).levels;
        const auto& got = o.levels[static_cast<std::size_t>(j - 1)];
        for (std::size_t k = 0; k < expect.size(); ++k)
          if (std::fabs(expect[k] - got[k]) > 1e-9)
            throw std::runtime_error("respondent '" + r.id + "' situation " +
                                     std::to_string(o.situation) + ": attribute '" +
                                     schema.attributes[k].name + "' disagrees with the design");
      }
    }
  }
  for (std::size_t i = 0; i < respondents.size(); ++i)
    if (per_respondent[i] != situations_per_respondent)
      throw std::runtime_error("respondent '" + respondents[i].id + "' has " +
                               std::to_string(per_respondent[i]) + " observations, expected " +
                               std::to_string(situations_per_respondent));
}

namespace {

const char* kFixedRespondentCols[] = {"respondent_id", "block",          "pivot_travel_time",
                                      "response_time", "household_size", "n_children",
                                      "n_workers"};

}  // namespace

ChoiceDataset load_responses(const std::string& choices_path,
                             const std::string& respondents_path,
                             const AttributeSchema& schema,
                             const std::optional<DesignPlan>& design) {
  ChoiceDataset ds;
  ds.schema = schema;
  ds.design = design;

  // respondent metadata; any column beyond the fixed block is a 0/1 covariate
  {
    const CsvTable t = read_csv(respondents_path);
    std::vector<int> fixed;
    for (const char* name : kFixedRespondentCols) fixed.push_back(t.require_column(name));
    std::vector<int> cov_cols;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (std::find(fixed.begin(), fixed.end(), static_cast<int>(c)) == fixed.end()) {
        cov_cols.push_back(static_cast<int>(c));
        ds.covariate_names.push_back(t.header[c]);
      }
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& row = t.rows[i];
      const std::string ctx = respondents_path + ":" + std::to_string(t.line_numbers[i]);
      Respondent r;
      r.id = row[static_cast<std::size_t>(fixed[0])];
      r.block = static_cast<int>(parse_long(row[static_cast<std::size_t>(fixed[1])], ctx));
      r.pivot_travel_time = parse_double(row[static_cast<std::size_t>(fixed[2])], ctx);
      r.response_time = parse_double(row[static_cast<std::size_t>(fixed[3])], ctx);
      r.household_size = static_cast<int>(parse_long(row[static_cast<std::size_t>(fixed[4])], ctx));
      r.n_children = static_cast<int>(parse_long(row[static_cast<std::size_t>(fixed[5])], ctx));
      r.n_workers = static_cast<int>(parse_long(row[static_cast<std::size_t>(fixed[6])], ctx));
      for (int c : cov_cols) {
        const std::string& cell = row[static_cast<std::size_t>(c)];
        if (cell.empty())
          throw std::runtime_error(ctx + ": missing covariate '" +
                                   t.header[static_cast<std::size_t>(c)] + "'");
        r.covariates.push_back(parse_double(cell, ctx));
      }
      ds.respondents.push_back(std::move(r));
    }
  }

  std::map<std::string, int> resp_index;
  for (std::size_t i = 0; i < ds.respondents.size(); ++i)
    resp_index[ds.respondents[i].id] = static_cast<int>(i);

  // long-format choices: one row per (respondent, situation, alternative)
  {
    const CsvTable t = read_csv(choices_path);
    const int c_id = t.require_column("respondent_id");
    const int c_sit = t.require_column("situation");
    const int c_alt = t.require_column("alternative");
    const int c_chosen = t.require_column("chosen");
    std::vector<int> attr_cols;
    for (const auto& a : schema.attributes) attr_cols.push_back(t.require_column(a.name));

    std::map<std::pair<int, int>, Observation> partial;  // (respondent idx, situation)
    std::map<std::pair<int, int>, int> first_line;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& row = t.rows[i];
      const std::string ctx = choices_path + ":" + std::to_string(t.line_numbers[i]);
      const std::string id = row[static_cast<std::size_t>(c_id)];
      const auto it = resp_index.find(id);
      if (it == resp_index.end())
        throw std::runtime_error(ctx + ": respondent '" + id + "' not in metadata file");
      const int sit = static_cast<int>(parse_long(row[static_cast<std::size_t>(c_sit)], ctx));
      const int alt = static_cast<int>(parse_long(row[static_cast<std::size_t>(c_alt)], ctx));
      const int chosen = static_cast<int>(parse_long(row[static_cast<std::size_t>(c_chosen)], ctx));
      if (alt < 1 || alt > ds.n_alternatives)
        throw std::runtime_error(ctx + ": alternative " + std::to_string(alt) + " outside 1.." +
                                 std::to_string(ds.n_alternatives));
      if (chosen < 1 || chosen > ds.n_alternatives)
        throw std::runtime_error(ctx + ": chosen alternative " + std::to_string(chosen) +
                                 " outside 1.." + std::to_string(ds.n_alternatives));
      auto key = std::make_pair(it->second, sit);
      auto& obs = partial[key];
      if (obs.levels.empty()) {
        obs.respondent_idx = it->second;
        obs.situation = sit;
        obs.chosen = chosen;
        obs.levels.assign(static_cast<std::size_t>(ds.n_alternatives), {});
        first_line[key] = t.line_numbers[i];
      } else if (obs.chosen != chosen) {
        throw std::runtime_error(ctx + ": chosen disagrees across alternatives of situation " +
                                 std::to_string(sit));
      }
      auto& lv = obs.levels[static_cast<std::size_t>(alt - 1)];
      if (!lv.empty())
        throw std::runtime_error(ctx + ": duplicate (respondent '" + id + "', situation " +
                                 std::to_string(sit) + ", alternative " + std::to_string(alt) + ")");
      for (std::size_t k = 0; k < attr_cols.size(); ++k) {
        const double raw = parse_double(row[static_cast<std::size_t>(attr_cols[k])], ctx);
        if (!schema.attributes[k].has_level(raw))
          throw std::runtime_error(ctx + ": unknown level " + std::to_string(raw) +
                                   " for attribute '" + schema.attributes[k].name + "'");
        lv.push_back(raw);
      }
    }
    for (auto& [key, obs] : partial) {
      for (int j = 0; j < ds.n_alternatives; ++j)
        if (obs.levels[static_cast<std::size_t>(j)].empty())
          throw std::runtime_error(choices_path + ":" + std::to_string(first_line[key]) +
                                   ": situation " + std::to_string(obs.situation) +
                                   " is missing alternative " + std::to_string(j + 1));
      ds.observations.push_back(std::move(obs));
    }
  }

  // group observations by respondent, then situation
  std::sort(ds.observations.begin(), ds.observations.end(),
            [](const Observation& a, const Observation& b) {
              return std::tie(a.respondent_idx, a.situation) <
                     std::tie(b.respondent_idx, b.situation);
            });
  ds.validate();
  return ds;
}

void save_responses(const ChoiceDataset& ds, const std::string& choices_path,
                    const std::string& respondents_path) {
  {
    std::ofstream out(respondents_path);
    if (!out) throw std::runtime_error("cannot write file: " + respondents_path);
    out << "respondent_id,block,pivot_travel_time,response_time,household_size,n_children,n_workers";
    for (const auto& c : ds.covariate_names) out << ',' << c;
    out << '\n';
    char buf[64];
    for (const auto& r : ds.respondents) {
      std::snprintf(buf, sizeof buf, "%g,%g", r.pivot_travel_time, r.response_time);
      out << r.id << ',' << r.block << ',' << buf << ',' << r.household_size << ','
          << r.n_children << ',' << r.n_workers;
      for (double c : r.covariates) out << ',' << static_cast<int>(c);
      out << '\n';
    }
  }
  {
    std::ofstream out(choices_path);
    if (!out) throw std::runtime_error("cannot write file: " + choices_path);
    out << "respondent_id,situation,alternative,chosen";
    for (const auto& a : ds.schema.attributes) out << ',' << a.name;
    out << '\n';
    char buf[32];
    for (const auto& o : ds.observations) {
      for (int j = 1; j <= ds.n_alternatives; ++j) {
        out << ds.respondent_of(o).id << ',' << o.situation << ',' << j << ',' << o.chosen;
        for (double v : o.levels[static_cast<std::size_t>(j - 1)]) {
          std::snprintf(buf, sizeof buf, "%g", v);
          out << ',' << buf;
        }
        out << '\n';
      }
    }
  }
}

ChoiceDataset drop_respondents(const ChoiceDataset& ds,
                               const std::vector<std::string>& exclude) {
  std::set<std::string> drop(exclude.begin(), exclude.end());
  ChoiceDataset out;
  out.schema = ds.schema;
  out.design = ds.design;
  out.covariate_names = ds.covariate_names;
  out.n_alternatives = ds.n_alternatives;
  out.situations_per_respondent = ds.situations_per_respondent;

  std::vector<int> remap(ds.respondents.size(), -1);
  for (std::size_t i = 0; i < ds.respondents.size(); ++i) {
    if (!drop.count(ds.respondents[i].id)) {
      remap[i] = static_cast<int>(out.respondents.size());
      out.respondents.push_back(ds.respondents[i]);
    }
  }
  for (const auto& o : ds.observations) {
    const int ni = remap[static_cast<std::size_t>(o.respondent_idx)];
    if (ni < 0) continue;
    Observation copy = o;
    copy.respondent_idx = ni;
    out.observations.push_back(std::move(copy));
  }
  return out;
}

namespace {

double median_response_time(const ChoiceDataset& ds) {
  if (ds.respondents.empty()) throw std::runtime_error("filter: empty dataset");
  std::vector<double> times;
  times.reserve(ds.respondents.size());
  for (const auto& r : ds.respondents) times.push_back(r.response_time);
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  return (n % 2 == 1) ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

}  // namespace

FilterResult filter_fast_responders(const ChoiceDataset& ds, double fraction) {
  const double threshold = fraction * median_response_time(ds);
  FilterResult res;
  for (const auto& r : ds.respondents)
    if (r.response_time < threshold) res.excluded_ids.push_back(r.id);
  res.retained = drop_respondents(ds, res.excluded_ids);
  return res;
}

FilterResult filter_straight_liners(const ChoiceDataset& ds) {
  FilterResult res;
  std::vector<int> first(ds.respondents.size(), 0);
  std::vector<bool> same(ds.respondents.size(), true);
  std::vector<int> count(ds.respondents.size(), 0);
  for (const auto& o : ds.observations) {
    auto i = static_cast<std::size_t>(o.respondent_idx);
    if (count[i] == 0) first[i] = o.chosen;
    else if (o.chosen != first[i]) same[i] = false;
    ++count[i];
  }
  for (std::size_t i = 0; i < ds.respondents.size(); ++i)
    if (count[i] > 0 && same[i]) res.excluded_ids.push_back(ds.respondents[i].id);
  res.retained = drop_respondents(ds, res.excluded_ids);
  return res;
}

FilterResult filter_inconsistent(const ChoiceDataset& ds) {
  FilterResult res;
  for (const auto& r : ds.respondents)
    if (r.household_size < r.n_children + r.n_workers) res.excluded_ids.push_back(r.id);
  res.retained = drop_respondents(ds, res.excluded_ids);
  return res;
}

std::pair<ChoiceDataset, ScreeningReport> screen_dataset(const ChoiceDataset& ds,
                                                         double fast_fraction) {
  ScreeningReport rep;
  rep.n_input = ds.respondents.size();
  rep.fast_responders = filter_fast_responders(ds, fast_fraction).excluded_ids;
  rep.straight_liners = filter_straight_liners(ds).excluded_ids;
  rep.inconsistent = filter_inconsistent(ds).excluded_ids;

  std::set<std::string> uni;
  uni.insert(rep.fast_responders.begin(), rep.fast_responders.end());
  uni.insert(rep.straight_liners.begin(), rep.straight_liners.end());
  uni.insert(rep.inconsistent.begin(), rep.inconsistent.end());
  rep.excluded_union.assign(uni.begin(), uni.end());

  ChoiceDataset retained = drop_respondents(ds, rep.excluded_union);
  rep.n_retained = retained.respondents.size();
  return {std::move(retained), std::move(rep)};
}

}  // namespace choicekit
