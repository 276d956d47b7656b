// choicekit: stated-choice estimation, design evaluation and sensitivity CLI.
//
// Exit codes: 0 success, 1 validation/config failure, 2 numerical failure
// (non-convergence), 3 I/O failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "choicekit/configs.hpp"
#include "choicekit/dataset.hpp"
#include "choicekit/doptimal.hpp"
#include "choicekit/mixing.hpp"
#include "choicekit/mnl.hpp"
#include "choicekit/mxl.hpp"
#include "choicekit/report.hpp"
#include "choicekit/result_io.hpp"
#include "choicekit/sensitivity.hpp"
#include "choicekit/simulate.hpp"

namespace fs = std::filesystem;
using namespace choicekit;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 20210301;
  int draws = 500;
  int threads = 1;
  bool timestamp = false;
};

void write_file(const std::string& path, const std::string& content) {
  if (!path.empty()) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void finish_manifest(RunManifest& m, const GlobalFlags& g, const std::string& path) {
  m.tool_version = tool_version();
  if (g.timestamp) {
    char buf[64];
    const std::time_t now = std::time(nullptr);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m.timestamp = buf;
  }
  write_file(path, m.to_json());
}

bool is_io_error(const std::exception& e) {
  const std::string msg = e.what();
  return msg.find("cannot open") != std::string::npos ||
         msg.find("cannot write") != std::string::npos;
}

std::optional<DesignPlan> resolve_design(const std::string& ref, const AttributeSchema& schema) {
  if (ref.empty()) return std::nullopt;
  if (ref == "reference") return reference_design();
  return load_design_csv(ref, schema);
}

int cmd_filter(const GlobalFlags& g, const std::string& choices, const std::string& respondents,
               const std::string& design_ref, const std::string& out_prefix) {
  const AttributeSchema schema = study_schema();
  const ChoiceDataset ds = load_responses(choices, respondents, schema,
                                          resolve_design(design_ref, schema));
  auto [retained, report] = screen_dataset(ds);

  const std::string out_choices = out_prefix + "_choices.csv";
  const std::string out_resp = out_prefix + "_respondents.csv";
  save_responses(retained, out_choices, out_resp);
  const std::string report_text = format_screening_report(report);
  const std::string out_report = out_prefix + "_screening.txt";
  write_file(out_report, report_text);
  std::cout << report_text;

  RunManifest m;
  m.command = "filter";
  m.input_hashes[choices] = file_hash_hex(choices);
  m.input_hashes[respondents] = file_hash_hex(respondents);
  m.output_hashes[out_choices] = file_hash_hex(out_choices);
  m.output_hashes[out_resp] = file_hash_hex(out_resp);
  m.output_hashes[out_report] = string_hash_hex(report_text);
  finish_manifest(m, g, out_prefix + "_manifest.json");
  return 0;
}

int cmd_estimate(const GlobalFlags& g, const std::string& choices, const std::string& respondents,
                 const std::string& design_ref, const std::string& model_path,
                 const std::string& engine, const std::string& out_prefix) {
  const AttributeSchema schema = study_schema();
  const ChoiceDataset ds = load_responses(choices, respondents, schema,
                                          resolve_design(design_ref, schema));
  const ModelSpec spec = load_model_config(model_path, schema, ds.covariate_names);

  std::map<std::string, std::string> hashes;
  hashes[choices] = file_hash_hex(choices);
  hashes[respondents] = file_hash_hex(respondents);
  hashes[model_path] = file_hash_hex(model_path);

  std::string report_text;
  ModelResult result;
  bool converged = true;

  const bool has_random = !spec.random_term_indices().empty();
  if (engine == "mxl" && !has_random)
    std::cerr << "note: no random coefficients in the spec; the MXL engine reduces to MNL\n";

  if (engine == "mnl" || !has_random) {
    const EstimationResult fit = estimate_mnl(ds, spec);
    converged = fit.converged;
    report_text = format_mnl_report(fit, spec, ds, hashes);
    result = model_result_from(fit, spec);
  } else if (engine == "mxl") {
    MxlOptions opt;
    opt.r_draws = g.draws;
    opt.seed = g.seed;
    opt.n_threads = g.threads;
    const MxlResult fit = estimate_mxl(ds, spec, opt);
    converged = fit.converged;
    report_text = format_mxl_report(fit, ds, hashes, 10000, g.seed);
    result = model_result_from(fit);
  } else {
    throw std::runtime_error("engine must be mnl or mxl");
  }

  const std::string out_report = out_prefix + "_report.txt";
  const std::string out_result = out_prefix + "_result.json";
  write_file(out_report, report_text);
  write_file(out_result, result_to_json(result));
  std::cout << report_text;

  RunManifest m;
  m.command = "estimate";
  m.config_hash = file_hash_hex(model_path);
  m.input_hashes = hashes;
  m.seeds["seed"] = g.seed;
  m.seeds["draws"] = static_cast<std::uint64_t>(g.draws);
  m.output_hashes[out_report] = string_hash_hex(report_text);
  m.output_hashes[out_result] = file_hash_hex(out_result);
  finish_manifest(m, g, out_prefix + "_manifest.json");
  if (!converged) {
    std::cerr << "estimation did not converge\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(const GlobalFlags& g, const std::string& config_path,
                 const std::string& out_prefix) {
  const AttributeSchema schema = study_schema();
  SimConfig cfg = load_sim_config(config_path, schema);

  const ChoiceDataset ds = simulate_dataset(cfg);
  const std::string out_choices = out_prefix + "_choices.csv";
  const std::string out_resp = out_prefix + "_respondents.csv";
  save_responses(ds, out_choices, out_resp);

  // the generating parameters, for recovery scoring
  ModelResult truth;
  truth.engine = cfg.spec.random_term_indices().empty() ? "mnl" : "mxl";
  truth.spec = cfg.spec;
  truth.packing = make_packing(cfg.spec);
  truth.theta.resize(truth.packing.size());
  for (std::size_t k = 0; k < cfg.spec.n_terms(); ++k)
    truth.theta[static_cast<Eigen::Index>(k)] = cfg.spec.mixing[k].mu;
  for (std::size_t i = 0; i < truth.packing.random_terms.size(); ++i)
    truth.theta[truth.packing.n_terms + static_cast<Eigen::Index>(i)] =
        cfg.spec.mixing[static_cast<std::size_t>(truth.packing.random_terms[i])].sigma;
  truth.seed = cfg.seed;
  const std::string out_truth = out_prefix + "_truth.json";
  write_file(out_truth, result_to_json(truth));

  std::cout << "simulated " << ds.respondents.size() << " respondents, "
            << ds.observations.size() << " observations\n";

  RunManifest m;
  m.command = "simulate";
  m.config_hash = file_hash_hex(config_path);
  m.input_hashes[config_path] = m.config_hash;
  m.seeds["seed"] = cfg.seed;
  m.output_hashes[out_choices] = file_hash_hex(out_choices);
  m.output_hashes[out_resp] = file_hash_hex(out_resp);
  m.output_hashes[out_truth] = file_hash_hex(out_truth);
  finish_manifest(m, g, out_prefix + "_manifest.json");
  return 0;
}

int cmd_design(const GlobalFlags& g, const std::string& action, const std::string& design_ref,
               int iterations, const std::string& out_path) {
  const AttributeSchema schema = study_schema();
  const DesignPlan plan = design_ref == "reference" ? reference_design()
                                                    : load_design_csv(design_ref, schema);
  const auto constraints = study_constraints();
  const ModelSpec spec = design_model_spec(schema);
  PriorSpec prior = default_design_prior(spec);
  prior.seed = g.seed;

  const auto violations = check_constraints(plan, schema, constraints);
  const ProfileAudit audit = partial_profile_audit(plan, schema);

  std::cout << "design: " << (design_ref == "reference" ? "shipped reference" : design_ref)
            << "\n";
  std::cout << "constraint violations: " << violations.size() << "\n";
  for (const auto& v : violations)
    std::cout << "  block " << v.block << " situation " << v.situation << " alternative "
              << v.alternative << ": " << v.label << "\n";
  std::cout << "partial-profile audit (constant attributes per set):\n";
  for (const auto& rep : audit.sets) {
    std::cout << "  block " << rep.block << " set " << rep.situation << ": "
              << rep.constant_attributes.size() << " (";
    for (std::size_t i = 0; i < rep.constant_attributes.size(); ++i)
      std::cout << (i ? ", " : "") << rep.constant_attributes[i];
    std::cout << ")\n";
  }
  std::cout << "per-block constant-set counts:\n";
  for (int b = 0; b < static_cast<int>(audit.per_block_counts.size()); ++b) {
    std::cout << "  block " << (b + 1) << ":";
    for (std::size_t k = 0; k < schema.size(); ++k)
      std::cout << ' ' << schema.attributes[k].name << '='
                << audit.per_block_counts[static_cast<std::size_t>(b)][k];
    std::cout << "\n";
  }

  char buf[64];
  const double bd = bayesian_d_error(plan, schema, spec, prior);
  std::snprintf(buf, sizeof buf, "%.6f", bd);
  std::cout << "bayesian D-error (default prior, " << prior.n_draws << " draws): " << buf << "\n";

  if (action == "eval") {
    return violations.empty() ? 0 : 1;
  }

  // improve
  if (!violations.empty()) {
    std::cerr << "cannot improve an infeasible design\n";
    return 1;
  }
  ImproveOptions opt;
  opt.iterations = iterations;
  opt.seed = g.seed;
  const ImproveResult res = improve_design(plan, schema, constraints, spec, prior, opt);
  std::snprintf(buf, sizeof buf, "%.6f", res.final_d_error);
  std::cout << "improved bayesian D-error: " << buf << " (" << res.accepted_moves
            << " accepted moves of " << res.proposed_moves << ")\n";
  if (!out_path.empty()) {
    save_design_csv(res.plan, schema, out_path);
    RunManifest m;
    m.command = "design improve";
    m.seeds["seed"] = g.seed;
    m.output_hashes[out_path] = file_hash_hex(out_path);
    finish_manifest(m, g, out_path + ".manifest.json");
  }
  return 0;
}

int cmd_sensitivity(const GlobalFlags& g, const std::string& result_path,
                    const std::string& scenario_path, const std::string& out_dir) {
  const AttributeSchema schema = study_schema();
  const ModelResult model = load_result(result_path, schema, study_covariate_names());
  ScenarioConfig scenario = load_scenario_config(scenario_path, schema);
  if (g.seed != 20210301) {
    scenario.seed = g.seed;
    for (auto& s : scenario.sweeps) s.sweep.seed = g.seed;
  }

  const Baseline baseline = scenario_baseline(scenario, schema, model.spec);
  const MxlResult as_mxl = model.as_mxl();

  RunManifest m;
  m.command = "sensitivity";
  m.config_hash = file_hash_hex(scenario_path);
  m.input_hashes[result_path] = file_hash_hex(result_path);
  m.input_hashes[scenario_path] = m.config_hash;
  m.seeds["seed"] = scenario.seed;

  fs::create_directories(out_dir);
  for (const auto& sc : scenario.sweeps) {
    std::vector<std::pair<std::string, SensitivityTable>> tables;
    if (sc.group) {
      auto [grp, cmp] = group_sweep(baseline, sc.sweep, schema, as_mxl, *sc.group);
      tables.emplace_back(sc.label + "_group", std::move(grp));
      tables.emplace_back(sc.label + "_complement", std::move(cmp));
    } else if (model.engine == "mnl") {
      tables.emplace_back(sc.label,
                          sweep_mnl(baseline, sc.sweep, schema, model.spec,
                                    model.theta.head(static_cast<Eigen::Index>(model.spec.n_terms()))));
    } else {
      tables.emplace_back(sc.label, sweep_mxl(baseline, sc.sweep, schema, as_mxl));
    }
    for (const auto& [label, table] : tables) {
      const std::string path = (fs::path(out_dir) / (label + ".csv")).string();
      const std::string csv = sensitivity_csv(scenario.name + "/" + label, table);
      write_file(path, csv);
      m.output_hashes[path] = string_hash_hex(csv);
      std::cout << "wrote " << path << "\n";
    }
  }
  finish_manifest(m, g, (fs::path(out_dir) / "manifest.json").string());
  return 0;
}

int cmd_lrtest(double ll_restricted, double ll_full, int df) {
  const LrTest t = lr_test(ll_restricted, ll_full, df);
  char buf[128];
  std::snprintf(buf, sizeof buf, "statistic: %.4f\ndf: %d\np-value: %.4g\n", t.statistic, t.df,
                t.p_value);
  std::cout << buf;
  return 0;
}

int cmd_summarize_mixing(const std::string& family, double mu, double sigma, int sign) {
  DistributionSummary s;
  if (family == "lognormal") s = lognormal_summary(mu, sigma, sign);
  else if (family == "normal") s = normal_summary(mu, sigma);
  else throw std::runtime_error("family must be normal or lognormal");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "mean: %.4f\nstd.dev: %.4f\np5: %.4f\np50: %.4f\np95: %.4f\n", s.mean, s.std_dev,
                s.p5, s.p50, s.p95);
  std::cout << buf;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"choicekit: stated-choice estimation, screening, design evaluation and "
               "incremental-logit sensitivity"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--seed", g.seed, "random seed (default 20210301)");
  app.add_option("--draws", g.draws, "simulation draw count R (default 500)");
  app.add_option("--threads", g.threads, "worker threads for likelihood evaluation");
  app.add_flag("--timestamp", g.timestamp, "record wall-clock time in manifests (off by default "
                                           "so reruns are bitwise identical)");

  // filter
  auto* filter = app.add_subcommand("filter", "screen a dataset with the three exclusion rules");
  std::string f_choices, f_resp, f_design, f_out = "screened";
  filter->add_option("--choices", f_choices, "long-format choice CSV")->required();
  filter->add_option("--respondents", f_resp, "respondent metadata CSV")->required();
  filter->add_option("--design", f_design, "design CSV or 'reference'");
  filter->add_option("--out-prefix", f_out, "output path prefix");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "fit an MNL or panel MXL model");
  std::string e_choices, e_resp, e_design, e_model, e_engine = "mnl", e_out = "fit";
  estimate->add_option("--choices", e_choices)->required();
  estimate->add_option("--respondents", e_resp)->required();
  estimate->add_option("--design", e_design, "design CSV or 'reference'");
  estimate->add_option("--model", e_model, "model config JSON")->required();
  estimate->add_option("--engine", e_engine, "mnl | mxl");
  estimate->add_option("--out-prefix", e_out);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate synthetic choices from a model");
  std::string s_config, s_out = "sim";
  simulate->add_option("--config", s_config, "simulation config JSON")->required();
  simulate->add_option("--out-prefix", s_out);

  // design
  auto* design = app.add_subcommand("design", "evaluate or improve a choice design");
  std::string d_action = "eval", d_design = "reference", d_out;
  int d_iterations = 500;
  design->add_option("action", d_action, "eval | improve");
  design->add_option("--design", d_design, "design CSV or 'reference'");
  design->add_option("--iterations", d_iterations, "exchange iterations for improve");
  design->add_option("--out", d_out, "improved design CSV path");

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "incremental-logit probability sweeps");
  std::string x_result, x_scenario, x_out = "sweeps";
  sens->add_option("--model-result", x_result, "result JSON from estimate (or published set)")
      ->required();
  sens->add_option("--scenario", x_scenario, "scenario config JSON")->required();
  sens->add_option("--out-dir", x_out);

  // lrtest
  auto* lr = app.add_subcommand("lrtest", "likelihood-ratio test from two loglikelihoods");
  double lr_restricted = 0, lr_full = 0;
  int lr_df = 1;
  lr->add_option("--restricted", lr_restricted, "restricted-model loglikelihood")->required();
  lr->add_option("--full", lr_full, "full-model loglikelihood")->required();
  lr->add_option("--df", lr_df, "degrees of freedom")->required();

  // summarize-mixing
  auto* sm = app.add_subcommand("summarize-mixing", "closed-form mixing distribution summary");
  std::string sm_family = "lognormal";
  double sm_mu = 0, sm_sigma = 0;
  int sm_sign = 1;
  sm->add_option("--family", sm_family, "normal | lognormal");
  sm->add_option("--mu", sm_mu, "underlying-normal mean")->required();
  sm->add_option("--sigma", sm_sigma, "underlying-normal std. dev.")->required();
  sm->add_option("--sign", sm_sign, "utility-side sign for lognormal (+1/-1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (filter->parsed()) return cmd_filter(g, f_choices, f_resp, f_design, f_out);
    if (estimate->parsed())
      return cmd_estimate(g, e_choices, e_resp, e_design, e_model, e_engine, e_out);
    if (simulate->parsed()) return cmd_simulate(g, s_config, s_out);
    if (design->parsed()) {
      if (d_action != "eval" && d_action != "improve")
        throw std::runtime_error("design action must be eval or improve");
      return cmd_design(g, d_action, d_design, d_iterations, d_out);
    }
    if (sens->parsed()) return cmd_sensitivity(g, x_result, x_scenario, x_out);
    if (lr->parsed()) return cmd_lrtest(lr_restricted, lr_full, lr_df);
    if (sm->parsed()) return cmd_summarize_mixing(sm_family, sm_mu, sm_sigma, sm_sign);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_io_error(e) ? 3 : 1;
  }
  return 1;
}
