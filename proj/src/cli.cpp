#include "nfaq/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nfaq/analytics.hpp"
#include "nfaq/campaign.hpp"
#include "nfaq/compiler.hpp"
#include "nfaq/error.hpp"
#include "nfaq/inference.hpp"
#include "nfaq/intent.hpp"
#include "nfaq/metrics.hpp"
#include "nfaq/runtime.hpp"
#include "nfaq/simbat.hpp"

namespace nfaq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnderspecified = 3;
constexpr int kExitAmbiguous = 4;
constexpr int kExitExhausted = 5;
constexpr int kExitInternal = 6;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SchemaError, "cannot write " + path);
  out << content;
}

std::string default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("NFAQ_OUT_DIR"); env && *env) return env;
  return ".";
}

json issues_to_json(const std::vector<ValidationIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues)
    out.push_back({{"detail", i.detail}, {"rule", i.rule}, {"state", i.state_id}});
  return out;
}

// Specs handed to the compiler or executor must be clean.
IntentSpec load_valid_spec(const std::string& path) {
  IntentSpec spec = parse_spec(slurp(path));
  const auto issues = validate_spec(spec);
  if (!issues.empty())
    throw Error(ErrorCode::SchemaError,
                path + " fails validation: " + issues_to_json(issues).dump());
  return spec;
}

int exit_code_for(QueryStatus status) {
  switch (status) {
    case QueryStatus::Terminal: return kExitOk;
    case QueryStatus::Underspecified: return kExitUnderspecified;
    case QueryStatus::Ambiguous: return kExitAmbiguous;
    case QueryStatus::NoAdmissibleAction:
    case QueryStatus::StepBudgetExhausted: return kExitExhausted;
  }
  return kExitInternal;
}

int cmd_validate(const std::string& spec_path) {
  IntentSpec spec = parse_spec(slurp(spec_path));
  const auto issues = validate_spec(spec);
  std::cout << issues_to_json(issues).dump(2) << "\n";
  return issues.empty() ? kExitOk : kExitInput;
}

int cmd_compile(const std::string& spec_path, const std::string& out_path) {
  IntentSpec spec = load_valid_spec(spec_path);
  const ConcreteNfa nfa = compile(spec);
  const std::string rendered = concrete_nfa_to_json(nfa).dump(2) + "\n";
  if (!out_path.empty()) spit(out_path, rendered);
  std::cout << rendered;
  return kExitOk;
}

int cmd_materialize(const std::string& spec_path, int harness) {
  IntentSpec spec = load_valid_spec(spec_path);
  std::cout << render_program(materialize_imperative(spec, harness));
  return kExitOk;
}

int cmd_run(const std::string& spec_path, const std::string& address,
            const std::string& bat_path, int step_budget) {
  IntentSpec spec = load_valid_spec(spec_path);
  SimBat bat = parse_bat(slurp(bat_path));
  const auto problems = check_bat(bat);
  if (!problems.empty())
    throw Error(ErrorCode::SchemaError, bat_path + ": " + problems.front());

  // The address class comes from a catalog when available next to the BAT;
  // a bare run defaults to SERVICEABLE_PLANS.
  AddressRecord rec;
  rec.address = address;
  rec.cls = AddressClass::ServiceablePlans;
  const fs::path catalog_path = fs::path(bat_path).replace_extension(".catalog.json");
  if (fs::exists(catalog_path)) {
    for (const auto& entry : parse_catalog(slurp(catalog_path.string())))
      if (entry.address == address) rec = entry;
  }

  SimSession session(bat, rec);
  const ConcreteNfa nfa = compile(spec);
  QueryResult result = execute_query(nfa, address, session, step_budget);
  std::cout << query_result_to_json(result).dump(2) << "\n";
  return exit_code_for(result.status);
}

int cmd_mutate(const std::string& bat_path, const std::string& op_path,
               const std::string& out_path) {
  SimBat bat = parse_bat(slurp(bat_path));
  json op_doc = json::parse(slurp(op_path), nullptr, false);
  if (op_doc.is_discarded())
    throw Error(ErrorCode::SchemaError, op_path + " is not valid JSON");
  SimBat mutated = mutate(bat, mutation_op_from_json(op_doc));
  spit(out_path, serialize_bat(mutated));
  json summary = {{"out", out_path},
                  {"pages", mutated.pages.size()},
                  {"revision", mutated.revision}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_fleet(std::uint64_t seed, int n, const std::string& pool_path, double share,
              const std::string& out_dir_flag) {
  std::vector<std::string> pool = builtin_vocab();
  if (!pool_path.empty()) {
    json doc = json::parse(slurp(pool_path), nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
      throw Error(ErrorCode::SchemaError, pool_path + " must be a JSON array of words");
    pool.clear();
    for (const auto& w : doc) pool.push_back(w.get<std::string>());
  }
  const std::string out_dir = default_out_dir(out_dir_flag);
  fs::create_directories(out_dir);

  const auto fleet = generate_fleet(seed, n, pool, share);
  json manifest;
  manifest["items"] = json::array();
  char num[8];
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    std::snprintf(num, sizeof(num), "%02zu", i);
    const std::string bat_name = std::string("bat_") + num + ".json";
    const std::string spec_name = std::string("spec_") + num + ".json";
    const std::string catalog_name = std::string("catalog_") + num + ".json";
    spit(out_dir + "/" + bat_name, serialize_bat(fleet[i].bat));
    spit(out_dir + "/" + spec_name, serialize_spec(fleet[i].spec));
    spit(out_dir + "/" + catalog_name, serialize_catalog(fleet[i].catalog));
    manifest["items"].push_back({{"bat", bat_name},
                                 {"catalog", catalog_name},
                                 {"isp_id", fleet[i].bat.isp_id},
                                 {"spec", spec_name}});
  }
  manifest["n"] = n;
  manifest["pool_size"] = pool.size();
  manifest["seed"] = seed;
  manifest["share_ratio"] = share;
  spit(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << "\n";
  return kExitOk;
}

int cmd_campaign(const std::string& config_path, const std::string& out_dir_flag,
                 int stop_after_round) {
  json doc = json::parse(slurp(config_path), nullptr, false);
  if (doc.is_discarded())
    throw Error(ErrorCode::SchemaError, config_path + " is not valid JSON");
  CampaignConfig config = campaign_config_from_json(doc);
  const std::string out_dir = default_out_dir(out_dir_flag);
  const CampaignOutcome outcome = run_campaign(config, out_dir, stop_after_round);

  // Summaries are derived from the full persisted history, not just this
  // invocation, so a resumed campaign reports the same numbers.
  std::vector<ResultLine> history;
  std::ifstream results_in(out_dir + "/results.jsonl", std::ios::binary);
  std::string line;
  while (std::getline(results_in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (!j.is_discarded()) history.push_back(result_line_from_json(j));
  }

  json summary;
  summary["rounds_executed"] = outcome.rounds_executed;
  json hit_rates = json::object();
  std::map<std::pair<std::string, int>, std::vector<ResultLine>> grouped;
  for (const auto& l : history) grouped[{l.isp_id, l.round}].push_back(l);
  for (const auto& [key, lines] : grouped)
    hit_rates[key.first + "/round" + std::to_string(key.second)] = hit_rate(lines);
  summary["hit_rates"] = std::move(hit_rates);

  const auto updates = detect_interface_updates(history);
  json update_json = json::array();
  for (const auto& u : updates) {
    update_json.push_back({{"address", u.address},
                           {"curr", {u.curr_status, u.curr_outcome}},
                           {"isp", u.isp_id},
                           {"prev", {u.prev_status, u.prev_outcome}},
                           {"round", u.round}});
  }
  json isp_updates = json::array();
  for (const auto& [isp, round] : isp_update_rounds(updates))
    isp_updates.push_back({{"isp", isp}, {"round", round}});
  summary["isp_updates"] = isp_updates;
  summary["update_events"] = update_json;
  spit(out_dir + "/updates.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_metrics(const std::string& specs_dir, const std::string& interventions_path,
                const std::string& out_path, const std::string& csv_dir, int harness) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(specs_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json" &&
        name.rfind("spec", 0) == 0)
      paths.push_back(entry.path().string());
  }
  if (paths.empty()) {
    // Fall back to every .json file in onboarding (filename) order.
    for (const auto& entry : fs::directory_iterator(specs_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw Error(ErrorCode::EmptyInput, "no spec files in " + specs_dir);

  std::vector<IntentSpec> specs;
  for (const auto& p : paths) specs.push_back(parse_spec(slurp(p)));

  json report;
  json per_isp = json::array();
  std::vector<double> all_ratios;
  for (const auto& spec : specs) {
    per_isp.push_back({{"isp_id", spec.isp_id},
                       {"lloc", lloc(spec, harness)},
                       {"llos", llos(spec)},
                       {"lsc", spec.authoring_input_chars},
                       {"states", spec.states.size()}});
    for (double r : compression_ratios(spec)) all_ratios.push_back(r);
  }
  report["per_isp"] = std::move(per_isp);
  report["compression_ratios"] = all_ratios;

  json usage = json::object();
  for (const auto& [primitive, count] : api_usage(specs)) usage[to_string(primitive)] = count;
  report["api_usage"] = std::move(usage);

  const auto growth = token_growth(specs);
  report["token_growth"] = growth;
  const auto jaccards = jaccard_pairs(fleet_detector_token_sets(specs));
  report["jaccard"] = jaccards;

  if (!interventions_path.empty()) {
    json interventions = json::array();
    std::ifstream in(interventions_path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      interventions.push_back({{"isp", j.value("isp", "")},
                               {"llos_delta", j.value("llos_delta", 0)},
                               {"lloc_delta", j.value("lloc_delta", 0)},
                               {"round", j.value("round", 0)},
                               {"states_affected",
                                j.value("states_added", 0) + j.value("states_edited", 0) +
                                    j.value("states_removed", 0)}});
    }
    report["per_intervention"] = std::move(interventions);
  }

  if (!csv_dir.empty()) {
    fs::create_directories(csv_dir);
    std::string compression_csv = "ratio\n";
    for (double r : all_ratios) compression_csv += std::to_string(r) + "\n";
    spit(csv_dir + "/compression_cdf.csv", compression_csv);
    std::string growth_csv = "spec_index,cumulative_unique_tokens\n";
    for (std::size_t i = 0; i < growth.size(); ++i)
      growth_csv += std::to_string(i + 1) + "," + std::to_string(growth[i]) + "\n";
    spit(csv_dir + "/token_growth.csv", growth_csv);
    std::string jaccard_csv = "jaccard\n";
    for (double v : jaccards) jaccard_csv += std::to_string(v) + "\n";
    spit(csv_dir + "/jaccard_cdf.csv", jaccard_csv);
  }

  const std::string rendered = report.dump(2) + "\n";
  if (!out_path.empty()) spit(out_path, rendered);
  std::cout << rendered;
  return kExitOk;
}

int cmd_infer(const std::string& bat_path, const std::string& catalog_path,
              const std::string& out_path, int max_pages) {
  SimBat bat = parse_bat(slurp(bat_path));
  Catalog catalog = parse_catalog(slurp(catalog_path));
  bool truncated = false;
  IntentSpec spec = infer_spec(bat, budget_from_catalog(catalog, max_pages), &truncated);
  if (truncated)
    std::cerr << "BUDGET_EXCEEDED: exploration stopped at " << max_pages
              << " pages; spec is partial\n";
  spit(out_path, serialize_spec(spec));
  std::cout << serialize_spec(spec);
  return kExitOk;
}

int cmd_fidelity(const std::string& spec_a_path, const std::string& spec_b_path,
                 const std::string& bat_path, const std::string& catalog_path,
                 int step_budget) {
  IntentSpec a = load_valid_spec(spec_a_path);
  IntentSpec b = load_valid_spec(spec_b_path);
  SimBat bat = parse_bat(slurp(bat_path));
  Catalog catalog = parse_catalog(slurp(catalog_path));
  const double agreement = fidelity_check(a, b, bat, catalog, step_budget);
  json out = {{"agreement", agreement}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_analyze(const std::string& plans_path, const std::string& cbgs_path,
                const std::string& out_dir_flag, const std::string& results_path) {
  std::vector<PlanRecord> plans;
  {
    std::ifstream in(plans_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + plans_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw Error(ErrorCode::SchemaError, plans_path + ": bad JSONL line");
      plans.push_back(plan_record_from_json(j));
    }
  }
  const std::vector<CbgRecord> cbgs = parse_cbg_csv(slurp(cbgs_path));

  // Coverage quality needs the campaign results for the denominator
  // (queried addresses per CBG); without them every covered CBG reads 1.0.
  std::map<std::string, double> coverage;
  if (!results_path.empty()) {
    std::map<std::string, std::set<std::string>> queried, curated;
    std::ifstream in(results_path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      const ResultLine rl = result_line_from_json(j);
      if (rl.cbg_id.empty()) continue;
      queried[rl.cbg_id].insert(rl.address);
      if (rl.plan_count > 0) curated[rl.cbg_id].insert(rl.address);
    }
    for (const auto& [cbg, addrs] : queried)
      coverage[cbg] =
          static_cast<double>(curated[cbg].size()) / static_cast<double>(addrs.size());
  }

  const FrontierSummary summary = frontier(cbgs, plans, coverage);
  const BaselineStats all_stats = baseline_stats(cbgs, plans);

  std::vector<CbgRecord> eligible;
  for (const auto& cbg : cbgs)
    if (cbg.bsl_count > 0 && bead_eligible(cbg)) eligible.push_back(cbg);
  const BaselineStats eligible_stats = baseline_stats(eligible, plans);

  std::map<std::string, std::set<std::string>> isp_coverage;
  for (const auto& p : plans) isp_coverage[p.cbg_id].insert(p.isp_id);
  const MarketShares shares = market_structure(isp_coverage);

  const std::string out_dir = default_out_dir(out_dir_flag);
  fs::create_directories(out_dir);

  std::string frontier_csv = "cbg_id,plan_price,threshold,qualifying,coverage_quality\n";
  char buf[160];
  for (const auto& p : summary.points) {
    std::string price = p.plan_price ? [&] {
      char pbuf[32];
      std::snprintf(pbuf, sizeof(pbuf), "%.2f", *p.plan_price);
      return std::string(pbuf);
    }() : std::string();
    std::snprintf(buf, sizeof(buf), "%s,%s,%.2f,%s,%.4f\n", p.cbg_id.c_str(), price.c_str(),
                  p.threshold, p.qualifying ? "true" : "false", p.coverage_quality);
    frontier_csv += buf;
  }
  spit(out_dir + "/frontier.csv", frontier_csv);

  json out;
  out["baseline_all"] = {{"frac_no_qualifying_plan", all_stats.frac_no_qualifying_plan},
                         {"frac_price_above_threshold", all_stats.frac_price_above_threshold},
                         {"frac_speed_below_100", all_stats.frac_speed_below_100}};
  out["baseline_bead_eligible"] = {
      {"frac_no_qualifying_plan", eligible_stats.frac_no_qualifying_plan},
      {"frac_price_above_threshold", eligible_stats.frac_price_above_threshold},
      {"frac_speed_below_100", eligible_stats.frac_speed_below_100}};
  out["bead_eligible_count"] = eligible.size();
  out["cbg_count"] = cbgs.size();
  out["frac_with_affordable_plan"] = summary.frac_with_affordable_plan;
  out["frac_without_affordable_plan"] = summary.frac_without_affordable_plan;
  out["market_structure"] = {{"duopoly", shares.duopoly},
                             {"monopoly", shares.monopoly},
                             {"triopoly_plus", shares.triopoly_plus}};
  json per_isp_market = json::object();
  for (const auto& [isp, s] : market_structure_per_isp(isp_coverage))
    per_isp_market[isp] = {{"duopoly", s.duopoly},
                           {"monopoly", s.monopoly},
                           {"triopoly_plus", s.triopoly_plus}};
  out["market_structure_per_isp"] = std::move(per_isp_market);
  spit(out_dir + "/summary.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"NFA-based service-qualification querying testbed"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::uint64_t seed = 1;
  int step_budget = kDefaultStepBudget;
  int harness = kDefaultHarnessConstant;
  app.add_option("--seed", seed, "Deterministic seed for generators");
  app.add_option("--step-budget", step_budget, "Executor step budget");
  app.add_option("--harness", harness, "Materializer harness constant");

  std::string spec_path, spec_b_path, bat_path, catalog_path, address, op_path;
  std::string out_path, out_dir, config_path, plans_path, cbgs_path, results_path;
  std::string interventions_path, csv_dir, pool_path;
  int fleet_n = 1;
  double share = 0.8;
  int stop_after_round = -1;
  int max_pages = 64;

  auto* validate = app.add_subcommand("validate", "Check a spec against its invariants");
  validate->add_option("--spec", spec_path)->required();

  auto* compile_cmd = app.add_subcommand("compile", "Compile a spec to a concrete NFA");
  compile_cmd->add_option("--spec", spec_path)->required();
  compile_cmd->add_option("--out", out_path);

  auto* materialize = app.add_subcommand("materialize", "Emit the imperative realization");
  materialize->add_option("--spec", spec_path)->required();

  auto* run = app.add_subcommand("run", "Execute one query against a BAT file");
  run->add_option("--spec", spec_path)->required();
  run->add_option("--address", address)->required();
  run->add_option("--env", bat_path)->required();

  auto* mutate_cmd = app.add_subcommand("mutate", "Apply one mutation operator to a BAT");
  mutate_cmd->add_option("--bat", bat_path)->required();
  mutate_cmd->add_option("--op", op_path)->required();
  mutate_cmd->add_option("--out", out_path)->required();

  auto* fleet = app.add_subcommand("fleet", "Generate BAT/spec/catalog fixtures");
  fleet->add_option("--n", fleet_n)->required();
  fleet->add_option("--pool", pool_path);
  fleet->add_option("--share", share);
  fleet->add_option("--out-dir", out_dir);

  auto* campaign = app.add_subcommand("campaign", "Run a longitudinal measurement campaign");
  campaign->add_option("--config", config_path)->required();
  campaign->add_option("--out-dir", out_dir);
  campaign->add_option("--stop-after-round", stop_after_round);

  auto* metrics = app.add_subcommand("metrics", "Compute specification metrics");
  metrics->add_option("--specs", spec_path)->required();
  metrics->add_option("--interventions", interventions_path);
  metrics->add_option("--out", out_path);
  metrics->add_option("--csv", csv_dir);

  auto* infer = app.add_subcommand("infer", "Synthesize a spec by exploring a BAT");
  infer->add_option("--bat", bat_path)->required();
  infer->add_option("--catalog", catalog_path)->required();
  infer->add_option("--out", out_path)->required();
  infer->add_option("--max-pages", max_pages);

  auto* fidelity = app.add_subcommand("fidelity", "Terminal-outcome agreement of two specs");
  fidelity->add_option("--spec-a", spec_path)->required();
  fidelity->add_option("--spec-b", spec_b_path)->required();
  fidelity->add_option("--bat", bat_path)->required();
  fidelity->add_option("--catalog", catalog_path)->required();

  auto* analyze = app.add_subcommand("analyze", "Affordability and baseline analytics");
  analyze->add_option("--plans", plans_path)->required();
  analyze->add_option("--cbgs", cbgs_path)->required();
  analyze->add_option("--out-dir", out_dir);
  analyze->add_option("--results", results_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (validate->parsed()) return cmd_validate(spec_path);
    if (compile_cmd->parsed()) return cmd_compile(spec_path, out_path);
    if (materialize->parsed()) return cmd_materialize(spec_path, harness);
    if (run->parsed()) return cmd_run(spec_path, address, bat_path, step_budget);
    if (mutate_cmd->parsed()) return cmd_mutate(bat_path, op_path, out_path);
    if (fleet->parsed()) return cmd_fleet(seed, fleet_n, pool_path, share, out_dir);
    if (campaign->parsed()) return cmd_campaign(config_path, out_dir, stop_after_round);
    if (metrics->parsed())
      return cmd_metrics(spec_path, interventions_path, out_path, csv_dir, harness);
    if (infer->parsed()) return cmd_infer(bat_path, catalog_path, out_path, max_pages);
    if (fidelity->parsed())
      return cmd_fidelity(spec_path, spec_b_path, bat_path, catalog_path, step_budget);
    if (analyze->parsed()) return cmd_analyze(plans_path, cbgs_path, out_dir, results_path);
    std::cerr << "UNKNOWN_SUBCOMMAND\n" << app.help();
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::SchemaError:
      case ErrorCode::DuplicateStateId:
      case ErrorCode::UnknownPrimitive:
      case ErrorCode::IspMismatch:
      case ErrorCode::InvalidInsertionPoint:
      case ErrorCode::UnknownPage:
      case ErrorCode::EmptyInput:
      case ErrorCode::UnknownSubcommand:
        return kExitInput;
      default:
        return kExitInternal;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal fault: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace nfaq
