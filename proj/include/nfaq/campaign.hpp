#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfaq/compiler.hpp"
#include "nfaq/intent.hpp"
#include "nfaq/runtime.hpp"
#include "nfaq/simbat.hpp"

namespace nfaq {

struct CampaignIsp {
  std::string spec_path;
  std::string bat_path;
  std::string catalog_path;
};

// A scripted campaign event, applied before its round executes: a BAT
// mutation (simulated interface churn), a spec replacement (an operator
// intervention, logged with its deltas), or both.
struct CampaignEvent {
  int round = 0;
  std::string isp_id;
  std::optional<MutationOp> mutate;
  std::optional<std::string> respec_path;
};

struct CampaignConfig {
  std::vector<CampaignIsp> isps;
  int rounds = 1;
  std::string cadence_label;
  int step_budget = kDefaultStepBudget;
  int parallelism = 1;
  int harness_constant = kDefaultHarnessConstant;
  std::vector<CampaignEvent> events;
};

CampaignConfig campaign_config_from_json(const nlohmann::json& doc);
nlohmann::json campaign_config_to_json(const CampaignConfig& config);

// One persisted query summary; `outcome` is empty for non-terminal
// statuses and `status` may additionally be "ENV_FAULT" for environment
// failures recorded inline.
struct ResultLine {
  std::string isp_id;
  std::string address;
  std::string cbg_id;
  int round = 0;
  std::string status;
  std::string outcome;
  int plan_count = 0;
  int steps = 0;
  std::string timestamp;
};

nlohmann::json result_line_to_json(const ResultLine& line);
ResultLine result_line_from_json(const nlohmann::json& j);

struct InterventionRecord {
  std::string isp_id;
  int round = 0;
  SpecDelta delta;
  std::int64_t lloc_delta = 0;
  std::string trigger;
};

nlohmann::json intervention_to_json(const InterventionRecord& r);

// delta = spec_diff(older, newer); lloc_delta from the materializer at a
// fixed harness constant.
InterventionRecord record_intervention(const IntentSpec& older, const IntentSpec& newer,
                                       const std::string& trigger,
                                       int harness_constant = kDefaultHarnessConstant);

// Fraction of results with status TERMINAL. Throws EmptyInput.
double hit_rate(const std::vector<QueryResult>& results);
double hit_rate(const std::vector<ResultLine>& lines);

struct UpdateEvent {
  std::string isp_id;
  std::string address;
  int round = 0;
  std::string prev_status, prev_outcome;
  std::string curr_status, curr_outcome;
};

// One event per (isp, address, round) whose (status, outcome) differs from
// the previous round. ISP-level tallies count one update per (isp, round).
std::vector<UpdateEvent> detect_interface_updates(const std::vector<ResultLine>& history);
std::vector<std::pair<std::string, int>> isp_update_rounds(
    const std::vector<UpdateEvent>& events);

// Executes the campaign, appending results/plans/interventions under
// out_dir (results.jsonl, plans.jsonl, interventions.jsonl, config.json).
// A rerun resumes from the last complete round by replaying the logs;
// past lines are never rewritten. stop_after_round > 0 stops early, which
// is how tests model interruption.
struct CampaignOutcome {
  int rounds_executed = 0;
  int last_round = 0;
  std::vector<ResultLine> lines;  // lines written by this invocation
};

CampaignOutcome run_campaign(const CampaignConfig& config, const std::string& out_dir,
                             int stop_after_round = -1);

// Executes one round in memory (no persistence); pairs run in config
// order. Used by tests and by run_campaign internally.
class CampaignState;

}  // namespace nfaq
