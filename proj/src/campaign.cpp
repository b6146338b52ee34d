#include "nfaq/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "nfaq/error.hpp"
#include "nfaq/metrics.hpp"

namespace nfaq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

CampaignConfig campaign_config_from_json(const json& doc) {
  CampaignConfig config;
  try {
    for (const auto& ij : doc.at("isps")) {
      config.isps.push_back({ij.at("spec").get<std::string>(),
                             ij.at("bat").get<std::string>(),
                             ij.at("catalog").get<std::string>()});
    }
    config.rounds = doc.at("rounds").get<int>();
    config.cadence_label = doc.value("cadence_label", "");
    config.step_budget = doc.value("step_budget", kDefaultStepBudget);
    config.parallelism = doc.value("parallelism", 1);
    config.harness_constant = doc.value("harness_constant", kDefaultHarnessConstant);
    for (const auto& ej : doc.value("events", json::array())) {
      CampaignEvent event;
      event.round = ej.at("round").get<int>();
      event.isp_id = ej.at("isp").get<std::string>();
      if (ej.contains("mutate")) event.mutate = mutation_op_from_json(ej["mutate"]);
      if (ej.contains("respec")) event.respec_path = ej["respec"].get<std::string>();
      config.events.push_back(std::move(event));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("campaign config: ") + e.what());
  }
  if (config.rounds < 1) throw Error(ErrorCode::SchemaError, "rounds must be >= 1");
  if (config.parallelism < 1) throw Error(ErrorCode::SchemaError, "parallelism must be >= 1");
  return config;
}

json campaign_config_to_json(const CampaignConfig& config) {
  json out;
  out["cadence_label"] = config.cadence_label;
  json events = json::array();
  for (const auto& e : config.events) {
    json ej;
    ej["isp"] = e.isp_id;
    if (e.mutate) ej["mutate"] = mutation_op_to_json(*e.mutate);
    if (e.respec_path) ej["respec"] = *e.respec_path;
    ej["round"] = e.round;
    events.push_back(std::move(ej));
  }
  out["events"] = std::move(events);
  out["harness_constant"] = config.harness_constant;
  json isps = json::array();
  for (const auto& i : config.isps)
    isps.push_back({{"bat", i.bat_path}, {"catalog", i.catalog_path}, {"spec", i.spec_path}});
  out["isps"] = std::move(isps);
  out["parallelism"] = config.parallelism;
  out["rounds"] = config.rounds;
  out["step_budget"] = config.step_budget;
  return out;
}

json result_line_to_json(const ResultLine& line) {
  json out;
  out["address"] = line.address;
  if (!line.cbg_id.empty()) out["cbg"] = line.cbg_id;
  out["isp"] = line.isp_id;
  out["outcome"] = line.outcome;
  out["plan_count"] = line.plan_count;
  out["round"] = line.round;
  out["status"] = line.status;
  out["steps"] = line.steps;
  out["ts"] = line.timestamp;
  return out;
}

ResultLine result_line_from_json(const json& j) {
  ResultLine line;
  line.address = j.value("address", "");
  line.cbg_id = j.value("cbg", "");
  line.isp_id = j.value("isp", "");
  line.outcome = j.value("outcome", "");
  line.plan_count = j.value("plan_count", 0);
  line.round = j.value("round", 0);
  line.status = j.value("status", "");
  line.steps = j.value("steps", 0);
  line.timestamp = j.value("ts", "");
  return line;
}

json intervention_to_json(const InterventionRecord& r) {
  json out;
  out["edited_ids"] = r.delta.edited_ids;
  out["isp"] = r.isp_id;
  out["llos_delta"] = r.delta.llos_delta;
  out["lloc_delta"] = r.lloc_delta;
  out["round"] = r.round;
  out["states_added"] = r.delta.states_added;
  out["states_edited"] = r.delta.states_edited;
  out["states_removed"] = r.delta.states_removed;
  out["trigger"] = r.trigger;
  return out;
}

InterventionRecord record_intervention(const IntentSpec& older, const IntentSpec& newer,
                                       const std::string& trigger, int harness_constant) {
  InterventionRecord record;
  record.isp_id = older.isp_id;
  record.delta = spec_diff(older, newer);
  record.lloc_delta = lloc(newer, harness_constant) - lloc(older, harness_constant);
  record.trigger = trigger;
  return record;
}

double hit_rate(const std::vector<QueryResult>& results) {
  if (results.empty()) throw Error(ErrorCode::EmptyInput, "no query results");
  std::size_t terminal = 0;
  for (const auto& r : results)
    if (r.status == QueryStatus::Terminal) ++terminal;
  return static_cast<double>(terminal) / static_cast<double>(results.size());
}

double hit_rate(const std::vector<ResultLine>& lines) {
  if (lines.empty()) throw Error(ErrorCode::EmptyInput, "no result lines");
  std::size_t terminal = 0;
  for (const auto& l : lines)
    if (l.status == "TERMINAL") ++terminal;
  return static_cast<double>(terminal) / static_cast<double>(lines.size());
}

std::vector<UpdateEvent> detect_interface_updates(const std::vector<ResultLine>& history) {
  std::map<std::pair<std::string, std::string>, std::vector<const ResultLine*>> by_pair;
  for (const auto& line : history) by_pair[{line.isp_id, line.address}].push_back(&line);

  std::vector<UpdateEvent> events;
  for (auto& [key, lines] : by_pair) {
    std::stable_sort(lines.begin(), lines.end(),
                     [](const ResultLine* a, const ResultLine* b) { return a->round < b->round; });
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const ResultLine* prev = lines[i - 1];
      const ResultLine* curr = lines[i];
      if (prev->status != curr->status || prev->outcome != curr->outcome) {
        events.push_back({key.first, key.second, curr->round, prev->status, prev->outcome,
                          curr->status, curr->outcome});
      }
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const UpdateEvent& a, const UpdateEvent& b) {
    if (a.round != b.round) return a.round < b.round;
    if (a.isp_id != b.isp_id) return a.isp_id < b.isp_id;
    return a.address < b.address;
  });
  return events;
}

std::vector<std::pair<std::string, int>> isp_update_rounds(
    const std::vector<UpdateEvent>& events) {
  std::set<std::pair<std::string, int>> seen;
  std::vector<std::pair<std::string, int>> out;
  for (const auto& e : events)
    if (seen.insert({e.isp_id, e.round}).second) out.push_back({e.isp_id, e.round});
  return out;
}

namespace {

struct IspState {
  std::string isp_id;
  IntentSpec spec;
  SimBat bat;
  Catalog catalog;
};

struct PairOutput {
  ResultLine line;
  std::vector<PlanRecord> plans;
};

PairOutput execute_pair(const IspState& isp, const AddressRecord& rec, int round,
                        int step_budget, CompileCache& cache, const std::string& ts) {
  PairOutput out;
  out.line.isp_id = isp.isp_id;
  out.line.address = rec.address;
  out.line.cbg_id = rec.cbg_id;
  out.line.round = round;
  out.line.timestamp = ts;
  try {
    auto nfa = cache.get_or_compile(isp.spec);
    SimSession session(isp.bat, rec);
    QueryResult result = execute_query(*nfa, rec.address, session, step_budget);
    out.line.status = to_string(result.status);
    out.line.outcome = result.outcome_label ? to_string(*result.outcome_label) : "";
    out.line.plan_count = static_cast<int>(result.plans.size());
    out.line.steps = result.steps_taken;
    for (auto& p : result.plans) {
      p.cbg_id = rec.cbg_id;
      p.round = round;
      p.timestamp = ts;
      out.plans.push_back(std::move(p));
    }
  } catch (const Error& e) {
    // A faulty environment is recorded inline; the round carries on.
    if (e.code() != ErrorCode::EnvFault) throw;
    out.line.status = "ENV_FAULT";
  }
  return out;
}

// Runs every (isp, address) pair of one round, up to `parallelism` sessions
// at a time. Outputs land in pair order regardless of scheduling, keeping
// the persisted logs deterministic.
std::vector<PairOutput> run_round_pairs(const std::vector<IspState>& isps, int round,
                                        int step_budget, int parallelism,
                                        CompileCache& cache, std::size_t skip_pairs) {
  struct PairRef {
    const IspState* isp;
    const AddressRecord* rec;
  };
  std::vector<PairRef> pairs;
  for (const auto& isp : isps)
    for (const auto& rec : isp.catalog) pairs.push_back({&isp, &rec});
  if (skip_pairs >= pairs.size()) return {};

  const std::string ts = now_iso8601();
  std::vector<PairOutput> outputs(pairs.size() - skip_pairs);
  std::atomic<std::size_t> next{skip_pairs};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      outputs[i - skip_pairs] =
          execute_pair(*pairs[i].isp, *pairs[i].rec, round, step_budget, cache, ts);
    }
  };

  const int threads = std::min<int>(parallelism, static_cast<int>(pairs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> team;
    for (int t = 0; t < threads; ++t) team.emplace_back(worker);
    for (auto& t : team) t.join();
  }
  return outputs;
}

}  // namespace

CampaignOutcome run_campaign(const CampaignConfig& config, const std::string& out_dir,
                             int stop_after_round) {
  fs::create_directories(out_dir);
  const std::string results_path = out_dir + "/results.jsonl";
  const std::string plans_path = out_dir + "/plans.jsonl";
  const std::string interventions_path = out_dir + "/interventions.jsonl";
  const std::string config_path = out_dir + "/config.json";

  if (!fs::exists(config_path)) {
    std::ofstream out(config_path, std::ios::binary);
    out << campaign_config_to_json(config).dump(2) << "\n";
  }

  std::vector<IspState> isps;
  for (const auto& entry : config.isps) {
    IspState state;
    state.spec = parse_spec(slurp(entry.spec_path));
    if (!validate_spec(state.spec).empty())
      throw Error(ErrorCode::SchemaError, entry.spec_path + " fails validation");
    state.bat = parse_bat(slurp(entry.bat_path));
    const auto problems = check_bat(state.bat);
    if (!problems.empty())
      throw Error(ErrorCode::SchemaError, entry.bat_path + ": " + problems.front());
    state.catalog = parse_catalog(slurp(entry.catalog_path));
    state.isp_id = state.spec.isp_id;
    isps.push_back(std::move(state));
  }
  std::size_t pairs_per_round = 0;
  for (const auto& isp : isps) pairs_per_round += isp.catalog.size();

  // Log replay: count lines per round to find where to resume.
  std::map<int, std::size_t> lines_per_round;
  if (fs::exists(results_path)) {
    std::ifstream in(results_path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      ++lines_per_round[j.value("round", 0)];
    }
  }
  std::set<std::pair<std::string, int>> logged_interventions;
  if (fs::exists(interventions_path)) {
    std::ifstream in(interventions_path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      logged_interventions.insert({j.value("isp", ""), j.value("round", 0)});
    }
  }

  int resume_round = 1;
  std::size_t resume_skip = 0;
  for (int r = 1; r <= config.rounds; ++r) {
    const std::size_t done = lines_per_round.count(r) ? lines_per_round[r] : 0;
    if (done >= pairs_per_round) {
      resume_round = r + 1;
      resume_skip = 0;
    } else {
      resume_round = r;
      resume_skip = done;
      break;
    }
  }

  std::ofstream results_out(results_path, std::ios::binary | std::ios::app);
  std::ofstream plans_out(plans_path, std::ios::binary | std::ios::app);
  std::ofstream interventions_out(interventions_path, std::ios::binary | std::ios::app);

  CompileCache cache;
  CampaignOutcome outcome;

  const int last_round =
      stop_after_round > 0 ? std::min(stop_after_round, config.rounds) : config.rounds;

  for (int round = 1; round <= config.rounds; ++round) {
    if (round > last_round) break;
    // Events are replayed for already-complete rounds too, so resumed state
    // matches an uninterrupted run; only unseen interventions get logged.
    for (const auto& event : config.events) {
      if (event.round != round) continue;
      for (auto& isp : isps) {
        if (isp.isp_id != event.isp_id) continue;
        if (event.mutate) isp.bat = mutate(isp.bat, *event.mutate);
        if (event.respec_path) {
          IntentSpec replacement = parse_spec(slurp(*event.respec_path));
          InterventionRecord record = record_intervention(
              isp.spec, replacement, "round " + std::to_string(round) + " respec",
              config.harness_constant);
          record.round = round;
          isp.spec = std::move(replacement);
          if (!logged_interventions.count({isp.isp_id, round})) {
            interventions_out << intervention_to_json(record).dump() << "\n";
            interventions_out.flush();
          }
        }
      }
    }

    if (round < resume_round) continue;

    const std::size_t skip = (round == resume_round) ? resume_skip : 0;
    std::vector<PairOutput> outputs =
        run_round_pairs(isps, round, config.step_budget, config.parallelism, cache, skip);
    for (const auto& out : outputs) {
      results_out << result_line_to_json(out.line).dump() << "\n";
      for (const auto& plan : out.plans)
        plans_out << plan_record_to_json(plan).dump() << "\n";
      outcome.lines.push_back(out.line);
    }
    results_out.flush();
    plans_out.flush();
    ++outcome.rounds_executed;
    outcome.last_round = round;
  }
  return outcome;
}

}  // namespace nfaq
