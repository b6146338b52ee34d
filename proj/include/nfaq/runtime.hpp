#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nfaq/compiler.hpp"
#include "nfaq/observe.hpp"
#include "nfaq/plan.hpp"

namespace nfaq {

enum class QueryStatus {
  Terminal,
  Underspecified,
  Ambiguous,
  NoAdmissibleAction,
  StepBudgetExhausted,
};

const char* to_string(QueryStatus s);
QueryStatus query_status_from_string(const std::string& s);

struct StepRecord {
  std::string observation_digest;
  std::vector<std::string> matched_state_ids;
  std::optional<std::string> refined_state_id;
  std::optional<ActionCall> action;
  bool conflict = false;
};

struct QueryResult {
  std::string isp_id;
  std::string address;
  QueryStatus status = QueryStatus::Underspecified;
  std::optional<OutcomeLabel> outcome_label;  // present iff status == Terminal
  std::vector<PlanRecord> plans;
  std::vector<StepRecord> trace;
  int steps_taken = 0;
  std::optional<Observation> snapshot;  // present iff Underspecified or Ambiguous
};

nlohmann::json query_result_to_json(const QueryResult& r);

inline constexpr int kDefaultStepBudget = 64;

// Concrete state indices whose detectors (some detector, all cues) are
// satisfied by the observation. May be empty, a singleton, or many.
std::set<int> match_states(const ConcreteNfa& nfa, const Observation& obs);

// Resolves a mapping conflict by re-matching on the visible-text modality
// only. Returns the unique survivor, or nullopt (AMBIGUOUS) when zero or
// several candidates survive.
std::optional<int> refine_match(const ConcreteNfa& nfa, const std::set<int>& candidates,
                                const Observation& obs);
std::set<int> refine_survivors(const ConcreteNfa& nfa, const std::set<int>& candidates,
                               const Observation& obs);

// Per-(state, action) attempt counts for one contiguous occupancy of a
// state. The executor clears the history whenever the resolved state
// changes, so revisiting a state through a cycle restores its budgets and
// only the global step budget bounds cyclic interaction.
struct AttemptHistory {
  std::map<std::pair<int, int>, int> counts;

  void clear() { counts.clear(); }
};

// First action in declaration order with attempts remaining; increments
// its count. nullopt means every budget is exhausted.
std::optional<ActionCall> select_action(const ConcreteState& state, int state_index,
                                        AttemptHistory& history);

// Reads one PlanRecord per plan block from the observation. A directive's
// value is the chunk immediately following a marker chunk that begins with
// its cue_prefix (at a word boundary); the i-th marker belongs to block i.
// Throws ExtractionEmpty when a PLANS_PAGE state with directives finds no
// blocks at all.
std::vector<PlanRecord> extract(const ConcreteState& state, const Observation& obs);

// The observe-match-act loop. One action executes between consecutive
// observations; after every action the interface is re-observed rather
// than assuming a successor. Throws EnvFault if the environment fails.
QueryResult execute_query(const ConcreteNfa& nfa, const std::string& address,
                          Environment& env, int step_budget = kDefaultStepBudget);

}  // namespace nfaq
