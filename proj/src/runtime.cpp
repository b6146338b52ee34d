#include "nfaq/runtime.hpp"

#include <algorithm>

#include "nfaq/error.hpp"
#include "nfaq/text.hpp"

namespace nfaq {

using nlohmann::json;

const char* to_string(QueryStatus s) {
  switch (s) {
    case QueryStatus::Terminal: return "TERMINAL";
    case QueryStatus::Underspecified: return "UNDERSPECIFIED";
    case QueryStatus::Ambiguous: return "AMBIGUOUS";
    case QueryStatus::NoAdmissibleAction: return "NO_ADMISSIBLE_ACTION";
    case QueryStatus::StepBudgetExhausted: return "STEP_BUDGET_EXHAUSTED";
  }
  return "UNDERSPECIFIED";
}

QueryStatus query_status_from_string(const std::string& s) {
  if (s == "TERMINAL") return QueryStatus::Terminal;
  if (s == "UNDERSPECIFIED") return QueryStatus::Underspecified;
  if (s == "AMBIGUOUS") return QueryStatus::Ambiguous;
  if (s == "NO_ADMISSIBLE_ACTION") return QueryStatus::NoAdmissibleAction;
  if (s == "STEP_BUDGET_EXHAUSTED") return QueryStatus::StepBudgetExhausted;
  throw Error(ErrorCode::SchemaError, "unknown query status '" + s + "'");
}

std::string observation_digest(const Observation& obs) {
  std::string buf;
  for (const auto& t : obs.visible_text) buf += "T\x1f" + t + "\x1e";
  for (const auto& e : obs.elements) buf += "E\x1f" + e + "\x1e";
  return to_hex(fnv1a64(buf));
}

std::set<int> match_states(const ConcreteNfa& nfa, const Observation& obs) {
  std::set<int> matched;
  for (std::size_t i = 0; i < nfa.states.size(); ++i)
    if (nfa.states[i].matches(obs)) matched.insert(static_cast<int>(i));
  return matched;
}

std::set<int> refine_survivors(const ConcreteNfa& nfa, const std::set<int>& candidates,
                               const Observation& obs) {
  std::set<int> survivors;
  for (int i : candidates) {
    const ConcreteState& s = nfa.states[static_cast<std::size_t>(i)];
    for (const auto& d : s.detectors) {
      if (d.matches_text_only(obs)) {
        survivors.insert(i);
        break;
      }
    }
  }
  return survivors;
}

std::optional<int> refine_match(const ConcreteNfa& nfa, const std::set<int>& candidates,
                                const Observation& obs) {
  const std::set<int> survivors = refine_survivors(nfa, candidates, obs);
  if (survivors.size() == 1) return *survivors.begin();
  return std::nullopt;
}

std::optional<ActionCall> select_action(const ConcreteState& state, int state_index,
                                        AttemptHistory& history) {
  for (std::size_t i = 0; i < state.actions.size(); ++i) {
    const ActionCall& call = state.actions[i].call;
    int& attempts = history.counts[{state_index, static_cast<int>(i)}];
    if (attempts < call.retry_budget) {
      ++attempts;
      return call;
    }
  }
  return std::nullopt;
}

namespace {

// Marker chunks begin with the folded cue_prefix followed by a word
// boundary, so "price" never claims a "pricing" marker.
bool is_marker(const std::string& chunk, const std::string& folded_prefix) {
  if (chunk.size() < folded_prefix.size()) return false;
  if (chunk.compare(0, folded_prefix.size(), folded_prefix) != 0) return false;
  return chunk.size() == folded_prefix.size() || chunk[folded_prefix.size()] == ' ';
}

// Reads the first numeric token of a value chunk, so decoration around
// the number ("$50.00 offer 2", "300 mbps down 1") does not bleed in.
std::optional<double> first_number(const std::string& raw) {
  std::size_t i = 0;
  while (i < raw.size()) {
    if (std::isdigit(static_cast<unsigned char>(raw[i]))) {
      std::size_t j = i;
      while (j < raw.size() &&
             (std::isdigit(static_cast<unsigned char>(raw[j])) || raw[j] == '.'))
        ++j;
      try {
        return std::stod(raw.substr(i, j - i));
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
    ++i;
  }
  return std::nullopt;
}

std::optional<double> parse_price(const std::string& raw) { return first_number(raw); }

std::optional<int> parse_mbps(const std::string& raw) {
  const auto v = first_number(raw);
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

}  // namespace

std::vector<PlanRecord> extract(const ConcreteState& state, const Observation& obs) {
  // Values for directive d, in page order of its markers.
  std::vector<std::vector<std::string>> per_directive(state.extraction.size());
  std::size_t blocks = 0;
  for (std::size_t d = 0; d < state.extraction.size(); ++d) {
    const std::string prefix = fold(state.extraction[d].cue_prefix);
    for (std::size_t i = 0; i + 1 < obs.visible_text.size(); ++i)
      if (is_marker(obs.visible_text[i], prefix))
        per_directive[d].push_back(obs.visible_text[i + 1]);
    blocks = std::max(blocks, per_directive[d].size());
  }

  if (blocks == 0)
    throw Error(ErrorCode::ExtractionEmpty,
                "terminal plans page yielded zero plan blocks");

  std::vector<PlanRecord> plans(blocks);
  for (std::size_t d = 0; d < state.extraction.size(); ++d) {
    for (std::size_t b = 0; b < per_directive[d].size(); ++b) {
      const std::string& value = per_directive[d][b];
      switch (state.extraction[d].field) {
        case ExtractField::PlanName:
          plans[b].plan_name = value;
          break;
        case ExtractField::PriceUsdPerMonth:
          plans[b].price_usd = parse_price(value);
          break;
        case ExtractField::DownMbps:
          plans[b].down_mbps = parse_mbps(value);
          break;
        case ExtractField::UpMbps:
          plans[b].up_mbps = parse_mbps(value);
          break;
        case ExtractField::PricingKind:
          if (value.find("promotional") != std::string::npos)
            plans[b].pricing_kind = PricingKind::Promotional;
          else if (value.find("regular") != std::string::npos)
            plans[b].pricing_kind = PricingKind::Regular;
          break;
      }
    }
  }
  return plans;
}

QueryResult execute_query(const ConcreteNfa& nfa, const std::string& address,
                          Environment& env, int step_budget) {
  QueryResult result;
  result.isp_id = nfa.isp_id;
  result.address = address;

  AttemptHistory history;
  int previous_state = -1;

  auto finalize_terminal = [&](const ConcreteState& state, const Observation& obs) {
    result.status = QueryStatus::Terminal;
    result.outcome_label = state.outcome_label;
    if (state.outcome_label == OutcomeLabel::PlansPage && !state.extraction.empty()) {
      try {
        result.plans = extract(state, obs);
        for (auto& p : result.plans) {
          p.isp_id = nfa.isp_id;
          p.address = address;
        }
      } catch (const Error& e) {
        // A plans page with no extractable blocks is still a terminal
        // outcome; the empty list signals detector/page drift upstream.
        if (e.code() != ErrorCode::ExtractionEmpty) throw;
        result.plans.clear();
      }
    }
  };

  while (true) {
    Observation obs;
    try {
      obs = env.observe();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EnvFault, e.what());
    }

    StepRecord step;
    step.observation_digest = observation_digest(obs);

    const std::set<int> matched = match_states(nfa, obs);
    for (int i : matched)
      step.matched_state_ids.push_back(nfa.states[static_cast<std::size_t>(i)].display_id);
    step.conflict = matched.size() > 1;

    if (matched.empty()) {
      result.status = QueryStatus::Underspecified;
      result.snapshot = obs;
      result.trace.push_back(std::move(step));
      return result;
    }

    int current;
    if (matched.size() == 1) {
      current = *matched.begin();
    } else {
      const std::set<int> survivors = refine_survivors(nfa, matched, obs);
      if (survivors.size() == 1) {
        current = *survivors.begin();
      } else {
        // Refinement could not isolate one state. A unique terminal among
        // the survivors still wins: terminal outcomes end the query even
        // when non-terminal states matched alongside.
        std::vector<int> terminals;
        for (int i : survivors)
          if (nfa.states[static_cast<std::size_t>(i)].terminal) terminals.push_back(i);
        if (terminals.size() == 1) {
          current = terminals.front();
        } else {
          result.status = QueryStatus::Ambiguous;
          result.snapshot = obs;
          result.trace.push_back(std::move(step));
          return result;
        }
      }
    }

    const ConcreteState& state = nfa.states[static_cast<std::size_t>(current)];
    step.refined_state_id = state.display_id;

    if (state.terminal) {
      finalize_terminal(state, obs);
      result.trace.push_back(std::move(step));
      return result;
    }

    if (current != previous_state) history.clear();
    previous_state = current;

    std::optional<ActionCall> action = select_action(state, current, history);
    if (!action) {
      result.status = QueryStatus::NoAdmissibleAction;
      result.trace.push_back(std::move(step));
      return result;
    }

    if (result.steps_taken >= step_budget) {
      result.status = QueryStatus::StepBudgetExhausted;
      result.trace.push_back(std::move(step));
      return result;
    }

    ActionCall concrete = *action;
    if (concrete.argument)
      concrete.argument = replace_all(*concrete.argument, "{address}", address);
    step.action = concrete;

    const auto& bound = state.actions;
    const auto it = std::find_if(bound.begin(), bound.end(), [&](const BoundAction& b) {
      return b.call == *action;
    });
    try {
      it->handler(env, concrete);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EnvFault, e.what());
    }
    ++result.steps_taken;
    result.trace.push_back(std::move(step));
  }
}

json query_result_to_json(const QueryResult& r) {
  json out;
  out["address"] = r.address;
  out["isp_id"] = r.isp_id;
  if (r.outcome_label) out["outcome_label"] = to_string(*r.outcome_label);
  json plans = json::array();
  for (const auto& p : r.plans) plans.push_back(plan_record_to_json(p));
  out["plans"] = std::move(plans);
  if (r.snapshot) {
    out["snapshot"] = {{"elements", r.snapshot->elements},
                       {"visible_text", r.snapshot->visible_text}};
  }
  out["status"] = to_string(r.status);
  out["steps_taken"] = r.steps_taken;
  json trace = json::array();
  for (const auto& s : r.trace) {
    json sj;
    if (s.action) {
      json aj;
      if (s.action->argument) aj["argument"] = *s.action->argument;
      aj["primitive"] = to_string(s.action->primitive);
      if (s.action->target) aj["target"] = *s.action->target;
      sj["action"] = std::move(aj);
    }
    sj["conflict"] = s.conflict;
    sj["matched"] = s.matched_state_ids;
    sj["observation_digest"] = s.observation_digest;
    if (s.refined_state_id) sj["refined"] = *s.refined_state_id;
    trace.push_back(std::move(sj));
  }
  out["trace"] = std::move(trace);
  return out;
}

}  // namespace nfaq
