#include "nfaq/inference.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "nfaq/compiler.hpp"
#include "nfaq/error.hpp"
#include "nfaq/runtime.hpp"
#include "nfaq/text.hpp"

namespace nfaq {

namespace {

struct ExploredState {
  Observation obs;
  std::string signature;
  std::vector<ActionSig> affordances;
  // Parallel to affordances: did the action open a signature not seen
  // before it ran? Progress-making actions are declared first.
  std::vector<bool> made_progress;
  bool terminal = false;
  OutcomeLabel label = OutcomeLabel::Unknown;
  int discovery_order = 0;
};

bool chunk_contains(const Observation& obs, const std::string& needle) {
  for (const auto& c : obs.visible_text)
    if (c.find(needle) != std::string::npos) return true;
  return false;
}

// Reads the terminal outcome from rendered page text. Plan markers mean a
// plans page; otherwise canonical outcome phrasing decides, defaulting to
// UNKNOWN when nothing matches.
OutcomeLabel classify_terminal_observation(const Observation& obs) {
  if (chunk_contains(obs, "plan 1")) return OutcomeLabel::PlansPage;
  if (chunk_contains(obs, "unable to serve")) return OutcomeLabel::NoService;
  if (chunk_contains(obs, "already active")) return OutcomeLabel::ActiveService;
  if (chunk_contains(obs, "serviceable")) return OutcomeLabel::ServiceConfirmedNoPlans;
  return OutcomeLabel::Unknown;
}

struct CueCandidate {
  CueKind kind;
  std::string value;

  bool operator<(const CueCandidate& other) const {
    if (kind != other.kind) return kind < other.kind;
    return value < other.value;
  }
};

bool cue_satisfied(const CueCandidate& cue, const Observation& obs) {
  if (cue.kind == CueKind::TextContains) return chunk_contains(obs, cue.value);
  return std::find(obs.elements.begin(), obs.elements.end(), cue.value) !=
         obs.elements.end();
}

bool subset_unique(const std::vector<CueCandidate>& cues,
                   const std::vector<const ExploredState*>& others) {
  for (const ExploredState* other : others) {
    bool all = true;
    for (const auto& cue : cues)
      if (!cue_satisfied(cue, other->obs)) {
        all = false;
        break;
      }
    if (all) return false;
  }
  return true;
}

// Smallest cue subset (size <= 3) satisfied by this state's observation
// and by no other explored state's, ties broken lexicographically. Falls
// back to the full cue set when no small subset separates.
std::vector<CuePredicate> distinctive_cues(const ExploredState& state,
                                           const std::vector<const ExploredState*>& others) {
  std::vector<CueCandidate> candidates;
  for (const auto& c : state.obs.visible_text)
    candidates.push_back({CueKind::TextContains, c});
  for (const auto& e : state.obs.elements)
    candidates.push_back({CueKind::ElementPresent, e});
  std::sort(candidates.begin(), candidates.end());

  auto to_cues = [](const std::vector<CueCandidate>& picked) {
    std::vector<CuePredicate> cues;
    for (const auto& c : picked) cues.push_back({c.kind, c.value});
    return cues;
  };

  const std::size_t n = candidates.size();
  for (std::size_t i = 0; i < n; ++i)
    if (subset_unique({candidates[i]}, others)) return to_cues({candidates[i]});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (subset_unique({candidates[i], candidates[j]}, others))
        return to_cues({candidates[i], candidates[j]});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        if (subset_unique({candidates[i], candidates[j], candidates[k]}, others))
          return to_cues({candidates[i], candidates[j], candidates[k]});
  return to_cues(candidates);
}

ActionCall call_from_sig(const ActionSig& sig) {
  ActionCall call;
  call.primitive = sig.primitive;
  call.target = sig.target;
  if (sig.argument) {
    call.argument = sig.argument;
  } else if (sig.primitive == Primitive::Typewrite) {
    call.argument = "{address}";
  }
  return call;
}

}  // namespace

ExplorationBudget budget_from_catalog(const Catalog& catalog, int max_pages) {
  ExplorationBudget budget;
  budget.max_pages = max_pages;
  std::set<AddressClass> covered;
  for (const auto& rec : catalog)
    if (covered.insert(rec.cls).second) budget.probe_addresses.push_back(rec);
  return budget;
}

IntentSpec infer_spec(const SimBat& bat, const ExplorationBudget& budget, bool* truncated) {
  if (truncated) *truncated = false;

  std::map<std::string, ExploredState> explored;  // signature -> state
  std::string entry_signature;
  bool over_budget = false;

  // Paths are replayed from a fresh session; breadth-first over action
  // prefixes per probe class, so states are keyed purely by what the
  // interface shows. A signature already known from an earlier probe is
  // still expanded once per probe: guarded pages branch differently by
  // address class.
  for (const auto& probe : budget.probe_addresses) {
    std::set<std::string> expanded;
    std::deque<std::vector<ActionCall>> frontier;
    frontier.push_back({});
    while (!frontier.empty()) {
      const std::vector<ActionCall> path = std::move(frontier.front());
      frontier.pop_front();

      SimSession session(bat, probe);
      for (const auto& step : path) session.apply(step);
      const Observation obs = session.observe();
      const std::string signature = observation_digest(obs);
      if (path.empty() && entry_signature.empty()) entry_signature = signature;

      if (!explored.count(signature)) {
        if (explored.size() >= static_cast<std::size_t>(budget.max_pages)) {
          over_budget = true;
          break;
        }
        ExploredState state;
        state.obs = obs;
        state.signature = signature;
        state.affordances = session.affordances();
        state.discovery_order = static_cast<int>(explored.size());
        if (state.affordances.empty()) {
          // Interaction dead end: treat as terminal and classify from text.
          state.terminal = true;
          state.label = classify_terminal_observation(obs);
        }
        for (const auto& sig : state.affordances) {
          SimSession peek(bat, probe);
          for (const auto& step : path) peek.apply(step);
          peek.apply(call_from_sig(sig));
          const std::string next_signature = observation_digest(peek.observe());
          state.made_progress.push_back(!explored.count(next_signature) &&
                                        next_signature != signature);
        }
        explored.emplace(signature, std::move(state));
      }

      if (!expanded.insert(signature).second) continue;
      for (const auto& sig : explored.at(signature).affordances) {
        std::vector<ActionCall> extended = path;
        extended.push_back(call_from_sig(sig));
        frontier.push_back(std::move(extended));
      }
    }
    if (over_budget) break;
  }

  if (over_budget && truncated) *truncated = true;

  std::vector<const ExploredState*> ordered;
  for (const auto& [sig, state] : explored) ordered.push_back(&state);
  std::sort(ordered.begin(), ordered.end(),
            [](const ExploredState* a, const ExploredState* b) {
              return a->discovery_order < b->discovery_order;
            });

  IntentSpec spec;
  spec.isp_id = bat.isp_id;
  spec.version = 1;

  for (const ExploredState* state : ordered) {
    std::vector<const ExploredState*> others;
    for (const ExploredState* other : ordered)
      if (other != state) others.push_back(other);

    AbstractState abstract;
    char name[16];
    std::snprintf(name, sizeof(name), "S%02d", state->discovery_order);
    abstract.id = name;
    abstract.detectors.push_back({distinctive_cues(*state, others)});

    if (state->terminal) {
      abstract.terminal = true;
      abstract.outcome_label = state->label;
      if (state->label == OutcomeLabel::PlansPage) {
        abstract.extraction = {
            {ExtractField::PlanName, "plan"},
            {ExtractField::PriceUsdPerMonth, "price"},
            {ExtractField::DownMbps, "down"},
            {ExtractField::UpMbps, "up"},
            {ExtractField::PricingKind, "pricing"},
        };
      }
    } else {
      // Progress-making actions first; ties keep interface order.
      std::vector<std::size_t> order(state->affordances.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return state->made_progress[a] > state->made_progress[b];
      });
      for (std::size_t i : order)
        abstract.actions.push_back(call_from_sig(state->affordances[i]));
    }
    if (spec.initial_state_id.empty() && state->signature == entry_signature)
      spec.initial_state_id = abstract.id;
    spec.states.push_back(std::move(abstract));
  }

  if (spec.initial_state_id.empty() && !spec.states.empty())
    spec.initial_state_id = spec.states.front().id;
  return spec;
}

double fidelity_check(const IntentSpec& spec_a, const IntentSpec& spec_b,
                      const SimBat& bat, const Catalog& catalog, int step_budget) {
  if (catalog.empty()) throw Error(ErrorCode::EmptyInput, "catalog is empty");
  const ConcreteNfa nfa_a = compile(spec_a);
  const ConcreteNfa nfa_b = compile(spec_b);

  int agree = 0;
  for (const auto& rec : catalog) {
    SimSession session_a(bat, rec);
    SimSession session_b(bat, rec);
    const QueryResult a = execute_query(nfa_a, rec.address, session_a, step_budget);
    const QueryResult b = execute_query(nfa_b, rec.address, session_b, step_budget);
    if (a.status == b.status && a.outcome_label == b.outcome_label) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(catalog.size());
}

}  // namespace nfaq
