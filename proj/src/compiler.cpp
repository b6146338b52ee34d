#include "nfaq/compiler.hpp"

#include <algorithm>

#include "nfaq/error.hpp"
#include "nfaq/text.hpp"

namespace nfaq {

using nlohmann::json;

namespace {

bool text_satisfied(const std::string& folded_value, const Observation& obs) {
  for (const auto& chunk : obs.visible_text)
    if (chunk.find(folded_value) != std::string::npos) return true;
  return false;
}

bool element_satisfied(const std::string& folded_value, const Observation& obs) {
  return std::find(obs.elements.begin(), obs.elements.end(), folded_value) !=
         obs.elements.end();
}

// The fixed handler registry. Every primitive actuates through the
// environment; templating is resolved by the executor before dispatch.
void actuate(Environment& env, const ActionCall& call) { env.apply(call); }

const std::map<Primitive, ActionHandler>& handler_registry() {
  static const std::map<Primitive, ActionHandler> registry = {
      {Primitive::Click, &actuate},    {Primitive::Typewrite, &actuate},
      {Primitive::Keypress, &actuate}, {Primitive::Select, &actuate},
      {Primitive::Wait, &actuate},     {Primitive::Finalize, &actuate},
  };
  return registry;
}

// Behavioral identity of a detector set: folded values, cues sorted and
// deduplicated within a detector, detectors sorted. Two states whose keys
// and outcome labels coincide recognize exactly the same observations.
std::string detector_merge_key(const AbstractState& state) {
  std::vector<std::string> detector_keys;
  for (const auto& d : state.detectors) {
    std::vector<std::string> cue_keys;
    for (const auto& c : d.cues)
      cue_keys.push_back(std::string(to_string(c.kind)) + "\x1f" + fold(c.value));
    std::sort(cue_keys.begin(), cue_keys.end());
    cue_keys.erase(std::unique(cue_keys.begin(), cue_keys.end()), cue_keys.end());
    std::string dk;
    for (const auto& k : cue_keys) dk += k + "\x1e";
    detector_keys.push_back(dk);
  }
  std::sort(detector_keys.begin(), detector_keys.end());
  detector_keys.erase(std::unique(detector_keys.begin(), detector_keys.end()),
                      detector_keys.end());
  std::string key;
  for (const auto& k : detector_keys) key += k + "\x1d";
  key += state.terminal ? "T" : "N";
  key += state.outcome_label ? to_string(*state.outcome_label) : "-";
  return key;
}

}  // namespace

bool CompiledDetector::matches(const Observation& obs) const {
  for (const auto& cue : cues) {
    const bool ok = cue.kind == CueKind::TextContains
                        ? text_satisfied(cue.folded, obs)
                        : element_satisfied(cue.folded, obs);
    if (!ok) return false;
  }
  return true;
}

bool CompiledDetector::matches_text_only(const Observation& obs) const {
  bool has_text = false;
  for (const auto& cue : cues) {
    if (cue.kind != CueKind::TextContains) continue;
    has_text = true;
    if (!text_satisfied(cue.folded, obs)) return false;
  }
  return has_text;
}

bool ConcreteState::matches(const Observation& obs) const {
  for (const auto& d : detectors)
    if (d.matches(obs)) return true;
  return false;
}

ConcreteNfa compile(const IntentSpec& spec) {
  ConcreteNfa nfa;
  nfa.isp_id = spec.isp_id;
  nfa.spec_version = spec.version;
  nfa.cache_key = spec_digest(spec);

  const auto& registry = handler_registry();
  std::map<std::string, int> by_merge_key;

  for (const auto& state : spec.states) {
    const std::string key = detector_merge_key(state);
    auto it = by_merge_key.find(key);
    int index;
    if (it == by_merge_key.end()) {
      ConcreteState cs;
      cs.display_id = state.id;
      cs.terminal = state.terminal;
      cs.outcome_label = state.outcome_label;
      cs.extraction = state.extraction;
      for (const auto& d : state.detectors) {
        CompiledDetector cd;
        for (const auto& c : d.cues) cd.cues.push_back({c.kind, fold(c.value)});
        cs.detectors.push_back(std::move(cd));
      }
      index = static_cast<int>(nfa.states.size());
      nfa.states.push_back(std::move(cs));
      by_merge_key.emplace(key, index);
      if (state.terminal) nfa.terminal_indices.push_back(index);
    } else {
      index = it->second;
    }

    ConcreteState& cs = nfa.states[static_cast<std::size_t>(index)];
    cs.source_ids.push_back(state.id);
    nfa.merge_map[state.id] = index;

    // Deduplicated concatenation, declaration order preserved.
    for (const auto& call : state.actions) {
      const bool dup = std::any_of(
          cs.actions.begin(), cs.actions.end(),
          [&](const BoundAction& b) { return b.call == call; });
      if (dup) continue;
      auto handler = registry.find(call.primitive);
      if (handler == registry.end())
        throw Error(ErrorCode::UnboundPrimitive, to_string(call.primitive));
      cs.actions.push_back({call, handler->second});
    }
  }

  nfa.initial = nfa.merge_map.at(spec.initial_state_id);
  return nfa;
}

json concrete_nfa_to_json(const ConcreteNfa& nfa) {
  json out;
  out["cache_key"] = nfa.cache_key;
  out["initial"] = nfa.initial;
  out["isp_id"] = nfa.isp_id;
  json merge = json::object();
  for (const auto& [id, idx] : nfa.merge_map) merge[id] = idx;
  out["merge_map"] = std::move(merge);
  out["spec_version"] = nfa.spec_version;
  json states = json::array();
  for (const auto& s : nfa.states) {
    json sj;
    json actions = json::array();
    for (const auto& a : s.actions) {
      json aj;
      if (a.call.argument) aj["argument"] = *a.call.argument;
      aj["primitive"] = to_string(a.call.primitive);
      aj["retry_budget"] = a.call.retry_budget;
      if (a.call.target) aj["target"] = *a.call.target;
      actions.push_back(std::move(aj));
    }
    sj["actions"] = std::move(actions);
    json detectors = json::array();
    for (const auto& d : s.detectors) {
      json cues = json::array();
      for (const auto& c : d.cues)
        cues.push_back({{"kind", to_string(c.kind)}, {"value", c.folded}});
      detectors.push_back(std::move(cues));
    }
    sj["detectors"] = std::move(detectors);
    sj["id"] = s.display_id;
    if (s.outcome_label) sj["outcome_label"] = to_string(*s.outcome_label);
    sj["source_ids"] = s.source_ids;
    sj["terminal"] = s.terminal;
    states.push_back(std::move(sj));
  }
  out["states"] = std::move(states);
  out["terminal_indices"] = nfa.terminal_indices;
  return out;
}

std::shared_ptr<const ConcreteNfa> CompileCache::get_or_compile(const IntentSpec& spec) {
  const std::string key = spec_digest(spec);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = store_.find(key);
    if (it != store_.end()) return it->second;
  }
  auto compiled = std::make_shared<const ConcreteNfa>(compile(spec));
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = store_.emplace(key, compiled);
  if (inserted) ++compile_count_;
  return it->second;
}

std::size_t CompileCache::compile_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return compile_count_;
}

std::shared_ptr<const ConcreteNfa> cache_get_or_compile(const IntentSpec& spec,
                                                        CompileCache& cache) {
  return cache.get_or_compile(spec);
}

ImperativeProgram materialize_imperative(const IntentSpec& spec, int harness_constant) {
  ImperativeProgram program;
  program.statements.reserve(static_cast<std::size_t>(harness_constant) +
                             spec.states.size() * 8);
  for (int i = 0; i < harness_constant; ++i)
    program.statements.push_back({"", "harness[" + std::to_string(i) + "] scaffolding"});

  for (const auto& state : spec.states) {
    program.statements.push_back({state.id, "state[" + state.id + "] dispatch begin"});
    std::size_t di = 0;
    for (const auto& d : state.detectors) {
      std::size_t ci = 0;
      for (const auto& c : d.cues) {
        const std::string where =
            "state[" + state.id + "] detector[" + std::to_string(di) + "] cue[" +
            std::to_string(ci) + "]";
        program.statements.push_back(
            {state.id, where + " evaluate " + to_string(c.kind) + " '" + c.value + "'"});
        program.statements.push_back({state.id, where + " branch"});
        ++ci;
      }
      ++di;
    }
    std::size_t ai = 0;
    for (const auto& a : state.actions) {
      const std::string where = "state[" + state.id + "] action[" + std::to_string(ai) + "]";
      std::string sig = to_string(a.primitive);
      if (a.target) sig += "(" + *a.target + ")";
      program.statements.push_back({state.id, where + " guard retry budget"});
      program.statements.push_back({state.id, where + " invoke " + sig});
      program.statements.push_back({state.id, where + " re-observe"});
      ++ai;
    }
    program.statements.push_back({state.id, "state[" + state.id + "] dispatch end"});
  }
  return program;
}

std::string render_program(const ImperativeProgram& program) {
  std::string out;
  for (const auto& s : program.statements) {
    out += s.text;
    out += '\n';
  }
  out += "LLOC=" + std::to_string(program.lloc()) + "\n";
  return out;
}

std::int64_t lloc(const IntentSpec& spec, int harness_constant) {
  return materialize_imperative(spec, harness_constant).lloc();
}

}  // namespace nfaq
