#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nfaq/intent.hpp"
#include "nfaq/observe.hpp"

namespace nfaq {

// A cue with its value pre-folded for matching.
struct CompiledCue {
  CueKind kind;
  std::string folded;
};

struct CompiledDetector {
  std::vector<CompiledCue> cues;

  bool matches(const Observation& obs) const;
  // Visible-text modality: true iff the detector has at least one
  // TEXT_CONTAINS cue and all of them are satisfied. Element cues are
  // ignored; a detector with no text cues cannot survive refinement.
  bool matches_text_only(const Observation& obs) const;
};

// Handler registry entry: actuates one primitive through the environment.
using ActionHandler = void (*)(Environment&, const ActionCall&);

struct BoundAction {
  ActionCall call;
  ActionHandler handler = nullptr;
};

struct ConcreteState {
  std::vector<std::string> source_ids;  // abstract states merged into this one
  std::string display_id;               // first source id
  std::vector<CompiledDetector> detectors;
  std::vector<BoundAction> actions;
  bool terminal = false;
  std::optional<OutcomeLabel> outcome_label;
  std::vector<ExtractionDirective> extraction;

  bool matches(const Observation& obs) const;
};

struct ConcreteNfa {
  std::string isp_id;
  std::int64_t spec_version = 0;
  std::vector<ConcreteState> states;
  int initial = 0;
  std::vector<int> terminal_indices;
  std::string cache_key;
  std::map<std::string, int> merge_map;  // abstract id -> concrete index
};

// Binds detectors to predicates and actions to handlers, merging abstract
// states with identical (folded) detector sets and identical outcome
// labels. Deterministic for a given spec.
// Precondition: validate_spec(spec) is empty.
ConcreteNfa compile(const IntentSpec& spec);

nlohmann::json concrete_nfa_to_json(const ConcreteNfa& nfa);

// Process-level compiled-NFA store. Keyed on the semantic-form digest, so
// reverted specs and version-only bumps re-hit the cache. Values are
// immutable; concurrent readers are fine, writes are serialized.
class CompileCache {
 public:
  std::shared_ptr<const ConcreteNfa> get_or_compile(const IntentSpec& spec);
  std::size_t compile_count() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ConcreteNfa>> store_;
  std::size_t compile_count_ = 0;
};

std::shared_ptr<const ConcreteNfa> cache_get_or_compile(const IntentSpec& spec,
                                                        CompileCache& cache);

// One statement of the materialized imperative realization. `state_id` is
// empty for harness statements; the rest attribute to the state whose
// dispatch block they belong to.
struct Statement {
  std::string state_id;
  std::string text;
};

struct ImperativeProgram {
  std::vector<Statement> statements;

  std::int64_t lloc() const { return static_cast<std::int64_t>(statements.size()); }
};

inline constexpr int kDefaultHarnessConstant = 692;

// Fully materializes the spec into explicit control flow, state checks,
// and action sequencing: harness_constant scaffolding statements, then per
// state 2 dispatch statements, 2 per cue predicate, 3 per action call.
// The program is an accounting artifact; it is never executed.
ImperativeProgram materialize_imperative(const IntentSpec& spec,
                                         int harness_constant = kDefaultHarnessConstant);

// One descriptor per line plus a trailing "LLOC=<n>" line.
std::string render_program(const ImperativeProgram& program);

std::int64_t lloc(const IntentSpec& spec, int harness_constant = kDefaultHarnessConstant);

}  // namespace nfaq
