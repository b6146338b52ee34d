#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nfaq {

// Fixed action API. Anything outside this set is rejected at parse time.
enum class Primitive { Click, Typewrite, Keypress, Select, Wait, Finalize };

enum class CueKind { TextContains, ElementPresent };

enum class OutcomeLabel {
  PlansPage,
  ServiceConfirmedNoPlans,
  NoService,
  ActiveService,
  Unknown,
};

enum class ExtractField {
  PlanName,
  PriceUsdPerMonth,
  DownMbps,
  UpMbps,
  PricingKind,
};

const char* to_string(Primitive p);
const char* to_string(CueKind k);
const char* to_string(OutcomeLabel l);
const char* to_string(ExtractField f);

// One observable-interface predicate. `value` is stored exactly as
// authored; matching folds it.
struct CuePredicate {
  CueKind kind = CueKind::TextContains;
  std::string value;

  friend bool operator==(const CuePredicate&, const CuePredicate&) = default;
};

// Conjunction of cues. A state may carry several detectors; they are
// disjunctive alternatives for recognizing the same state.
struct StateDetector {
  std::vector<CuePredicate> cues;

  friend bool operator==(const StateDetector&, const StateDetector&) = default;
};

struct ActionCall {
  Primitive primitive = Primitive::Click;
  std::optional<std::string> target;
  std::optional<std::string> argument;
  int retry_budget = 2;

  friend bool operator==(const ActionCall&, const ActionCall&) = default;
};

struct ExtractionDirective {
  ExtractField field = ExtractField::PlanName;
  std::string cue_prefix;

  friend bool operator==(const ExtractionDirective&,
                         const ExtractionDirective&) = default;
};

struct AbstractState {
  std::string id;
  std::vector<StateDetector> detectors;
  std::vector<ActionCall> actions;
  bool terminal = false;
  std::optional<OutcomeLabel> outcome_label;
  std::vector<ExtractionDirective> extraction;
  // Reviewer documentation only. No operation in any module may read this.
  std::vector<std::string> expected_successors;

  friend bool operator==(const AbstractState&, const AbstractState&) = default;
};

// The abstract NFA: states house Q, initial_state_id is q0, terminal states
// form F, per-state action lists carry the admissible slice of the
// transition relation (successors are resolved at runtime by re-observing).
struct IntentSpec {
  std::string isp_id;
  std::int64_t version = 1;
  std::string initial_state_id;
  std::vector<AbstractState> states;
  std::int64_t authoring_input_chars = 0;

  const AbstractState* find_state(const std::string& id) const;

  friend bool operator==(const IntentSpec&, const IntentSpec&) = default;
};

struct ValidationIssue {
  std::string rule;      // e.g. TERMINAL_HAS_ACTIONS
  std::string state_id;  // empty for spec-level issues
  std::string detail;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct SpecDelta {
  int states_added = 0;
  int states_edited = 0;
  int states_removed = 0;
  std::int64_t llos_delta = 0;
  std::vector<std::string> edited_ids;

  friend bool operator==(const SpecDelta&, const SpecDelta&) = default;
};

// Parses a UTF-8 JSON spec document. Field values are taken exactly as
// written; invariant violations that are representable (say, a terminal
// state with actions) parse fine and are reported by validate_spec.
// Throws SchemaError (with a path to the offending key), DuplicateStateId,
// or UnknownPrimitive.
IntentSpec parse_spec(const std::string& document);
IntentSpec spec_from_json(const nlohmann::json& doc);

// Canonical serialization: keys sorted lexicographically, 2-space indent,
// LF newlines, trailing newline. parse_spec(serialize_spec(s)) == s.
nlohmann::json spec_to_json(const IntentSpec& spec);
std::string serialize_spec(const IntentSpec& spec);

// Semantic form: canonical serialization minus expected_successors,
// version, and authoring_input_chars. This is the basis for cache keys
// and edit detection, so documentation-only edits and version bumps never
// change digests.
std::string semantic_state_body(const AbstractState& state);
std::string semantic_form(const IntentSpec& spec);
std::string spec_digest(const IntentSpec& spec);

// Returns one issue per violated invariant; empty means every runtime and
// compiler precondition holds.
std::vector<ValidationIssue> validate_spec(const IntentSpec& spec);

// Structural diff between two versions of one ISP's spec.
// Throws IspMismatch when the isp_ids differ.
SpecDelta spec_diff(const IntentSpec& older, const IntentSpec& newer);

}  // namespace nfaq
