#include "nfaq/intent.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "nfaq/error.hpp"
#include "nfaq/metrics.hpp"
#include "nfaq/text.hpp"

namespace nfaq {

using nlohmann::json;

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::DuplicateStateId: return "DUPLICATE_STATE_ID";
    case ErrorCode::UnknownPrimitive: return "UNKNOWN_PRIMITIVE";
    case ErrorCode::IspMismatch: return "ISP_MISMATCH";
    case ErrorCode::UnboundPrimitive: return "UNBOUND_PRIMITIVE";
    case ErrorCode::InvalidInsertionPoint: return "INVALID_INSERTION_POINT";
    case ErrorCode::UnknownPage: return "UNKNOWN_PAGE";
    case ErrorCode::ExtractionEmpty: return "EXTRACTION_EMPTY";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::NonpositiveIncome: return "NONPOSITIVE_INCOME";
    case ErrorCode::ZeroBsl: return "ZERO_BSL";
    case ErrorCode::EmptyCbg: return "EMPTY_CBG";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::EnvFault: return "ENV_FAULT";
    case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::UnknownSubcommand: return "UNKNOWN_SUBCOMMAND";
    case ErrorCode::Internal: return "INTERNAL";
  }
  return "INTERNAL";
}

const char* to_string(Primitive p) {
  switch (p) {
    case Primitive::Click: return "click";
    case Primitive::Typewrite: return "typewrite";
    case Primitive::Keypress: return "keypress";
    case Primitive::Select: return "select";
    case Primitive::Wait: return "wait";
    case Primitive::Finalize: return "finalize";
  }
  return "click";
}

const char* to_string(CueKind k) {
  return k == CueKind::TextContains ? "TEXT_CONTAINS" : "ELEMENT_PRESENT";
}

const char* to_string(OutcomeLabel l) {
  switch (l) {
    case OutcomeLabel::PlansPage: return "PLANS_PAGE";
    case OutcomeLabel::ServiceConfirmedNoPlans: return "SERVICE_CONFIRMED_NO_PLANS";
    case OutcomeLabel::NoService: return "NO_SERVICE";
    case OutcomeLabel::ActiveService: return "ACTIVE_SERVICE";
    case OutcomeLabel::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

const char* to_string(ExtractField f) {
  switch (f) {
    case ExtractField::PlanName: return "PLAN_NAME";
    case ExtractField::PriceUsdPerMonth: return "PRICE_USD_PER_MONTH";
    case ExtractField::DownMbps: return "DOWN_MBPS";
    case ExtractField::UpMbps: return "UP_MBPS";
    case ExtractField::PricingKind: return "PRICING_KIND";
  }
  return "PLAN_NAME";
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing required key");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) schema_error(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

std::int64_t require_int(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) schema_error(path + "/" + key, "expected an integer");
  return v.get<std::int64_t>();
}

Primitive parse_primitive(const std::string& s, const std::string& path) {
  static const std::map<std::string, Primitive> table = {
      {"click", Primitive::Click},       {"typewrite", Primitive::Typewrite},
      {"keypress", Primitive::Keypress}, {"select", Primitive::Select},
      {"wait", Primitive::Wait},         {"finalize", Primitive::Finalize},
  };
  auto it = table.find(s);
  if (it == table.end())
    throw Error(ErrorCode::UnknownPrimitive, path + ": '" + s + "'");
  return it->second;
}

CueKind parse_cue_kind(const std::string& s, const std::string& path) {
  if (s == "TEXT_CONTAINS") return CueKind::TextContains;
  if (s == "ELEMENT_PRESENT") return CueKind::ElementPresent;
  schema_error(path, "unknown cue kind '" + s + "'");
}

OutcomeLabel parse_outcome_label(const std::string& s, const std::string& path) {
  if (s == "PLANS_PAGE") return OutcomeLabel::PlansPage;
  if (s == "SERVICE_CONFIRMED_NO_PLANS") return OutcomeLabel::ServiceConfirmedNoPlans;
  if (s == "NO_SERVICE") return OutcomeLabel::NoService;
  if (s == "ACTIVE_SERVICE") return OutcomeLabel::ActiveService;
  if (s == "UNKNOWN") return OutcomeLabel::Unknown;
  schema_error(path, "unknown outcome label '" + s + "'");
}

ExtractField parse_extract_field(const std::string& s, const std::string& path) {
  if (s == "PLAN_NAME") return ExtractField::PlanName;
  if (s == "PRICE_USD_PER_MONTH") return ExtractField::PriceUsdPerMonth;
  if (s == "DOWN_MBPS") return ExtractField::DownMbps;
  if (s == "UP_MBPS") return ExtractField::UpMbps;
  if (s == "PRICING_KIND") return ExtractField::PricingKind;
  schema_error(path, "unknown extraction field '" + s + "'");
}

ActionCall action_from_json(const json& a, const std::string& path) {
  ActionCall call;
  call.primitive = parse_primitive(require_string(a, "primitive", path), path + "/primitive");
  if (a.contains("target")) {
    if (!a["target"].is_string()) schema_error(path + "/target", "expected a string");
    call.target = a["target"].get<std::string>();
  }
  if (a.contains("argument")) {
    if (!a["argument"].is_string()) schema_error(path + "/argument", "expected a string");
    call.argument = a["argument"].get<std::string>();
  }
  if (a.contains("retry_budget")) {
    if (!a["retry_budget"].is_number_integer())
      schema_error(path + "/retry_budget", "expected an integer");
    call.retry_budget = a["retry_budget"].get<int>();
  }
  return call;
}

json action_to_json(const ActionCall& a) {
  json out;
  if (a.argument) out["argument"] = *a.argument;
  out["primitive"] = to_string(a.primitive);
  out["retry_budget"] = a.retry_budget;
  if (a.target) out["target"] = *a.target;
  return out;
}

json state_to_json(const AbstractState& s, bool semantic) {
  json out;
  json actions = json::array();
  for (const auto& a : s.actions) actions.push_back(action_to_json(a));
  out["actions"] = std::move(actions);

  json detectors = json::array();
  for (const auto& d : s.detectors) {
    json cues = json::array();
    for (const auto& c : d.cues) cues.push_back({{"kind", to_string(c.kind)}, {"value", c.value}});
    detectors.push_back(std::move(cues));
  }
  out["detectors"] = std::move(detectors);

  if (!s.extraction.empty()) {
    json ex = json::array();
    for (const auto& e : s.extraction)
      ex.push_back({{"cue_prefix", e.cue_prefix}, {"field", to_string(e.field)}});
    out["extraction"] = std::move(ex);
  }
  out["id"] = s.id;
  if (s.outcome_label) out["outcome_label"] = to_string(*s.outcome_label);
  out["terminal"] = s.terminal;
  if (!semantic && !s.expected_successors.empty())
    out["expected_successors"] = s.expected_successors;
  return out;
}

}  // namespace

const AbstractState* IntentSpec::find_state(const std::string& id) const {
  for (const auto& s : states)
    if (s.id == id) return &s;
  return nullptr;
}

IntentSpec spec_from_json(const json& doc) {
  IntentSpec spec;
  spec.isp_id = require_string(doc, "isp_id", "");
  spec.version = require_int(doc, "version", "");
  spec.initial_state_id = require_string(doc, "initial_state", "");
  if (doc.contains("authoring_input_chars")) {
    if (!doc["authoring_input_chars"].is_number_integer())
      schema_error("/authoring_input_chars", "expected an integer");
    spec.authoring_input_chars = doc["authoring_input_chars"].get<std::int64_t>();
    if (spec.authoring_input_chars < 0)
      schema_error("/authoring_input_chars", "must be nonnegative");
  }

  const json& states = require(doc, "states", "");
  if (!states.is_array()) schema_error("/states", "expected an array");

  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string path = "/states/" + std::to_string(i);
    const json& sj = states[i];
    AbstractState state;
    state.id = require_string(sj, "id", path);
    if (!seen_ids.insert(state.id).second)
      throw Error(ErrorCode::DuplicateStateId, path + "/id: '" + state.id + "'");

    const json& detectors = require(sj, "detectors", path);
    if (!detectors.is_array()) schema_error(path + "/detectors", "expected an array");
    for (std::size_t j = 0; j < detectors.size(); ++j) {
      const std::string dpath = path + "/detectors/" + std::to_string(j);
      if (!detectors[j].is_array()) schema_error(dpath, "expected an array of cues");
      StateDetector det;
      for (std::size_t k = 0; k < detectors[j].size(); ++k) {
        const std::string cpath = dpath + "/" + std::to_string(k);
        const json& cj = detectors[j][k];
        CuePredicate cue;
        cue.kind = parse_cue_kind(require_string(cj, "kind", cpath), cpath + "/kind");
        cue.value = require_string(cj, "value", cpath);
        det.cues.push_back(std::move(cue));
      }
      state.detectors.push_back(std::move(det));
    }

    const json& actions = require(sj, "actions", path);
    if (!actions.is_array()) schema_error(path + "/actions", "expected an array");
    for (std::size_t j = 0; j < actions.size(); ++j)
      state.actions.push_back(
          action_from_json(actions[j], path + "/actions/" + std::to_string(j)));

    if (sj.contains("terminal")) {
      if (!sj["terminal"].is_boolean()) schema_error(path + "/terminal", "expected a boolean");
      state.terminal = sj["terminal"].get<bool>();
    }
    if (sj.contains("outcome_label"))
      state.outcome_label = parse_outcome_label(
          require_string(sj, "outcome_label", path), path + "/outcome_label");
    if (sj.contains("extraction")) {
      const json& ex = sj["extraction"];
      if (!ex.is_array()) schema_error(path + "/extraction", "expected an array");
      for (std::size_t j = 0; j < ex.size(); ++j) {
        const std::string epath = path + "/extraction/" + std::to_string(j);
        ExtractionDirective dir;
        dir.field = parse_extract_field(require_string(ex[j], "field", epath), epath + "/field");
        dir.cue_prefix = require_string(ex[j], "cue_prefix", epath);
        state.extraction.push_back(std::move(dir));
      }
    }
    if (sj.contains("expected_successors")) {
      const json& succ = sj["expected_successors"];
      if (!succ.is_array()) schema_error(path + "/expected_successors", "expected an array");
      for (const auto& s : succ) {
        if (!s.is_string()) schema_error(path + "/expected_successors", "expected strings");
        state.expected_successors.push_back(s.get<std::string>());
      }
    }
    spec.states.push_back(std::move(state));
  }

  if (!spec.find_state(spec.initial_state_id))
    schema_error("/initial_state", "names no state: '" + spec.initial_state_id + "'");
  return spec;
}

IntentSpec parse_spec(const std::string& document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded())
    throw Error(ErrorCode::SchemaError, "document is not valid JSON");
  return spec_from_json(doc);
}

json spec_to_json(const IntentSpec& spec) {
  json out;
  out["authoring_input_chars"] = spec.authoring_input_chars;
  out["initial_state"] = spec.initial_state_id;
  out["isp_id"] = spec.isp_id;
  json states = json::array();
  for (const auto& s : spec.states) states.push_back(state_to_json(s, false));
  out["states"] = std::move(states);
  out["version"] = spec.version;
  return out;
}

std::string serialize_spec(const IntentSpec& spec) {
  return spec_to_json(spec).dump(2) + "\n";
}

std::string semantic_state_body(const AbstractState& state) {
  return state_to_json(state, true).dump();
}

std::string semantic_form(const IntentSpec& spec) {
  json out;
  out["initial_state"] = spec.initial_state_id;
  out["isp_id"] = spec.isp_id;
  json states = json::array();
  for (const auto& s : spec.states) states.push_back(state_to_json(s, true));
  out["states"] = std::move(states);
  return out.dump();
}

std::string spec_digest(const IntentSpec& spec) {
  return to_hex(fnv1a64(semantic_form(spec)));
}

std::vector<ValidationIssue> validate_spec(const IntentSpec& spec) {
  std::vector<ValidationIssue> issues;
  auto add = [&](const std::string& rule, const std::string& state_id,
                 const std::string& detail) {
    issues.push_back({rule, state_id, detail});
  };

  std::set<std::string> ids;
  for (const auto& s : spec.states)
    if (!ids.insert(s.id).second) add("DUPLICATE_STATE_ID", s.id, "state id appears twice");

  if (!spec.find_state(spec.initial_state_id))
    add("UNKNOWN_INITIAL_STATE", spec.initial_state_id, "initial_state names no state");

  bool any_terminal = false;
  for (const auto& s : spec.states) {
    if (s.terminal) any_terminal = true;

    if (s.detectors.empty()) add("EMPTY_DETECTORS", s.id, "state has no detectors");
    for (const auto& d : s.detectors) {
      if (d.cues.empty()) add("EMPTY_CUES", s.id, "detector has no cue predicates");
      for (const auto& c : d.cues)
        if (fold(c.value).empty())
          add("EMPTY_CUE_VALUE", s.id, "cue value empty after trimming");
    }

    if (s.terminal && !s.outcome_label)
      add("TERMINAL_WITHOUT_OUTCOME", s.id, "terminal state lacks outcome_label");
    if (!s.terminal && s.outcome_label)
      add("OUTCOME_ON_NONTERMINAL", s.id, "outcome_label on non-terminal state");
    if (s.terminal && !s.actions.empty())
      add("TERMINAL_HAS_ACTIONS", s.id, "terminal state carries action calls");
    if (!s.terminal && s.actions.empty())
      add("NONTERMINAL_NO_ACTIONS", s.id, "non-terminal state has no admissible actions");
    if (!s.extraction.empty() &&
        (!s.outcome_label || *s.outcome_label != OutcomeLabel::PlansPage))
      add("EXTRACTION_WITHOUT_PLANS_LABEL", s.id,
          "extraction directives on a state not labeled PLANS_PAGE");

    std::set<ExtractField> fields;
    for (const auto& e : s.extraction)
      if (!fields.insert(e.field).second)
        add("DUPLICATE_EXTRACTION_FIELD", s.id, to_string(e.field));

    for (const auto& a : s.actions) {
      switch (a.primitive) {
        case Primitive::Click:
        case Primitive::Select:
          if (!a.target) add("MISSING_TARGET", s.id, to_string(a.primitive));
          break;
        case Primitive::Typewrite:
          if (!a.target) add("MISSING_TARGET", s.id, "typewrite");
          if (!a.argument) add("MISSING_ARGUMENT", s.id, "typewrite");
          break;
        case Primitive::Finalize:
          if (a.target || a.argument)
            add("FINALIZE_WITH_OPERANDS", s.id, "finalize takes no target or argument");
          break;
        case Primitive::Keypress:
        case Primitive::Wait:
          break;
      }
      if (a.retry_budget < 1) add("NONPOSITIVE_RETRY_BUDGET", s.id, to_string(a.primitive));
    }
  }
  if (!any_terminal && !spec.states.empty())
    add("NO_TERMINAL_STATE", "", "spec has no terminal state");
  if (spec.states.empty()) add("NO_STATES", "", "spec has no states");
  if (spec.authoring_input_chars < 0)
    add("NEGATIVE_AUTHORING_CHARS", "", "authoring_input_chars below zero");
  return issues;
}

SpecDelta spec_diff(const IntentSpec& older, const IntentSpec& newer) {
  if (older.isp_id != newer.isp_id)
    throw Error(ErrorCode::IspMismatch,
                "'" + older.isp_id + "' vs '" + newer.isp_id + "'");

  std::map<std::string, const AbstractState*> old_by_id, new_by_id;
  for (const auto& s : older.states) old_by_id[s.id] = &s;
  for (const auto& s : newer.states) new_by_id[s.id] = &s;

  SpecDelta delta;
  for (const auto& [id, state] : new_by_id) {
    auto it = old_by_id.find(id);
    if (it == old_by_id.end()) {
      ++delta.states_added;
    } else if (semantic_state_body(*it->second) != semantic_state_body(*state)) {
      ++delta.states_edited;
      delta.edited_ids.push_back(id);
    }
  }
  for (const auto& [id, state] : old_by_id) {
    (void)state;
    if (!new_by_id.count(id)) ++delta.states_removed;
  }
  delta.llos_delta = static_cast<std::int64_t>(llos(newer)) -
                     static_cast<std::int64_t>(llos(older));
  return delta;
}

}  // namespace nfaq
