#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nfaq/intent.hpp"
#include "nfaq/simbat.hpp"

namespace nfaq::testing {

// Three-page linear fixture: address entry -> qualification -> terminals,
// with a plans payload. Mirrors the smallest realistic provider interface.
SimBat three_page_bat();
IntentSpec three_page_spec();
Catalog three_page_catalog();

// Cookie-consent cycle fixture: START -> CONSENT (accept -> PLANS,
// reject -> START). The reject-only spec loops forever but for the step
// budget.
SimBat cycle_bat();
IntentSpec cycle_spec_complete();
IntentSpec cycle_spec_reject_only();

// Calibration fixture: 3 states, 6 cue predicates, 5 action calls.
IntentSpec calibration_spec();

// Random valid spec, deterministic in the generator state.
IntentSpec random_spec(std::mt19937_64& rng, int index);

// One scripted spec repair component: either a whole new state or a
// replacement of one action inside one state.
struct FixComponent {
  std::optional<AbstractState> add_state;
  struct ActionEdit {
    std::string state_id;
    ActionCall from;
    ActionCall to;
  };
  std::optional<ActionEdit> edit;
};

IntentSpec apply_fix(const IntentSpec& spec, const std::vector<FixComponent>& components);

struct ChurnCase {
  std::string name;
  MutationOp op;
  int stage_count = 0;            // states the mutation touches; 0 = cosmetic
  std::vector<FixComponent> fix;  // scripted minimal repair
};

// Four structural cases (two inserts, one edit, one insert+edit) plus one
// cosmetic relabel for a fleet item.
std::vector<ChurnCase> build_churn_cases(const FleetItem& item);

// Hit rate of `spec` over the catalog against `bat`.
double fixture_hit_rate(const IntentSpec& spec, const SimBat& bat, const Catalog& catalog,
                        int step_budget = 64);

}  // namespace nfaq::testing
