#pragma once

#include <string>
#include <vector>

#include "nfaq/intent.hpp"
#include "nfaq/simbat.hpp"

namespace nfaq {

struct ExplorationBudget {
  int max_pages = 64;
  // One probe address per outcome class present in the catalog.
  std::vector<AddressRecord> probe_addresses;
};

ExplorationBudget budget_from_catalog(const Catalog& catalog, int max_pages = 64);

// Synthesizes an intent specification by systematic breadth-first
// exploration of the simulated interface, one probe per outcome class:
// one abstract state per distinct rendered observation signature, a
// minimal page-unique cue subset (at most 3 cues, lexicographic
// tie-break) as detector, actions from the visible interactive surface
// ordered progress-first, and terminal labels read off the rendered
// outcome text. Pure function of (bat, budget).
//
// When the budget truncates exploration the partial spec is still
// returned and *truncated (if given) is set; the CLI surfaces this as a
// BUDGET_EXCEEDED warning.
IntentSpec infer_spec(const SimBat& bat, const ExplorationBudget& budget,
                      bool* truncated = nullptr);

// Runs both specs on every catalog address under identical runtime
// semantics and returns the fraction of addresses whose
// (status, outcome_label) agree.
double fidelity_check(const IntentSpec& spec_a, const IntentSpec& spec_b,
                      const SimBat& bat, const Catalog& catalog,
                      int step_budget = 64);

}  // namespace nfaq
