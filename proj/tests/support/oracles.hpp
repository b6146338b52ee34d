#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nfaq/analytics.hpp"
#include "nfaq/intent.hpp"
#include "nfaq/runtime.hpp"
#include "nfaq/simbat.hpp"

namespace nfaq::testing {

// Brute-force path search over the page graph, restricted to the action
// calls the spec admits anywhere. Returns (TERMINAL, label) when exactly
// one terminal page label is reachable for the address class, nullopt
// when none is. Independent of the executor.
struct OracleOutcome {
  bool terminal = false;
  std::optional<OutcomeLabel> label;
  int reachable_terminals = 0;
};

OracleOutcome brute_force_outcome(const SimBat& bat, const IntentSpec& spec,
                                  const AddressRecord& address);

// Replays a trace's actions against a fresh session and checks every
// recorded observation digest.
bool replay_matches(const SimBat& bat, const AddressRecord& address,
                    const QueryResult& result);

// Independent metric re-implementations (straight loops, no shared
// helpers with the production path).
std::int64_t llos_oracle(const IntentSpec& spec);
std::int64_t lsc_oracle(const std::string& input);
std::vector<double> compression_oracle(const IntentSpec& spec);
std::map<Primitive, std::int64_t> api_usage_oracle(const std::vector<IntentSpec>& specs);
std::vector<std::int64_t> token_growth_oracle(const std::vector<IntentSpec>& specs);
std::vector<double> jaccard_oracle(const std::vector<std::set<std::string>>& sets);

// Analytics oracles: exhaustive loops over the fixture records.
double threshold_oracle(const CbgRecord& cbg);
std::optional<PlanRecord> low_cost_oracle(const std::vector<PlanRecord>& plans);
std::pair<int, double> representative_oracle(
    const std::map<std::string, std::vector<PlanRecord>>& per_bsl);
MarketShares market_structure_oracle(
    const std::map<std::string, std::set<std::string>>& coverage);
BaselineStats baseline_oracle(const std::vector<CbgRecord>& cbgs,
                              const std::vector<PlanRecord>& plans);
std::pair<double, double> frontier_fractions_oracle(const std::vector<CbgRecord>& cbgs,
                                                    const std::vector<PlanRecord>& plans);

}  // namespace nfaq::testing
