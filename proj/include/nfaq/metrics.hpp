#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nfaq/intent.hpp"

namespace nfaq {

// Logical Lines of Specification: one line per state identifier plus one
// per action call.
std::int64_t llos(const IntentSpec& spec);

// Logical Specified Characters: code-point count of the raw authoring
// input, whitespace and punctuation included.
std::int64_t lsc(const std::string& authoring_input);

// Per-state (1 + a) / (2 + 2p + 3a): the state's specification footprint
// over its attributed imperative footprint, harness excluded. In spec
// order.
std::vector<double> compression_ratios(const IntentSpec& spec);

// Action-call counts by primitive across all states of all specs.
std::map<Primitive, std::int64_t> api_usage(const std::vector<IntentSpec>& specs);

// k-th entry: distinct folded cue tokens across specs 1..k, in the given
// onboarding order.
std::vector<std::int64_t> token_growth(const std::vector<IntentSpec>& specs);

// Token set of one detector: union of tokenize() over its cue values.
std::set<std::string> detector_token_set(const StateDetector& detector);
std::vector<std::set<std::string>> fleet_detector_token_sets(
    const std::vector<IntentSpec>& specs);

// |A∩B| / |A∪B| over every unordered pair, pairs in (i, j>i) order.
// Throws Degenerate if any pair has two empty sets.
std::vector<double> jaccard_pairs(const std::vector<std::set<std::string>>& detectors);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace nfaq
