#include "nfaq/metrics.hpp"

#include <algorithm>

#include "nfaq/error.hpp"
#include "nfaq/text.hpp"

namespace nfaq {

std::int64_t llos(const IntentSpec& spec) {
  std::int64_t n = static_cast<std::int64_t>(spec.states.size());
  for (const auto& s : spec.states) n += static_cast<std::int64_t>(s.actions.size());
  return n;
}

std::int64_t lsc(const std::string& authoring_input) {
  return count_chars_utf8(authoring_input);
}

std::vector<double> compression_ratios(const IntentSpec& spec) {
  std::vector<double> out;
  out.reserve(spec.states.size());
  for (const auto& s : spec.states) {
    std::size_t p = 0;
    for (const auto& d : s.detectors) p += d.cues.size();
    const double a = static_cast<double>(s.actions.size());
    out.push_back((1.0 + a) / (2.0 + 2.0 * static_cast<double>(p) + 3.0 * a));
  }
  return out;
}

std::map<Primitive, std::int64_t> api_usage(const std::vector<IntentSpec>& specs) {
  std::map<Primitive, std::int64_t> hist;
  for (const auto& spec : specs)
    for (const auto& s : spec.states)
      for (const auto& a : s.actions) ++hist[a.primitive];
  return hist;
}

std::vector<std::int64_t> token_growth(const std::vector<IntentSpec>& specs) {
  std::vector<std::int64_t> curve;
  curve.reserve(specs.size());
  std::set<std::string> seen;
  for (const auto& spec : specs) {
    for (const auto& s : spec.states)
      for (const auto& d : s.detectors)
        for (const auto& c : d.cues)
          for (const auto& tok : tokenize(c.value)) seen.insert(tok);
    curve.push_back(static_cast<std::int64_t>(seen.size()));
  }
  return curve;
}

std::set<std::string> detector_token_set(const StateDetector& detector) {
  std::set<std::string> tokens;
  for (const auto& c : detector.cues)
    for (const auto& tok : tokenize(c.value)) tokens.insert(tok);
  return tokens;
}

std::vector<std::set<std::string>> fleet_detector_token_sets(
    const std::vector<IntentSpec>& specs) {
  std::vector<std::set<std::string>> sets;
  for (const auto& spec : specs)
    for (const auto& s : spec.states)
      for (const auto& d : s.detectors) sets.push_back(detector_token_set(d));
  return sets;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty())
    throw Error(ErrorCode::Degenerate, "jaccard of two empty token sets");
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> jaccard_pairs(const std::vector<std::set<std::string>>& detectors) {
  std::vector<double> out;
  out.reserve(detectors.size() * (detectors.size() - 1) / 2);
  for (std::size_t i = 0; i < detectors.size(); ++i)
    for (std::size_t j = i + 1; j < detectors.size(); ++j)
      out.push_back(jaccard(detectors[i], detectors[j]));
  return out;
}

}  // namespace nfaq
