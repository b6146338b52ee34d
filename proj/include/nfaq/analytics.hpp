#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nfaq/plan.hpp"
#include "nfaq/runtime.hpp"

namespace nfaq {

struct CbgRecord {
  std::string cbg_id;
  double income_20th_pct_disposable = 0.0;  // USD/year
  std::int64_t bsl_count = 0;
  std::int64_t unserved_plus_underserved = 0;
  double population_weight = 0.0;

  friend bool operator==(const CbgRecord&, const CbgRecord&) = default;
};

// CSV with header: cbg_id,income_20th_pct_disposable,bsl_count,
// unserved_plus_underserved,population_weight
std::vector<CbgRecord> parse_cbg_csv(const std::string& text);
std::string serialize_cbg_csv(const std::vector<CbgRecord>& records);

enum class OutcomeClass {
  ServiceableWithPlans,
  ServiceableNoPlans,
  NoService,
  Unknown,
};

const char* to_string(OutcomeClass c);

struct FrontierPoint {
  std::string cbg_id;
  std::optional<double> plan_price;  // absent when no qualifying plan exists
  double threshold = 0.0;
  bool qualifying = false;  // chosen plan meets the 100 Mbps download bar
  double coverage_quality = 1.0;
};

struct FrontierSummary {
  std::vector<FrontierPoint> points;
  double frac_with_affordable_plan = 0.0;
  double frac_without_affordable_plan = 0.0;
};

struct BaselineStats {
  double frac_price_above_threshold = 0.0;
  double frac_speed_below_100 = 0.0;
  double frac_no_qualifying_plan = 0.0;
};

// 2% of 20th-percentile disposable income, monthly, rounded to cents
// half-up. Throws NonpositiveIncome.
double affordability_threshold(const CbgRecord& cbg);

// Lowest-priced REGULAR plan with down >= 100 among one (cbg, isp) group;
// ties break toward higher download, then lexicographic name. nullopt when
// nothing qualifies.
std::optional<PlanRecord> low_cost_plan(const std::vector<PlanRecord>& plans);

// Appendix-style representative plan: per BSL the REGULAR plan whose
// download is closest to 100 Mbps (tie -> lower price), then the lower
// median of the selected speeds and the lower-median price among BSLs
// offering that speed. Throws EmptyCbg when no BSL has a REGULAR plan.
std::pair<int, double> representative_plan(
    const std::map<std::string, std::vector<PlanRecord>>& per_bsl_plans);

// Total over every QueryResult status; never falls through.
OutcomeClass classify_outcome(const QueryResult& result);

struct MarketShares {
  double monopoly = 0.0;
  double duopoly = 0.0;
  double triopoly_plus = 0.0;
};

MarketShares market_structure(const std::map<std::string, std::set<std::string>>& coverage);

// Per-ISP variant: for each provider, the shares are computed over the
// CBGs that provider covers.
std::map<std::string, MarketShares> market_structure_per_isp(
    const std::map<std::string, std::set<std::string>>& coverage);

// true iff at least half the CBG's BSLs are unserved or underserved
// (boundary inclusive). Throws ZeroBsl.
bool bead_eligible(const CbgRecord& cbg);

// Affordability frontier: one point per CBG using the minimum
// low_cost_plan price across ISPs; affordable iff price <= threshold
// (boundary inclusive, compared in cents).
FrontierSummary frontier(const std::vector<CbgRecord>& cbgs,
                         const std::vector<PlanRecord>& plans,
                         const std::map<std::string, double>& coverage_quality = {});

// Fractions over CBGs with at least one curated plan: representative plan
// price above threshold, representative speed below 100, and no qualifying
// low-cost plan across all ISPs.
BaselineStats baseline_stats(const std::vector<CbgRecord>& cbgs,
                             const std::vector<PlanRecord>& plans);

// Cents comparison helpers shared with the oracle tests.
std::int64_t to_cents(double usd);

}  // namespace nfaq
