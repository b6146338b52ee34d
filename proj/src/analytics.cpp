#include "nfaq/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nfaq/error.hpp"

namespace nfaq {

const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::ServiceableWithPlans: return "SERVICEABLE_WITH_PLANS";
    case OutcomeClass::ServiceableNoPlans: return "SERVICEABLE_NO_PLANS";
    case OutcomeClass::NoService: return "NO_SERVICE";
    case OutcomeClass::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::int64_t to_cents(double usd) {
  return std::llround(usd * 100.0);
}

std::vector<CbgRecord> parse_cbg_csv(const std::string& text) {
  std::vector<CbgRecord> records;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("cbg_id,", 0) != 0)
        throw Error(ErrorCode::SchemaError, "cbg csv: unexpected header: " + line);
      continue;
    }
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5)
      throw Error(ErrorCode::SchemaError,
                  "cbg csv line " + std::to_string(lineno) + ": expected 5 fields");
    try {
      CbgRecord rec;
      rec.cbg_id = cells[0];
      rec.income_20th_pct_disposable = std::stod(cells[1]);
      rec.bsl_count = std::stoll(cells[2]);
      rec.unserved_plus_underserved = std::stoll(cells[3]);
      rec.population_weight = std::stod(cells[4]);
      records.push_back(std::move(rec));
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaError,
                  "cbg csv line " + std::to_string(lineno) + ": bad numeric field");
    }
  }
  return records;
}

std::string serialize_cbg_csv(const std::vector<CbgRecord>& records) {
  std::string out =
      "cbg_id,income_20th_pct_disposable,bsl_count,unserved_plus_underserved,"
      "population_weight\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%.2f,%lld,%lld,%.4f\n", r.cbg_id.c_str(),
                  r.income_20th_pct_disposable, static_cast<long long>(r.bsl_count),
                  static_cast<long long>(r.unserved_plus_underserved), r.population_weight);
    out += buf;
  }
  return out;
}

double affordability_threshold(const CbgRecord& cbg) {
  if (cbg.income_20th_pct_disposable <= 0.0)
    throw Error(ErrorCode::NonpositiveIncome, cbg.cbg_id);
  const double monthly = 0.02 * cbg.income_20th_pct_disposable / 12.0;
  const double cents = std::floor(monthly * 100.0 + 0.5);  // half-up
  return cents / 100.0;
}

namespace {

bool qualifies_low_cost(const PlanRecord& p) {
  return p.pricing_kind == PricingKind::Regular && p.down_mbps && *p.down_mbps >= 100 &&
         p.price_usd && *p.price_usd > 0.0;
}

bool low_cost_better(const PlanRecord& a, const PlanRecord& b) {
  const std::int64_t pa = to_cents(*a.price_usd), pb = to_cents(*b.price_usd);
  if (pa != pb) return pa < pb;
  if (*a.down_mbps != *b.down_mbps) return *a.down_mbps > *b.down_mbps;
  return a.plan_name.value_or("") < b.plan_name.value_or("");
}

}  // namespace

std::optional<PlanRecord> low_cost_plan(const std::vector<PlanRecord>& plans) {
  std::optional<PlanRecord> best;
  for (const auto& p : plans) {
    if (!qualifies_low_cost(p)) continue;
    if (!best || low_cost_better(p, *best)) best = p;
  }
  return best;
}

std::pair<int, double> representative_plan(
    const std::map<std::string, std::vector<PlanRecord>>& per_bsl_plans) {
  struct Selection {
    int down;
    double price;
  };
  std::vector<Selection> selections;
  for (const auto& [bsl, plans] : per_bsl_plans) {
    (void)bsl;
    std::optional<Selection> chosen;
    for (const auto& p : plans) {
      if (p.pricing_kind != PricingKind::Regular || !p.down_mbps || !p.price_usd) continue;
      const Selection candidate{*p.down_mbps, *p.price_usd};
      if (!chosen) {
        chosen = candidate;
        continue;
      }
      const int dc = std::abs(candidate.down - 100), db = std::abs(chosen->down - 100);
      if (dc < db || (dc == db && to_cents(candidate.price) < to_cents(chosen->price)))
        chosen = candidate;
    }
    if (chosen) selections.push_back(*chosen);
  }
  if (selections.empty())
    throw Error(ErrorCode::EmptyCbg, "no BSL with a REGULAR-priced plan");

  // Lower median keeps the reported speed one that is actually offered.
  std::vector<int> speeds;
  for (const auto& s : selections) speeds.push_back(s.down);
  std::sort(speeds.begin(), speeds.end());
  const int median_speed = speeds[(speeds.size() - 1) / 2];

  std::vector<double> prices;
  for (const auto& s : selections)
    if (s.down == median_speed) prices.push_back(s.price);
  std::sort(prices.begin(), prices.end());
  const double median_price = prices[(prices.size() - 1) / 2];
  return {median_speed, median_price};
}

OutcomeClass classify_outcome(const QueryResult& result) {
  switch (result.status) {
    case QueryStatus::Terminal:
      break;
    case QueryStatus::Underspecified:
    case QueryStatus::Ambiguous:
    case QueryStatus::NoAdmissibleAction:
    case QueryStatus::StepBudgetExhausted:
      return OutcomeClass::Unknown;
  }
  if (!result.outcome_label) return OutcomeClass::Unknown;
  switch (*result.outcome_label) {
    case OutcomeLabel::PlansPage:
      return result.plans.empty() ? OutcomeClass::ServiceableNoPlans
                                  : OutcomeClass::ServiceableWithPlans;
    case OutcomeLabel::ServiceConfirmedNoPlans:
      return OutcomeClass::ServiceableNoPlans;
    case OutcomeLabel::NoService:
      return OutcomeClass::NoService;
    case OutcomeLabel::ActiveService:
    case OutcomeLabel::Unknown:
      return OutcomeClass::Unknown;
  }
  return OutcomeClass::Unknown;
}

MarketShares market_structure(const std::map<std::string, std::set<std::string>>& coverage) {
  if (coverage.empty()) return {};
  std::size_t mono = 0, duo = 0, tri = 0;
  for (const auto& [cbg, isps] : coverage) {
    (void)cbg;
    if (isps.size() == 1) ++mono;
    else if (isps.size() == 2) ++duo;
    else if (isps.size() >= 3) ++tri;
  }
  const double n = static_cast<double>(coverage.size());
  return {static_cast<double>(mono) / n, static_cast<double>(duo) / n,
          static_cast<double>(tri) / n};
}

std::map<std::string, MarketShares> market_structure_per_isp(
    const std::map<std::string, std::set<std::string>>& coverage) {
  std::map<std::string, std::map<std::string, std::set<std::string>>> per_isp;
  for (const auto& [cbg, isps] : coverage)
    for (const auto& isp : isps) per_isp[isp][cbg] = isps;
  std::map<std::string, MarketShares> out;
  for (const auto& [isp, covered] : per_isp) out[isp] = market_structure(covered);
  return out;
}

bool bead_eligible(const CbgRecord& cbg) {
  if (cbg.bsl_count <= 0) throw Error(ErrorCode::ZeroBsl, cbg.cbg_id);
  return 2 * cbg.unserved_plus_underserved >= cbg.bsl_count;
}

FrontierSummary frontier(const std::vector<CbgRecord>& cbgs,
                         const std::vector<PlanRecord>& plans,
                         const std::map<std::string, double>& coverage_quality) {
  // Best qualifying plan per (cbg, isp), then the minimum across ISPs.
  std::map<std::string, std::map<std::string, std::vector<PlanRecord>>> grouped;
  for (const auto& p : plans) grouped[p.cbg_id][p.isp_id].push_back(p);

  FrontierSummary summary;
  std::size_t affordable = 0;
  for (const auto& cbg : cbgs) {
    FrontierPoint point;
    point.cbg_id = cbg.cbg_id;
    point.threshold = affordability_threshold(cbg);
    auto cq = coverage_quality.find(cbg.cbg_id);
    if (cq != coverage_quality.end()) point.coverage_quality = cq->second;

    std::optional<PlanRecord> best;
    auto per_isp = grouped.find(cbg.cbg_id);
    if (per_isp != grouped.end()) {
      for (const auto& [isp, isp_plans] : per_isp->second) {
        (void)isp;
        auto candidate = low_cost_plan(isp_plans);
        if (candidate && (!best || low_cost_better(*candidate, *best))) best = candidate;
      }
    }
    if (best) {
      point.plan_price = *best->price_usd;
      point.qualifying = true;
      if (to_cents(*point.plan_price) <= to_cents(point.threshold)) ++affordable;
    }
    summary.points.push_back(std::move(point));
  }
  const double n = static_cast<double>(cbgs.size());
  if (n > 0) {
    summary.frac_with_affordable_plan = static_cast<double>(affordable) / n;
    summary.frac_without_affordable_plan = 1.0 - summary.frac_with_affordable_plan;
  }
  return summary;
}

BaselineStats baseline_stats(const std::vector<CbgRecord>& cbgs,
                             const std::vector<PlanRecord>& plans) {
  std::map<std::string, std::map<std::string, std::vector<PlanRecord>>> by_cbg_bsl;
  std::map<std::string, std::vector<PlanRecord>> by_cbg;
  for (const auto& p : plans) {
    by_cbg_bsl[p.cbg_id][p.address].push_back(p);
    by_cbg[p.cbg_id].push_back(p);
  }

  std::size_t denom = 0, price_above = 0, speed_below = 0, no_qualifying = 0;
  for (const auto& cbg : cbgs) {
    auto it = by_cbg_bsl.find(cbg.cbg_id);
    if (it == by_cbg_bsl.end()) continue;  // no curated plans: outside denominators
    std::pair<int, double> rep;
    try {
      rep = representative_plan(it->second);
    } catch (const Error&) {
      continue;  // only PROMOTIONAL plans curated here
    }
    ++denom;
    if (to_cents(rep.second) > to_cents(affordability_threshold(cbg))) ++price_above;
    if (rep.first < 100) ++speed_below;
    if (!low_cost_plan(by_cbg[cbg.cbg_id])) ++no_qualifying;
  }

  BaselineStats stats;
  if (denom > 0) {
    const double n = static_cast<double>(denom);
    stats.frac_price_above_threshold = static_cast<double>(price_above) / n;
    stats.frac_speed_below_100 = static_cast<double>(speed_below) / n;
    stats.frac_no_qualifying_plan = static_cast<double>(no_qualifying) / n;
  }
  return stats;
}

}  // namespace nfaq
