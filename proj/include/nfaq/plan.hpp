#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace nfaq {

enum class PricingKind { Regular, Promotional };

const char* to_string(PricingKind k);
PricingKind pricing_kind_from_string(const std::string& s);

// One extracted broadband plan. Fields the page did not show stay absent;
// extraction never invents values.
struct PlanRecord {
  std::string isp_id;
  std::string address;
  std::string cbg_id;
  std::optional<std::string> plan_name;
  std::optional<double> price_usd;
  std::optional<int> down_mbps;
  std::optional<int> up_mbps;
  std::optional<PricingKind> pricing_kind;
  std::int64_t round = 0;
  std::string timestamp;

  friend bool operator==(const PlanRecord&, const PlanRecord&) = default;
};

nlohmann::json plan_record_to_json(const PlanRecord& r);
PlanRecord plan_record_from_json(const nlohmann::json& j);

}  // namespace nfaq
