#include "nfaq/plan.hpp"

#include "nfaq/error.hpp"

namespace nfaq {

using nlohmann::json;

const char* to_string(PricingKind k) {
  return k == PricingKind::Regular ? "REGULAR" : "PROMOTIONAL";
}

PricingKind pricing_kind_from_string(const std::string& s) {
  if (s == "REGULAR") return PricingKind::Regular;
  if (s == "PROMOTIONAL") return PricingKind::Promotional;
  throw Error(ErrorCode::SchemaError, "unknown pricing kind '" + s + "'");
}

json plan_record_to_json(const PlanRecord& r) {
  json out;
  out["address"] = r.address;
  out["cbg_id"] = r.cbg_id;
  if (r.down_mbps) out["down_mbps"] = *r.down_mbps;
  out["isp"] = r.isp_id;
  if (r.plan_name) out["name"] = *r.plan_name;
  if (r.price_usd) out["price_usd"] = *r.price_usd;
  if (r.pricing_kind) out["pricing_kind"] = to_string(*r.pricing_kind);
  out["round"] = r.round;
  if (!r.timestamp.empty()) out["ts"] = r.timestamp;
  if (r.up_mbps) out["up_mbps"] = *r.up_mbps;
  return out;
}

PlanRecord plan_record_from_json(const json& j) {
  PlanRecord r;
  r.isp_id = j.value("isp", "");
  r.address = j.value("address", "");
  r.cbg_id = j.value("cbg_id", "");
  if (j.contains("name")) r.plan_name = j["name"].get<std::string>();
  if (j.contains("price_usd")) r.price_usd = j["price_usd"].get<double>();
  if (j.contains("down_mbps")) r.down_mbps = j["down_mbps"].get<int>();
  if (j.contains("up_mbps")) r.up_mbps = j["up_mbps"].get<int>();
  if (j.contains("pricing_kind"))
    r.pricing_kind = pricing_kind_from_string(j["pricing_kind"].get<std::string>());
  r.round = j.value("round", static_cast<std::int64_t>(0));
  r.timestamp = j.value("ts", "");
  return r;
}

}  // namespace nfaq
