#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nfaq/intent.hpp"
#include "nfaq/observe.hpp"
#include "nfaq/plan.hpp"

namespace nfaq {

enum class AddressClass {
  ServiceablePlans,
  ServiceableNoPlans,
  NoService,
  Unknown,
  ActiveService,
};

const char* to_string(AddressClass c);
AddressClass address_class_from_string(const std::string& s);

struct PlanBlock {
  std::string name;
  double price_usd = 0.0;
  int down_mbps = 0;
  int up_mbps = 0;
  PricingKind pricing_kind = PricingKind::Regular;

  friend bool operator==(const PlanBlock&, const PlanBlock&) = default;
};

// Action signature on a transition. A null target/argument matches any
// value on the incoming call (typing arbitrary text into a box can still
// advance the page).
struct ActionSig {
  Primitive primitive = Primitive::Click;
  std::optional<std::string> target;
  std::optional<std::string> argument;

  bool accepts(const ActionCall& call) const;

  friend bool operator==(const ActionSig&, const ActionSig&) = default;
};

struct Transition {
  ActionSig action;
  std::optional<AddressClass> guard;  // nullopt = ALL
  std::string dest;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Page {
  std::string id;
  std::vector<std::string> visible_text;
  std::vector<std::string> elements;
  std::vector<Transition> transitions;
  std::optional<OutcomeLabel> terminal_label;
  std::map<AddressClass, std::vector<PlanBlock>> plan_payloads;

  bool terminal() const { return terminal_label.has_value(); }

  friend bool operator==(const Page&, const Page&) = default;
};

struct AddressRecord {
  std::string address;
  AddressClass cls = AddressClass::Unknown;
  std::string cbg_id;  // optional joining key for analytics

  friend bool operator==(const AddressRecord&, const AddressRecord&) = default;
};

using Catalog = std::vector<AddressRecord>;

struct SimBat {
  std::string isp_id;
  std::vector<Page> pages;
  std::string entry_page_id;
  std::int64_t revision = 1;

  const Page* find_page(const std::string& id) const;
  int page_index(const std::string& id) const;  // -1 when absent

  friend bool operator==(const SimBat&, const SimBat&) = default;
};

// Checks page-id uniqueness, transition destinations, terminal pages
// having no outgoing transitions, payload placement, and per-class
// terminal reachability from the entry page.
std::vector<std::string> check_bat(const SimBat& bat);

nlohmann::json bat_to_json(const SimBat& bat);
SimBat bat_from_json(const nlohmann::json& doc);
SimBat parse_bat(const std::string& document);
std::string serialize_bat(const SimBat& bat);

nlohmann::json catalog_to_json(const Catalog& catalog);
Catalog catalog_from_json(const nlohmann::json& doc);
Catalog parse_catalog(const std::string& document);
std::string serialize_catalog(const Catalog& catalog);

// Deterministic rendering of one page for one address class: folded page
// chunks and elements plus, on plan pages, marker/value chunk pairs for
// each plan block ("plan 1", <name>, "price 1", <price>, ...). Both lists
// deduplicated, first occurrence wins. No page identity leaks.
Observation render(const SimBat& bat, const Page& page, AddressClass cls);

enum class MutationKind { InsertStage, EditStage, InsertAndEdit, RelabelCosmetic };

const char* to_string(MutationKind k);

struct MutationOp {
  MutationKind kind = MutationKind::InsertStage;

  struct Insert {
    // Splice target: an outgoing edge (src page, transition index), or
    // nullopt to splice in front of the entry page.
    std::optional<std::pair<std::string, int>> edge;
    Page page;          // new stage content (transitions are ignored; wired here)
    ActionSig accept;   // advances to the original destination
    ActionSig reject;   // returns to the underlying page (cycle)
  };
  std::optional<Insert> insert;

  struct Edit {
    std::string page_id;
    ActionSig match;        // every transition with this signature is rewritten
    ActionSig replacement;
  };
  std::optional<Edit> edit;

  struct Relabel {
    std::string page_id;
    std::string from;
    std::string to;
  };
  std::optional<Relabel> relabel;
};

nlohmann::json mutation_op_to_json(const MutationOp& op);
MutationOp mutation_op_from_json(const nlohmann::json& doc);

// Returns a new SimBat with revision + 1; the input is never aliased.
// Throws UnknownPage / InvalidInsertionPoint on bad parameters.
SimBat mutate(const SimBat& bat, const MutationOp& op);

// One query session: current page plus the session address. Implements the
// runtime's Environment; affordances() additionally exposes the visible
// interactive surface for the inference module (never for the executor).
class SimSession : public Environment {
 public:
  SimSession(const SimBat& bat, const AddressRecord& address);

  Observation observe() override;
  void apply(const ActionCall& action) override;

  // Deduplicated signatures of the current page's transitions, guard-free.
  std::vector<ActionSig> affordances() const;

  const std::string& address() const { return address_.address; }
  AddressClass cls() const { return address_.cls; }

 private:
  const SimBat& bat_;
  AddressRecord address_;
  int current_ = 0;
};

struct FleetItem {
  SimBat bat;
  IntentSpec spec;  // complete hand-authored analog: hit rate 1.0 on the catalog
  Catalog catalog;
};

// Deterministic fixture generator. Each BAT draws ceil(share_ratio * k) of
// its k cue tokens from shared_vocab and mints the rest fresh; page counts
// stay in [3, 28]; every catalog has 10 addresses covering at least three
// outcome classes.
std::vector<FleetItem> generate_fleet(std::uint64_t seed, int n,
                                      const std::vector<std::string>& shared_vocab,
                                      double share_ratio);

// The 50-word default pool used by the CLI when no pool file is given.
const std::vector<std::string>& builtin_vocab();

}  // namespace nfaq
