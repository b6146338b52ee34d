#include "nfaq/simbat.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <random>
#include <set>

#include "nfaq/error.hpp"
#include "nfaq/text.hpp"

namespace nfaq {

using nlohmann::json;

const char* to_string(AddressClass c) {
  switch (c) {
    case AddressClass::ServiceablePlans: return "SERVICEABLE_PLANS";
    case AddressClass::ServiceableNoPlans: return "SERVICEABLE_NO_PLANS";
    case AddressClass::NoService: return "NO_SERVICE";
    case AddressClass::Unknown: return "UNKNOWN";
    case AddressClass::ActiveService: return "ACTIVE_SERVICE";
  }
  return "UNKNOWN";
}

AddressClass address_class_from_string(const std::string& s) {
  if (s == "SERVICEABLE_PLANS") return AddressClass::ServiceablePlans;
  if (s == "SERVICEABLE_NO_PLANS") return AddressClass::ServiceableNoPlans;
  if (s == "NO_SERVICE") return AddressClass::NoService;
  if (s == "UNKNOWN") return AddressClass::Unknown;
  if (s == "ACTIVE_SERVICE") return AddressClass::ActiveService;
  throw Error(ErrorCode::SchemaError, "unknown address class '" + s + "'");
}

const char* to_string(MutationKind k) {
  switch (k) {
    case MutationKind::InsertStage: return "INSERT_STAGE";
    case MutationKind::EditStage: return "EDIT_STAGE";
    case MutationKind::InsertAndEdit: return "INSERT_AND_EDIT";
    case MutationKind::RelabelCosmetic: return "RELABEL_COSMETIC";
  }
  return "INSERT_STAGE";
}

namespace {

bool folded_opt_eq(const std::optional<std::string>& a, const std::optional<std::string>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || fold(*a) == fold(*b);
}

}  // namespace

bool ActionSig::accepts(const ActionCall& call) const {
  if (primitive != call.primitive) return false;
  if (target && !folded_opt_eq(target, call.target)) return false;
  if (argument && !folded_opt_eq(argument, call.argument)) return false;
  return true;
}

const Page* SimBat::find_page(const std::string& id) const {
  for (const auto& p : pages)
    if (p.id == id) return &p;
  return nullptr;
}

int SimBat::page_index(const std::string& id) const {
  for (std::size_t i = 0; i < pages.size(); ++i)
    if (pages[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> check_bat(const SimBat& bat) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& p : bat.pages)
    if (!ids.insert(p.id).second) problems.push_back("duplicate page id: " + p.id);
  if (!bat.find_page(bat.entry_page_id))
    problems.push_back("entry page missing: " + bat.entry_page_id);

  std::set<AddressClass> guard_classes;
  for (const auto& p : bat.pages) {
    for (const auto& t : p.transitions) {
      if (!ids.count(t.dest)) problems.push_back("transition to unknown page: " + t.dest);
      if (t.guard) guard_classes.insert(*t.guard);
    }
    if (p.terminal() && !p.transitions.empty())
      problems.push_back("terminal page has outgoing transitions: " + p.id);
    if (!p.plan_payloads.empty() &&
        (!p.terminal_label || *p.terminal_label != OutcomeLabel::PlansPage))
      problems.push_back("plan payloads on a page not labeled PLANS_PAGE: " + p.id);
  }
  if (!problems.empty()) return problems;

  if (guard_classes.empty()) guard_classes.insert(AddressClass::Unknown);
  for (AddressClass cls : guard_classes) {
    std::set<std::string> visited{bat.entry_page_id};
    std::deque<std::string> queue{bat.entry_page_id};
    bool reached_terminal = false;
    while (!queue.empty() && !reached_terminal) {
      const Page* page = bat.find_page(queue.front());
      queue.pop_front();
      if (page->terminal()) {
        reached_terminal = true;
        break;
      }
      for (const auto& t : page->transitions) {
        if (t.guard && *t.guard != cls) continue;
        const Page* dest = bat.find_page(t.dest);
        if (dest->terminal()) reached_terminal = true;
        if (visited.insert(t.dest).second) queue.push_back(t.dest);
      }
    }
    if (!reached_terminal)
      problems.push_back(std::string("no terminal reachable for class ") + to_string(cls));
  }
  return problems;
}

// --- JSON -------------------------------------------------------------

namespace {

json sig_to_json(const ActionSig& sig) {
  json out;
  if (sig.argument) out["argument"] = *sig.argument;
  out["primitive"] = to_string(sig.primitive);
  if (sig.target) out["target"] = *sig.target;
  return out;
}

ActionSig sig_from_json(const json& j) {
  ActionSig sig;
  const std::string primitive = j.at("primitive").get<std::string>();
  bool known = false;
  for (Primitive p : {Primitive::Click, Primitive::Typewrite, Primitive::Keypress,
                      Primitive::Select, Primitive::Wait, Primitive::Finalize}) {
    if (primitive == to_string(p)) {
      sig.primitive = p;
      known = true;
      break;
    }
  }
  if (!known) throw Error(ErrorCode::UnknownPrimitive, "'" + primitive + "'");
  if (j.contains("target")) sig.target = j["target"].get<std::string>();
  if (j.contains("argument")) sig.argument = j["argument"].get<std::string>();
  return sig;
}

json page_to_json(const Page& p) {
  json out;
  out["elements"] = p.elements;
  out["id"] = p.id;
  if (!p.plan_payloads.empty()) {
    json payloads = json::object();
    for (const auto& [cls, blocks] : p.plan_payloads) {
      json arr = json::array();
      for (const auto& b : blocks) {
        arr.push_back({{"down_mbps", b.down_mbps},
                       {"name", b.name},
                       {"price_usd", b.price_usd},
                       {"pricing_kind", to_string(b.pricing_kind)},
                       {"up_mbps", b.up_mbps}});
      }
      payloads[to_string(cls)] = std::move(arr);
    }
    out["plan_payloads"] = std::move(payloads);
  }
  if (p.terminal_label) out["terminal_label"] = to_string(*p.terminal_label);
  json transitions = json::array();
  for (const auto& t : p.transitions) {
    json tj;
    tj["action"] = sig_to_json(t.action);
    tj["dest"] = t.dest;
    if (t.guard) tj["guard"] = to_string(*t.guard);
    transitions.push_back(std::move(tj));
  }
  out["transitions"] = std::move(transitions);
  out["visible_text"] = p.visible_text;
  return out;
}

OutcomeLabel outcome_from_string(const std::string& s) {
  for (OutcomeLabel l : {OutcomeLabel::PlansPage, OutcomeLabel::ServiceConfirmedNoPlans,
                         OutcomeLabel::NoService, OutcomeLabel::ActiveService,
                         OutcomeLabel::Unknown}) {
    if (s == to_string(l)) return l;
  }
  throw Error(ErrorCode::SchemaError, "unknown outcome label '" + s + "'");
}

Page page_from_json(const json& j) {
  Page p;
  p.id = j.at("id").get<std::string>();
  for (const auto& t : j.value("visible_text", json::array()))
    p.visible_text.push_back(t.get<std::string>());
  for (const auto& e : j.value("elements", json::array()))
    p.elements.push_back(e.get<std::string>());
  if (j.contains("terminal_label"))
    p.terminal_label = outcome_from_string(j["terminal_label"].get<std::string>());
  for (const auto& tj : j.value("transitions", json::array())) {
    Transition t;
    t.action = sig_from_json(tj.at("action"));
    t.dest = tj.at("dest").get<std::string>();
    if (tj.contains("guard"))
      t.guard = address_class_from_string(tj["guard"].get<std::string>());
    p.transitions.push_back(std::move(t));
  }
  if (j.contains("plan_payloads")) {
    for (const auto& [cls_name, arr] : j["plan_payloads"].items()) {
      std::vector<PlanBlock> blocks;
      for (const auto& bj : arr) {
        PlanBlock b;
        b.name = bj.at("name").get<std::string>();
        b.price_usd = bj.at("price_usd").get<double>();
        b.down_mbps = bj.at("down_mbps").get<int>();
        b.up_mbps = bj.at("up_mbps").get<int>();
        b.pricing_kind = pricing_kind_from_string(bj.at("pricing_kind").get<std::string>());
        blocks.push_back(std::move(b));
      }
      p.plan_payloads[address_class_from_string(cls_name)] = std::move(blocks);
    }
  }
  return p;
}

}  // namespace

json bat_to_json(const SimBat& bat) {
  json out;
  out["entry_page"] = bat.entry_page_id;
  out["isp_id"] = bat.isp_id;
  json pages = json::array();
  for (const auto& p : bat.pages) pages.push_back(page_to_json(p));
  out["pages"] = std::move(pages);
  out["revision"] = bat.revision;
  return out;
}

SimBat bat_from_json(const json& doc) {
  SimBat bat;
  try {
    bat.isp_id = doc.at("isp_id").get<std::string>();
    bat.entry_page_id = doc.at("entry_page").get<std::string>();
    bat.revision = doc.value("revision", static_cast<std::int64_t>(1));
    for (const auto& pj : doc.at("pages")) bat.pages.push_back(page_from_json(pj));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bat document: ") + e.what());
  }
  return bat;
}

SimBat parse_bat(const std::string& document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::SchemaError, "bat document is not valid JSON");
  return bat_from_json(doc);
}

std::string serialize_bat(const SimBat& bat) { return bat_to_json(bat).dump(2) + "\n"; }

json catalog_to_json(const Catalog& catalog) {
  json out = json::array();
  for (const auto& a : catalog) {
    json aj;
    aj["address"] = a.address;
    if (!a.cbg_id.empty()) aj["cbg_id"] = a.cbg_id;
    aj["class"] = to_string(a.cls);
    out.push_back(std::move(aj));
  }
  return out;
}

Catalog catalog_from_json(const json& doc) {
  Catalog catalog;
  std::set<std::string> seen;
  try {
    for (const auto& aj : doc) {
      AddressRecord rec;
      rec.address = aj.at("address").get<std::string>();
      rec.cls = address_class_from_string(aj.at("class").get<std::string>());
      rec.cbg_id = aj.value("cbg_id", "");
      if (rec.address.empty())
        throw Error(ErrorCode::SchemaError, "catalog address is empty");
      if (!seen.insert(rec.address).second)
        throw Error(ErrorCode::SchemaError, "catalog address repeated: " + rec.address);
      catalog.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("catalog document: ") + e.what());
  }
  return catalog;
}

Catalog parse_catalog(const std::string& document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded())
    throw Error(ErrorCode::SchemaError, "catalog document is not valid JSON");
  return catalog_from_json(doc);
}

std::string serialize_catalog(const Catalog& catalog) {
  return catalog_to_json(catalog).dump(2) + "\n";
}

// --- Rendering --------------------------------------------------------

namespace {

void push_unique(std::vector<std::string>& list, const std::string& value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
}

std::string format_price(double price) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "$%.2f", price);
  return buf;
}

}  // namespace

Observation render(const SimBat& bat, const Page& page, AddressClass cls) {
  (void)bat;
  Observation obs;
  for (const auto& chunk : page.visible_text) push_unique(obs.visible_text, fold(chunk));
  auto payload = page.plan_payloads.find(cls);
  if (payload != page.plan_payloads.end()) {
    int i = 1;
    for (const auto& block : payload->second) {
      const std::string n = std::to_string(i);
      // Marker chunk, then value chunk. Value chunks carry enough context
      // to stay unique under observation dedup; numeric readers take the
      // first numeric token.
      push_unique(obs.visible_text, "plan " + n);
      push_unique(obs.visible_text, fold(block.name));
      push_unique(obs.visible_text, "price " + n);
      push_unique(obs.visible_text, format_price(block.price_usd) + " offer " + n);
      push_unique(obs.visible_text, "down " + n);
      push_unique(obs.visible_text, std::to_string(block.down_mbps) + " mbps down " + n);
      push_unique(obs.visible_text, "up " + n);
      push_unique(obs.visible_text, std::to_string(block.up_mbps) + " mbps up " + n);
      push_unique(obs.visible_text, "pricing " + n);
      push_unique(obs.visible_text,
                  std::string(block.pricing_kind == PricingKind::Regular ? "regular"
                                                                         : "promotional") +
                      " terms " + n);
      ++i;
    }
  }
  for (const auto& e : page.elements) push_unique(obs.elements, fold(e));
  return obs;
}

// --- Mutation ---------------------------------------------------------

json mutation_op_to_json(const MutationOp& op) {
  json out;
  out["kind"] = to_string(op.kind);
  if (op.insert) {
    json ins;
    ins["accept"] = sig_to_json(op.insert->accept);
    if (op.insert->edge)
      ins["edge"] = {{"src", op.insert->edge->first},
                     {"transition_index", op.insert->edge->second}};
    ins["page"] = page_to_json(op.insert->page);
    ins["reject"] = sig_to_json(op.insert->reject);
    out["insert"] = std::move(ins);
  }
  if (op.edit) {
    out["edit"] = {{"match", sig_to_json(op.edit->match)},
                   {"page_id", op.edit->page_id},
                   {"replacement", sig_to_json(op.edit->replacement)}};
  }
  if (op.relabel) {
    out["relabel"] = {{"from", op.relabel->from},
                      {"page_id", op.relabel->page_id},
                      {"to", op.relabel->to}};
  }
  return out;
}

MutationOp mutation_op_from_json(const json& doc) {
  MutationOp op;
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "INSERT_STAGE") op.kind = MutationKind::InsertStage;
  else if (kind == "EDIT_STAGE") op.kind = MutationKind::EditStage;
  else if (kind == "INSERT_AND_EDIT") op.kind = MutationKind::InsertAndEdit;
  else if (kind == "RELABEL_COSMETIC") op.kind = MutationKind::RelabelCosmetic;
  else throw Error(ErrorCode::SchemaError, "unknown mutation kind '" + kind + "'");

  if (doc.contains("insert")) {
    const json& ins = doc["insert"];
    MutationOp::Insert insert;
    if (ins.contains("edge"))
      insert.edge = {ins["edge"].at("src").get<std::string>(),
                     ins["edge"].at("transition_index").get<int>()};
    insert.page = page_from_json(ins.at("page"));
    insert.accept = sig_from_json(ins.at("accept"));
    insert.reject = sig_from_json(ins.at("reject"));
    op.insert = std::move(insert);
  }
  if (doc.contains("edit")) {
    const json& ed = doc["edit"];
    op.edit = MutationOp::Edit{ed.at("page_id").get<std::string>(),
                               sig_from_json(ed.at("match")),
                               sig_from_json(ed.at("replacement"))};
  }
  if (doc.contains("relabel")) {
    const json& rl = doc["relabel"];
    op.relabel = MutationOp::Relabel{rl.at("page_id").get<std::string>(),
                                     rl.at("from").get<std::string>(),
                                     rl.at("to").get<std::string>()};
  }
  return op;
}

namespace {

void apply_insert(SimBat& bat, const MutationOp::Insert& insert) {
  if (bat.find_page(insert.page.id))
    throw Error(ErrorCode::InvalidInsertionPoint,
                "page id already exists: " + insert.page.id);

  Page page = insert.page;
  page.transitions.clear();
  page.terminal_label.reset();
  page.plan_payloads.clear();

  if (insert.edge) {
    const auto& [src_id, index] = *insert.edge;
    int src = bat.page_index(src_id);
    if (src < 0) throw Error(ErrorCode::UnknownPage, src_id);
    Page& src_page = bat.pages[static_cast<std::size_t>(src)];
    if (index < 0 || static_cast<std::size_t>(index) >= src_page.transitions.size())
      throw Error(ErrorCode::InvalidInsertionPoint,
                  src_id + " has no transition " + std::to_string(index));
    const std::string dst = src_page.transitions[static_cast<std::size_t>(index)].dest;
    src_page.transitions[static_cast<std::size_t>(index)].dest = page.id;
    page.transitions.push_back({insert.accept, std::nullopt, dst});
    // Rejecting returns to the underlying page, forming a cycle.
    page.transitions.push_back({insert.reject, std::nullopt, src_id});
  } else {
    page.transitions.push_back({insert.accept, std::nullopt, bat.entry_page_id});
    page.transitions.push_back({insert.reject, std::nullopt, page.id});
    bat.entry_page_id = page.id;
  }
  bat.pages.push_back(std::move(page));
}

void apply_edit(SimBat& bat, const MutationOp::Edit& edit) {
  int index = bat.page_index(edit.page_id);
  if (index < 0) throw Error(ErrorCode::UnknownPage, edit.page_id);
  Page& page = bat.pages[static_cast<std::size_t>(index)];
  bool rewrote = false;
  for (auto& t : page.transitions) {
    if (t.action == edit.match) {
      t.action = edit.replacement;
      rewrote = true;
    }
  }
  if (!rewrote)
    throw Error(ErrorCode::InvalidInsertionPoint,
                "no transition on " + edit.page_id + " matches the edit signature");
}

void apply_relabel(SimBat& bat, const MutationOp::Relabel& relabel) {
  int index = bat.page_index(relabel.page_id);
  if (index < 0) throw Error(ErrorCode::UnknownPage, relabel.page_id);
  Page& page = bat.pages[static_cast<std::size_t>(index)];
  auto it = std::find(page.visible_text.begin(), page.visible_text.end(), relabel.from);
  if (it == page.visible_text.end())
    throw Error(ErrorCode::InvalidInsertionPoint,
                "page " + relabel.page_id + " has no chunk '" + relabel.from + "'");
  *it = relabel.to;
}

}  // namespace

SimBat mutate(const SimBat& bat, const MutationOp& op) {
  SimBat out = bat;
  switch (op.kind) {
    case MutationKind::InsertStage:
      if (!op.insert) throw Error(ErrorCode::SchemaError, "INSERT_STAGE lacks insert params");
      apply_insert(out, *op.insert);
      break;
    case MutationKind::EditStage:
      if (!op.edit) throw Error(ErrorCode::SchemaError, "EDIT_STAGE lacks edit params");
      apply_edit(out, *op.edit);
      break;
    case MutationKind::InsertAndEdit:
      if (!op.insert || !op.edit)
        throw Error(ErrorCode::SchemaError, "INSERT_AND_EDIT lacks insert or edit params");
      apply_insert(out, *op.insert);
      apply_edit(out, *op.edit);
      break;
    case MutationKind::RelabelCosmetic:
      if (!op.relabel)
        throw Error(ErrorCode::SchemaError, "RELABEL_COSMETIC lacks relabel params");
      apply_relabel(out, *op.relabel);
      break;
  }
  out.revision = bat.revision + 1;
  return out;
}

// --- Session ----------------------------------------------------------

SimSession::SimSession(const SimBat& bat, const AddressRecord& address)
    : bat_(bat), address_(address) {
  current_ = bat.page_index(bat.entry_page_id);
  if (current_ < 0) throw Error(ErrorCode::UnknownPage, bat.entry_page_id);
}

Observation SimSession::observe() {
  return render(bat_, bat_.pages[static_cast<std::size_t>(current_)], address_.cls);
}

void SimSession::apply(const ActionCall& action) {
  const Page& page = bat_.pages[static_cast<std::size_t>(current_)];
  if (page.terminal()) return;
  for (const auto& t : page.transitions) {
    if (t.guard && *t.guard != address_.cls) continue;
    if (!t.action.accepts(action)) continue;
    current_ = bat_.page_index(t.dest);
    return;
  }
  // No matching transition: the actuation silently does nothing.
}

std::vector<ActionSig> SimSession::affordances() const {
  std::vector<ActionSig> sigs;
  const Page& page = bat_.pages[static_cast<std::size_t>(current_)];
  for (const auto& t : page.transitions)
    if (std::find(sigs.begin(), sigs.end(), t.action) == sigs.end())
      sigs.push_back(t.action);
  return sigs;
}

// --- Fleet generation ---------------------------------------------------

const std::vector<std::string>& builtin_vocab() {
  static const std::vector<std::string> vocab = {
      "address",  "availability", "check",   "service",  "plans",   "provider",
      "network",  "speed",        "offer",   "street",   "coverage", "confirm",
      "continue", "account",      "internet", "fiber",   "cable",   "wireless",
      "home",     "bundle",       "next",    "verify",   "location", "zip",
      "unit",     "qualify",      "pricing", "monthly",  "install",  "support",
      "modem",    "router",       "signal",  "region",   "area",     "city",
      "rural",    "urban",        "dropdown", "submit",  "start",    "finish",
      "portal",   "browse",       "detail",  "summary",  "option",   "choice",
      "review",   "welcome",
  };
  return vocab;
}

namespace {

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  return bound == 0 ? 0 : rng() % bound;
}

struct BatVocab {
  std::string nav1, nav2;    // shared phrase for non-terminal pages
  std::string out1, out2;    // shared phrase for terminal pages
  std::vector<std::string> words;  // distinctive words, pairs address pages
};

// Picks the BAT's cue vocabulary: k = 4 role words + 5 distinctive words,
// ceil(share_ratio * k) of them drawn from the pool (role words first, from
// a fixed prefix so the fleet shares them), the rest minted fresh.
BatVocab pick_vocab(std::mt19937_64& rng, int bat_index,
                    const std::vector<std::string>& pool, double share_ratio) {
  const int kDistinctive = 5;
  const int k = 4 + kDistinctive;
  int pool_budget = static_cast<int>(std::ceil(share_ratio * k));
  pool_budget = std::max(0, std::min(pool_budget, k));

  auto fresh = [&](int j) {
    return "zq" + std::to_string(bat_index) + "w" + std::to_string(j);
  };

  BatVocab v;
  int fresh_index = 0;
  std::vector<std::string> role(4);
  for (int i = 0; i < 4; ++i) {
    if (pool_budget > 0 && static_cast<std::size_t>(i) < pool.size()) {
      role[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
      --pool_budget;
    } else {
      role[static_cast<std::size_t>(i)] = fresh(fresh_index++);
    }
  }
  v.nav1 = role[0];
  v.nav2 = role[1];
  v.out1 = role[2];
  v.out2 = role[3];

  // Distinctive words come from a window near the front of the pool tail,
  // so later additions mostly reuse words earlier ones introduced.
  const std::size_t tail_begin = std::min<std::size_t>(4, pool.size());
  const std::size_t tail_size = pool.size() - tail_begin;
  const std::size_t window = std::min<std::size_t>(16, tail_size);
  std::set<std::size_t> used;
  for (int j = 0; j < kDistinctive; ++j) {
    if (pool_budget > 0 && used.size() < window) {
      std::size_t idx;
      do {
        idx = tail_begin + draw(rng, window);
      } while (!used.insert(idx).second);
      v.words.push_back(pool[idx]);
      --pool_budget;
    } else {
      v.words.push_back(fresh(fresh_index++));
    }
  }
  return v;
}

struct PhraseMaker {
  const BatVocab& vocab;
  std::size_t next_pair = 0;

  std::string phrase(bool terminal) {
    // Ordered pairs of distinctive words keep every page's phrase unique.
    const std::size_t m = vocab.words.size();
    const std::size_t a = next_pair / (m - 1);
    std::size_t b = next_pair % (m - 1);
    if (b >= a) ++b;
    ++next_pair;
    const std::string& w1 = terminal ? vocab.out1 : vocab.nav1;
    const std::string& w2 = terminal ? vocab.out2 : vocab.nav2;
    return w1 + " " + w2 + " " + vocab.words[a] + " " + vocab.words[b];
  }
};

AbstractState make_state(const std::string& id, const std::string& cue_phrase) {
  AbstractState s;
  s.id = id;
  s.detectors.push_back({{CuePredicate{CueKind::TextContains, cue_phrase}}});
  return s;
}

const char* outcome_marker(OutcomeLabel label) {
  switch (label) {
    case OutcomeLabel::PlansPage: return "here are the offers for your location";
    case OutcomeLabel::ServiceConfirmedNoPlans:
      return "good news your location is serviceable call us for offers";
    case OutcomeLabel::NoService: return "we are unable to serve this location";
    case OutcomeLabel::ActiveService:
      return "an account is already active at this location";
    case OutcomeLabel::Unknown: return "we could not recognize this location";
  }
  return "";
}

OutcomeLabel label_for_class(AddressClass cls) {
  switch (cls) {
    case AddressClass::ServiceablePlans: return OutcomeLabel::PlansPage;
    case AddressClass::ServiceableNoPlans: return OutcomeLabel::ServiceConfirmedNoPlans;
    case AddressClass::NoService: return OutcomeLabel::NoService;
    case AddressClass::ActiveService: return OutcomeLabel::ActiveService;
    case AddressClass::Unknown: return OutcomeLabel::Unknown;
  }
  return OutcomeLabel::Unknown;
}

}  // namespace

std::vector<FleetItem> generate_fleet(std::uint64_t seed, int n,
                                      const std::vector<std::string>& shared_vocab,
                                      double share_ratio) {
  if (n < 1) throw Error(ErrorCode::SchemaError, "fleet size must be at least 1");
  if (share_ratio < 0.0 || share_ratio > 1.0)
    throw Error(ErrorCode::SchemaError, "share_ratio must lie in [0, 1]");
  if (shared_vocab.empty()) throw Error(ErrorCode::SchemaError, "shared vocabulary is empty");

  static const char* kPlanNames[] = {"aurora", "breeze", "comet", "dune", "ember", "flint"};
  static const char* kStreets[] = {"maple", "cedar", "juniper", "birch", "willow"};
  static const int kSpeeds[] = {50, 100, 200, 300, 500, 1000};

  std::vector<FleetItem> fleet;
  fleet.reserve(static_cast<std::size_t>(n));

  for (int bi = 0; bi < n; ++bi) {
    // Per-BAT stream keeps one BAT's draws independent of fleet size.
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(bi) + 1);
    BatVocab vocab = pick_vocab(rng, bi, shared_vocab, share_ratio);
    PhraseMaker phrases{vocab};

    char isp_buf[16];
    std::snprintf(isp_buf, sizeof(isp_buf), "isp%02d", bi);
    const std::string isp_id = isp_buf;

    // Outcome classes: plans and no-service always, plus 1..3 extras.
    std::vector<AddressClass> classes = {AddressClass::ServiceablePlans,
                                         AddressClass::NoService};
    {
      std::vector<AddressClass> extras = {AddressClass::ServiceableNoPlans,
                                          AddressClass::ActiveService,
                                          AddressClass::Unknown};
      const std::uint64_t extra_count = 1 + draw(rng, 3);
      for (std::uint64_t i = 0; i < extra_count; ++i) {
        const std::uint64_t pick = draw(rng, extras.size());
        classes.push_back(extras[pick]);
        extras.erase(extras.begin() + static_cast<std::ptrdiff_t>(pick));
      }
    }

    const int middles = 1 + static_cast<int>(draw(rng, 6));
    const bool with_popup = draw(rng, 4) == 0;

    SimBat bat;
    bat.isp_id = isp_id;
    IntentSpec spec;
    spec.isp_id = isp_id;

    auto add_pair = [&](Page page, AbstractState state) {
      bat.pages.push_back(std::move(page));
      spec.states.push_back(std::move(state));
    };

    std::vector<std::string> chain;  // non-terminal page ids in order
    chain.push_back("ENTRY");
    if (with_popup) chain.push_back("CONSENT");
    for (int m = 1; m <= middles; ++m) chain.push_back("STEP" + std::to_string(m));
    chain.push_back("QUAL");

    for (std::size_t ci = 0; ci < chain.size(); ++ci) {
      const std::string& id = chain[ci];
      const std::string phrase = phrases.phrase(false);
      Page page;
      page.id = id;
      page.visible_text.push_back(phrase);
      AbstractState state = make_state(id, phrase);
      // A second detector on some states exercises detector disjunction.
      if (ci % 7 == 3) {
        const std::string alias = phrases.phrase(false);
        page.visible_text.push_back(alias);
        state.detectors.push_back({{CuePredicate{CueKind::TextContains, alias}}});
      }

      const bool last = ci + 1 == chain.size();
      const std::string next = last ? "" : chain[ci + 1];
      if (id == "ENTRY") {
        page.visible_text.push_back("type your street address to begin");
        page.elements = {"address_input", "btn_check"};
        ActionCall type;
        type.primitive = Primitive::Typewrite;
        type.target = "address_input";
        type.argument = "{address}";
        ActionCall click;
        click.primitive = Primitive::Click;
        click.target = "btn_check";
        state.actions = {type, click};
        page.transitions.push_back(
            {ActionSig{Primitive::Click, "btn_check", std::nullopt}, std::nullopt, next});
        state.expected_successors = {next};
      } else if (id == "CONSENT") {
        page.visible_text.push_back("this site uses cookies to improve browsing");
        page.elements = {"btn_accept_cookies", "btn_reject_cookies"};
        ActionCall accept;
        accept.primitive = Primitive::Click;
        accept.target = "btn_accept_cookies";
        state.actions = {accept};
        page.transitions.push_back({ActionSig{Primitive::Click, "btn_accept_cookies",
                                              std::nullopt},
                                    std::nullopt, next});
        page.transitions.push_back({ActionSig{Primitive::Click, "btn_reject_cookies",
                                              std::nullopt},
                                    std::nullopt, chain[ci - 1]});
        state.expected_successors = {next};
      } else if (id == "QUAL") {
        page.visible_text.push_back("ready to look up results for your address");
        page.elements = {"btn_results"};
        ActionCall fin;
        fin.primitive = Primitive::Finalize;
        state.actions = {fin};
        for (AddressClass cls : classes) {
          page.transitions.push_back({ActionSig{Primitive::Finalize, std::nullopt,
                                                std::nullopt},
                                      cls, std::string("T_") + to_string(cls)});
          state.expected_successors.push_back(std::string("T_") + to_string(cls));
        }
      } else {
        const std::uint64_t style = draw(rng, 4);
        const std::string suffix = id.substr(4);
        if (style == 0) {
          page.elements = {"panel_" + suffix};
          ActionCall key;
          key.primitive = Primitive::Keypress;
          key.argument = "enter";
          state.actions = {key};
          page.transitions.push_back({ActionSig{Primitive::Keypress, std::nullopt, "enter"},
                                      std::nullopt, next});
        } else if (style == 1) {
          page.elements = {"dropdown_" + suffix};
          ActionCall sel;
          sel.primitive = Primitive::Select;
          sel.target = "dropdown_" + suffix;
          state.actions = {sel};
          page.transitions.push_back({ActionSig{Primitive::Select, "dropdown_" + suffix,
                                                std::nullopt},
                                      std::nullopt, next});
        } else {
          page.elements = {"btn_" + suffix};
          ActionCall click;
          click.primitive = Primitive::Click;
          click.target = "btn_" + suffix;
          state.actions = {click};
          page.transitions.push_back({ActionSig{Primitive::Click, "btn_" + suffix,
                                                std::nullopt},
                                      std::nullopt, next});
        }
        state.expected_successors = {next};
      }
      add_pair(std::move(page), std::move(state));
    }

    // Terminal pages, one per class.
    for (AddressClass cls : classes) {
      const OutcomeLabel label = label_for_class(cls);
      const std::string id = std::string("T_") + to_string(cls);
      const std::string phrase = phrases.phrase(true);
      Page page;
      page.id = id;
      page.visible_text.push_back(phrase);
      page.visible_text.push_back(outcome_marker(label));
      page.terminal_label = label;

      AbstractState state = make_state(id, phrase);
      state.terminal = true;
      state.outcome_label = label;

      if (label == OutcomeLabel::PlansPage) {
        const std::uint64_t blocks = 1 + draw(rng, 3);
        std::vector<PlanBlock> payload;
        for (std::uint64_t b = 0; b < blocks; ++b) {
          PlanBlock block;
          const int down = kSpeeds[draw(rng, 6)];
          block.down_mbps = down;
          block.up_mbps = std::max(10, down / (draw(rng, 2) == 0 ? 1 : 10));
          block.price_usd = 20.0 + 5.0 * static_cast<double>(draw(rng, 21));
          block.pricing_kind =
              draw(rng, 4) == 0 ? PricingKind::Promotional : PricingKind::Regular;
          block.name = std::string(kPlanNames[b]) + " " + std::to_string(down);
          payload.push_back(std::move(block));
        }
        page.plan_payloads[AddressClass::ServiceablePlans] = std::move(payload);
        state.extraction = {
            {ExtractField::PlanName, "plan"},
            {ExtractField::PriceUsdPerMonth, "price"},
            {ExtractField::DownMbps, "down"},
            {ExtractField::UpMbps, "up"},
            {ExtractField::PricingKind, "pricing"},
        };
      }
      add_pair(std::move(page), std::move(state));
    }

    bat.entry_page_id = "ENTRY";
    bat.revision = 1;
    spec.initial_state_id = "ENTRY";
    spec.version = 1;

    // Ten curated addresses cycling through the BAT's outcome classes.
    Catalog catalog;
    for (int a = 0; a < 10; ++a) {
      AddressRecord rec;
      rec.address = std::to_string(101 + 7 * a) + " " + kStreets[draw(rng, 5)] +
                    " st unit " + std::to_string(a + 1);
      rec.cls = classes[static_cast<std::size_t>(a) % classes.size()];
      rec.cbg_id = isp_id + "-cbg" + std::to_string(a % 3);
      catalog.push_back(std::move(rec));
    }

    // Manual authoring input is the serialized specification itself.
    spec.authoring_input_chars = count_chars_utf8(serialize_spec(spec));

    fleet.push_back({std::move(bat), std::move(spec), std::move(catalog)});
  }
  return fleet;
}

}  // namespace nfaq
