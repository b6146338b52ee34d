#include <doctest.h>

#include <algorithm>
#include <set>

#include "nfaq/compiler.hpp"
#include "nfaq/error.hpp"
#include "nfaq/metrics.hpp"
#include "nfaq/runtime.hpp"
#include "nfaq/simbat.hpp"
#include "nfaq/text.hpp"
#include "support/fixtures.hpp"

using namespace nfaq;
using namespace nfaq::testing;

namespace {

bool contains_chunk(const std::vector<std::string>& chunks, const std::string& needle) {
  for (const auto& c : chunks)
    if (c.find(needle) != std::string::npos) return true;
  return false;
}

std::set<std::string> folded_token_set(const SimBat& bat) {
  std::set<std::string> tokens;
  for (const auto& p : bat.pages)
    for (const auto& chunk : p.visible_text)
      for (const auto& t : tokenize(chunk)) tokens.insert(t);
  return tokens;
}

}  // namespace

TEST_CASE("render exposes page text, elements, and plan payload values") {
  const SimBat bat = three_page_bat();

  const Observation home = render(bat, *bat.find_page("home"), AddressClass::NoService);
  CHECK(contains_chunk(home.visible_text, "enter your address"));
  CHECK(std::find(home.elements.begin(), home.elements.end(), "address_input") !=
        home.elements.end());

  const Observation plans =
      render(bat, *bat.find_page("plans"), AddressClass::ServiceablePlans);
  CHECK(contains_chunk(plans.visible_text, "$50.00"));
  CHECK(contains_chunk(plans.visible_text, "300 mbps"));
  CHECK(contains_chunk(plans.visible_text, "fiber 300"));

  // Payloads only render for the class that carries them.
  const Observation plans_other =
      render(bat, *bat.find_page("plans"), AddressClass::NoService);
  CHECK_FALSE(contains_chunk(plans_other.visible_text, "$50.00"));
}

TEST_CASE("render is deterministic and deduplicates") {
  const SimBat bat = three_page_bat();
  const Observation a = render(bat, *bat.find_page("plans"), AddressClass::ServiceablePlans);
  const Observation b = render(bat, *bat.find_page("plans"), AddressClass::ServiceablePlans);
  CHECK(a == b);
  std::set<std::string> unique(a.visible_text.begin(), a.visible_text.end());
  CHECK(unique.size() == a.visible_text.size());
}

TEST_CASE("apply_action follows class guards") {
  const SimBat bat = three_page_bat();
  ActionCall click;
  click.primitive = Primitive::Click;
  click.target = "check_availability";

  SimSession plans_session(bat, {"1 main st", AddressClass::ServiceablePlans, ""});
  plans_session.apply(click);
  CHECK(contains_chunk(plans_session.observe().visible_text, "offers"));

  SimSession ns_session(bat, {"3 hill rd", AddressClass::NoService, ""});
  ns_session.apply(click);
  CHECK(contains_chunk(ns_session.observe().visible_text, "unable to serve"));
}

TEST_CASE("actions without a matching transition are inert") {
  const SimBat bat = three_page_bat();
  SimSession session(bat, {"1 main st", AddressClass::ServiceablePlans, ""});
  const Observation before = session.observe();
  ActionCall wrong;
  wrong.primitive = Primitive::Click;
  wrong.target = "no_such_button";
  session.apply(wrong);
  CHECK(session.observe() == before);
}

TEST_CASE("check_bat accepts the fixtures and flags broken graphs") {
  CHECK(check_bat(three_page_bat()).empty());
  CHECK(check_bat(cycle_bat()).empty());

  SimBat broken = three_page_bat();
  broken.pages[0].transitions[0].dest = "nowhere";
  CHECK_FALSE(check_bat(broken).empty());

  SimBat dup = three_page_bat();
  dup.pages[1].id = "home";
  CHECK_FALSE(check_bat(dup).empty());
}

TEST_CASE("bat and catalog documents round-trip") {
  const SimBat bat = three_page_bat();
  CHECK(parse_bat(serialize_bat(bat)) == bat);
  const Catalog catalog = three_page_catalog();
  CHECK(parse_catalog(serialize_catalog(catalog)) == catalog);
}

TEST_CASE("INSERT_STAGE splices a cookie popup and drops the old spec's hit rate") {
  const SimBat bat = three_page_bat();
  const IntentSpec spec = three_page_spec();
  const Catalog catalog = three_page_catalog();
  CHECK(fixture_hit_rate(spec, bat, catalog) == 1.0);

  MutationOp op;
  op.kind = MutationKind::InsertStage;
  Page popup;
  popup.id = "cookie_gate";
  popup.visible_text = {"we value your privacy"};
  popup.elements = {"btn_gate_accept", "btn_gate_reject"};
  op.insert = {std::nullopt, popup, ActionSig{Primitive::Click, "btn_gate_accept", {}},
               ActionSig{Primitive::Click, "btn_gate_reject", {}}};

  const SimBat mutated = mutate(bat, op);
  CHECK(mutated.pages.size() == bat.pages.size() + 1);
  CHECK(mutated.revision == bat.revision + 1);
  CHECK(mutated.entry_page_id == "cookie_gate");
  CHECK(check_bat(mutated).empty());
  CHECK(bat == three_page_bat());  // input never aliased

  CHECK(fixture_hit_rate(spec, mutated, catalog) < 1.0);

  // The one-state fix restores full hit rate.
  IntentSpec fixed = spec;
  AbstractState gate;
  gate.id = "COOKIE_GATE";
  gate.detectors.push_back({{CuePredicate{CueKind::TextContains, "we value your privacy"}}});
  ActionCall accept;
  accept.primitive = Primitive::Click;
  accept.target = "btn_gate_accept";
  gate.actions = {accept};
  fixed.states.push_back(gate);
  CHECK(fixture_hit_rate(fixed, mutated, catalog) == 1.0);
  CHECK(spec_diff(spec, fixed).states_added == 1);
}

TEST_CASE("INSERT_STAGE on an edge wires accept forward and reject back") {
  const SimBat bat = cycle_bat();
  MutationOp op;
  op.kind = MutationKind::InsertStage;
  Page gate;
  gate.id = "gate";
  gate.visible_text = {"extra gate"};
  op.insert = {std::make_pair(std::string("start"), 0), gate,
               ActionSig{Primitive::Click, "go_on", {}},
               ActionSig{Primitive::Click, "go_back", {}}};
  const SimBat mutated = mutate(bat, op);

  const Page* inserted = mutated.find_page("gate");
  REQUIRE(inserted != nullptr);
  REQUIRE(inserted->transitions.size() == 2);
  CHECK(inserted->transitions[0].dest == "consent");  // original destination
  CHECK(inserted->transitions[1].dest == "start");    // underlying page
  CHECK(mutated.find_page("start")->transitions[0].dest == "gate");
}

TEST_CASE("EDIT_STAGE rewrites the required action signature") {
  const SimBat bat = three_page_bat();
  const IntentSpec spec = three_page_spec();
  const Catalog catalog = three_page_catalog();

  MutationOp op;
  op.kind = MutationKind::EditStage;
  op.edit = {"home", ActionSig{Primitive::Click, "check_availability", {}},
             ActionSig{Primitive::Click, "view_plans", {}}};
  const SimBat mutated = mutate(bat, op);
  CHECK(mutated.pages.size() == bat.pages.size());
  CHECK(fixture_hit_rate(spec, mutated, catalog) < 1.0);

  IntentSpec fixed = spec;
  fixed.states[0].actions[1].target = "view_plans";
  CHECK(fixture_hit_rate(fixed, mutated, catalog) == 1.0);
  const SpecDelta delta = spec_diff(spec, fixed);
  CHECK(delta.states_added == 0);
  CHECK(delta.states_edited == 1);
  CHECK(delta.llos_delta == 0);
}

TEST_CASE("RELABEL_COSMETIC leaves matching behavior untouched") {
  const SimBat bat = three_page_bat();
  const IntentSpec spec = three_page_spec();
  const Catalog catalog = three_page_catalog();

  MutationOp op;
  op.kind = MutationKind::RelabelCosmetic;
  op.relabel = {"home", "enter your address", "Enter YOUR Address"};
  const SimBat mutated = mutate(bat, op);

  CHECK(mutated.pages.size() == bat.pages.size());
  for (std::size_t i = 0; i < bat.pages.size(); ++i)
    CHECK(mutated.pages[i].transitions == bat.pages[i].transitions);
  CHECK(folded_token_set(mutated) == folded_token_set(bat));
  CHECK(fixture_hit_rate(spec, mutated, catalog) == 1.0);
}

TEST_CASE("mutation parameter errors are reported") {
  const SimBat bat = three_page_bat();

  MutationOp bad_edge;
  bad_edge.kind = MutationKind::InsertStage;
  Page p;
  p.id = "x";
  bad_edge.insert = {std::make_pair(std::string("nowhere"), 0), p,
                     ActionSig{Primitive::Click, "a", {}},
                     ActionSig{Primitive::Click, "b", {}}};
  CHECK_THROWS_AS(mutate(bat, bad_edge), Error);

  MutationOp bad_index = bad_edge;
  bad_index.insert->edge = {std::string("home"), 99};
  CHECK_THROWS_AS(mutate(bat, bad_index), Error);

  MutationOp dup_page = bad_edge;
  dup_page.insert->edge = {std::string("home"), 0};
  dup_page.insert->page.id = "plans";
  CHECK_THROWS_AS(mutate(bat, dup_page), Error);

  MutationOp bad_relabel;
  bad_relabel.kind = MutationKind::RelabelCosmetic;
  bad_relabel.relabel = {"home", "not a chunk", "x"};
  CHECK_THROWS_AS(mutate(bat, bad_relabel), Error);
}

TEST_CASE("mutation ops round-trip through JSON") {
  MutationOp op;
  op.kind = MutationKind::InsertAndEdit;
  Page p;
  p.id = "gate";
  p.visible_text = {"gate text"};
  op.insert = {std::make_pair(std::string("home"), 0), p,
               ActionSig{Primitive::Click, "ok", {}}, ActionSig{Primitive::Click, "no", {}}};
  op.edit = {"home", ActionSig{Primitive::Click, "check_availability", {}},
             ActionSig{Primitive::Keypress, std::nullopt, std::string("enter")}};
  const MutationOp reparsed = mutation_op_from_json(mutation_op_to_json(op));
  CHECK(reparsed.kind == op.kind);
  CHECK(reparsed.insert->page.id == "gate");
  CHECK(reparsed.edit->replacement.primitive == Primitive::Keypress);
  CHECK(mutation_op_to_json(reparsed) == mutation_op_to_json(op));
}

TEST_CASE("generated fleets execute to full hit rate under their emitted specs") {
  const auto fleet = generate_fleet(1, 3, builtin_vocab(), 0.8);
  REQUIRE(fleet.size() == 3);
  for (const auto& item : fleet) {
    CHECK(check_bat(item.bat).empty());
    CHECK(validate_spec(item.spec).empty());
    CHECK(item.catalog.size() == 10);
    CHECK(fixture_hit_rate(item.spec, item.bat, item.catalog) == 1.0);

    std::set<AddressClass> classes;
    for (const auto& rec : item.catalog) classes.insert(rec.cls);
    CHECK(classes.size() >= 3);
    CHECK(item.bat.pages.size() >= 3);
    CHECK(item.bat.pages.size() <= 28);
  }
}

TEST_CASE("fleet generation is deterministic in the seed") {
  const auto a = generate_fleet(9, 2, builtin_vocab(), 0.5);
  const auto b = generate_fleet(9, 2, builtin_vocab(), 0.5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(serialize_bat(a[i].bat) == serialize_bat(b[i].bat));
    CHECK(serialize_spec(a[i].spec) == serialize_spec(b[i].spec));
    CHECK(serialize_catalog(a[i].catalog) == serialize_catalog(b[i].catalog));
  }
  const auto c = generate_fleet(10, 2, builtin_vocab(), 0.5);
  CHECK(serialize_bat(a[0].bat) != serialize_bat(c[0].bat));
}

TEST_CASE("share_ratio 1.0 keeps every cue token inside the pool") {
  const auto& pool = builtin_vocab();
  const std::set<std::string> pool_set(pool.begin(), pool.end());
  const auto fleet = generate_fleet(4, 6, pool, 1.0);

  std::vector<IntentSpec> specs;
  for (const auto& item : fleet) specs.push_back(item.spec);
  const auto growth = token_growth(specs);
  CHECK(growth.back() <= static_cast<std::int64_t>(pool.size()));

  for (const auto& item : fleet)
    for (const auto& s : item.spec.states)
      for (const auto& d : s.detectors)
        for (const auto& c : d.cues)
          for (const auto& tok : tokenize(c.value)) CHECK(pool_set.count(tok) == 1);
}
