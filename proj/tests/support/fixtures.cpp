#include "support/fixtures.hpp"

#include "nfaq/compiler.hpp"
#include "nfaq/runtime.hpp"
#include "nfaq/text.hpp"

namespace nfaq::testing {

namespace {

ActionCall click(const std::string& target) {
  ActionCall a;
  a.primitive = Primitive::Click;
  a.target = target;
  return a;
}

ActionCall typewrite(const std::string& target, const std::string& argument) {
  ActionCall a;
  a.primitive = Primitive::Typewrite;
  a.target = target;
  a.argument = argument;
  return a;
}

ActionCall finalize() {
  ActionCall a;
  a.primitive = Primitive::Finalize;
  return a;
}

AbstractState state_with_text(const std::string& id, const std::string& cue) {
  AbstractState s;
  s.id = id;
  s.detectors.push_back({{CuePredicate{CueKind::TextContains, cue}}});
  return s;
}

std::vector<ExtractionDirective> standard_extraction() {
  return {{ExtractField::PlanName, "plan"},
          {ExtractField::PriceUsdPerMonth, "price"},
          {ExtractField::DownMbps, "down"},
          {ExtractField::UpMbps, "up"},
          {ExtractField::PricingKind, "pricing"}};
}

}  // namespace

SimBat three_page_bat() {
  SimBat bat;
  bat.isp_id = "acme";
  bat.entry_page_id = "home";

  Page home;
  home.id = "home";
  home.visible_text = {"enter your address", "check availability today"};
  home.elements = {"address_input", "check_availability"};
  home.transitions.push_back(
      {ActionSig{Primitive::Click, "check_availability", std::nullopt},
       AddressClass::ServiceablePlans, "plans"});
  home.transitions.push_back(
      {ActionSig{Primitive::Click, "check_availability", std::nullopt},
       AddressClass::NoService, "noservice"});
  home.transitions.push_back(
      {ActionSig{Primitive::Click, "check_availability", std::nullopt},
       AddressClass::ServiceableNoPlans, "noplans"});

  Page plans;
  plans.id = "plans";
  plans.visible_text = {"here are the offers for your location"};
  plans.terminal_label = OutcomeLabel::PlansPage;
  plans.plan_payloads[AddressClass::ServiceablePlans] = {
      {"fiber 300", 50.0, 300, 300, PricingKind::Regular},
      {"copper 50", 20.0, 50, 10, PricingKind::Regular},
  };

  Page noservice;
  noservice.id = "noservice";
  noservice.visible_text = {"we are unable to serve this location"};
  noservice.terminal_label = OutcomeLabel::NoService;

  Page noplans;
  noplans.id = "noplans";
  noplans.visible_text = {"good news your location is serviceable call us for offers"};
  noplans.terminal_label = OutcomeLabel::ServiceConfirmedNoPlans;

  bat.pages = {home, plans, noservice, noplans};
  return bat;
}

IntentSpec three_page_spec() {
  IntentSpec spec;
  spec.isp_id = "acme";
  spec.version = 1;
  spec.initial_state_id = "ADDRESS_BAR";

  AbstractState entry = state_with_text("ADDRESS_BAR", "enter your address");
  entry.detectors[0].cues.push_back({CueKind::ElementPresent, "address_input"});
  entry.actions = {typewrite("address_input", "{address}"), click("check_availability")};
  entry.expected_successors = {"PLANS_PAGE", "NO_SERVICE", "NO_PLANS"};

  AbstractState plans = state_with_text("PLANS_PAGE", "here are the offers");
  plans.terminal = true;
  plans.outcome_label = OutcomeLabel::PlansPage;
  plans.extraction = standard_extraction();

  AbstractState noservice = state_with_text("NO_SERVICE", "unable to serve");
  noservice.terminal = true;
  noservice.outcome_label = OutcomeLabel::NoService;

  AbstractState noplans = state_with_text("NO_PLANS", "call us for offers");
  noplans.terminal = true;
  noplans.outcome_label = OutcomeLabel::ServiceConfirmedNoPlans;

  spec.states = {entry, plans, noservice, noplans};
  spec.authoring_input_chars = count_chars_utf8(serialize_spec(spec));
  return spec;
}

Catalog three_page_catalog() {
  return {
      {"1 main st", AddressClass::ServiceablePlans, "cbg-a"},
      {"2 main st", AddressClass::ServiceablePlans, "cbg-a"},
      {"3 hill rd", AddressClass::NoService, "cbg-a"},
      {"4 hill rd", AddressClass::NoService, "cbg-b"},
      {"5 lake ave", AddressClass::ServiceableNoPlans, "cbg-b"},
      {"6 lake ave", AddressClass::ServiceableNoPlans, "cbg-b"},
      {"7 pond ln", AddressClass::ServiceablePlans, "cbg-c"},
      {"8 pond ln", AddressClass::NoService, "cbg-c"},
      {"9 dock way", AddressClass::ServiceablePlans, "cbg-c"},
      {"10 dock way", AddressClass::ServiceableNoPlans, "cbg-c"},
  };
}

SimBat cycle_bat() {
  SimBat bat;
  bat.isp_id = "cycle";
  bat.entry_page_id = "start";

  Page start;
  start.id = "start";
  start.visible_text = {"welcome please continue to the offers"};
  start.elements = {"btn_continue"};
  start.transitions.push_back(
      {ActionSig{Primitive::Click, "btn_continue", std::nullopt}, std::nullopt, "consent"});

  Page consent;
  consent.id = "consent";
  consent.visible_text = {"this site uses cookies accept to proceed"};
  consent.elements = {"btn_accept", "btn_reject"};
  consent.transitions.push_back(
      {ActionSig{Primitive::Click, "btn_accept", std::nullopt}, std::nullopt, "plans"});
  consent.transitions.push_back(
      {ActionSig{Primitive::Click, "btn_reject", std::nullopt}, std::nullopt, "start"});

  Page plans;
  plans.id = "plans";
  plans.visible_text = {"here are the offers for your location"};
  plans.terminal_label = OutcomeLabel::PlansPage;
  plans.plan_payloads[AddressClass::ServiceablePlans] = {
      {"fiber 300", 50.0, 300, 300, PricingKind::Regular}};

  bat.pages = {start, consent, plans};
  return bat;
}

IntentSpec cycle_spec_complete() {
  IntentSpec spec;
  spec.isp_id = "cycle";
  spec.initial_state_id = "START";

  AbstractState start = state_with_text("START", "welcome please continue");
  start.actions = {click("btn_continue")};

  AbstractState consent = state_with_text("CONSENT", "site uses cookies");
  consent.actions = {click("btn_accept")};

  AbstractState plans = state_with_text("PLANS", "here are the offers");
  plans.terminal = true;
  plans.outcome_label = OutcomeLabel::PlansPage;
  plans.extraction = standard_extraction();

  spec.states = {start, consent, plans};
  return spec;
}

IntentSpec cycle_spec_reject_only() {
  IntentSpec spec = cycle_spec_complete();
  for (auto& s : spec.states)
    if (s.id == "CONSENT") s.actions = {click("btn_reject")};
  return spec;
}

IntentSpec calibration_spec() {
  // 3 states, 6 cue predicates, 5 action calls.
  IntentSpec spec;
  spec.isp_id = "calibration";
  spec.initial_state_id = "A";

  AbstractState a;
  a.id = "A";
  a.detectors.push_back({{CuePredicate{CueKind::TextContains, "alpha"},
                          CuePredicate{CueKind::ElementPresent, "alpha_box"}}});
  a.actions = {typewrite("alpha_box", "{address}"), click("alpha_go")};

  AbstractState b;
  b.id = "B";
  b.detectors.push_back({{CuePredicate{CueKind::TextContains, "beta"}}});
  b.detectors.push_back({{CuePredicate{CueKind::TextContains, "beta alt"},
                          CuePredicate{CueKind::ElementPresent, "beta_box"}}});
  b.actions = {click("beta_go"), finalize()};

  AbstractState c;
  c.id = "C";
  c.detectors.push_back({{CuePredicate{CueKind::TextContains, "gamma done"}}});
  c.terminal = true;
  c.outcome_label = OutcomeLabel::NoService;
  // One more action call lives on A to reach 5 total.
  a.actions.push_back(click("alpha_retry"));

  spec.states = {a, b, c};
  return spec;
}

IntentSpec random_spec(std::mt19937_64& rng, int index) {
  auto draw = [&](std::uint64_t bound) { return bound == 0 ? 0 : rng() % bound; };
  static const char* kWords[] = {"Enter",    "your",   "ADDRESS", "check!",  "plans,",
                                 "service",  "next",   "Submit",  "Confirm", "speed?",
                                 "offer",    "portal", "review",  "start",   "(zip)"};
  auto word = [&]() { return std::string(kWords[draw(15)]); };
  auto phrase = [&]() {
    std::string p = word();
    const std::uint64_t extra = draw(3);
    for (std::uint64_t i = 0; i < extra; ++i) p += " " + word();
    return p;
  };

  IntentSpec spec;
  spec.isp_id = "rand" + std::to_string(index);
  spec.version = 1 + static_cast<std::int64_t>(draw(5));
  spec.authoring_input_chars = static_cast<std::int64_t>(draw(4000));

  const std::uint64_t n_states = 1 + draw(12);
  for (std::uint64_t si = 0; si < n_states; ++si) {
    AbstractState s;
    s.id = "ST" + std::to_string(si);
    const std::uint64_t n_detectors = 1 + draw(3);
    for (std::uint64_t di = 0; di < n_detectors; ++di) {
      StateDetector d;
      const std::uint64_t n_cues = 1 + draw(3);
      for (std::uint64_t ci = 0; ci < n_cues; ++ci) {
        CuePredicate cue;
        cue.kind = draw(4) == 0 ? CueKind::ElementPresent : CueKind::TextContains;
        cue.value = cue.kind == CueKind::ElementPresent ? "el_" + std::to_string(draw(20))
                                                        : phrase();
        d.cues.push_back(std::move(cue));
      }
      s.detectors.push_back(std::move(d));
    }

    const bool terminal = si + 1 == n_states || draw(5) == 0;
    if (terminal) {
      s.terminal = true;
      static const OutcomeLabel kLabels[] = {
          OutcomeLabel::PlansPage, OutcomeLabel::ServiceConfirmedNoPlans,
          OutcomeLabel::NoService, OutcomeLabel::ActiveService, OutcomeLabel::Unknown};
      s.outcome_label = kLabels[draw(5)];
      if (*s.outcome_label == OutcomeLabel::PlansPage && draw(2) == 0) {
        s.extraction = {{ExtractField::PlanName, "plan"},
                        {ExtractField::PriceUsdPerMonth, "price"}};
        if (draw(2) == 0) s.extraction.push_back({ExtractField::DownMbps, "down"});
      }
    } else {
      const std::uint64_t n_actions = 1 + draw(4);
      for (std::uint64_t ai = 0; ai < n_actions; ++ai) {
        ActionCall a;
        switch (draw(6)) {
          case 0:
            a.primitive = Primitive::Typewrite;
            a.target = "box_" + std::to_string(draw(8));
            a.argument = "{address}";
            break;
          case 1:
            a.primitive = Primitive::Keypress;
            a.argument = "enter";
            break;
          case 2:
            a.primitive = Primitive::Select;
            a.target = "drop_" + std::to_string(draw(8));
            break;
          case 3:
            a.primitive = Primitive::Wait;
            break;
          case 4:
            a.primitive = Primitive::Finalize;
            break;
          default:
            a.primitive = Primitive::Click;
            a.target = "btn_" + std::to_string(draw(8));
            break;
        }
        a.retry_budget = 1 + static_cast<int>(draw(3));
        s.actions.push_back(std::move(a));
      }
      if (draw(3) == 0) s.expected_successors = {"ST" + std::to_string(draw(n_states))};
    }
    spec.states.push_back(std::move(s));
  }
  spec.initial_state_id = spec.states.front().id;
  return spec;
}

IntentSpec apply_fix(const IntentSpec& spec, const std::vector<FixComponent>& components) {
  IntentSpec out = spec;
  for (const auto& component : components) {
    if (component.add_state) out.states.push_back(*component.add_state);
    if (component.edit) {
      for (auto& s : out.states) {
        if (s.id != component.edit->state_id) continue;
        for (auto& a : s.actions)
          if (a == component.edit->from) a = component.edit->to;
      }
    }
  }
  out.version += 1;
  return out;
}

std::vector<ChurnCase> build_churn_cases(const FleetItem& item) {
  std::vector<ChurnCase> cases;
  const std::string isp = item.bat.isp_id;

  auto popup_page = [&](const std::string& id, const std::string& marker) {
    Page page;
    page.id = id;
    page.visible_text = {"we value your privacy " + marker, "review cookie settings"};
    page.elements = {"btn_gate_accept", "btn_gate_reject"};
    return page;
  };
  const ActionSig accept{Primitive::Click, "btn_gate_accept", std::nullopt};
  const ActionSig reject{Primitive::Click, "btn_gate_reject", std::nullopt};

  auto popup_fix = [&](const std::string& id, const std::string& marker) {
    AbstractState s;
    s.id = id;
    s.detectors.push_back(
        {{CuePredicate{CueKind::TextContains, "we value your privacy " + marker}}});
    ActionCall a;
    a.primitive = Primitive::Click;
    a.target = "btn_gate_accept";
    s.actions = {a};
    FixComponent component;
    component.add_state = s;
    return component;
  };

  {
    ChurnCase c;
    c.name = isp + "/insert-entry";
    c.op.kind = MutationKind::InsertStage;
    c.op.insert = {std::nullopt, popup_page("GATE_ENTRY", isp + " e"), accept, reject};
    c.stage_count = 1;
    c.fix = {popup_fix("GATE_ENTRY", isp + " e")};
    cases.push_back(std::move(c));
  }
  {
    ChurnCase c;
    c.name = isp + "/insert-step1";
    c.op.kind = MutationKind::InsertStage;
    c.op.insert = {std::make_pair(std::string("STEP1"), 0),
                   popup_page("GATE_STEP", isp + " s"), accept, reject};
    c.stage_count = 1;
    c.fix = {popup_fix("GATE_STEP", isp + " s")};
    cases.push_back(std::move(c));
  }
  {
    ChurnCase c;
    c.name = isp + "/edit-entry";
    c.op.kind = MutationKind::EditStage;
    c.op.edit = {"ENTRY", ActionSig{Primitive::Click, "btn_check", std::nullopt},
                 ActionSig{Primitive::Click, "btn_check_v2", std::nullopt}};
    c.stage_count = 1;
    FixComponent component;
    ActionCall from;
    from.primitive = Primitive::Click;
    from.target = "btn_check";
    ActionCall to = from;
    to.target = "btn_check_v2";
    component.edit = FixComponent::ActionEdit{"ENTRY", from, to};
    c.fix = {component};
    cases.push_back(std::move(c));
  }
  {
    ChurnCase c;
    c.name = isp + "/insert-and-edit";
    c.op.kind = MutationKind::InsertAndEdit;
    c.op.insert = {std::make_pair(std::string("ENTRY"), 0),
                   popup_page("GATE_BOTH", isp + " b"), accept, reject};
    c.op.edit = {"QUAL", ActionSig{Primitive::Finalize, std::nullopt, std::nullopt},
                 ActionSig{Primitive::Keypress, std::nullopt, std::string("results_v2")}};
    c.stage_count = 2;
    FixComponent edit_component;
    ActionCall from;
    from.primitive = Primitive::Finalize;
    ActionCall to;
    to.primitive = Primitive::Keypress;
    to.argument = "results_v2";
    edit_component.edit = FixComponent::ActionEdit{"QUAL", from, to};
    c.fix = {popup_fix("GATE_BOTH", isp + " b"), edit_component};
    cases.push_back(std::move(c));
  }
  {
    // Case-only relabel of the entry cue phrase: invisible to matching.
    ChurnCase c;
    c.name = isp + "/relabel-cosmetic";
    c.op.kind = MutationKind::RelabelCosmetic;
    const std::string& chunk = item.bat.find_page("ENTRY")->visible_text.front();
    std::string upper = chunk;
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    c.op.relabel = {"ENTRY", chunk, upper};
    c.stage_count = 0;
    cases.push_back(std::move(c));
  }
  return cases;
}

double fixture_hit_rate(const IntentSpec& spec, const SimBat& bat, const Catalog& catalog,
                        int step_budget) {
  const ConcreteNfa nfa = compile(spec);
  int terminal = 0;
  for (const auto& rec : catalog) {
    SimSession session(bat, rec);
    const QueryResult result = execute_query(nfa, rec.address, session, step_budget);
    if (result.status == QueryStatus::Terminal) ++terminal;
  }
  return static_cast<double>(terminal) / static_cast<double>(catalog.size());
}

}  // namespace nfaq::testing
