#include "doctest.h"

#include <climits>
#include <memory>

#include "fixtures.hpp"
#include "rvm/fhat/memo.hpp"
#include "rvm/nquads.hpp"
#include "rvm/sparql.hpp"

using namespace rvm;
using namespace rvm::fhat;
using fixtures::foaf;
using fixtures::lanl;
using fixtures::World;

namespace {

Instruction inst(OpKind k) {
  Instruction i;
  i.kind = k;
  return i;
}
Instruction push(const Term& v) {
  Instruction i = inst(OpKind::PushValue);
  i.value = v;
  return i;
}
Instruction with_pred(OpKind k, const Term& p) {
  Instruction i = inst(k);
  i.predicate = p;
  return i;
}
Instruction load(const std::string& sym) {
  Instruction i = inst(OpKind::Load);
  i.symbol = sym;
  return i;
}

/// Names the instructions urn:test:i0.. and links them in order.
std::vector<Instruction> linked(std::vector<Instruction> chain, const std::string& tag = "i") {
  for (std::size_t i = 0; i < chain.size(); ++i) chain[i].uri = Term::uri("urn:test:" + tag + std::to_string(i));
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    if (chain[i].kind != OpKind::Branch) chain[i].next = chain[i + 1].uri;
  return chain;
}

ValueSet top(const RvmState& s) {
  REQUIRE_FALSE(s.operand_stack.empty());
  return s.operand_stack.back();
}

std::set<Term> objects(const GraphStore& store, const Term& s, const Term& p) {
  std::set<Term> out;
  for (const Quad& q : store.match({s, p, std::nullopt, std::nullopt})) out.insert(q.o);
  return out;
}

std::vector<std::string> snapshot(const GraphStore& store) {
  return fixtures::canonical(store.read([](const Dataset& d) { return d.quads(); }));
}

void set_cycles(GraphStore& store, const Term& rvm, std::uint64_t cycles) {
  RvmState s = load_state(store, rvm);
  s.cycles_remaining = cycles;
  store_state(store, s);
}

}  // namespace

TEST_CASE("multiply replaces the two top operands with their product") {
  GraphStore store;
  auto s = fixtures::run_chain(store, linked({push(Term::integer(3)), push(Term::integer(2)), inst(OpKind::Multiply)}));
  CHECK(s.operand_stack.size() == 1);
  CHECK(top(s) == ValueSet{Term::integer(6)});
  CHECK(s.terminal());
  CHECK_FALSE(s.fault);
}

TEST_CASE("arithmetic pops the right operand first") {
  GraphStore store;
  auto s = fixtures::run_chain(store, linked({push(Term::integer(7)), push(Term::integer(2)), inst(OpKind::Subtract),
                                              push(Term::integer(2)), inst(OpKind::Divide)}));
  CHECK(top(s) == ValueSet{Term::integer(2)});
  GraphStore store2;
  auto d = fixtures::run_chain(store2, linked({push(Term::integer(1)), push(Term::real(0.5)), inst(OpKind::Add)}));
  CHECK(top(d) == ValueSet{Term::real(1.5)});
}

TEST_CASE("push value leaves the literal on the operand stack") {
  GraphStore store;
  const Term v = Term::literal("2.65", vocab::kXsdDouble);
  auto s = fixtures::run_chain(store, linked({push(v)}));
  CHECK(s.operand_stack == std::vector<ValueSet>{{v}});
}

TEST_CASE("branch follows the boolean on top") {
  for (bool b : {true, false}) {
    GraphStore store;
    Instruction br = inst(OpKind::Branch);
    auto chain = linked({push(Term::boolean(b)), br, push(Term::literal("yes")), push(Term::literal("no"))});
    chain[1].branch_true = chain[2].uri;
    chain[1].branch_false = chain[3].uri;
    chain[2].next.reset();
    auto s = fixtures::run_chain(store, chain);
    CHECK(s.operand_stack == std::vector<ValueSet>{{Term::literal(b ? "yes" : "no")}});
  }
  GraphStore store;
  auto chain = linked({push(Term::integer(1)), inst(OpKind::Branch), inst(OpKind::NoOp)});
  chain[1].branch_true = chain[1].branch_false = chain[2].uri;
  auto s = fixtures::run_chain(store, chain);
  CHECK(s.fault == "TypeFault");
}

TEST_CASE("x = 1 + (2 * 3) binds x to 7") {
  World w("Social.neno");
  w.make(lanl("Socialite"), lanl("soc"));
  auto r = w.call(lanl("soc"), "compute", {});
  REQUIRE(r.outcome == Outcome::Terminal);
  const Binding* x = r.state.frame_stack.back().find("x");
  REQUIRE(x);
  CHECK(x->value == ValueSet{Term::literal("7", vocab::kXsdInt)});
  CHECK(top(r.state) == ValueSet{Term::integer(7)});
}

TEST_CASE("a machine out of cycles suspends and can be resumed") {
  GraphStore store;
  std::vector<Instruction> noops(10, inst(OpKind::NoOp));
  auto chain = linked(noops);
  store.write([&](Dataset& d) {
    for (const auto& i : chain)
      for (const Quad& q : to_quads(i, Term::uri("urn:test:code"))) d.insert(q);
  });
  RvmState s;
  s.uri = Term::uri("urn:test:rvm");
  s.home_graph = Term::uri("urn:test:code");
  s.program_location = chain[0].uri;
  s.frame_stack.push_back({});
  s.return_stack.push_back(Term::uri(vocab::kHalt));
  s.cycles_remaining = 3;
  auto r = run(s, store, Mode::RFhat);
  CHECK(r.outcome == Outcome::Suspended);
  CHECK(r.steps == 3);
  CHECK(r.state.program_location == chain[3].uri);
  CHECK(store.contains({s.uri, Term::uri(vocab::kNeedsProcess), Term::boolean(true), s.home_graph}));
  set_cycles(store, s.uri, 7);
  auto r2 = run(store, s.uri, Mode::Fhat);
  CHECK(r2.outcome == Outcome::Terminal);
  CHECK(r2.steps == 7);
  CHECK(store.contains({s.uri, Term::uri(vocab::kNeedsProcess), Term::boolean(false), s.home_graph}));
}

TEST_CASE("network program returns 8 and edits the graph") {
  World w("Social.neno");
  fixtures::social_world(w);
  auto r = w.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}});
  REQUIRE(r.outcome == Outcome::Terminal);
  CHECK(top(r.state) == ValueSet{Term::integer(8)});
  CHECK(objects(w.store, lanl("soc"), foaf("knows")) == std::set<Term>{lanl("a")});
  CHECK(objects(w.store, lanl("a"), foaf("knows")) == std::set<Term>{lanl("b")});
  CHECK(objects(w.store, lanl("soc"), lanl("score")) == std::set<Term>{Term::integer(20)});
  CHECK(w.store.contains({lanl("a"), foaf("knows"), lanl("b"), lanl("a")}));
  // the nested while-block bindings are gone, the method-level ones stay
  const Frame& f = r.state.frame_stack.back();
  CHECK(f.find("n"));
  CHECK(f.find("again"));
  CHECK_FALSE(f.find("half"));
}

TEST_CASE("fhat and r-fhat reach the same state") {
  World a("Social.neno"), b("Social.neno");
  fixtures::social_world(a);
  fixtures::social_world(b);
  auto ra = a.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}}, 1000000, Mode::Fhat);
  auto rb = b.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}}, 1000000, Mode::RFhat);
  CHECK(ra.outcome == Outcome::Terminal);
  CHECK(ra.steps == rb.steps);
  CHECK(ra.state == rb.state);
  CHECK(snapshot(a.store) == snapshot(b.store));
}

TEST_CASE("suspending at any cycle and resuming gives the uninterrupted result") {
  World ref("Social.neno");
  fixtures::social_world(ref);
  auto full = ref.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}});
  REQUIRE(full.outcome == Outcome::Terminal);
  const std::uint64_t total = full.steps;
  CHECK(total > 50);

  World exact("Social.neno");
  fixtures::social_world(exact);
  auto budgeted = exact.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}}, total);
  REQUIRE(budgeted.outcome == Outcome::Terminal);
  const auto expected = snapshot(exact.store);

  for (std::uint64_t k = 1; k < total; ++k) {
    CAPTURE(k);
    World w("Social.neno");
    fixtures::social_world(w);
    auto first = w.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}}, k);
    REQUIRE(first.outcome == Outcome::Suspended);
    set_cycles(w.store, first.state.uri, total - k);
    auto second = run(w.store, first.state.uri, k % 2 ? Mode::Fhat : Mode::RFhat);
    REQUIRE(second.outcome == Outcome::Terminal);
    CHECK(second.state == budgeted.state);
    CHECK(snapshot(w.store) == expected);
  }
}

TEST_CASE("a returning call leaves the caller's stack as the method's signature says") {
  World w("Social.neno");
  fixtures::social_world(w);
  RvmState s = spawn(w.store, lanl("soc"), "network", {{lanl("a")}, {lanl("b")}}, 1000000, w.minter);
  struct Pending {
    std::size_t frames;
    std::size_t expected_depth;
  };
  std::vector<Pending> pending;
  int checked = 0;
  while (!s.terminal()) {
    RvmState before = s;
    step(s, w.store);
    if (s.frame_stack.size() > before.frame_stack.size()) {
      const Frame& f = s.frame_stack.back();
      std::size_t arity = f.bindings.size() - 1;
      bool broadcast = s.return_stack.back() == *before.program_location;
      pending.push_back({before.frame_stack.size(),
                         broadcast ? SIZE_MAX : before.operand_stack.size() - arity - 1 + (f.returns_value ? 1 : 0)});
    } else if (s.frame_stack.size() < before.frame_stack.size()) {
      REQUIRE_FALSE(pending.empty());
      CHECK(pending.back().frames == s.frame_stack.size());
      if (pending.back().expected_depth != SIZE_MAX) {
        CHECK(s.operand_stack.size() == pending.back().expected_depth);
        ++checked;
      }
      pending.pop_back();
    }
  }
  CHECK(pending.empty());
  CHECK(checked >= 5);
}

namespace {

struct Expr {
  char op = 0;  // 0 for a leaf
  long long leaf = 0;
  std::unique_ptr<Expr> l, r;
};

std::unique_ptr<Expr> random_expr(std::mt19937_64& rng, int depth) {
  auto e = std::make_unique<Expr>();
  if (depth == 0 || rng() % 3 == 0) {
    e->leaf = static_cast<long long>(rng() % 41) - 20;
    return e;
  }
  e->op = "+-*/"[rng() % 4];
  e->l = random_expr(rng, depth - 1);
  e->r = random_expr(rng, depth - 1);
  return e;
}

std::string source(const Expr& e) {
  if (!e.op) return std::to_string(e.leaf);
  return "(" + source(*e.l) + " " + e.op + " " + source(*e.r) + ")";
}

// Truncating integer semantics; nullopt on division by zero.
std::optional<__int128> evaluate(const Expr& e) {
  if (!e.op) return e.leaf;
  auto a = evaluate(*e.l), b = evaluate(*e.r);
  if (!a || !b) return std::nullopt;
  switch (e.op) {
    case '+': return *a + *b;
    case '-': return *a - *b;
    case '*': return *a * *b;
    default:
      if (*b == 0) return std::nullopt;
      return *a / *b;
  }
}

}  // namespace

TEST_CASE("compiled arithmetic agrees with a direct evaluator") {
  std::mt19937_64 rng(2024);
  int faults = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto e = random_expr(rng, 3);
    std::string src = "prefix lanl: <http://www.lanl.gov>;\nrdfs:Resource lanl:Calc { xsd:int f() { return " +
                      source(*e) + "; } }";
    CAPTURE(src);
    GraphStore store;
    UuidMinter m(trial);
    Dataset api = fixtures::compile(src, m);
    auto obj = instantiate(store, api, lanl("Calc"), std::nullopt, m);
    auto s = spawn(store, obj.uri, "f", {}, 10000, m);
    auto r = run(store, s.uri, Mode::RFhat);
    auto want = evaluate(*e);
    if (!want) {
      ++faults;
      CHECK(r.outcome == Outcome::Faulted);
      CHECK(r.state.fault == "TypeFault");
      continue;
    }
    REQUIRE(r.outcome == Outcome::Terminal);
    long long v = static_cast<long long>(*want);
    Term expected = v >= INT_MIN && v <= INT_MAX ? Term::integer(v) : Term::literal(std::to_string(v), vocab::kXsdInteger);
    CHECK(top(r.state) == ValueSet{expected});
  }
  CHECK(faults > 0);
}

TEST_CASE("stored states load back unchanged") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    RvmState s = fixtures::random_state(rng);
    Dataset d;
    d.insert({lanl("marko"), foaf("knows"), lanl("josh"), s.home_graph});
    store_state(d, s);
    CHECK(load_state(d, s.uri) == s);
    // storing again replaces rather than accumulates
    RvmState t = fixtures::random_state(rng);
    t.uri = s.uri;
    t.home_graph = s.home_graph;
    store_state(d, t);
    CHECK(load_state(d, s.uri) == t);
    store_state(d, s);
    CHECK(fixtures::canonical(d.match({std::nullopt, std::nullopt, std::nullopt, s.home_graph})) ==
          fixtures::canonical([&] {
            auto q = state_quads(s);
            q.emplace_back(s.uri, Term::uri(vocab::kType), Term::uri(vocab::kRVM), s.home_graph);
            q.emplace_back(lanl("marko"), foaf("knows"), lanl("josh"), s.home_graph);
            return q;
          }()));
  }
}

TEST_CASE("damaged states are rejected") {
  std::mt19937_64 rng(12);
  RvmState s = fixtures::random_state(rng);
  s.operand_stack = {{Term::integer(1)}, {Term::integer(2)}};
  Dataset d;
  store_state(d, s);
  CHECK_THROWS_AS(load_state(d, Term::uri("urn:nobody")), MalformedState);

  auto broken = [&](auto&& edit) {
    Dataset c = d;
    edit(c);
    CHECK_THROWS_AS(load_state(c, s.uri), MalformedState);
  };
  const Term g = s.home_graph;
  const std::string pre = state_prefix(s.uri);
  broken([&](Dataset& c) { c.erase({s.uri, Term::uri(vocab::kNeedsProcess), Term::boolean(s.needs_process), g}); });
  broken([&](Dataset& c) { c.insert({s.uri, Term::uri(vocab::kNeedsProcess), Term::boolean(!s.needs_process), g}); });
  broken([&](Dataset& c) {
    c.erase({Term::uri(pre + "os/1"), Term::uri(vocab::kRest), Term::uri(vocab::kNil), g});
    c.insert({Term::uri(pre + "os/1"), Term::uri(vocab::kRest), Term::uri(pre + "os/0"), g});
  });
  broken([&](Dataset& c) { c.erase({Term::uri(pre + "os/1"), Term::uri(vocab::kFirst), Term::integer(1), g}); });
  broken([&](Dataset& c) {
    auto rs = c.match({s.uri, Term::uri(vocab::kReturnStack), std::nullopt, g});
    for (const auto& q : rs) c.erase(q);
    c.insert({s.uri, Term::uri(vocab::kReturnStack), Term::uri(pre + "rs/extra"), g});
    c.insert({Term::uri(pre + "rs/extra"), Term::uri(vocab::kFirst), Term::uri(vocab::kHalt), g});
    c.insert({Term::uri(pre + "rs/extra"), Term::uri(vocab::kRest), rs.at(0).o, g});
  });

  GraphStore store;
  store.write([&](Dataset& x) {
    x = d;
    x.erase({s.uri, Term::uri(vocab::kCyclesRemaining),
             Term::literal(std::to_string(s.cycles_remaining), vocab::kXsdInteger), g});
  });
  auto r = run(store, s.uri, Mode::RFhat);
  CHECK(r.outcome == Outcome::Faulted);
  CHECK(store.contains({s.uri, Term::uri(vocab::kFault), Term::literal("MalformedState"), g}));
}

TEST_CASE("push-self then no-op only moves the program location") {
  World w("Person.neno");
  w.make(lanl("Person"), lanl("marko"));
  RvmState s = spawn(w.store, lanl("marko"), "makeAllEnemies", {}, 100, w.minter);
  Instruction self = push_self(s, Term::uri("urn:test:self"));
  Instruction noop = inst(OpKind::NoOp);
  noop.uri = Term::uri("urn:test:noop");
  self.next = noop.uri;
  noop.next = s.program_location;
  w.store.write([&](Dataset& d) {
    for (const auto* i : {&self, &noop})
      for (const Quad& q : to_quads(*i, s.home_graph)) d.insert(q);
  });
  s.program_location = self.uri;
  store_state(w.store, s);

  step(s, w.store);
  store_state(w.store, s);
  auto after_push = snapshot(w.store);
  auto head = w.store.match({s.uri, Term::uri(vocab::kOperandStack), std::nullopt, std::nullopt});
  REQUIRE(head.size() == 1);
  CHECK(objects(w.store, head[0].o, Term::uri(vocab::kFirst)) == std::set<Term>{s.uri});

  step(s, w.store);
  store_state(w.store, s);
  auto after_noop = snapshot(w.store);
  std::vector<std::string> gone, added;
  std::set_difference(after_push.begin(), after_push.end(), after_noop.begin(), after_noop.end(),
                      std::back_inserter(gone));
  std::set_difference(after_noop.begin(), after_noop.end(), after_push.begin(), after_push.end(),
                      std::back_inserter(added));
  REQUIRE(gone.size() == 2);
  REQUIRE(added.size() == 2);
  for (const auto* lines : {&gone, &added})
    for (const auto& l : *lines)
      CHECK((l.find("programLocation") != std::string::npos || l.find("cyclesRemaining") != std::string::npos));

  // pushing twice stacks two copies of the same URI
  GraphStore store;
  auto twice = fixtures::run_chain(store, linked({push(s.uri), push(s.uri)}));
  CHECK(twice.operand_stack == std::vector<ValueSet>{{s.uri}, {s.uri}});
}

TEST_CASE("memo records, looks up and detects conflicts") {
  GraphStore store;
  const Term f = Term::uri("urn:test:f");
  CHECK_FALSE(memo_lookup(store, f, Term::integer(5)));
  memo_record(store, f, Term::integer(5), Term::integer(6));
  CHECK(memo_lookup(store, f, Term::integer(5)) == Term::integer(6));
  std::size_t size = store.size();
  memo_record(store, f, Term::integer(5), Term::integer(6));
  CHECK(store.size() == size);
  CHECK_THROWS_AS(memo_record(store, f, Term::integer(5), Term::integer(7)), MemoConflict);
  CHECK(memo_lookup(store, f, Term::integer(5)) == Term::integer(6));
  CHECK_FALSE(memo_lookup(store, f, Term::integer(4)));
  for (const Quad& q : store.match({std::nullopt, std::nullopt, std::nullopt, std::nullopt}))
    CHECK(q.g == Term::uri(vocab::kMemoGraph));
}

TEST_CASE("field edits outside the declared cardinality fault") {
  World w("Social.neno");
  w.make(lanl("Socialite"), lanl("soc"));
  const Term soc = lanl("soc");
  auto once = fixtures::run_chain(
      w.store, linked({push(Term::integer(1)), load("this"), with_pred(OpKind::SetPlus, lanl("score")),
                       push(Term::integer(2)), load("this"), with_pred(OpKind::SetPlus, lanl("score"))}),
      soc);
  CHECK(once.fault == "CardinalityFault");
  CHECK(objects(w.store, soc, lanl("score")) == std::set<Term>{Term::integer(1)});

  w.store.insert({soc, foaf("name"), Term::literal("soc"), soc});
  auto drop = fixtures::run_chain(
      w.store, linked({push(Term::literal("soc")), load("this"), with_pred(OpKind::SetMinus, foaf("name"))}, "n"), soc);
  CHECK(drop.fault == "CardinalityFault");
  CHECK(objects(w.store, soc, foaf("name")) == std::set<Term>{Term::literal("soc")});
}

TEST_CASE("stack underflow and unknown methods fault") {
  GraphStore store;
  CHECK(fixtures::run_chain(store, linked({push(Term::integer(1)), inst(OpKind::Add)})).fault == "StackUnderflow");

  World w("Person.neno");
  w.make(lanl("Person"), lanl("marko"));
  Instruction call = inst(OpKind::Invoke);
  call.invoke_method = Term::uri(neno::method_uri(lanl("Person").value(), "makeAllEnemies"));
  auto s = fixtures::run_chain(w.store, linked({push(lanl("nobody")), call}, "u"));
  CHECK(s.fault == "TypeFault");
  // an empty receiver set skips the call
  auto e = fixtures::run_chain(w.store, linked({push(Term::literal("x")), load("this"),
                                                with_pred(OpKind::TraverseForward, foaf("knows")), call},
                                               "v"),
                               lanl("marko"));
  CHECK_FALSE(e.fault);
  CHECK(e.operand_stack == std::vector<ValueSet>{{Term::literal("x")}});
}

TEST_CASE("makeEnemy removes exactly the listed triple") {
  World w("Person.neno");
  for (const char* n : {"marko", "dr_wh", "josh"}) w.make(lanl("Person"), lanl(n));
  for (const char* n : {"dr_wh", "josh"}) w.store.insert({lanl("marko"), foaf("knows"), lanl(n), lanl("marko")});
  auto before = w.store.snapshot();
  auto r = w.call(lanl("marko"), "makeEnemy", {{lanl("dr_wh")}});
  REQUIRE(r.outcome == Outcome::Terminal);
  CHECK_FALSE(w.store.contains({lanl("marko"), foaf("knows"), lanl("dr_wh"), lanl("marko")}));

  sparql::Prefixes px{{"lanl", "http://www.lanl.gov"}, {"foaf", "http://xmlns.com/foaf/0.1/"}};
  auto op = sparql::parse_update("DELETE DATA { GRAPH lanl:marko { lanl:marko foaf:knows lanl:dr_wh } }", px);
  sparql::update(before, op);
  auto strip = [&](std::vector<Quad> qs) {
    std::vector<Quad> out;
    for (const Quad& q : qs)
      if (!q.s.value().starts_with(r.state.uri.value()) && !(q.s == r.state.uri)) out.push_back(q);
    return fixtures::canonical(out);
  };
  CHECK(strip(w.store.snapshot().quads()) == strip(before.quads()));
}

TEST_CASE("inverse invocation reaches every object that knows the receiver") {
  World w("Social.neno");
  for (const char* n : {"marko", "dr_wh", "p1", "p2", "p3", "p4"}) w.make(lanl("Person"), lanl(n));
  for (const char* n : {"p1", "p2", "p3"}) {
    w.store.insert({lanl(n), foaf("knows"), lanl("marko"), lanl(n)});
    w.store.insert({lanl(n), foaf("knows"), lanl("dr_wh"), lanl(n)});
  }
  w.store.insert({lanl("p4"), foaf("knows"), lanl("dr_wh"), lanl("p4")});
  w.store.insert({lanl("marko"), foaf("knows"), lanl("dr_wh"), lanl("marko")});

  auto q = sparql::parse_query(
      "SELECT ?x WHERE { ?x foaf:knows lanl:marko . ?x foaf:knows lanl:dr_wh }",
      {{"lanl", "http://www.lanl.gov"}, {"foaf", "http://xmlns.com/foaf/0.1/"}});
  const std::size_t expected = sparql::select(w.store, q).size();
  CHECK(expected == 3);
  const std::size_t knows_before = w.store.match({std::nullopt, foaf("knows"), std::nullopt, std::nullopt}).size();

  Instruction call = inst(OpKind::Invoke);
  call.invoke_method = Term::uri(neno::method_uri(lanl("Person").value(), "makeEnemy"));
  auto s = fixtures::run_chain(
      w.store, linked({push(lanl("dr_wh")), push(lanl("marko")), with_pred(OpKind::TraverseInverse, foaf("knows")), call}),
      lanl("marko"));
  CHECK_FALSE(s.fault);
  CHECK(sparql::select(w.store, q).empty());
  const std::size_t knows_after = w.store.match({std::nullopt, foaf("knows"), std::nullopt, std::nullopt}).size();
  CHECK(knows_before - knows_after == expected);
  CHECK(w.store.contains({lanl("p4"), foaf("knows"), lanl("dr_wh"), lanl("p4")}));
  CHECK(w.store.contains({lanl("marko"), foaf("knows"), lanl("dr_wh"), lanl("marko")}));
}

TEST_CASE("a guard keeps a machine out of foreign graphs") {
  World w("Person.neno");
  w.make(lanl("Person"), lanl("marko"));
  w.make(lanl("Person"), lanl("victim"));
  w.store.insert({lanl("victim"), foaf("name"), Term::literal("v"), lanl("victim")});
  auto victim = [&] { return fixtures::canonical(w.store.match({std::nullopt, std::nullopt, std::nullopt, lanl("victim")})); };
  auto before = victim();
  Guard own = [](const Dataset&, const Term& g, Action a) { return a == Action::Read || g == lanl("marko"); };
  // makeFriend run on the victim object from a machine homed at marko
  RvmState s = spawn(w.store, lanl("victim"), "makeFriend", {{lanl("marko")}}, 100, w.minter);
  auto r = run(w.store, s.uri, Mode::RFhat, [&](const Dataset& d, const Term& g, Action a) {
    return a == Action::Read || (g != lanl("victim") && own(d, g, a));
  });
  CHECK(r.outcome == Outcome::Faulted);
  CHECK(r.state.fault == "PermissionDenied");
  auto after = victim();
  // only the machine's own state changed; the victim's data did not
  auto data_only = [&](const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (const auto& l : lines)
      if (l.find(s.uri.value()) == std::string::npos) out.push_back(l);
    return out;
  };
  CHECK(data_only(after) == data_only(before));

  auto ok = w.call(lanl("marko"), "makeFriend", {{lanl("victim")}}, 100, Mode::RFhat, own);
  CHECK(ok.outcome == Outcome::Terminal);
}

TEST_CASE("a machine that outgrows its graph quota faults") {
  const char* src = R"(
prefix lanl: <http://www.lanl.gov>;
rdfs:Resource lanl:Hog {
  xsd:int lanl:v[0..*];
  grow() { xsd:int i = 0; while (true) { i = i + 1; this.lanl:v =+ i; } }
}
)";
  GraphStore store;
  UuidMinter m(3);
  Dataset api = fixtures::compile(src, m);
  auto hog = instantiate(store, api, lanl("Hog"), std::nullopt, m);
  auto s = spawn(store, hog.uri, "grow", {}, 100000, m);
  store.write([&](Dataset& d) { d.set_quota(hog.graph, d.graph_size(hog.graph) + 20); });
  auto r = run(store, s.uri, Mode::RFhat);
  CHECK(r.outcome == Outcome::Faulted);
  CHECK(r.state.fault == "QuotaExceeded");
  auto values = store.match({hog.uri, lanl("v"), std::nullopt, hog.graph});
  CHECK(values.size() > 5);
  CHECK(values.size() < 40);
}

TEST_CASE("every rvm term written by the system is described in the vocabulary file") {
  Dataset vocabulary;
  nquads::load(vocabulary, nquads::parse(fixtures::read_data("rvm-vocab.nq")));
  const Term label = Term::uri(vocab::rdfs("label"));
  auto described = [&](const Term& t) { return !vocabulary.match({t, label, std::nullopt, std::nullopt}).empty(); };

  World w("Social.neno");
  fixtures::social_world(w);
  w.call(lanl("soc"), "network", {{lanl("a")}, {lanl("b")}}, 5);
  fhat::memo_record(w.store, lanl("f"), Term::integer(5), Term::integer(6));
  std::set<std::string> missing;
  std::size_t seen = 0;
  for (const auto& source : {w.api.quads(), w.store.snapshot().quads()}) {
    for (const Quad& q : source) {
      for (const Term* t : {&q.p, &q.o, &q.g}) {
        if (!t->is_uri() || !t->value().starts_with(vocab::kRvm)) continue;
        ++seen;
        if (!described(*t)) missing.insert(t->value());
      }
    }
  }
  CHECK(seen > 100);
  CHECK(missing.empty());
  for (const auto& m : missing) MESSAGE(m);
}
