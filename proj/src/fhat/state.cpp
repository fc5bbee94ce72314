#include "rvm/fhat/state.hpp"

#include <algorithm>
#include <set>

#include "rvm/error.hpp"
#include "rvm/vocab.hpp"

namespace rvm::fhat {

ValueSet make_set(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

const Binding* Frame::find(const std::string& symbol) const {
  for (auto it = bindings.rbegin(); it != bindings.rend(); ++it) {
    if (it->symbol == symbol) return &*it;
  }
  return nullptr;
}

Binding* Frame::find(const std::string& symbol) {
  return const_cast<Binding*>(static_cast<const Frame*>(this)->find(symbol));
}

std::string state_prefix(const Term& rvm) { return rvm.value() + "#state/"; }

namespace {

const std::set<std::string>& state_predicates() {
  static const std::set<std::string> preds = {
      vocab::kProgramLocation, vocab::kOperandStack, vocab::kReturnStack, vocab::kFrameStack,
      vocab::kCyclesRemaining, vocab::kNeedsProcess, vocab::kFault,       vocab::kFaultMessage,
  };
  return preds;
}

class Writer {
 public:
  explicit Writer(const RvmState& s) : s_(s), g_(s.home_graph), prefix_(state_prefix(s.uri)) {}

  std::vector<Quad> run() {
    const Term& r = s_.uri;
    if (s_.program_location) add(r, vocab::kProgramLocation, *s_.program_location);

    std::vector<Term> operands;
    for (std::size_t i = 0; i < s_.operand_stack.size(); ++i) {
      operands.push_back(value(s_.operand_stack[s_.operand_stack.size() - 1 - i], "os/" + std::to_string(i) + "/set"));
    }
    add(r, vocab::kOperandStack, list("os/", operands));

    std::vector<Term> returns(s_.return_stack.rbegin(), s_.return_stack.rend());
    add(r, vocab::kReturnStack, list("rs/", returns));

    std::vector<Term> frames;
    for (std::size_t i = 0; i < s_.frame_stack.size(); ++i) {
      frames.push_back(frame(s_.frame_stack[s_.frame_stack.size() - 1 - i], "frame/" + std::to_string(i)));
    }
    add(r, vocab::kFrameStack, list("fs/", frames));

    add(r, vocab::kCyclesRemaining, Term::literal(std::to_string(s_.cycles_remaining), vocab::kXsdInteger));
    add(r, vocab::kNeedsProcess, Term::boolean(s_.needs_process));
    if (s_.fault) add(r, vocab::kFault, Term::literal(*s_.fault));
    if (s_.fault_message) add(r, vocab::kFaultMessage, Term::literal(*s_.fault_message));
    return std::move(out_);
  }

 private:
  Term node(const std::string& local) const { return Term::uri(prefix_ + local); }
  void add(const Term& s, const std::string& p, const Term& o) { out_.emplace_back(s, Term::uri(p), o, g_); }

  Term value(const ValueSet& v, const std::string& local) {
    if (v.size() == 1) return v.front();
    Term n = node(local);
    add(n, vocab::kType, Term::uri(vocab::kValueSet));
    for (const Term& t : v) add(n, vocab::kMember, t);
    return n;
  }

  Term list(const std::string& local, const std::vector<Term>& items) {
    if (items.empty()) return Term::uri(vocab::kNil);
    for (std::size_t i = 0; i < items.size(); ++i) {
      Term cell = node(local + std::to_string(i));
      add(cell, vocab::kFirst, items[i]);
      add(cell, vocab::kRest, i + 1 < items.size() ? node(local + std::to_string(i + 1)) : Term::uri(vocab::kNil));
    }
    return node(local + "0");
  }

  Term frame(const Frame& f, const std::string& local) {
    Term n = node(local);
    add(n, vocab::kType, Term::uri(vocab::kFrame));
    add(n, vocab::kReturnsValue, Term::boolean(f.returns_value));
    for (std::size_t j = 0; j < f.bindings.size(); ++j) {
      const Binding& b = f.bindings[j];
      std::string bl = local + "/b/" + std::to_string(j);
      Term bn = node(bl);
      add(n, vocab::kHasBinding, bn);
      add(bn, vocab::kType, Term::uri(vocab::kBinding));
      add(bn, vocab::kBindingIndex, Term::integer(static_cast<long long>(j)));
      add(bn, vocab::kHasSymbol, Term::literal(b.symbol));
      add(bn, vocab::kHasValue, value(b.value, bl + "/set"));
      add(bn, vocab::kFromBlock, b.block);
    }
    return n;
  }

  const RvmState& s_;
  Term g_;
  std::string prefix_;
  std::vector<Quad> out_;
};

class Reader {
 public:
  Reader(const Dataset& d, const Term& r, const Term& g) : d_(d), r_(r), g_(g), prefix_(state_prefix(r)) {}

  [[noreturn]] void bad(const std::string& why) const { throw MalformedState(r_.str() + ": " + why); }

  std::vector<Term> all(const Term& s, const std::string& p) const {
    std::vector<Term> out;
    for (const Quad& q : d_.match({s, Term::uri(p), std::nullopt, g_})) out.push_back(q.o);
    return out;
  }

  std::optional<Term> optional(const Term& s, const std::string& p) const {
    auto v = all(s, p);
    if (v.size() > 1) bad("more than one " + p + " on " + s.str());
    if (v.empty()) return std::nullopt;
    return v.front();
  }

  Term required(const Term& s, const std::string& p) const {
    auto v = optional(s, p);
    if (!v) bad("missing " + p + " on " + s.str());
    return *v;
  }

  std::vector<Term> list(const Term& head) const {
    std::vector<Term> out;
    std::set<Term> seen;
    for (Term cell = head; cell != Term::uri(vocab::kNil);) {
      if (!seen.insert(cell).second) bad("cyclic list at " + cell.str());
      out.push_back(required(cell, vocab::kFirst));
      cell = required(cell, vocab::kRest);
    }
    return out;
  }

  ValueSet value(const Term& t) const {
    if (t.is_uri() && t.value().starts_with(prefix_) &&
        d_.contains(Quad(t, Term::uri(vocab::kType), Term::uri(vocab::kValueSet), g_))) {
      return make_set(all(t, vocab::kMember));
    }
    return {t};
  }

  bool boolean(const Term& s, const std::string& p) const {
    auto b = as_boolean(required(s, p));
    if (!b) bad(p + " is not a boolean");
    return *b;
  }

  Frame frame(const Term& f) const {
    Frame out;
    out.returns_value = boolean(f, vocab::kReturnsValue);
    std::vector<std::pair<long long, Binding>> bs;
    for (const Term& bn : all(f, vocab::kHasBinding)) {
      auto idx = as_numeric(required(bn, vocab::kBindingIndex));
      if (!idx || !idx->is_integral) bad("binding index is not an integer");
      Term sym = required(bn, vocab::kHasSymbol);
      if (!sym.is_literal()) bad("binding symbol is not a literal");
      bs.emplace_back(idx->i, Binding{sym.value(), value(required(bn, vocab::kHasValue)), required(bn, vocab::kFromBlock)});
    }
    std::sort(bs.begin(), bs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [i, b] : bs) out.bindings.push_back(std::move(b));
    return out;
  }

  RvmState run() const {
    RvmState s;
    s.uri = r_;
    s.home_graph = g_;
    s.program_location = optional(r_, vocab::kProgramLocation);
    for (const Term& v : list(required(r_, vocab::kOperandStack))) s.operand_stack.push_back(value(v));
    std::reverse(s.operand_stack.begin(), s.operand_stack.end());
    s.return_stack = list(required(r_, vocab::kReturnStack));
    std::reverse(s.return_stack.begin(), s.return_stack.end());
    for (const Term& f : list(required(r_, vocab::kFrameStack))) s.frame_stack.push_back(frame(f));
    std::reverse(s.frame_stack.begin(), s.frame_stack.end());
    if (s.return_stack.size() != s.frame_stack.size()) bad("return stack and frame stack depths differ");
    auto cycles = as_numeric(required(r_, vocab::kCyclesRemaining));
    if (!cycles || !cycles->is_integral || cycles->i < 0) bad("cyclesRemaining is not a natural number");
    s.cycles_remaining = static_cast<std::uint64_t>(cycles->i);
    s.needs_process = boolean(r_, vocab::kNeedsProcess);
    if (auto f = optional(r_, vocab::kFault)) s.fault = f->value();
    if (auto m = optional(r_, vocab::kFaultMessage)) s.fault_message = m->value();
    return s;
  }

 private:
  const Dataset& d_;
  Term r_;
  Term g_;
  std::string prefix_;
};

}  // namespace

std::vector<Quad> state_quads(const RvmState& state) { return Writer(state).run(); }

std::optional<Term> home_graph_of(const Dataset& data, const Term& rvm) {
  auto q = data.match({rvm, Term::uri(vocab::kType), Term::uri(vocab::kRVM), std::nullopt});
  if (q.empty()) return std::nullopt;
  return q.front().g;
}

void store_state(Dataset& data, const RvmState& state) {
  if (!state.uri.is_uri()) throw MalformedState("machine URI must be a URI: " + state.uri.str());
  if (state.return_stack.size() != state.frame_stack.size()) {
    throw MalformedState(state.uri.str() + ": return stack and frame stack depths differ");
  }
  const std::string prefix = state_prefix(state.uri);
  std::vector<Quad> removals;
  for (const Quad& q : data.match({std::nullopt, std::nullopt, std::nullopt, state.home_graph})) {
    if ((q.s == state.uri && state_predicates().contains(q.p.value())) ||
        (q.s.is_uri() && q.s.value().starts_with(prefix))) {
      removals.push_back(q);
    }
  }
  auto additions = state_quads(state);
  additions.emplace_back(state.uri, Term::uri(vocab::kType), Term::uri(vocab::kRVM), state.home_graph);
  data.apply(removals, additions, false);
}

void store_state(GraphStore& store, const RvmState& state) {
  store.write([&](Dataset& d) { store_state(d, state); });
}

RvmState load_state(const Dataset& data, const Term& rvm) {
  auto home = home_graph_of(data, rvm);
  if (!home) throw MalformedState(rvm.str() + " is not typed rvm:RVM");
  return Reader(data, rvm, *home).run();
}

RvmState load_state(const GraphStore& store, const Term& rvm) {
  return store.read([&](const Dataset& d) { return load_state(d, rvm); });
}

}  // namespace rvm::fhat
