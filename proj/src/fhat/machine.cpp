#include "rvm/fhat/machine.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <set>

#include "rvm/vocab.hpp"

namespace rvm::fhat {

const char* to_string(FaultCode code) {
  switch (code) {
    case FaultCode::StackUnderflow: return "StackUnderflow";
    case FaultCode::TypeFault: return "TypeFault";
    case FaultCode::CardinalityFault: return "CardinalityFault";
    case FaultCode::PermissionDenied: return "PermissionDenied";
    case FaultCode::QuotaExceeded: return "QuotaExceeded";
    case FaultCode::MalformedState: return "MalformedState";
  }
  return "Fault";
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Terminal: return "Terminal";
    case Outcome::Suspended: return "Suspended";
    case Outcome::Faulted: return "Faulted";
  }
  return "?";
}

namespace {

Term iri(const std::string& s) { return Term::uri(s); }

[[noreturn]] void fault(FaultCode code, const std::string& message) { throw Fault(code, message); }

struct Cardinality {
  long long min = 0;
  std::optional<long long> max;
};

class Executor {
 public:
  Executor(RvmState& s, Dataset& d, const Guard& guard) : s_(s), d_(d), guard_(guard) {}

  void run(const Instruction& in) {
    switch (in.kind) {
      case OpKind::PushValue:
        s_.operand_stack.push_back({*in.value});
        advance(in);
        break;
      case OpKind::Load: {
        const Binding* b = frame().find(*in.symbol);
        if (!b) fault(FaultCode::TypeFault, "unbound symbol " + *in.symbol);
        s_.operand_stack.push_back(b->value);
        advance(in);
        break;
      }
      case OpKind::Add:
      case OpKind::Subtract:
      case OpKind::Multiply:
      case OpKind::Divide:
        arithmetic(in.kind);
        advance(in);
        break;
      case OpKind::Set:
      case OpKind::SetPlus:
      case OpKind::SetMinus:
      case OpKind::SetClear:
      case OpKind::SetQuery:
        if (in.symbol) {
          symbol_setter(in);
        } else {
          field_setter(in);
        }
        advance(in);
        break;
      case OpKind::TraverseForward:
      case OpKind::TraverseInverse:
        traverse(in);
        advance(in);
        break;
      case OpKind::Invoke:
        invoke(in);
        break;
      case OpKind::Return:
        ret();
        break;
      case OpKind::Branch: {
        ValueSet v = pop();
        std::optional<bool> b = v.size() == 1 ? as_boolean(v.front()) : std::nullopt;
        if (!b) fault(FaultCode::TypeFault, "Branch needs a boolean singleton");
        s_.program_location = *b ? *in.branch_true : *in.branch_false;
        break;
      }
      case OpKind::NoOp:
        if (in.from_block) {
          auto& bs = frame().bindings;
          std::erase_if(bs, [&](const Binding& b) { return b.block == *in.from_block; });
        }
        advance(in);
        break;
    }
  }

  void commit_edits() {
    if (removals_.empty() && additions_.empty()) return;
    try {
      d_.apply(removals_, additions_);
    } catch (const QuotaExceeded& e) {
      fault(FaultCode::QuotaExceeded, e.what());
    }
  }

 private:
  void advance(const Instruction& in) { s_.program_location = in.next; }

  ValueSet pop() {
    if (s_.operand_stack.empty()) fault(FaultCode::StackUnderflow, "operand stack is empty");
    ValueSet v = std::move(s_.operand_stack.back());
    s_.operand_stack.pop_back();
    return v;
  }

  Frame& frame() {
    if (s_.frame_stack.empty()) fault(FaultCode::StackUnderflow, "frame stack is empty");
    return s_.frame_stack.back();
  }

  Numeric scalar_number(const ValueSet& v) {
    if (v.size() != 1) fault(FaultCode::TypeFault, "arithmetic needs a singleton operand, got " + std::to_string(v.size()));
    auto n = as_numeric(v.front());
    if (!n) fault(FaultCode::TypeFault, "non-numeric operand " + v.front().str());
    return *n;
  }

  static Term integral(long long r) {
    if (r >= INT_MIN && r <= INT_MAX) return Term::integer(r);
    return Term::literal(std::to_string(r), vocab::kXsdInteger);
  }

  void arithmetic(OpKind kind) {
    Numeric b = scalar_number(pop());
    Numeric a = scalar_number(pop());
    Term out;
    if (a.is_integral && b.is_integral) {
      long long r = 0;
      bool overflow = false;
      switch (kind) {
        case OpKind::Add: overflow = __builtin_add_overflow(a.i, b.i, &r); break;
        case OpKind::Subtract: overflow = __builtin_sub_overflow(a.i, b.i, &r); break;
        case OpKind::Multiply: overflow = __builtin_mul_overflow(a.i, b.i, &r); break;
        default:
          if (b.i == 0) fault(FaultCode::TypeFault, "division by zero");
          overflow = a.i == LLONG_MIN && b.i == -1;
          if (!overflow) r = a.i / b.i;
      }
      if (overflow) fault(FaultCode::TypeFault, "integer overflow");
      out = integral(r);
    } else {
      double r = 0;
      switch (kind) {
        case OpKind::Add: r = a.d + b.d; break;
        case OpKind::Subtract: r = a.d - b.d; break;
        case OpKind::Multiply: r = a.d * b.d; break;
        default:
          if (b.d == 0.0) fault(FaultCode::TypeFault, "division by zero");
          r = a.d / b.d;
      }
      out = Term::real(r);
    }
    s_.operand_stack.push_back({out});
  }

  static ValueSet set_union(const ValueSet& a, const ValueSet& b) {
    ValueSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }
  static ValueSet set_difference(const ValueSet& a, const ValueSet& b) {
    ValueSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }
  static bool subset(const ValueSet& v, const ValueSet& of) {
    return !v.empty() && std::includes(of.begin(), of.end(), v.begin(), v.end());
  }

  void symbol_setter(const Instruction& in) {
    ValueSet v = in.kind == OpKind::SetClear ? ValueSet{} : pop();
    Frame& f = frame();
    const std::string& sym = *in.symbol;
    if (in.kind == OpKind::SetQuery) {
      const Binding* b = f.find(sym);
      if (!b) fault(FaultCode::TypeFault, "unbound symbol " + sym);
      s_.operand_stack.push_back({Term::boolean(subset(v, b->value))});
      return;
    }
    Binding* b = nullptr;
    if (in.from_block) {
      for (auto it = f.bindings.rbegin(); it != f.bindings.rend() && !b; ++it) {
        if (it->symbol == sym && it->block == *in.from_block) b = &*it;
      }
      if (!b) b = &f.bindings.emplace_back(Binding{sym, {}, *in.from_block});
    } else {
      b = f.find(sym);
      if (!b) fault(FaultCode::TypeFault, "unbound symbol " + sym);
    }
    switch (in.kind) {
      case OpKind::Set: b->value = std::move(v); break;
      case OpKind::SetPlus: b->value = set_union(b->value, v); break;
      case OpKind::SetMinus: b->value = set_difference(b->value, v); break;
      default: b->value.clear();
    }
  }

  ValueSet objects(const Term& s, const Term& p, const std::optional<Term>& g) const {
    std::vector<Term> out;
    for (const Quad& q : d_.match({s, p, std::nullopt, g})) out.push_back(q.o);
    return make_set(std::move(out));
  }

  Term receiver_graph(const Term& r) const {
    auto typed = d_.match({r, iri(vocab::kType), std::nullopt, std::nullopt});
    if (!typed.empty()) return typed.front().g;
    return iri(vocab::kDefaultGraph);
  }

  std::optional<Cardinality> cardinality(const Term& r, const Term& p) const {
    const Term has_field = iri(vocab::kHasField);
    const Term predicate = iri(vocab::kPredicate);
    for (const Quad& t : d_.match({r, iri(vocab::kType), std::nullopt, std::nullopt})) {
      std::set<Term> seen;
      for (Term c = t.o; seen.insert(c).second;) {
        for (const Quad& hf : d_.match({c, has_field, std::nullopt, std::nullopt})) {
          if (!d_.count({hf.o, predicate, p, std::nullopt})) continue;
          Cardinality card;
          for (const Quad& q : d_.match({hf.o, iri(vocab::kMinCard), std::nullopt, std::nullopt})) {
            if (auto n = as_numeric(q.o)) card.min = n->i;
          }
          for (const Quad& q : d_.match({hf.o, iri(vocab::kMaxCard), std::nullopt, std::nullopt})) {
            if (auto n = as_numeric(q.o)) card.max = n->i;
          }
          return card;
        }
        auto sup = d_.match({c, iri(vocab::kSubClassOf), std::nullopt, std::nullopt});
        if (sup.empty()) break;
        c = sup.front().o;
      }
    }
    return std::nullopt;
  }

  void check(const Term& g, Action action) const {
    if (guard_ && !guard_(d_, g, action)) {
      fault(FaultCode::PermissionDenied, std::string(action == Action::Write ? "write to " : "delete from ") + g.str());
    }
  }

  void field_setter(const Instruction& in) {
    const Term& p = *in.predicate;
    ValueSet receivers = pop();
    ValueSet v = in.kind == OpKind::SetClear ? ValueSet{} : pop();
    if (in.kind == OpKind::SetQuery) {
      ValueSet all;
      for (const Term& r : receivers) all = set_union(all, objects(r, p, std::nullopt));
      s_.operand_stack.push_back({Term::boolean(subset(v, all))});
      return;
    }
    for (const Term& r : receivers) {
      if (r.is_literal()) fault(FaultCode::TypeFault, "field edit on literal receiver " + r.str());
      Term g = receiver_graph(r);
      if (in.kind == OpKind::Set || in.kind == OpKind::SetPlus) check(g, Action::Write);
      if (in.kind != OpKind::SetPlus) check(g, Action::Delete);
      ValueSet current = objects(r, p, g);
      ValueSet remove, add;
      switch (in.kind) {
        case OpKind::Set:
          remove = set_difference(current, v);
          add = set_difference(v, current);
          break;
        case OpKind::SetPlus: add = set_difference(v, current); break;
        case OpKind::SetMinus: std::set_intersection(current.begin(), current.end(), v.begin(), v.end(), std::back_inserter(remove)); break;
        default: remove = current;
      }
      long long before = static_cast<long long>(current.size());
      long long after = before - static_cast<long long>(remove.size()) + static_cast<long long>(add.size());
      if (auto card = cardinality(r, p)) {
        if ((card->max && after > *card->max) || (after < card->min && after < before)) {
          fault(FaultCode::CardinalityFault, p.str() + " on " + r.str() + " would hold " + std::to_string(after) + " values");
        }
      }
      for (const Term& o : remove) {
        if (!r.is_literal()) removals_.emplace_back(r, p, o, g);
      }
      for (const Term& o : add) additions_.emplace_back(r, p, o, g);
    }
  }

  void traverse(const Instruction& in) {
    const Term& p = *in.predicate;
    ValueSet from = pop();
    std::vector<Term> out;
    for (const Term& t : from) {
      if (in.kind == OpKind::TraverseForward) {
        if (t.is_literal()) continue;
        for (const Quad& q : d_.match({t, p, std::nullopt, std::nullopt})) out.push_back(q.o);
      } else {
        for (const Quad& q : d_.match({std::nullopt, p, t, std::nullopt})) out.push_back(q.s);
      }
    }
    s_.operand_stack.push_back(make_set(std::move(out)));
  }

  void invoke(const Instruction& in) {
    const Term& m = *in.invoke_method;
    ValueSet receivers = pop();
    if (receivers.empty()) {
      std::size_t arity = objects(m, iri(vocab::kParam), std::nullopt).size();
      for (std::size_t i = 0; i < arity; ++i) pop();
      if (d_.count({m, iri(vocab::kReturnType), std::nullopt, std::nullopt})) s_.operand_stack.push_back({});
      advance(in);
      return;
    }
    const Term& r1 = receivers.front();
    std::optional<Term> mi;
    if (!r1.is_literal()) {
      for (const Term& cand : objects(r1, iri(vocab::kHasMethod), std::nullopt)) {
        if (cand == m || d_.count({cand, iri(vocab::kTemplate), m, std::nullopt})) {
          mi = cand;
          break;
        }
      }
    }
    if (!mi) fault(FaultCode::TypeFault, r1.str() + " has no method " + m.str());
    std::size_t arity = objects(*mi, iri(vocab::kParam), std::nullopt).size();
    std::vector<ValueSet> args(arity);
    for (std::size_t i = arity; i-- > 0;) args[i] = pop();

    Frame f;
    f.returns_value = d_.count({*mi, iri(vocab::kReturnType), std::nullopt, std::nullopt}) > 0;
    f.bindings.push_back({"this", {r1}, *mi});
    std::map<long long, std::string> params;
    for (const Term& pn : objects(*mi, iri(vocab::kParam), std::nullopt)) {
      auto idx = objects(pn, iri(vocab::kParamIndex), std::nullopt);
      auto name = objects(pn, iri(vocab::kParamName), std::nullopt);
      std::optional<Numeric> n = idx.size() == 1 ? as_numeric(idx.front()) : std::nullopt;
      if (!n || !n->is_integral || name.size() != 1) fault(FaultCode::TypeFault, "malformed parameter " + pn.str());
      params[n->i] = name.front().value();
    }
    if (params.size() != arity) fault(FaultCode::TypeFault, "arity mismatch invoking " + mi->str());
    std::size_t i = 0;
    for (const auto& [idx, name] : params) f.bindings.push_back({name, args[i++], *mi});

    auto first = objects(*mi, iri(vocab::kFirstInst), std::nullopt);
    if (first.size() != 1) fault(FaultCode::TypeFault, mi->str() + " has no single firstInst");

    Term site;
    if (receivers.size() > 1) {
      if (f.returns_value) fault(FaultCode::TypeFault, "multi-receiver invocation of a value-returning method");
      for (auto& a : args) s_.operand_stack.push_back(a);
      s_.operand_stack.push_back(ValueSet(receivers.begin() + 1, receivers.end()));
      site = in.uri;
    } else {
      site = in.next ? *in.next : iri(vocab::kHalt);
    }
    s_.frame_stack.push_back(std::move(f));
    s_.return_stack.push_back(site);
    s_.program_location = first.front();
  }

  void ret() {
    Frame& f = frame();
    std::optional<ValueSet> v;
    if (f.returns_value) v = pop();
    if (s_.return_stack.empty() || s_.return_stack.back() == iri(vocab::kHalt)) {
      s_.program_location.reset();
    } else {
      s_.frame_stack.pop_back();
      s_.program_location = s_.return_stack.back();
      s_.return_stack.pop_back();
    }
    if (v) s_.operand_stack.push_back(std::move(*v));
  }

  RvmState& s_;
  Dataset& d_;
  const Guard& guard_;
  std::vector<Quad> removals_;
  std::vector<Quad> additions_;
};

}  // namespace

void step(RvmState& state, Dataset& data, const Guard& guard) {
  if (!state.program_location) fault(FaultCode::MalformedState, "machine is terminal");
  Instruction in;
  try {
    in = read_instruction(data, *state.program_location);
  } catch (const MalformedInstruction& e) {
    fault(FaultCode::TypeFault, e.what());
  }
  RvmState next = state;
  if (next.cycles_remaining > 0) --next.cycles_remaining;
  Executor ex(next, data, guard);
  ex.run(in);
  ex.commit_edits();
  state = std::move(next);
}

void step(RvmState& state, GraphStore& store, const Guard& guard) {
  store.write([&](Dataset& d) { step(state, d, guard); });
}

void record_fault(RvmState& state, FaultCode code, const std::string& message) {
  state.fault = to_string(code);
  state.fault_message = message;
  state.program_location.reset();
  state.needs_process = false;
}

RunResult run(RvmState state, GraphStore& store, Mode mode, const Guard& guard) {
  RunResult res{Outcome::Terminal, {}, 0};
  const Term uri = state.uri;
  if (mode == Mode::Fhat) store_state(store, state);
  for (;;) {
    if (mode == Mode::Fhat) {
      try {
        state = load_state(store, uri);
      } catch (const MalformedState& e) {
        record_fault(state, FaultCode::MalformedState, e.what());
        res.outcome = Outcome::Faulted;
        break;
      }
    }
    if (state.terminal()) {
      res.outcome = state.fault ? Outcome::Faulted : Outcome::Terminal;
      break;
    }
    if (state.cycles_remaining == 0) {
      res.outcome = Outcome::Suspended;
      break;
    }
    try {
      step(state, store, guard);
    } catch (const Fault& f) {
      --state.cycles_remaining;
      record_fault(state, f.code(), f.what());
      res.outcome = Outcome::Faulted;
      ++res.steps;
      break;
    }
    ++res.steps;
    if (mode == Mode::Fhat) store_state(store, state);
  }
  state.needs_process = res.outcome == Outcome::Suspended;
  store_state(store, state);
  res.state = std::move(state);
  return res;
}

RunResult run(GraphStore& store, const Term& rvm, Mode mode, const Guard& guard) {
  RvmState state;
  try {
    state = load_state(store, rvm);
  } catch (const MalformedState& e) {
    // Record the fault on whatever can still be identified as the machine.
    auto home = store.read([&](const Dataset& d) { return home_graph_of(d, rvm); });
    if (!home) throw;
    RunResult res{Outcome::Faulted, {}, 0};
    res.state.uri = rvm;
    res.state.home_graph = *home;
    res.state.return_stack = {};
    record_fault(res.state, FaultCode::MalformedState, e.what());
    store.write([&](Dataset& d) {
      std::vector<Quad> add = {
          Quad(rvm, Term::uri(vocab::kFault), Term::literal(*res.state.fault), *home),
          Quad(rvm, Term::uri(vocab::kFaultMessage), Term::literal(*res.state.fault_message), *home),
      };
      std::vector<Quad> rm;
      for (const std::string& p : {vocab::kNeedsProcess, vocab::kProgramLocation, vocab::kFault, vocab::kFaultMessage}) {
        auto m = d.match({rvm, Term::uri(p), std::nullopt, *home});
        rm.insert(rm.end(), m.begin(), m.end());
      }
      add.emplace_back(rvm, Term::uri(vocab::kNeedsProcess), Term::boolean(false), *home);
      d.apply(rm, add, false);
    });
    return res;
  }
  return run(std::move(state), store, mode, guard);
}

RvmState make_entry_state(const Dataset& data, const Term& object, const std::string& method_name,
                          const std::vector<ValueSet>& args, std::uint64_t cycles, const Term& rvm_uri) {
  std::optional<Term> mi;
  for (const Quad& q : data.match({object, Term::uri(vocab::kHasMethod), std::nullopt, std::nullopt})) {
    if (data.count({q.o, Term::uri(vocab::kMethodName), Term::literal(method_name), std::nullopt})) {
      mi = q.o;
      break;
    }
  }
  if (!mi) throw Error(object.str() + " has no method " + method_name);

  Frame f;
  f.returns_value = data.count({*mi, Term::uri(vocab::kReturnType), std::nullopt, std::nullopt}) > 0;
  f.bindings.push_back({"this", {object}, *mi});
  std::map<long long, std::string> params;
  for (const Quad& pq : data.match({*mi, Term::uri(vocab::kParam), std::nullopt, std::nullopt})) {
    auto idx = data.match({pq.o, Term::uri(vocab::kParamIndex), std::nullopt, std::nullopt});
    auto name = data.match({pq.o, Term::uri(vocab::kParamName), std::nullopt, std::nullopt});
    if (idx.empty() || name.empty()) throw Error("malformed parameter " + pq.o.str());
    params[as_numeric(idx.front().o).value_or(Numeric{true, -1, 0}).i] = name.front().o.value();
  }
  if (params.size() != args.size()) {
    throw Error(method_name + " takes " + std::to_string(params.size()) + " argument(s), given " +
                std::to_string(args.size()));
  }
  std::size_t i = 0;
  for (const auto& [idx, name] : params) f.bindings.push_back({name, make_set(args[i++]), *mi});

  auto first = data.match({*mi, Term::uri(vocab::kFirstInst), std::nullopt, std::nullopt});
  if (first.empty()) throw Error(mi->str() + " has no firstInst");

  RvmState s;
  s.uri = rvm_uri;
  auto typed = data.match({object, Term::uri(vocab::kType), std::nullopt, std::nullopt});
  s.home_graph = typed.empty() ? Term::uri(vocab::kDefaultGraph) : typed.front().g;
  s.program_location = first.front().o;
  s.frame_stack.push_back(std::move(f));
  s.return_stack.push_back(Term::uri(vocab::kHalt));
  s.cycles_remaining = cycles;
  s.needs_process = false;
  return s;
}

RvmState spawn(GraphStore& store, const Term& object, const std::string& method_name,
               const std::vector<ValueSet>& args, std::uint64_t cycles, UuidMinter& minter) {
  Term uri = minter.mint();
  return store.write([&](Dataset& d) {
    RvmState s = make_entry_state(d, object, method_name, args, cycles, uri);
    s.needs_process = true;
    store_state(d, s);
    return s;
  });
}

Instruction push_self(const RvmState& state, const Term& uri) {
  Instruction in;
  in.uri = uri;
  in.kind = OpKind::PushValue;
  in.value = state.uri;
  return in;
}

}  // namespace rvm::fhat
