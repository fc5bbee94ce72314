#include "rvm/fhat/compiler.hpp"

#include <cstdio>
#include <set>

#include "rvm/vocab.hpp"

namespace rvm::fhat {

using namespace rvm::neno;

UuidMinter::UuidMinter() : rng_((static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}()) {}

std::string UuidMinter::uuid() {
  std::uint64_t hi = rng_();
  std::uint64_t lo = rng_();
  hi = (hi & ~0xF000ULL) | 0x4000ULL;                    // version 4
  lo = (lo & ~(0xC0ULL << 56)) | (0x80ULL << 56);        // RFC 4122 variant
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xFFFF), static_cast<unsigned>(hi & 0xFFFF),
                static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

namespace {

enum class Slot { Next, True, False };

class Emitter {
 public:
  explicit Emitter(UuidMinter& minter) : minter_(minter) {}

  std::size_t emit(Instruction in) {
    in.uri = minter_.mint();
    resolve(in.uri);
    insts.push_back(std::move(in));
    std::size_t idx = insts.size() - 1;
    if (insts[idx].kind != OpKind::Return && insts[idx].kind != OpKind::Branch) dangling.emplace_back(idx, Slot::Next);
    return idx;
  }

  void resolve(const Term& target) {
    for (auto [i, slot] : dangling) {
      Instruction& in = insts[i];
      (slot == Slot::Next ? in.next : slot == Slot::True ? in.branch_true : in.branch_false) = target;
    }
    dangling.clear();
  }

  std::vector<Instruction> insts;
  std::vector<std::pair<std::size_t, Slot>> dangling;

 private:
  UuidMinter& minter_;
};

Instruction op(OpKind kind) {
  Instruction in;
  in.kind = kind;
  return in;
}

OpKind setter_kind(SetOp op) {
  switch (op) {
    case SetOp::Set: return OpKind::Set;
    case SetOp::SetPlus: return OpKind::SetPlus;
    case SetOp::SetMinus: return OpKind::SetMinus;
    case SetOp::SetClear: return OpKind::SetClear;
  }
  return OpKind::Set;
}

OpKind arith_kind(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return OpKind::Add;
    case ArithOp::Sub: return OpKind::Subtract;
    case ArithOp::Mul: return OpKind::Multiply;
    case ArithOp::Div: return OpKind::Divide;
  }
  return OpKind::Add;
}

class MethodCompiler {
 public:
  MethodCompiler(UuidMinter& minter) : minter_(minter), em(minter) {}

  void path_base(const PathExpr& p) {
    std::visit(
        [&](const auto& b) {
          using B = std::decay_t<decltype(b)>;
          Instruction in;
          if constexpr (std::is_same_v<B, ThisBase>) {
            in = op(OpKind::Load);
            in.symbol = "this";
          } else if constexpr (std::is_same_v<B, VarBase>) {
            in = op(OpKind::Load);
            in.symbol = b.name;
          } else if constexpr (std::is_same_v<B, UriBase>) {
            in = op(OpKind::PushValue);
            in.value = Term::uri(b.iri);
          } else {
            in = op(OpKind::PushValue);
            in.value = b.value;
          }
          em.emit(std::move(in));
        },
        p.base);
  }

  void path(const PathExpr& p, std::size_t steps) {
    path_base(p);
    for (std::size_t i = 0; i < steps; ++i) {
      Instruction in = op(p.steps[i].dir == StepDir::Forward ? OpKind::TraverseForward : OpKind::TraverseInverse);
      in.predicate = Term::uri(p.steps[i].predicate);
      em.emit(std::move(in));
    }
  }

  // Emits the receiver part of a set target and returns the setter
  // instruction skeleton (symbol or predicate filled in).
  Instruction target(const PathExpr& t, OpKind kind) {
    Instruction in = op(kind);
    if (t.steps.empty()) {
      in.symbol = std::get<VarBase>(t.base).name;
    } else {
      path(t, t.steps.size() - 1);
      in.predicate = Term::uri(t.steps.back().predicate);
    }
    return in;
  }

  void call(const CallExpr& c) {
    for (const auto& a : c.args) expr(a);
    if (c.implicit_this) {
      Instruction self = op(OpKind::Load);
      self.symbol = "this";
      em.emit(std::move(self));
    } else {
      path(c.receiver, c.receiver.steps.size());
    }
    Instruction in = op(OpKind::Invoke);
    in.invoke_method = Term::uri(c.resolved_method);
    em.emit(std::move(in));
  }

  void expr(const Expr& e) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, PathExpr>) {
            path(n, n.steps.size());
          } else if constexpr (std::is_same_v<N, SetQueryExpr>) {
            expr(*n.value);
            em.emit(target(n.target, OpKind::SetQuery));
          } else if constexpr (std::is_same_v<N, ArithExpr>) {
            expr(*n.lhs);
            expr(*n.rhs);
            em.emit(op(arith_kind(n.op)));
          } else {
            call(n);
          }
        },
        e.node);
  }

  void block(const std::vector<Stmt>& body, const Term& blk, bool top) {
    bool declared = false;
    for (const auto& s : body) {
      declared = declared || std::holds_alternative<VarDecl>(s.node);
      stmt(s, blk);
    }
    if (!top && declared && !em.dangling.empty()) {
      Instruction drop = op(OpKind::NoOp);
      drop.from_block = blk;
      em.emit(std::move(drop));
    }
  }

  void stmt(const Stmt& s, const Term& blk) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, SetStmt>) {
            if (n.value) expr(*n.value);
            em.emit(target(n.target, setter_kind(n.op)));
          } else if constexpr (std::is_same_v<N, VarDecl>) {
            if (n.init) expr(*n.init);
            Instruction in = op(n.init ? OpKind::Set : OpKind::SetClear);
            in.symbol = n.name;
            in.from_block = blk;
            em.emit(std::move(in));
          } else if constexpr (std::is_same_v<N, IfStmt>) {
            expr(n.cond);
            std::size_t b = em.emit(op(OpKind::Branch));
            em.dangling = {{b, Slot::True}};
            block(n.then_body, minter_.mint(), false);
            auto after_then = em.dangling;
            em.dangling = {{b, Slot::False}};
            if (n.has_else) block(n.else_body, minter_.mint(), false);
            em.dangling.insert(em.dangling.end(), after_then.begin(), after_then.end());
          } else if constexpr (std::is_same_v<N, WhileStmt>) {
            std::size_t head = em.insts.size();
            expr(n.cond);
            std::size_t b = em.emit(op(OpKind::Branch));
            em.dangling = {{b, Slot::True}};
            block(n.body, minter_.mint(), false);
            em.resolve(em.insts[head].uri);
            em.dangling = {{b, Slot::False}};
          } else if constexpr (std::is_same_v<N, ReturnStmt>) {
            if (n.value) expr(*n.value);
            em.emit(op(OpKind::Return));
          } else {
            call(n.call);
          }
        },
        s.node);
  }

  std::vector<Instruction> method(const MethodDecl& m, const Term& uri) {
    block(m.body, uri, true);
    if (em.insts.empty() || !em.dangling.empty()) em.emit(op(OpKind::Return));
    return std::move(em.insts);
  }

 private:
  UuidMinter& minter_;

 public:
  Emitter em;
};

Term card_literal(std::size_t n) { return Term::literal(std::to_string(n), vocab::kXsdNonNegInt); }

}  // namespace

std::vector<Quad> compile_api(const CheckedUnit& unit, UuidMinter& minter) {
  const Term g = Term::uri(vocab::kApiGraph);
  std::vector<Quad> out;
  auto add = [&](const Term& s, const std::string& p, const Term& o) { out.emplace_back(s, Term::uri(p), o, g); };
  for (const auto& c : unit.unit.classes) {
    Term cls = Term::uri(c.uri);
    add(cls, vocab::kType, Term::uri(vocab::kOwlClass));
    add(cls, vocab::kSubClassOf, Term::uri(c.super_class));
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
      const FieldDecl& f = c.fields[i];
      Term node = Term::uri(field_uri(c.uri, i));
      add(cls, vocab::kHasField, node);
      add(node, vocab::kPredicate, Term::uri(f.predicate));
      add(node, vocab::kRange, Term::uri(f.range));
      add(node, vocab::kMinCard, card_literal(f.card.min));
      if (f.card.max != kUnbounded) add(node, vocab::kMaxCard, card_literal(f.card.max));
    }
    for (const auto& m : c.methods) {
      Term mu = Term::uri(method_uri(c.uri, m.name));
      add(mu, vocab::kType, Term::uri(vocab::kMethod));
      add(mu, vocab::kOwner, cls);
      add(mu, vocab::kMethodName, Term::literal(m.name));
      if (m.return_type) add(mu, vocab::kReturnType, Term::uri(*m.return_type));
      for (std::size_t i = 0; i < m.params.size(); ++i) {
        Term pn = Term::uri(mu.value() + "/param/" + std::to_string(i));
        add(mu, vocab::kParam, pn);
        add(pn, vocab::kParamIndex, Term::integer(static_cast<long long>(i)));
        add(pn, vocab::kParamName, Term::literal(m.params[i].name));
        add(pn, vocab::kParamType, Term::uri(m.params[i].type));
      }
      MethodCompiler mc(minter);
      auto chain = mc.method(m, mu);
      add(mu, vocab::kFirstInst, chain.front().uri);
      for (const auto& in : chain) {
        validate(in);
        auto qs = to_quads(in, g);
        out.insert(out.end(), qs.begin(), qs.end());
      }
    }
  }
  return out;
}

std::vector<Instruction> method_chain(const Dataset& data, const Term& method) {
  auto first = data.match({method, Term::uri(vocab::kFirstInst), std::nullopt, std::nullopt});
  if (first.empty()) return {};
  std::vector<Instruction> out;
  std::set<Term> seen;
  std::vector<Term> todo{first.front().o};
  while (!todo.empty()) {
    Term t = todo.back();
    todo.pop_back();
    if (!seen.insert(t).second) continue;
    out.push_back(read_instruction(data, t));
    auto next = successors(out.back());
    for (auto it = next.rbegin(); it != next.rend(); ++it) todo.push_back(*it);
  }
  return out;
}

LoweredPath lower_path(const PathExpr& path, UuidMinter& minter) {
  MethodCompiler mc(minter);
  mc.path(path, path.steps.size());
  LoweredPath out;
  out.chain = std::move(mc.em.insts);
  if (path.steps.empty()) return out;

  sparql::PatternTerm prev = std::visit(
      [](const auto& b) -> sparql::PatternTerm {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, ThisBase>) {
          return sparql::Variable{"this"};
        } else if constexpr (std::is_same_v<B, VarBase>) {
          return sparql::Variable{b.name};
        } else if constexpr (std::is_same_v<B, UriBase>) {
          return Term::uri(b.iri);
        } else {
          return b.value;
        }
      },
      path.base);
  sparql::SelectQuery q;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    std::string name = i + 1 == path.steps.size() ? "y" : (i == 0 ? "x" : "x" + std::to_string(i + 1));
    sparql::Variable v{name};
    Term p = Term::uri(path.steps[i].predicate);
    if (path.steps[i].dir == StepDir::Forward) {
      q.patterns.push_back({prev, p, v, std::nullopt});
    } else {
      q.patterns.push_back({v, p, prev, std::nullopt});
    }
    prev = v;
  }
  q.vars = {"y"};
  try {
    sparql::validate(q);
    out.query = std::move(q);
  } catch (const MalformedQuery&) {
    // A literal base in subject position has no query form.
  }
  return out;
}

ObjectInstance instantiate(Dataset& data, const Dataset& api, const Term& cls, std::optional<Term> object,
                           UuidMinter& minter) {
  const Term type = Term::uri(vocab::kType);
  const Term owl_class = Term::uri(vocab::kOwlClass);
  if (!cls.is_uri() || api.count({cls, type, owl_class, std::nullopt}) == 0) throw UnknownClass(cls.str());

  ObjectInstance obj;
  obj.class_uri = cls;
  obj.uri = object ? *object : minter.mint();
  if (!obj.uri.is_uri()) throw Error("object must be a URI: " + obj.uri.str());
  obj.graph = obj.uri;
  const Term& g = obj.graph;

  // Methods visible on the class, nearest declaration first.
  std::vector<std::pair<std::string, Term>> methods;
  std::set<std::string> names;
  std::set<Term> visited;
  for (Term c = cls; api.count({c, type, owl_class, std::nullopt}) && visited.insert(c).second;) {
    for (const Quad& q : api.match({std::nullopt, Term::uri(vocab::kOwner), c, std::nullopt})) {
      auto n = api.match({q.s, Term::uri(vocab::kMethodName), std::nullopt, std::nullopt});
      if (n.empty()) continue;
      if (names.insert(n.front().o.value()).second) methods.emplace_back(n.front().o.value(), q.s);
    }
    auto sup = api.match({c, Term::uri(vocab::kSubClassOf), std::nullopt, std::nullopt});
    if (sup.empty()) break;
    c = sup.front().o;
  }

  std::vector<Quad> add;
  add.emplace_back(obj.uri, type, cls, g);
  const std::set<std::string> linking = {vocab::kNextInst, vocab::kBranchTrue, vocab::kBranchFalse, vocab::kFromBlock};
  for (const auto& [name, m] : methods) {
    Term mi = minter.mint();
    obj.methods[name] = mi;
    std::map<Term, Term> rename{{m, mi}};
    auto renamed = [&](const Term& t) {
      auto it = rename.find(t);
      if (it != rename.end()) return it->second;
      return rename.emplace(t, minter.mint()).first->second;
    };
    add.emplace_back(obj.uri, Term::uri(vocab::kHasMethod), mi, g);
    add.emplace_back(mi, Term::uri(vocab::kTemplate), m, g);
    for (const Quad& q : api.match({m, std::nullopt, std::nullopt, std::nullopt})) {
      const std::string& p = q.p.value();
      if (p == vocab::kOwner) continue;
      if (p == vocab::kParam) {
        Term pn = renamed(q.o);
        add.emplace_back(mi, q.p, pn, g);
        for (const Quad& pq : api.match({q.o, std::nullopt, std::nullopt, std::nullopt})) add.emplace_back(pn, pq.p, pq.o, g);
      } else if (p == vocab::kFirstInst) {
        add.emplace_back(mi, q.p, renamed(q.o), g);
      } else {
        add.emplace_back(mi, q.p, q.o, g);
      }
    }
    for (const Instruction& in : method_chain(api, m)) {
      Term iu = renamed(in.uri);
      for (const Quad& q : api.match({in.uri, std::nullopt, std::nullopt, std::nullopt})) {
        add.emplace_back(iu, q.p, linking.contains(q.p.value()) ? renamed(q.o) : q.o, g);
      }
    }
  }
  if (!data.has_graph(Term::uri(vocab::kApiGraph))) {
    auto all = api.quads();
    add.insert(add.end(), all.begin(), all.end());
  }
  data.apply({}, add);
  return obj;
}

ObjectInstance instantiate(GraphStore& store, const Dataset& api, const Term& cls, std::optional<Term> object,
                           UuidMinter& minter) {
  return store.write([&](Dataset& d) { return instantiate(d, api, cls, std::move(object), minter); });
}

}  // namespace rvm::fhat
