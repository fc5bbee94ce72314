#include "rvm/neno/typecheck.hpp"

#include <set>

#include "rvm/neno/parser.hpp"
#include "rvm/term.hpp"
#include "rvm/vocab.hpp"

namespace rvm::neno {

const char* to_string(TypeErrorKind kind) {
  switch (kind) {
    case TypeErrorKind::TypeMismatch: return "TypeMismatch";
    case TypeErrorKind::UnknownField: return "UnknownField";
    case TypeErrorKind::ArityError: return "ArityError";
    case TypeErrorKind::UnknownMethod: return "UnknownMethod";
    case TypeErrorKind::UnknownVariable: return "UnknownVariable";
    case TypeErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
    case TypeErrorKind::MissingReturn: return "MissingReturn";
    case TypeErrorKind::UnreachableCode: return "UnreachableCode";
    case TypeErrorKind::CardinalityViolation: return "CardinalityViolation";
    case TypeErrorKind::InvalidTarget: return "InvalidTarget";
  }
  return "TypeError";
}

std::string method_uri(const std::string& cls, const std::string& name) { return cls + "/method/" + name; }
std::string field_uri(const std::string& cls, std::size_t index) { return cls + "/field/" + std::to_string(index); }

const ClassDecl* CheckedUnit::find_class(const std::string& iri) const {
  for (const auto& c : unit.classes) {
    if (c.uri == iri) return &c;
  }
  return nullptr;
}

const FieldDecl* CheckedUnit::find_field(const std::string& cls, const std::string& predicate) const {
  std::size_t hops = 0;
  for (const ClassDecl* c = find_class(cls); c && hops <= unit.classes.size(); c = find_class(c->super_class), ++hops) {
    for (const auto& f : c->fields) {
      if (f.predicate == predicate) return &f;
    }
  }
  return nullptr;
}

const MethodDecl* CheckedUnit::find_method(const std::string& cls, const std::string& name, std::string* owner) const {
  std::size_t hops = 0;
  for (const ClassDecl* c = find_class(cls); c && hops <= unit.classes.size(); c = find_class(c->super_class), ++hops) {
    for (const auto& m : c->methods) {
      if (m.name == name) {
        if (owner) *owner = c->uri;
        return &m;
      }
    }
  }
  return nullptr;
}

std::vector<std::pair<std::string, const MethodDecl*>> CheckedUnit::methods_of(const std::string& cls) const {
  std::vector<std::pair<std::string, const MethodDecl*>> out;
  std::set<std::string> seen;
  std::size_t hops = 0;
  for (const ClassDecl* c = find_class(cls); c && hops <= unit.classes.size(); c = find_class(c->super_class), ++hops) {
    for (const auto& m : c->methods) {
      if (seen.insert(m.name).second) out.emplace_back(c->uri, &m);
    }
  }
  return out;
}

namespace {

const std::string kVoid = "void";

bool is_top(const std::string& t) {
  return t == kAnyType || t == vocab::rdfs("Resource") || t == vocab::owl("Thing");
}

class Checker {
 public:
  explicit Checker(CheckedUnit& cu) : cu_(cu) {}

  void run() {
    std::set<std::string> classes;
    for (const auto& c : cu_.unit.classes) {
      if (!classes.insert(c.uri).second) fail(TypeErrorKind::DuplicateDeclaration, c.loc, "class " + show(c.uri));
    }
    for (const auto& c : cu_.unit.classes) {
      std::set<std::string> seen{c.uri};
      for (const ClassDecl* s = cu_.find_class(c.super_class); s; s = cu_.find_class(s->super_class)) {
        if (!seen.insert(s->uri).second) fail(TypeErrorKind::TypeMismatch, c.loc, "cyclic subclass chain at " + show(c.uri));
      }
      std::set<std::string> fields;
      for (const auto& f : c.fields) {
        if (!fields.insert(f.predicate).second) {
          fail(TypeErrorKind::DuplicateDeclaration, f.loc, "field " + show(f.predicate));
        }
      }
      std::set<std::string> methods;
      for (const auto& m : c.methods) {
        if (!methods.insert(m.name).second) fail(TypeErrorKind::DuplicateDeclaration, m.loc, "method " + m.name);
      }
    }
    for (auto& c : cu_.unit.classes) {
      for (auto& m : c.methods) method(c, m);
    }
  }

 private:
  [[noreturn]] void fail(TypeErrorKind kind, SourceLoc loc, const std::string& detail) const {
    throw TypeError(kind, loc, detail);
  }

  std::string show(const std::string& iri) const {
    if (iri == kVoid) return "void";
    Expr e;
    e.node = PathExpr{UriBase{iri}, {}, {}};
    return print(e, cu_.unit);
  }

  bool subclass_of(const std::string& sub, const std::string& sup) const {
    std::size_t hops = 0;
    for (std::string c = sub; hops <= cu_.unit.classes.size() + 1; ++hops) {
      if (c == sup) return true;
      const ClassDecl* d = cu_.find_class(c);
      if (!d) return false;
      c = d->super_class;
    }
    return false;
  }

  bool assignable(const std::string& value, const std::string& target) const {
    if (value == kVoid) return false;
    if (is_top(value) || is_top(target)) return true;
    if (value == vocab::kXsdInt && target == vocab::kXsdDouble) return true;
    return subclass_of(value, target);
  }

  void expect_assignable(const std::string& value, const std::string& target, SourceLoc loc) const {
    if (!assignable(value, target)) fail(TypeErrorKind::TypeMismatch, loc, "expected " + show(target) + ", found " + show(value));
  }

  // Scopes
  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }
  void declare(const std::string& name, const std::string& type, SourceLoc loc) {
    if (!scopes_.back().emplace(name, type).second) fail(TypeErrorKind::DuplicateDeclaration, loc, "variable " + name);
  }
  std::string lookup(const std::string& name, SourceLoc loc) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    fail(TypeErrorKind::UnknownVariable, loc, name);
  }

  void method(ClassDecl& c, MethodDecl& m) {
    cls_ = c.uri;
    ret_ = m.return_type ? *m.return_type : kVoid;
    scopes_.clear();
    push_scope();
    for (const auto& p : m.params) declare(p.name, p.type, m.loc);
    push_scope();
    bool returns = block(m.body);
    if (!returns && m.return_type) fail(TypeErrorKind::MissingReturn, m.loc, "method " + m.name);
  }

  // Returns true when every path through the statements ends in a return.
  bool block(std::vector<Stmt>& body) {
    bool returned = false;
    for (auto& s : body) {
      if (returned) fail(TypeErrorKind::UnreachableCode, s.loc, "statement after return");
      returned = stmt(s);
    }
    return returned;
  }

  bool nested(std::vector<Stmt>& body) {
    push_scope();
    bool r = block(body);
    pop_scope();
    return r;
  }

  // Type of a field step applied to a value of static type `from`.
  std::string step_type(const std::string& from, const PathStep& step) const {
    if (step.dir == StepDir::Forward) {
      if (is_top(from)) {
        std::set<std::string> ranges;
        for (const auto& c : cu_.unit.classes) {
          for (const auto& f : c.fields) {
            if (f.predicate == step.predicate) ranges.insert(f.range);
          }
        }
        if (ranges.empty()) fail(TypeErrorKind::UnknownField, step.loc, show(step.predicate) + " on any class");
        return ranges.size() == 1 ? *ranges.begin() : kAnyType;
      }
      const FieldDecl* f = cu_.find_field(from, step.predicate);
      if (!f) fail(TypeErrorKind::UnknownField, step.loc, show(step.predicate) + " on " + show(from));
      return f->range;
    }
    // Inverse: the subjects are instances of classes declaring the field
    // with a range compatible with `from`.
    std::set<std::string> owners;
    for (const auto& c : cu_.unit.classes) {
      for (const auto& f : c.fields) {
        if (f.predicate == step.predicate && (assignable(from, f.range) || assignable(f.range, from))) {
          owners.insert(c.uri);
        }
      }
    }
    if (owners.empty()) fail(TypeErrorKind::UnknownField, step.loc, "inverse " + show(step.predicate) + " into " + show(from));
    return owners.size() == 1 ? *owners.begin() : kAnyType;
  }

  std::string base_type(const PathExpr& p) const {
    return std::visit(
        [&](const auto& b) -> std::string {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, ThisBase>) {
            return cls_;
          } else if constexpr (std::is_same_v<B, VarBase>) {
            return lookup(b.name, p.loc);
          } else if constexpr (std::is_same_v<B, UriBase>) {
            return kAnyType;
          } else {
            return b.value.datatype();
          }
        },
        p.base);
  }

  std::string path_type(const PathExpr& p, std::size_t steps) const {
    std::string t = base_type(p);
    for (std::size_t i = 0; i < steps; ++i) t = step_type(t, p.steps[i]);
    return t;
  }

  std::string path_type(const PathExpr& p) const { return path_type(p, p.steps.size()); }

  bool numeric(const std::string& t) const { return is_top(t) || is_numeric_datatype(t); }

  std::string call(CallExpr& c, SourceLoc loc) {
    std::string recv = c.implicit_this ? cls_ : path_type(c.receiver);
    std::string owner;
    const MethodDecl* m = nullptr;
    if (is_top(recv)) {
      std::set<std::string> owners;
      for (const auto& cl : cu_.unit.classes) {
        std::string o;
        if (const MethodDecl* found = cu_.find_method(cl.uri, c.method, &o)) {
          if (owners.insert(o).second) {
            m = found;
            owner = o;
          }
        }
      }
      if (owners.size() > 1) fail(TypeErrorKind::UnknownMethod, loc, c.method + " is ambiguous on an untyped receiver");
    } else {
      m = cu_.find_method(recv, c.method, &owner);
    }
    if (!m) fail(TypeErrorKind::UnknownMethod, loc, c.method + " on " + show(recv));
    if (c.args.size() != m->params.size()) {
      fail(TypeErrorKind::ArityError, loc,
           c.method + " takes " + std::to_string(m->params.size()) + " argument(s), given " + std::to_string(c.args.size()));
    }
    for (std::size_t i = 0; i < c.args.size(); ++i) expect_assignable(expr(c.args[i]), m->params[i].type, c.args[i].loc);
    c.resolved_method = method_uri(owner, m->name);
    return m->return_type ? *m->return_type : kVoid;
  }

  std::string expr(Expr& e) {
    e.type = std::visit(
        [&](auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, PathExpr>) {
            return path_type(n);
          } else if constexpr (std::is_same_v<N, SetQueryExpr>) {
            check_target(n.target, e.loc);
            std::string target = path_type(n.target);
            expect_assignable(expr(*n.value), target, n.value->loc);
            return vocab::kXsdBoolean;
          } else if constexpr (std::is_same_v<N, ArithExpr>) {
            std::string a = expr(*n.lhs);
            std::string b = expr(*n.rhs);
            if (!numeric(a)) fail(TypeErrorKind::TypeMismatch, n.lhs->loc, "expected a numeric type, found " + show(a));
            if (!numeric(b)) fail(TypeErrorKind::TypeMismatch, n.rhs->loc, "expected a numeric type, found " + show(b));
            if (is_top(a) || is_top(b)) return kAnyType;
            return a == vocab::kXsdInt && b == vocab::kXsdInt ? vocab::kXsdInt : vocab::kXsdDouble;
          } else {
            std::string r = call(n, e.loc);
            if (r == kVoid) fail(TypeErrorKind::TypeMismatch, e.loc, "expected a value, found void call " + n.method);
            return r;
          }
        },
        e.node);
    return e.type;
  }

  void condition(Expr& e) {
    std::string t = expr(e);
    if (t != vocab::kXsdBoolean && !is_top(t)) {
      fail(TypeErrorKind::TypeMismatch, e.loc, "expected " + show(vocab::kXsdBoolean) + ", found " + show(t));
    }
  }

  bool stmt(Stmt& s) {
    return std::visit(
        [&](auto& n) -> bool {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, SetStmt>) {
            set_stmt(n, s.loc);
            return false;
          } else if constexpr (std::is_same_v<N, VarDecl>) {
            if (n.init) expect_assignable(expr(*n.init), n.type, n.init->loc);
            declare(n.name, n.type, s.loc);
            return false;
          } else if constexpr (std::is_same_v<N, IfStmt>) {
            condition(n.cond);
            bool a = nested(n.then_body);
            bool b = nested(n.else_body);
            return n.has_else && a && b;
          } else if constexpr (std::is_same_v<N, WhileStmt>) {
            condition(n.cond);
            nested(n.body);
            return false;
          } else if constexpr (std::is_same_v<N, ReturnStmt>) {
            if (ret_ == kVoid) {
              if (n.value) fail(TypeErrorKind::TypeMismatch, s.loc, "void method returns a value");
            } else {
              if (!n.value) fail(TypeErrorKind::TypeMismatch, s.loc, "expected a return value of " + show(ret_));
              expect_assignable(expr(*n.value), ret_, n.value->loc);
            }
            return true;
          } else {
            std::string r = call(n.call, s.loc);
            if (r != kVoid) {
              fail(TypeErrorKind::TypeMismatch, s.loc, "call statement discards the " + show(r) + " result of " + n.call.method);
            }
            return false;
          }
        },
        s.node);
  }

  // Set targets (and =? targets) are a variable or a path ending in a forward field.
  void check_target(const PathExpr& t, SourceLoc loc) const {
    if (t.steps.empty()) {
      if (!std::holds_alternative<VarBase>(t.base)) fail(TypeErrorKind::InvalidTarget, loc, "expected a variable or field");
    } else if (t.steps.back().dir != StepDir::Forward) {
      fail(TypeErrorKind::InvalidTarget, t.steps.back().loc, "inverse step cannot name a field");
    }
  }

  void set_stmt(SetStmt& n, SourceLoc loc) {
    std::string target;
    const PathExpr& t = n.target;
    check_target(t, loc);
    if (t.steps.empty()) {
      target = lookup(std::get<VarBase>(t.base).name, t.loc);
    } else {
      const PathStep& last = t.steps.back();
      std::string owner = path_type(t, t.steps.size() - 1);
      target = step_type(owner, last);
      if (n.op == SetOp::SetClear && !is_top(owner)) {
        const FieldDecl* f = cu_.find_field(owner, last.predicate);
        if (f && f->card.min >= 1) {
          fail(TypeErrorKind::CardinalityViolation, loc,
               "clearing " + show(last.predicate) + " violates its minimum of " + std::to_string(f->card.min));
        }
      }
    }
    if (n.value) expect_assignable(expr(*n.value), target, n.value->loc);
  }

  CheckedUnit& cu_;
  std::string cls_;
  std::string ret_;
  std::vector<std::map<std::string, std::string>> scopes_;
};

}  // namespace

CheckedUnit typecheck(Unit unit) {
  CheckedUnit cu{std::move(unit)};
  Checker(cu).run();
  return cu;
}

}  // namespace rvm::neno
