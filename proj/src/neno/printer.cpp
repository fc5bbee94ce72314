#include <cctype>
#include <regex>
#include <sstream>

#include "rvm/neno/parser.hpp"
#include "rvm/sparql.hpp"
#include "rvm/vocab.hpp"

namespace rvm::neno {

namespace {

bool local_ok(std::string_view s) {
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

class Printer {
 public:
  explicit Printer(const Unit& unit) {
    for (const auto& [k, v] : sparql::builtin_prefixes()) prefixes_[k] = v;
    for (const auto& [k, v] : unit.prefixes) prefixes_[k] = v;
  }

  std::string name(const std::string& iri) const {
    const std::string* best_prefix = nullptr;
    std::size_t best_len = 0;
    for (const auto& [prefix, ns] : prefixes_) {
      if (ns.size() < best_len || !iri.starts_with(ns) || !local_ok(std::string_view(iri).substr(ns.size()))) continue;
      if (best_prefix && ns.size() == best_len) continue;
      best_prefix = &prefix;
      best_len = ns.size();
    }
    if (best_prefix) return *best_prefix + ":" + iri.substr(best_len);
    return "<" + iri + ">";
  }

  std::string literal(const Term& t) const {
    static const std::regex int_re("-?[0-9]+");
    static const std::regex dbl_re("-?[0-9]+(\\.[0-9]+)?([eE][-+]?[0-9]+)?");
    const std::string& lex = t.value();
    if (t.datatype() == vocab::kXsdInt && std::regex_match(lex, int_re)) return lex;
    if (t.datatype() == vocab::kXsdDouble && std::regex_match(lex, dbl_re) && !std::regex_match(lex, int_re)) {
      return lex;
    }
    if (t.datatype() == vocab::kXsdBoolean && (lex == "true" || lex == "false")) return lex;
    std::string out = "\"";
    for (char c : lex) {
      switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        default: out += c;
      }
    }
    out += '"';
    if (t.datatype() != vocab::kXsdString) out += "^^" + name(t.datatype());
    return out;
  }

  std::string path(const PathExpr& p) const {
    std::string out = std::visit(
        [&](const auto& b) -> std::string {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, ThisBase>) {
            return "this";
          } else if constexpr (std::is_same_v<B, VarBase>) {
            return b.name;
          } else if constexpr (std::is_same_v<B, UriBase>) {
            return name(b.iri);
          } else {
            return literal(b.value);
          }
        },
        p.base);
    for (const auto& s : p.steps) out += (s.dir == StepDir::Forward ? "." : "..") + name(s.predicate);
    return out;
  }

  std::string call(const CallExpr& c) const {
    std::string out = c.implicit_this ? "" : path(c.receiver) + ".";
    out += c.method + "(";
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      if (i) out += ", ";
      out += expr(c.args[i]);
    }
    return out + ")";
  }

  std::string operand(const Expr& e) const {
    if (std::holds_alternative<ArithExpr>(e.node) || std::holds_alternative<SetQueryExpr>(e.node)) {
      return "(" + expr(e) + ")";
    }
    return expr(e);
  }

  std::string expr(const Expr& e) const {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, PathExpr>) {
            return path(n);
          } else if constexpr (std::is_same_v<N, SetQueryExpr>) {
            return path(n.target) + " =? " + operand(*n.value);
          } else if constexpr (std::is_same_v<N, ArithExpr>) {
            static const char* const ops[] = {" + ", " - ", " * ", " / "};
            return operand(*n.lhs) + ops[static_cast<int>(n.op)] + operand(*n.rhs);
          } else {
            return call(n);
          }
        },
        e.node);
  }

  void block(std::ostringstream& out, const std::vector<Stmt>& body, int indent) const {
    out << "{\n";
    for (const auto& s : body) stmt(out, s, indent + 1);
    out << std::string(2 * indent, ' ') << "}";
  }

  void stmt(std::ostringstream& out, const Stmt& s, int indent) const {
    std::string pad(2 * indent, ' ');
    out << pad;
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, SetStmt>) {
            static const char* const ops[] = {" = ", " =+ ", " =- ", " =/"};
            out << path(n.target) << ops[static_cast<int>(n.op)];
            if (n.value) out << expr(*n.value);
            out << ";";
          } else if constexpr (std::is_same_v<N, VarDecl>) {
            out << name(n.type) << " " << n.name;
            if (n.init) out << " = " << expr(*n.init);
            out << ";";
          } else if constexpr (std::is_same_v<N, IfStmt>) {
            out << "if (" << expr(n.cond) << ") ";
            block(out, n.then_body, indent);
            if (n.has_else) {
              out << " else ";
              block(out, n.else_body, indent);
            }
          } else if constexpr (std::is_same_v<N, WhileStmt>) {
            out << "while (" << expr(n.cond) << ") ";
            block(out, n.body, indent);
          } else if constexpr (std::is_same_v<N, ReturnStmt>) {
            out << "return";
            if (n.value) out << " " << expr(*n.value);
            out << ";";
          } else {
            out << call(n.call) << ";";
          }
        },
        s.node);
    out << "\n";
  }

  static std::string card(const Cardinality& c) {
    if (c.min == 0 && c.max == kUnbounded) return "";
    if (c.min == c.max) return "[" + std::to_string(c.min) + "]";
    return "[" + std::to_string(c.min) + ".." + (c.max == kUnbounded ? "*" : std::to_string(c.max)) + "]";
  }

  std::string unit(const Unit& u) const {
    std::ostringstream out;
    for (const auto& [k, v] : u.prefixes) out << "prefix " << k << ": <" << v << ">;\n";
    for (const auto& c : u.classes) {
      out << "\n" << name(c.super_class) << " " << name(c.uri) << " {\n";
      for (const auto& f : c.fields) out << "  " << name(f.range) << " " << name(f.predicate) << card(f.card) << ";\n";
      for (const auto& m : c.methods) {
        out << "\n  ";
        if (m.return_type) out << name(*m.return_type) << " ";
        out << m.name << "(";
        for (std::size_t i = 0; i < m.params.size(); ++i) {
          if (i) out << ", ";
          out << name(m.params[i].type) << " " << m.params[i].name;
        }
        out << ") ";
        block(out, m.body, 1);
        out << "\n";
      }
      out << "}\n";
    }
    return out.str();
  }

 private:
  std::map<std::string, std::string> prefixes_;
};

}  // namespace

std::string print(const Unit& unit) { return Printer(unit).unit(unit); }

std::string print(const Expr& expr, const Unit& context) { return Printer(context).expr(expr); }

}  // namespace rvm::neno
