#include "rvm/sparql.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "rvm/error.hpp"
#include "rvm/vocab.hpp"

namespace rvm::sparql {

namespace {

enum class Tok { IriRef, PName, Var, String, LangTag, Caret, Number, Word, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) { throw MalformedQuery("offset " + std::to_string(i) + ": " + msg); };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '<') {
      std::size_t j = src.find('>', i + 1);
      if (j == std::string_view::npos) fail("unterminated IRI");
      out.push_back({Tok::IriRef, std::string(src.substr(i + 1, j - i - 1)), start});
      i = j + 1;
    } else if (c == '?' || c == '$') {
      std::size_t j = i + 1;
      while (j < src.size() && is_name_char(src[j])) ++j;
      if (j == i + 1) fail("empty variable name");
      out.push_back({Tok::Var, std::string(src.substr(i + 1, j - i - 1)), start});
      i = j;
    } else if (c == '"' || c == '\'') {
      std::string lex;
      std::size_t j = i + 1;
      for (;; ++j) {
        if (j >= src.size()) fail("unterminated string");
        if (src[j] == c) break;
        if (src[j] == '\\') {
          if (++j >= src.size()) fail("dangling escape");
          switch (src[j]) {
            case 'n': lex += '\n'; break;
            case 't': lex += '\t'; break;
            case 'r': lex += '\r'; break;
            case '"': lex += '"'; break;
            case '\'': lex += '\''; break;
            case '\\': lex += '\\'; break;
            default: fail("unknown escape");
          }
        } else {
          lex += src[j];
        }
      }
      out.push_back({Tok::String, std::move(lex), start});
      i = j + 1;
    } else if (c == '@') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '-')) ++j;
      out.push_back({Tok::LangTag, std::string(src.substr(i + 1, j - i - 1)), start});
      i = j;
    } else if (c == '^' && i + 1 < src.size() && src[i + 1] == '^') {
      out.push_back({Tok::Caret, "^^", start});
      i += 2;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               ((c == '-' || c == '+') && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.' || src[j] == 'e' ||
                                src[j] == 'E')) {
        // A trailing '.' ends a triple rather than continuing the number.
        if (src[j] == '.' && (j + 1 >= src.size() || !std::isdigit(static_cast<unsigned char>(src[j + 1])))) break;
        ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), start});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':') {
      std::size_t j = i;
      while (j < src.size() && is_name_char(src[j])) ++j;
      if (j < src.size() && src[j] == ':') {
        ++j;
        while (j < src.size() && (is_name_char(src[j]) || (src[j] == '.' && j + 1 < src.size() &&
                                                            is_name_char(src[j + 1]))))
          ++j;
        out.push_back({Tok::PName, std::string(src.substr(i, j - i)), start});
      } else {
        out.push_back({Tok::Word, std::string(src.substr(i, j - i)), start});
      }
      i = j;
    } else if (std::string_view("{}.;,*()").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), start});
      ++i;
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

bool keyword_is(const Token& t, std::string_view kw) {
  if (t.kind != Tok::Word || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i)
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  return true;
}

// Blank nodes in patterns behave as variables that cannot be projected.
constexpr std::string_view kBlankVarPrefix = "_:";

class Parser {
 public:
  Parser(std::string_view text, const Prefixes& extra) : toks_(tokenize(text)), prefixes_(builtin_prefixes()) {
    for (const auto& [k, v] : extra) prefixes_[k] = v;
  }

  void prologue() {
    while (keyword_is(peek(), "PREFIX")) {
      next();
      Token name = expect(Tok::PName, "prefix name");
      if (name.text.back() != ':') fail("prefix name must end with ':'");
      Token iri = expect(Tok::IriRef, "prefix IRI");
      prefixes_[name.text.substr(0, name.text.size() - 1)] = iri.text;
    }
  }

  bool at_keyword(std::string_view kw) const { return keyword_is(peek(), kw); }

  SelectQuery query() {
    prologue();
    SelectQuery q;
    if (accept_keyword("ASK")) {
      q.is_ask = true;
    } else {
      expect_keyword("SELECT");
      accept_keyword("DISTINCT");
      bool star = false;
      if (accept_punct("*")) {
        star = true;
      } else {
        while (peek().kind == Tok::Var) q.vars.push_back(next().text);
        if (q.vars.empty()) fail("expected projection");
      }
      accept_keyword("WHERE");
      q.patterns = group(true);
      if (star) {
        for (const auto& tp : q.patterns)
          for (const PatternTerm* pt : {&tp.s, &tp.p, &tp.o})
            if (auto* v = std::get_if<Variable>(pt);
                v && !v->name.starts_with(kBlankVarPrefix) &&
                std::find(q.vars.begin(), q.vars.end(), v->name) == q.vars.end())
              q.vars.push_back(v->name);
      }
    }
    if (q.is_ask) {
      accept_keyword("WHERE");
      q.patterns = group(true);
    }
    trailing();
    validate(q);
    return q;
  }

  UpdateOp update() {
    prologue();
    if (accept_keyword("INSERT")) {
      expect_keyword("DATA");
      InsertData op{ground(group(false))};
      trailing();
      return op;
    }
    expect_keyword("DELETE");
    if (accept_keyword("DATA")) {
      DeleteData op{ground(group(false))};
      trailing();
      return op;
    }
    if (accept_keyword("WHERE")) {
      DeleteWhere op{group(true)};
      trailing();
      for (const auto& tp : op.patterns) check_positions(tp);
      return op;
    }
    // Bare DELETE { ... } with a ground payload.
    DeleteData op{ground(group(false))};
    trailing();
    return op;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MalformedQuery("offset " + std::to_string(peek().offset) + ": " + msg);
  }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    return next();
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail("expected " + std::string(kw));
  }
  bool accept_keyword(std::string_view kw) {
    if (!keyword_is(peek(), kw)) return false;
    ++pos_;
    return true;
  }
  bool accept_punct(std::string_view p) {
    if (peek().kind != Tok::Punct || peek().text != p) return false;
    ++pos_;
    return true;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }
  void trailing() {
    accept_punct(".");
    if (peek().kind != Tok::End) fail("unexpected trailing input '" + peek().text + "'");
  }

  std::string expand_pname(const std::string& pname) const {
    auto colon = pname.find(':');
    std::string_view prefix(pname.data(), colon);
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail("unknown prefix '" + std::string(prefix) + "'");
    return it->second + pname.substr(colon + 1);
  }

  std::string expand_iriref(const std::string& iri) const {
    auto colon = iri.find(':');
    if (colon != std::string::npos && iri.compare(colon, 3, "://") != 0) {
      auto it = prefixes_.find(std::string_view(iri.data(), colon));
      if (it != prefixes_.end()) return it->second + iri.substr(colon + 1);
    }
    return iri;
  }

  Term make_uri(const std::string& iri) const {
    try {
      return Term::uri(iri);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  PatternTerm term(bool allow_vars) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var:
        if (!allow_vars) fail("variables are not allowed in data blocks");
        return Variable{next().text};
      case Tok::IriRef: return make_uri(expand_iriref(next().text));
      case Tok::PName: {
        if (t.text.starts_with(kBlankVarPrefix)) {
          std::string label = next().text.substr(2);
          if (label.empty()) fail("empty blank node label");
          if (allow_vars) return Variable{std::string(kBlankVarPrefix) + label};
          return Term::blank(label);
        }
        return make_uri(expand_pname(next().text));
      }
      case Tok::String: {
        std::string lex = next().text;
        if (peek().kind == Tok::LangTag) return Term::lang_literal(std::move(lex), next().text);
        if (peek().kind == Tok::Caret) {
          next();
          const Token& dt = peek();
          if (dt.kind == Tok::IriRef) return Term::literal(std::move(lex), expand_iriref(next().text));
          if (dt.kind == Tok::PName) return Term::literal(std::move(lex), expand_pname(next().text));
          fail("expected datatype IRI");
        }
        return Term::literal(std::move(lex));
      }
      case Tok::Number: {
        std::string lex = next().text;
        bool real = lex.find_first_of(".eE") != std::string::npos;
        bool exp = lex.find_first_of("eE") != std::string::npos;
        return Term::literal(lex, exp ? vocab::kXsdDouble : real ? vocab::xsd("decimal") : vocab::kXsdInteger);
      }
      case Tok::Word:
        if (t.text == "a") {
          next();
          return Term::uri(vocab::kType);
        }
        if (keyword_is(t, "TRUE") || keyword_is(t, "FALSE")) return Term::boolean(keyword_is(next(), "TRUE"));
        fail("unexpected word '" + t.text + "'");
      default: fail("expected a term");
    }
  }

  void triples(std::vector<TriplePattern>& out, const std::optional<Term>& graph, bool allow_vars) {
    PatternTerm s = term(allow_vars);
    for (;;) {
      PatternTerm p = term(allow_vars);
      for (;;) {
        PatternTerm o = term(allow_vars);
        out.push_back({s, p, o, graph});
        if (!accept_punct(",")) break;
      }
      if (!accept_punct(";")) break;
      if (peek().kind == Tok::Punct && (peek().text == "." || peek().text == "}")) break;
    }
  }

  // '{' (triples | GRAPH <g> '{' triples '}')* '}'
  std::vector<TriplePattern> group(bool allow_vars) {
    std::vector<TriplePattern> out;
    expect_punct("{");
    while (!accept_punct("}")) {
      if (peek().kind == Tok::End) fail("unterminated group");
      if (accept_keyword("GRAPH")) {
        PatternTerm g = term(false);
        const Term* gt = std::get_if<Term>(&g);
        if (!gt || !gt->is_uri()) fail("GRAPH requires a URI");
        expect_punct("{");
        while (!accept_punct("}")) {
          if (peek().kind == Tok::End) fail("unterminated GRAPH group");
          triples(out, *gt, allow_vars);
          accept_punct(".");
        }
        accept_punct(".");
        continue;
      }
      triples(out, std::nullopt, allow_vars);
      accept_punct(".");
    }
    return out;
  }

  void check_positions(const TriplePattern& tp) const {
    if (auto* s = std::get_if<Term>(&tp.s); s && s->is_literal()) fail("literal in subject position");
    if (auto* p = std::get_if<Term>(&tp.p); p && !p->is_uri()) fail("predicate must be a URI");
  }

  std::vector<Quad> ground(const std::vector<TriplePattern>& patterns) const {
    std::vector<Quad> out;
    for (const auto& tp : patterns) {
      check_positions(tp);
      try {
        out.emplace_back(std::get<Term>(tp.s), std::get<Term>(tp.p), std::get<Term>(tp.o),
                         tp.graph.value_or(Term::uri(vocab::kDefaultGraph)));
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    }
    return out;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Prefixes prefixes_;
};

// Resolves a pattern position against the current partial solution.
std::optional<Term> resolve(const PatternTerm& pt, const Solution& sol) {
  if (auto* t = std::get_if<Term>(&pt)) return *t;
  auto it = sol.find(std::get<Variable>(pt).name);
  if (it == sol.end()) return std::nullopt;
  return it->second;
}

// Tries to extend sol with the bindings implied by q; false on clash.
bool unify(const PatternTerm& pt, const Term& value, Solution& sol, std::vector<std::string>& added) {
  auto* v = std::get_if<Variable>(&pt);
  if (!v) return std::get<Term>(pt) == value;
  auto [it, inserted] = sol.try_emplace(v->name, value);
  if (inserted) {
    added.push_back(v->name);
    return true;
  }
  return it->second == value;
}

void search(const Dataset& data, std::span<const TriplePattern> patterns, std::vector<bool>& done, Solution& sol,
            std::vector<Solution>& out) {
  // Pick the unprocessed pattern with the most bound positions.
  int best = -1;
  int best_bound = -1;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (done[i]) continue;
    int bound = 0;
    for (const PatternTerm* pt : {&patterns[i].s, &patterns[i].p, &patterns[i].o})
      if (resolve(*pt, sol)) ++bound;
    if (bound > best_bound) {
      best_bound = bound;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    out.push_back(sol);
    return;
  }
  const TriplePattern& tp = patterns[best];
  QuadPattern qp{resolve(tp.s, sol), resolve(tp.p, sol), resolve(tp.o, sol), tp.graph};
  if ((qp.s && qp.s->is_literal()) || (qp.p && !qp.p->is_uri())) return;
  done[best] = true;
  for (const Quad& q : data.match(qp)) {
    std::vector<std::string> added;
    if (unify(tp.s, q.s, sol, added) && unify(tp.p, q.p, sol, added) && unify(tp.o, q.o, sol, added))
      search(data, patterns, done, sol, out);
    for (const auto& name : added) sol.erase(name);
  }
  done[best] = false;
}

std::string pattern_term_string(const PatternTerm& pt) {
  if (auto* v = std::get_if<Variable>(&pt)) {
    if (v->name.starts_with(kBlankVarPrefix)) return v->name;
    return "?" + v->name;
  }
  return std::get<Term>(pt).str();
}

}  // namespace

const Prefixes& builtin_prefixes() {
  static const Prefixes prefixes = {
      {"rdf", std::string(vocab::kRdf)}, {"rdfs", std::string(vocab::kRdfs)}, {"xsd", std::string(vocab::kXsd)},
      {"owl", std::string(vocab::kOwl)}, {"rvm", std::string(vocab::kRvm)},
  };
  return prefixes;
}

SelectQuery parse_query(std::string_view text, const Prefixes& extra) { return Parser(text, extra).query(); }

UpdateOp parse_update(std::string_view text, const Prefixes& extra) { return Parser(text, extra).update(); }

std::variant<SelectQuery, UpdateOp> parse(std::string_view text, const Prefixes& extra) {
  Parser probe(text, extra);
  probe.prologue();
  if (probe.at_keyword("INSERT") || probe.at_keyword("DELETE")) return parse_update(text, extra);
  return parse_query(text, extra);
}

void validate(const SelectQuery& q) {
  std::set<std::string> seen;
  for (const auto& tp : q.patterns) {
    if (auto* s = std::get_if<Term>(&tp.s); s && s->is_literal())
      throw MalformedQuery("literal in subject position");
    if (auto* p = std::get_if<Term>(&tp.p); p && !p->is_uri()) throw MalformedQuery("predicate must be a URI");
    if (tp.graph && !tp.graph->is_uri()) throw MalformedQuery("graph scope must be a URI");
    for (const PatternTerm* pt : {&tp.s, &tp.p, &tp.o})
      if (auto* v = std::get_if<Variable>(pt)) seen.insert(v->name);
  }
  std::set<std::string> projected;
  for (const auto& v : q.vars) {
    if (!seen.contains(v)) throw MalformedQuery("projected variable ?" + v + " does not occur in the pattern");
    if (!projected.insert(v).second) throw MalformedQuery("variable ?" + v + " projected twice");
  }
}

std::vector<Solution> solve(const Dataset& data, std::span<const TriplePattern> patterns) {
  std::vector<Solution> out;
  std::vector<bool> done(patterns.size(), false);
  Solution sol;
  search(data, patterns, done, sol, out);
  return out;
}

std::vector<Solution> select(const Dataset& data, const SelectQuery& q) {
  validate(q);
  std::set<std::vector<Term>> rows;
  for (const Solution& sol : solve(data, q.patterns)) {
    std::vector<Term> row;
    row.reserve(q.vars.size());
    for (const auto& v : q.vars) row.push_back(sol.at(v));
    rows.insert(std::move(row));
  }
  std::vector<Solution> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    Solution sol;
    for (std::size_t i = 0; i < row.size(); ++i) sol.emplace(q.vars[i], row[i]);
    out.push_back(std::move(sol));
  }
  return out;
}

std::vector<Solution> select(const GraphStore& store, const SelectQuery& q) {
  return store.read([&](const Dataset& d) { return select(d, q); });
}

bool ask(const Dataset& data, const SelectQuery& q) {
  validate(q);
  return !solve(data, q.patterns).empty();
}

std::size_t update(Dataset& data, const UpdateOp& op) {
  if (auto* ins = std::get_if<InsertData>(&op)) return data.apply({}, ins->quads);
  if (auto* del = std::get_if<DeleteData>(&op)) return data.apply(del->quads, {});
  const auto& dw = std::get<DeleteWhere>(op);
  std::set<Quad, detail::QuadLess<IndexOrder::GSPO>> doomed;
  for (const Solution& sol : solve(data, dw.patterns)) {
    for (const auto& tp : dw.patterns) {
      // A pattern without a graph scope deletes the match in every graph.
      QuadPattern qp{resolve(tp.s, sol), resolve(tp.p, sol), resolve(tp.o, sol), tp.graph};
      for (const Quad& q : data.match(qp)) doomed.insert(q);
    }
  }
  std::vector<Quad> removals(doomed.begin(), doomed.end());
  return data.apply(removals, {});
}

std::size_t update(GraphStore& store, const UpdateOp& op) {
  return store.write([&](Dataset& d) { return update(d, op); });
}

std::string to_string(const SelectQuery& q) {
  std::string out = q.is_ask ? "ASK" : "SELECT";
  for (const auto& v : q.vars) out += " ?" + v;
  out += "\n  WHERE {";
  for (const auto& tp : q.patterns) {
    std::string triple = pattern_term_string(tp.s) + " " + pattern_term_string(tp.p) + " " + pattern_term_string(tp.o);
    if (tp.graph)
      out += "\n    GRAPH " + tp.graph->str() + " { " + triple + " }";
    else
      out += "\n    " + triple + " .";
  }
  out += " }";
  return out;
}

}  // namespace rvm::sparql
