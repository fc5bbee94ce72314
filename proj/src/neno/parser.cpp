#include "rvm/neno/parser.hpp"

#include <cctype>
#include <set>

#include "rvm/sparql.hpp"
#include "rvm/vocab.hpp"

namespace rvm::neno {

namespace {

enum class Tok { Ident, QName, Iri, Int, Double, String, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  SourceLoc loc;
  SourceLoc end;  // position just past the token
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string literal";
    default: return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      SourceLoc start = here();
      if (i_ >= src_.size()) {
        out.push_back({Tok::End, "", start, start});
        return out;
      }
      Token t = lex_one();
      t.loc = start;
      t.end = here();
      out.push_back(std::move(t));
    }
  }

 private:
  SourceLoc here() const { return {line_, col_}; }

  [[noreturn]] void fail(const std::string& expected) const { throw SyntaxError(line_, col_, expected); }

  char cur() const { return i_ < src_.size() ? src_[i_] : '\0'; }
  char at(std::size_t k) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_trivia() {
    for (;;) {
      if (i_ >= src_.size()) return;
      char c = cur();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && at(1) == '/') {
        while (i_ < src_.size() && cur() != '\n') advance();
      } else if (c == '/' && at(1) == '*') {
        advance();
        advance();
        while (i_ < src_.size() && !(cur() == '*' && at(1) == '/')) advance();
        if (i_ >= src_.size()) fail("end of comment '*/'");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  Token lex_one() {
    char c = cur();
    if (ident_start(c)) {
      std::string text;
      while (ident_char(cur())) {
        text += cur();
        advance();
      }
      if (cur() == ':') {
        text += ':';
        advance();
        while (ident_char(cur())) {
          text += cur();
          advance();
        }
        return {Tok::QName, text, {}, {}};
      }
      return {Tok::Ident, text, {}, {}};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text;
      bool real = false;
      while (std::isdigit(static_cast<unsigned char>(cur()))) {
        text += cur();
        advance();
      }
      if (cur() == '.' && std::isdigit(static_cast<unsigned char>(at(1)))) {
        real = true;
        text += cur();
        advance();
        while (std::isdigit(static_cast<unsigned char>(cur()))) {
          text += cur();
          advance();
        }
      }
      if ((cur() == 'e' || cur() == 'E') &&
          (std::isdigit(static_cast<unsigned char>(at(1))) ||
           ((at(1) == '-' || at(1) == '+') && std::isdigit(static_cast<unsigned char>(at(2)))))) {
        real = true;
        text += cur();
        advance();
        if (cur() == '-' || cur() == '+') {
          text += cur();
          advance();
        }
        while (std::isdigit(static_cast<unsigned char>(cur()))) {
          text += cur();
          advance();
        }
      }
      return {real ? Tok::Double : Tok::Int, text, {}, {}};
    }
    if (c == '"') {
      advance();
      std::string text;
      while (cur() != '"') {
        if (i_ >= src_.size() || cur() == '\n') fail("closing '\"'");
        if (cur() == '\\') {
          advance();
          switch (cur()) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case 'r': text += '\r'; break;
            case '"': text += '"'; break;
            case '\\': text += '\\'; break;
            default: fail("escape sequence");
          }
          advance();
        } else {
          text += cur();
          advance();
        }
      }
      advance();
      return {Tok::String, text, {}, {}};
    }
    if (c == '<') {
      advance();
      std::string text;
      while (cur() != '>') {
        if (i_ >= src_.size() || std::isspace(static_cast<unsigned char>(cur())) || cur() == '<') fail("'>'");
        text += cur();
        advance();
      }
      advance();
      return {Tok::Iri, text, {}, {}};
    }
    static const char* const kMulti[] = {"..", "=+", "=-", "=/", "=?", "^^"};
    for (const char* m : kMulti) {
      if (c == m[0] && at(1) == m[1]) {
        advance();
        advance();
        return {Tok::Punct, m, {}, {}};
      }
    }
    if (std::string_view("{}()[];,.=+-*/").find(c) != std::string_view::npos) {
      advance();
      return {Tok::Punct, std::string(1, c), {}, {}};
    }
    fail("a token");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {"prefix", "this", "return", "if", "else", "while", "true", "false"};
  return k;
}

constexpr int kMaxDepth = 200;

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
    for (const auto& [k, v] : sparql::builtin_prefixes()) prefixes_[k] = v;
  }

  Unit unit() {
    Unit u;
    while (is_ident("prefix")) {
      next();
      const Token& name = peek();
      if (name.kind != Tok::QName || name.text.back() != ':') fail("prefix name followed by ':'");
      std::string prefix = next().text;
      prefix.pop_back();
      if (declared_.contains(prefix)) fail_at(name, "a prefix not already declared");
      const Token& iri = peek();
      if (iri.kind != Tok::Iri) fail("'<' IRI '>'");
      std::string value = next().text;
      expect(";");
      declared_.insert(prefix);
      prefixes_[prefix] = value;
      u.prefixes.emplace_back(prefix, value);
    }
    if (peek().kind == Tok::End) fail("class declaration");
    while (peek().kind != Tok::End) u.classes.push_back(class_decl());
    return u;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  const Token& previous() const { return toks_[pos_ == 0 ? 0 : std::min(pos_ - 1, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& expected) const { fail_at(peek(), expected); }
  [[noreturn]] void fail_at(const Token& t, const std::string& expected) const {
    throw SyntaxError(t.loc.line, t.loc.col, expected + " but found " + describe(t));
  }

  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_ident(std::string_view id, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == id;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (accept(p)) return;
    if (p == ";") {
      // Report a missing terminator on the line of the statement it ends.
      const Token& prev = previous();
      throw SyntaxError(prev.end.line, prev.end.col, "';' but found " + describe(peek()));
    }
    fail("'" + std::string(p) + "'");
  }
  bool at_name() const { return peek().kind == Tok::QName || peek().kind == Tok::Iri; }
  bool at_plain_ident(std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && !keywords().contains(peek(k).text);
  }

  std::string name() {
    const Token& t = peek();
    if (t.kind == Tok::Iri) {
      next();
      if (t.text.find(':') == std::string::npos) fail_at(t, "an absolute IRI");
      return t.text;
    }
    if (t.kind != Tok::QName) fail("a prefixed name");
    next();
    auto colon = t.text.find(':');
    std::string prefix = t.text.substr(0, colon);
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) throw UnknownPrefix(prefix, t.loc.line);
    return it->second + t.text.substr(colon + 1);
  }

  std::string identifier(const char* what) {
    if (!at_plain_ident()) fail(what);
    return next().text;
  }

  void enter() {
    if (++depth_ > kMaxDepth) fail("shallower nesting");
  }
  void leave() { --depth_; }

  ClassDecl class_decl() {
    ClassDecl c;
    c.loc = peek().loc;
    c.super_class = name();
    c.uri = name();
    expect("{");
    while (!accept("}")) {
      if (peek().kind == Tok::End) fail("'}'");
      if (at_plain_ident() && is_punct("(", 1)) {
        c.methods.push_back(method_decl(std::nullopt));
      } else if (at_name() && (peek(1).kind == Tok::QName || peek(1).kind == Tok::Iri)) {
        c.fields.push_back(field_decl());
      } else if (at_name() && peek(1).kind == Tok::Ident) {
        SourceLoc loc = peek().loc;
        std::string ret = name();
        c.methods.push_back(method_decl(std::move(ret)));
        c.methods.back().loc = loc;
      } else {
        fail("field or method declaration");
      }
    }
    return c;
  }

  std::size_t card_number() {
    const Token& t = peek();
    if (t.kind != Tok::Int) fail("cardinality bound");
    next();
    try {
      return std::stoull(t.text);
    } catch (const std::exception&) {
      fail_at(t, "a smaller cardinality bound");
    }
  }

  FieldDecl field_decl() {
    FieldDecl f;
    f.loc = peek().loc;
    f.range = name();
    f.predicate = name();
    if (accept("[")) {
      f.card.min = card_number();
      f.card.max = f.card.min;
      if (accept("..")) {
        if (accept("*")) {
          f.card.max = kUnbounded;
        } else {
          f.card.max = card_number();
        }
      }
      if (f.card.min > f.card.max) fail_at(previous(), "min <= max in cardinality");
      expect("]");
    }
    expect(";");
    return f;
  }

  MethodDecl method_decl(std::optional<std::string> ret) {
    MethodDecl m;
    m.loc = peek().loc;
    m.return_type = std::move(ret);
    m.name = identifier("method name");
    expect("(");
    if (!is_punct(")")) {
      do {
        Param p;
        p.type = name();
        p.name = identifier("parameter name");
        m.params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    m.body = block();
    return m;
  }

  std::vector<Stmt> block() {
    expect("{");
    enter();
    std::vector<Stmt> out;
    while (!accept("}")) {
      if (peek().kind == Tok::End) fail("'}'");
      out.push_back(statement());
    }
    leave();
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.loc = peek().loc;
    if (is_ident("if")) {
      s.node = if_stmt();
      return s;
    }
    if (is_ident("while")) {
      next();
      expect("(");
      Expr cond = expression();
      expect(")");
      s.node = WhileStmt{std::move(cond), block()};
      return s;
    }
    if (is_ident("return")) {
      next();
      ReturnStmt r;
      if (!is_punct(";")) r.value = expression();
      expect(";");
      s.node = std::move(r);
      return s;
    }
    if (at_name() && peek(1).kind == Tok::Ident && !keywords().contains(peek(1).text)) {
      VarDecl v;
      v.type = name();
      v.name = identifier("variable name");
      if (accept("=")) v.init = expression();
      expect(";");
      s.node = std::move(v);
      return s;
    }

    Expr e = postfix();
    if (auto* call = std::get_if<CallExpr>(&e.node)) {
      expect(";");
      bool inverse = !call->receiver.steps.empty() && call->receiver.steps.back().dir == StepDir::Inverse;
      s.node = CallStmt{std::move(*call), inverse};
      return s;
    }
    auto* path = std::get_if<PathExpr>(&e.node);
    if (!path) fail("a field or variable to assign");
    SetStmt set;
    set.target = std::move(*path);
    if (accept("=")) {
      set.op = SetOp::Set;
    } else if (accept("=+")) {
      set.op = SetOp::SetPlus;
    } else if (accept("=-")) {
      set.op = SetOp::SetMinus;
    } else if (accept("=/")) {
      set.op = SetOp::SetClear;
    } else {
      fail("a set operator ('=', '=+', '=-', '=/') or a method call");
    }
    if (set.op != SetOp::SetClear) set.value = expression();
    expect(";");
    s.node = std::move(set);
    return s;
  }

  IfStmt if_stmt() {
    next();  // if
    expect("(");
    IfStmt s{expression(), {}, {}, false};
    expect(")");
    s.then_body = block();
    if (is_ident("else")) {
      next();
      s.has_else = true;
      if (is_ident("if")) {
        Stmt nested;
        nested.loc = peek().loc;
        nested.node = if_stmt();
        s.else_body.push_back(std::move(nested));
      } else {
        s.else_body = block();
      }
    }
    return s;
  }

  Expr expression() {
    enter();
    Expr lhs = additive();
    if (is_punct("=?")) {
      SourceLoc loc = peek().loc;
      next();
      auto* path = std::get_if<PathExpr>(&lhs.node);
      if (!path) fail("'=?' to follow a field or variable");
      Expr out;
      out.loc = lhs.loc;
      out.node = SetQueryExpr{std::move(*path), additive()};
      (void)loc;
      leave();
      return out;
    }
    leave();
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (is_punct("+") || is_punct("-")) {
      ArithOp op = next().text == "+" ? ArithOp::Add : ArithOp::Sub;
      Expr out;
      out.loc = lhs.loc;
      out.node = ArithExpr{op, std::move(lhs), multiplicative()};
      lhs = std::move(out);
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = postfix();
    while (is_punct("*") || is_punct("/")) {
      ArithOp op = next().text == "*" ? ArithOp::Mul : ArithOp::Div;
      Expr out;
      out.loc = lhs.loc;
      out.node = ArithExpr{op, std::move(lhs), postfix()};
      lhs = std::move(out);
    }
    return lhs;
  }

  Term literal_term() {
    const Token& t = peek();
    bool negative = false;
    if (is_punct("-") && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Double)) {
      negative = true;
      next();
    }
    const Token& v = next();
    std::string sign = negative ? "-" : "";
    switch (v.kind) {
      case Tok::Int: return Term::literal(sign + v.text, vocab::kXsdInt);
      case Tok::Double: return Term::literal(sign + v.text, vocab::kXsdDouble);
      case Tok::String:
        if (accept("^^")) {
          std::string dt = name();
          if (dt == vocab::kLangString) fail_at(t, "a datatype other than rdf:langString");
          return Term::literal(v.text, dt);
        }
        return Term::literal(v.text);
      case Tok::Ident:
        if (v.text == "true") return Term::boolean(true);
        if (v.text == "false") return Term::boolean(false);
        [[fallthrough]];
      default: fail_at(v, "a literal");
    }
  }

  bool at_literal() const {
    const Token& t = peek();
    if (t.kind == Tok::Int || t.kind == Tok::Double || t.kind == Tok::String) return true;
    if (t.kind == Tok::Ident && (t.text == "true" || t.text == "false")) return true;
    return is_punct("-") && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Double);
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect("(");
    if (!is_punct(")")) {
      do {
        args.push_back(expression());
      } while (accept(","));
    }
    expect(")");
    return args;
  }

  // base ( ('.' | '..') (name | ident '(' args ')') )*
  Expr postfix() {
    Expr e;
    e.loc = peek().loc;
    if (accept("(")) {
      enter();
      Expr inner = expression();
      expect(")");
      leave();
      if (is_punct(".") || is_punct("..")) fail("an operator (parenthesized expressions have no fields)");
      return inner;
    }
    PathExpr path;
    path.loc = peek().loc;
    if (is_ident("this")) {
      next();
      path.base = ThisBase{};
    } else if (at_plain_ident()) {
      std::string id = next().text;
      if (is_punct("(")) {
        CallExpr call;
        call.receiver.base = ThisBase{};
        call.receiver.loc = e.loc;
        call.implicit_this = true;
        call.method = std::move(id);
        call.args = arguments();
        e.node = std::move(call);
        return e;
      }
      path.base = VarBase{std::move(id)};
    } else if (at_name()) {
      path.base = UriBase{name()};
    } else if (at_literal()) {
      path.base = LiteralBase{literal_term()};
    } else {
      fail("an expression");
    }

    while (is_punct(".") || is_punct("..")) {
      const Token& dot = next();
      StepDir dir = dot.text == ".." ? StepDir::Inverse : StepDir::Forward;
      if (at_plain_ident() && is_punct("(", 1)) {
        if (dir == StepDir::Inverse) fail("a field name after '..'");
        CallExpr call;
        call.method = next().text;
        call.args = arguments();
        call.receiver = std::move(path);
        if (is_punct(".") || is_punct("..")) fail("';' (method results cannot be dereferenced)");
        e.node = std::move(call);
        return e;
      }
      PathStep step;
      step.dir = dir;
      step.loc = peek().loc;
      step.predicate = name();
      path.steps.push_back(std::move(step));
    }
    e.node = std::move(path);
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::map<std::string, std::string> prefixes_;
  std::set<std::string> declared_;
};

}  // namespace

Unit parse(std::string_view source) {
  std::vector<Token> toks = Lexer(source).run();
  Parser p(std::move(toks));
  try {
    return p.unit();
  } catch (const std::invalid_argument& e) {
    // Term construction rejected a malformed literal or IRI.
    throw SyntaxError(0, 0, std::string("a well-formed term (") + e.what() + ")");
  }
}

}  // namespace rvm::neno
