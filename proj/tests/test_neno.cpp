#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rvm/neno/parser.hpp"
#include "rvm/neno/typecheck.hpp"
#include "rvm/vocab.hpp"

using namespace rvm::neno;

namespace {

std::string read_data(const std::string& name) {
  std::ifstream in(std::string(RVM_DATA_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kLanl = "http://www.lanl.gov";
const std::string kFoaf = "http://xmlns.com/foaf/0.1/";

std::string person_with(const std::string& extra_members) {
  return "prefix lanl: <http://www.lanl.gov>;\nprefix foaf: <http://xmlns.com/foaf/0.1/>;\n"
         "foaf:Agent lanl:Person {\n  xsd:string foaf:name[1];\n  lanl:Person foaf:knows[0..*];\n" +
         extra_members + "\n}\n";
}

TypeErrorKind check_error(const std::string& src) {
  try {
    typecheck(parse(src));
  } catch (const TypeError& e) {
    return e.kind();
  }
  FAIL("expected a type error");
  return TypeErrorKind::TypeMismatch;
}

}  // namespace

TEST_CASE("Person.neno parses into one class with two fields and four methods") {
  Unit u = parse(read_data("Person.neno"));
  REQUIRE(u.classes.size() == 1);
  const ClassDecl& c = u.classes[0];
  CHECK(c.uri == kLanl + "Person");
  CHECK(c.super_class == kFoaf + "Agent");
  REQUIRE(c.fields.size() == 2);
  CHECK(c.fields[0].predicate == kFoaf + "name");
  CHECK(c.fields[0].card == Cardinality{1, 1});
  CHECK(c.fields[1].card == Cardinality{0, kUnbounded});
  REQUIRE(c.methods.size() == 4);
  CHECK(c.methods[0].name == "makeFriend");
  CHECK_FALSE(c.methods[0].return_type);
  CHECK(c.methods[3].return_type == rvm::vocab::kXsdBoolean);
  CHECK(std::holds_alternative<SetQueryExpr>(std::get<ReturnStmt>(c.methods[3].body[0].node).value->node));
  CHECK(std::get<SetStmt>(c.methods[2].body[0].node).op == SetOp::SetClear);
  CHECK_NOTHROW(typecheck(u));
}

TEST_CASE("empty class") {
  Unit u = parse("prefix lanl: <http://www.lanl.gov>;\nprefix foaf: <http://xmlns.com/foaf/0.1/>;\nfoaf:Agent lanl:Person { }");
  REQUIRE(u.classes.size() == 1);
  CHECK(u.classes[0].fields.empty());
  CHECK(u.classes[0].methods.empty());
}

TEST_CASE("missing semicolon is reported on its line") {
  std::string src = read_data("Person.neno");
  auto pos = src.find("this.foaf:knows =- p;");
  REQUIRE(pos != std::string::npos);
  int line = 1 + static_cast<int>(std::count(src.begin(), src.begin() + static_cast<long>(pos), '\n'));
  src.erase(src.find(';', pos), 1);
  try {
    parse(src);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == line);
  }
}

TEST_CASE("undeclared prefix") {
  try {
    parse("foaf:Agent ex:Thing { }");
    FAIL("expected UnknownPrefix");
  } catch (const UnknownPrefix& e) {
    CHECK(e.prefix() == "foaf");
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse("prefix a: <x:y>; prefix a: <x:z>; rdfs:Resource a:C { }"), SyntaxError);
}

TEST_CASE("grammar details") {
  Unit u = parse(person_with(R"(
    xsd:double calc(xsd:int n) {
      xsd:double y = 1 + 2 * n - -3 / 2.5;
      while (this.foaf:knows =? lanl:marko) {
        if (true) { this.foaf:knows =- lanl:marko; } else if (false) { y = 0.5; } else { y =+ 1e3; }
      }
      lanl:marko..foaf:knows.makeFriend(this);
      makeFriend(lanl:marko);
      return y;
    }
    makeFriend(lanl:Person p) { this.foaf:knows =+ p; }
  )"));
  const MethodDecl& m = u.classes[0].methods[0];
  const auto& decl = std::get<VarDecl>(m.body[0].node);
  // 1 + (2*n) - (-3/2.5) is left associated: ((1 + 2*n) - (-3/2.5))
  const auto& top = std::get<ArithExpr>(decl.init->node);
  CHECK(top.op == ArithOp::Sub);
  CHECK(std::get<ArithExpr>(top.lhs->node).op == ArithOp::Add);
  const auto& div = std::get<ArithExpr>(top.rhs->node);
  CHECK(std::get<LiteralBase>(std::get<PathExpr>(div.lhs->node).base).value == rvm::Term::literal("-3", rvm::vocab::kXsdInt));
  const auto& inv = std::get<CallStmt>(m.body[2].node);
  CHECK(inv.inverse);
  CHECK(inv.call.receiver.steps[0].dir == StepDir::Inverse);
  CHECK(std::get<CallStmt>(m.body[3].node).call.implicit_this);
  CheckedUnit cu = typecheck(u);
  const auto& checked = std::get<VarDecl>(cu.unit.classes[0].methods[0].body[0].node);
  CHECK(checked.init->type == rvm::vocab::kXsdDouble);
  CHECK(std::get<CallStmt>(cu.unit.classes[0].methods[0].body[2].node).call.resolved_method ==
        method_uri(kLanl + "Person", "makeFriend"));
}

TEST_CASE("typecheck accepts the set-plus field edit") {
  CHECK_NOTHROW(typecheck(parse(person_with("makeFriend(lanl:Person p) { this.foaf:knows =+ p; }"))));
}

TEST_CASE("typecheck rejects a value outside the field range") {
  CHECK(check_error(person_with("bad(lanl:Person p) { this.foaf:name =+ p; }")) == TypeErrorKind::TypeMismatch);
}

TEST_CASE("typecheck rejects a wrong argument count") {
  CHECK(check_error(person_with("xsd:boolean isFriend(lanl:Person p) { return this.foaf:knows =? p; }\n"
                                "xsd:boolean both(lanl:Person p, lanl:Person q) { return isFriend(p, q); }")) ==
        TypeErrorKind::ArityError);
}

TEST_CASE("typecheck error kinds") {
  CHECK(check_error(person_with("m() { this.foaf:age =+ 1; }")) == TypeErrorKind::UnknownField);
  CHECK(check_error(person_with("m() { q.foaf:knows =+ this; }")) == TypeErrorKind::UnknownVariable);
  CHECK(check_error(person_with("m() { this.nothing(); }")) == TypeErrorKind::UnknownMethod);
  CHECK(check_error(person_with("m(lanl:Person p, lanl:Person p) { }")) == TypeErrorKind::DuplicateDeclaration);
  CHECK(check_error(person_with("m() { } m() { }")) == TypeErrorKind::DuplicateDeclaration);
  CHECK(check_error(person_with("xsd:int m() { if (true) { return 1; } }")) == TypeErrorKind::MissingReturn);
  CHECK(check_error(person_with("xsd:int m() { return 1; return 2; }")) == TypeErrorKind::UnreachableCode);
  CHECK(check_error(person_with("m() { this.foaf:name =/; }")) == TypeErrorKind::CardinalityViolation);
  CHECK(check_error(person_with("m() { xsd:int x = \"a\" * 2; }")) == TypeErrorKind::TypeMismatch);
  CHECK(check_error(person_with("m() { if (1) { } }")) == TypeErrorKind::TypeMismatch);
  CHECK(check_error(person_with("m() { this..foaf:knows = this; }")) == TypeErrorKind::InvalidTarget);
  CHECK(check_error(person_with("xsd:int m() { return 1; } n() { m(); }")) == TypeErrorKind::TypeMismatch);
  CHECK_NOTHROW(typecheck(parse(person_with("xsd:int m() { if (true) { return 1; } else { return 2; } }"))));
}

// Random program text over a small generator grammar, used for the
// print/parse round trip.
namespace {

struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  std::string name() {
    static const char* const names[] = {"foaf:knows", "foaf:name", "lanl:marko", "<http://ex.org/a#b>", "xsd:int",
                                        "lanl:", "rvm:x"};
    return names[pick(7)];
  }
  std::string literal() {
    static const char* const lits[] = {"1", "-42", "2.65", "1e3", "true", "false", "\"a\\\"b\"", "\"7\"^^xsd:int",
                                       "\"x\"^^<http://ex.org/dt>"};
    return lits[pick(9)];
  }
  std::string path() {
    std::string base;
    switch (pick(4)) {
      case 0: base = "this"; break;
      case 1: base = "v" + std::to_string(pick(3)); break;
      case 2: base = name(); break;
      default: base = literal();
    }
    int steps = pick(3);
    for (int i = 0; i < steps; ++i) base += (pick(2) ? "." : "..") + name();
    return base;
  }
  std::string args(int depth) {
    std::string out;
    int n = pick(3);
    for (int i = 0; i < n; ++i) out += (i ? ", " : "") + expr(depth + 1);
    return out;
  }
  std::string expr(int depth) {
    if (depth > 3) return path();
    switch (pick(6)) {
      case 0: return expr(depth + 1) + " + " + expr(depth + 1);
      case 1: return "(" + expr(depth + 1) + ") * " + path();
      case 2: return "(" + path() + " =? " + expr(depth + 1) + ")";
      case 3: return "f" + std::to_string(pick(2)) + "(" + args(depth) + ")";
      case 4: return path() + ".m(" + args(depth) + ")";
      default: return path();
    }
  }
  std::string target() {
    if (pick(2)) return "v" + std::to_string(pick(3));
    return path() + "." + name();
  }
  std::string stmt(int depth) {
    static const char* const ops[] = {" = ", " =+ ", " =- "};
    switch (depth > 2 ? pick(4) : pick(7)) {
      case 0: return target() + ops[pick(3)] + expr(0) + ";";
      case 1: return target() + " =/;";
      case 2: return name() + " v" + std::to_string(pick(3)) + (pick(2) ? " = " + expr(0) : "") + ";";
      case 3: return path() + ".m(" + args(0) + ");";
      case 4: return "if (" + expr(0) + ") " + block(depth + 1) + (pick(2) ? " else " + block(depth + 1) : "");
      case 5: return "while (" + expr(0) + ") " + block(depth + 1);
      default: return pick(2) ? "return;" : "return " + expr(0) + ";";
    }
  }
  std::string block(int depth) {
    std::string out = "{ ";
    int n = pick(4);
    for (int i = 0; i < n; ++i) out += stmt(depth) + " ";
    return out + "}";
  }
  std::string unit() {
    std::string out = "prefix lanl: <http://www.lanl.gov>; prefix foaf: <http://xmlns.com/foaf/0.1/>;\n";
    int classes = 1 + pick(2);
    for (int c = 0; c < classes; ++c) {
      out += name() + " " + name() + " {\n";
      int fields = pick(3);
      for (int i = 0; i < fields; ++i) {
        static const char* const cards[] = {"", "[1]", "[0..*]", "[2..5]", "[3..*]"};
        out += name() + " " + name() + cards[pick(5)] + ";\n";
      }
      int methods = pick(3);
      for (int i = 0; i < methods; ++i) {
        out += (pick(2) ? name() + " " : "") + "m" + std::to_string(i) + "(" + (pick(2) ? name() + " v0" : "") + ") " +
               block(0) + "\n";
      }
      out += "}\n";
    }
    return out;
  }
};

}  // namespace

TEST_CASE("print then parse reproduces the tree") {
  Unit person = parse(read_data("Person.neno"));
  CHECK(parse(print(person)) == person);
  Gen gen(7);
  for (int i = 0; i < 500; ++i) {
    std::string src = gen.unit();
    Unit u = parse(src);
    std::string printed = print(u);
    INFO(src);
    INFO(printed);
    CHECK(parse(printed) == u);
  }
}

TEST_CASE("rejection is total on random input") {
  std::mt19937 rng(11);
  std::string person = read_data("Person.neno");
  auto attempt = [](const std::string& src) {
    try {
      parse(src);
    } catch (const SyntaxError&) {
    } catch (const UnknownPrefix&) {
    }
  };
  for (int i = 0; i < 3000; ++i) {
    std::string src;
    if (i % 2 == 0) {
      int n = std::uniform_int_distribution<int>(0, 200)(rng);
      for (int k = 0; k < n; ++k) src += static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
    } else {
      src = person;
      int edits = std::uniform_int_distribution<int>(1, 4)(rng);
      for (int k = 0; k < edits && !src.empty(); ++k) {
        std::size_t at = std::uniform_int_distribution<std::size_t>(0, src.size() - 1)(rng);
        if (rng() % 2) {
          src.erase(at, 1 + rng() % 5);
        } else {
          src.insert(at, 1, "{}();.=+-/*<>\"[]:x1 "[rng() % 21]);
        }
      }
    }
    CHECK_NOTHROW(attempt(src));
  }
  CHECK_THROWS_AS(parse(person_with("m() { v = " + std::string(5000, '(') + "1; }")), SyntaxError);
  CHECK_THROWS_AS(parse(""), SyntaxError);
}
