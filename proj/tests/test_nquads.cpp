#include "doctest.h"
#include "oracle.hpp"
#include "rvm/error.hpp"
#include "rvm/nquads.hpp"
#include "rvm/vocab.hpp"

using rvm::Dataset;
using rvm::Quad;
using rvm::Term;

TEST_CASE("single typed-literal line") {
  auto quads = rvm::nquads::parse(R"(<a:s> <a:p> "7"^^<xsd:int> <a:g> .)");
  REQUIRE(quads.size() == 1);
  CHECK(quads[0].o.is_literal());
  CHECK(quads[0].o.value() == "7");
  CHECK(quads[0].o.datatype() == "xsd:int");
  CHECK(quads[0].g == Term::uri("a:g"));
}

TEST_CASE("missing terminator reports the offending line") {
  try {
    rvm::nquads::parse("<a:s> <a:p> <a:o> <a:g> .\n\n<a:s> <a:p> <a:o> <a:g>\n");
    FAIL("expected a syntax error");
  } catch (const rvm::SyntaxError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("triples default to rvm:default; comments and blank lines are skipped") {
  auto quads = rvm::nquads::parse("# header\n\n_:b1 <a:p> \"x\"@en .\n");
  REQUIRE(quads.size() == 1);
  CHECK(quads[0].g == Term::uri(rvm::vocab::kDefaultGraph));
  CHECK(quads[0].o.lang() == "en");
}

TEST_CASE("escapes round trip") {
  Quad q(Term::uri("a:s"), Term::uri("a:p"), Term::literal("line\nbreak \"quoted\" \\ tab\t"), Term::uri("a:g"));
  auto text = rvm::nquads::serialize(std::vector<Quad>{q});
  auto back = rvm::nquads::parse(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == q);
  CHECK(rvm::nquads::parse(R"(<a:s> <a:p> "é" <a:g> .)")[0].o.value() == "\xc3\xa9");
}

TEST_CASE("serialize-parse-serialize is a fixed point on random stores") {
  oracle::RandomWorld world(99);
  for (int i = 0; i < 200; ++i) {
    Dataset d;
    for (const auto& q : world.store(10)) d.insert(q);
    d.insert(Quad(Term::blank("n" + std::to_string(i)), Term::uri("a:p"), Term::real(i / 3.0), Term::uri("a:g")));
    auto once = rvm::nquads::serialize(d);
    auto parsed = rvm::nquads::parse(once);
    CHECK(rvm::nquads::serialize(parsed) == once);
    Dataset e;
    rvm::nquads::load(e, parsed);
    CHECK(e.quads() == d.quads());
  }
}

TEST_CASE("loading into a non-empty dataset renames colliding blanks consistently") {
  Dataset d;
  d.insert(Quad(Term::blank("x"), Term::uri("a:p"), Term::uri("a:o"), Term::uri("a:g")));
  auto incoming = rvm::nquads::parse("_:x <a:q> _:y <a:h> .\n_:y <a:q> _:x <a:h> .\n");
  rvm::nquads::load(d, incoming);
  CHECK(d.size() == 3);
  auto h = d.match({std::nullopt, std::nullopt, std::nullopt, Term::uri("a:h")});
  REQUIRE(h.size() == 2);
  CHECK(h[0].s == h[1].o);
  CHECK(h[0].o == h[1].s);
  for (const auto& q : h) {
    CHECK(q.s != Term::blank("x"));
    CHECK(q.o != Term::blank("x"));
  }
}

TEST_CASE("parse_term accepts each term form") {
  CHECK(rvm::nquads::parse_term("<http://x.org/a>") == Term::uri("http://x.org/a"));
  CHECK(rvm::nquads::parse_term("\"5\"^^<http://www.w3.org/2001/XMLSchema#int>") == Term::integer(5));
  CHECK(rvm::nquads::parse_term("_:q") == Term::blank("q"));
  CHECK_THROWS_AS(rvm::nquads::parse_term("plain"), rvm::SyntaxError);
}
