#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace rvm {

enum class TermKind { Uri, Literal, Blank };

/// An RDF term. Terms are immutable; each carries its canonical N-Quads
/// serialization, which is also its total order and identity.
class Term {
 public:
  /// The empty term sorts before every real term. Used as a range sentinel.
  Term() = default;

  static Term uri(std::string iri);
  static Term literal(std::string lexical, std::string datatype);
  static Term literal(std::string lexical);  // xsd:string
  static Term lang_literal(std::string lexical, std::string lang);
  static Term blank(std::string label);

  static Term integer(long long v);  // xsd:int
  static Term boolean(bool v);
  static Term real(double v);  // xsd:double

  TermKind kind() const { return kind_; }
  bool is_uri() const { return !key_.empty() && kind_ == TermKind::Uri; }
  bool is_literal() const { return kind_ == TermKind::Literal; }
  bool is_blank() const { return kind_ == TermKind::Blank; }
  bool empty() const { return key_.empty(); }

  /// IRI, lexical form, or blank label depending on kind.
  const std::string& value() const { return value_; }
  const std::string& datatype() const { return datatype_; }
  const std::string& lang() const { return lang_; }

  /// Canonical N-Quads form: `<iri>`, `"lex"^^<dt>`, `"lex"@lang`, `_:label`.
  const std::string& str() const { return key_; }

  friend bool operator==(const Term& a, const Term& b) { return a.key_ == b.key_; }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    return a.key_.compare(b.key_) <=> 0;
  }

 private:
  TermKind kind_ = TermKind::Uri;
  std::string value_;
  std::string datatype_;
  std::string lang_;
  std::string key_;
};

/// Escapes a string for use inside a quoted N-Quads literal.
std::string escape_literal(std::string_view s);

/// A triple in a named graph. Subject is a URI or blank node, predicate a
/// URI, graph a URI.
struct Quad {
  Term s;
  Term p;
  Term o;
  Term g;

  Quad() = default;
  Quad(Term s, Term p, Term o, Term g);

  std::string str() const;

  friend bool operator==(const Quad&, const Quad&) = default;
};

/// Numeric view of a literal; nullopt when the literal is not numeric.
struct Numeric {
  bool is_integral;
  long long i;
  double d;
};
std::optional<Numeric> as_numeric(const Term& t);
std::optional<bool> as_boolean(const Term& t);
bool is_numeric_datatype(std::string_view dt);

}  // namespace rvm

template <>
struct std::hash<rvm::Term> {
  std::size_t operator()(const rvm::Term& t) const noexcept { return std::hash<std::string>{}(t.str()); }
};
