#include "rvm/term.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

#include "rvm/vocab.hpp"

namespace rvm {

namespace {

constexpr std::array kIntegralTypes = {"int",  "integer", "long", "short", "byte", "nonNegativeInteger",
                                       "positiveInteger", "negativeInteger", "nonPositiveInteger",
                                       "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte"};
constexpr std::array kRealTypes = {"double", "float", "decimal"};

bool is_xsd(std::string_view dt, std::string_view local) {
  return dt.size() == vocab::kXsd.size() + local.size() && dt.starts_with(vocab::kXsd) &&
         dt.substr(vocab::kXsd.size()) == local;
}

bool is_integral_type(std::string_view dt) {
  for (const char* local : kIntegralTypes)
    if (is_xsd(dt, local)) return true;
  return false;
}

bool is_real_type(std::string_view dt) {
  for (const char* local : kRealTypes)
    if (is_xsd(dt, local)) return true;
  return false;
}

}  // namespace

std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

Term Term::uri(std::string iri) {
  if (iri.empty() || iri.find(':') == std::string::npos)
    throw std::invalid_argument("not an absolute IRI: '" + iri + "'");
  for (char c : iri)
    if (c == '<' || c == '>' || c == '"' || c == ' ' || c == '\n')
      throw std::invalid_argument("illegal character in IRI: '" + iri + "'");
  Term t;
  t.kind_ = TermKind::Uri;
  t.key_ = "<" + iri + ">";
  t.value_ = std::move(iri);
  return t;
}

Term Term::literal(std::string lexical, std::string datatype) {
  if (datatype == vocab::kLangString)
    throw std::invalid_argument("rdf:langString literal requires a language tag");
  if (datatype.find(':') == std::string::npos)
    throw std::invalid_argument("literal datatype is not an IRI: '" + datatype + "'");
  Term t;
  t.kind_ = TermKind::Literal;
  t.key_ = "\"" + escape_literal(lexical) + "\"^^<" + datatype + ">";
  t.value_ = std::move(lexical);
  t.datatype_ = std::move(datatype);
  return t;
}

Term Term::literal(std::string lexical) { return literal(std::move(lexical), vocab::kXsdString); }

Term Term::lang_literal(std::string lexical, std::string lang) {
  if (lang.empty()) return literal(std::move(lexical));
  Term t;
  t.kind_ = TermKind::Literal;
  t.key_ = "\"" + escape_literal(lexical) + "\"@" + lang;
  t.value_ = std::move(lexical);
  t.datatype_ = vocab::kLangString;
  t.lang_ = std::move(lang);
  return t;
}

Term Term::blank(std::string label) {
  if (label.empty()) throw std::invalid_argument("empty blank node label");
  Term t;
  t.kind_ = TermKind::Blank;
  t.key_ = "_:" + label;
  t.value_ = std::move(label);
  return t;
}

Term Term::integer(long long v) { return literal(std::to_string(v), vocab::kXsdInt); }

Term Term::boolean(bool v) { return literal(v ? "true" : "false", vocab::kXsdBoolean); }

Term Term::real(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string lex(buf.data(), end);
  if (std::isinf(v)) lex = v > 0 ? "INF" : "-INF";
  if (std::isnan(v)) lex = "NaN";
  return literal(std::move(lex), vocab::kXsdDouble);
}

Quad::Quad(Term s_, Term p_, Term o_, Term g_)
    : s(std::move(s_)), p(std::move(p_)), o(std::move(o_)), g(std::move(g_)) {
  if (s.empty() || s.is_literal()) throw std::invalid_argument("quad subject must be a URI or blank node");
  if (!p.is_uri()) throw std::invalid_argument("quad predicate must be a URI");
  if (o.empty()) throw std::invalid_argument("quad object is empty");
  if (!g.is_uri()) throw std::invalid_argument("quad graph must be a URI");
}

std::string Quad::str() const { return s.str() + " " + p.str() + " " + o.str() + " " + g.str() + " ."; }

bool is_numeric_datatype(std::string_view dt) { return is_integral_type(dt) || is_real_type(dt); }

std::optional<Numeric> as_numeric(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  const std::string& lex = t.value();
  const char* first = lex.data();
  const char* last = lex.data() + lex.size();
  if (!lex.empty() && lex.front() == '+') ++first;
  if (is_integral_type(t.datatype())) {
    long long v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) return std::nullopt;
    return Numeric{true, v, static_cast<double>(v)};
  }
  if (is_real_type(t.datatype())) {
    if (lex == "INF") return Numeric{false, 0, HUGE_VAL};
    if (lex == "-INF") return Numeric{false, 0, -HUGE_VAL};
    double v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) return std::nullopt;
    return Numeric{false, 0, v};
  }
  return std::nullopt;
}

std::optional<bool> as_boolean(const Term& t) {
  if (!t.is_literal() || t.datatype() != vocab::kXsdBoolean) return std::nullopt;
  if (t.value() == "true" || t.value() == "1") return true;
  if (t.value() == "false" || t.value() == "0") return false;
  return std::nullopt;
}

}  // namespace rvm
