#include "rvm/nquads.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rvm/error.hpp"
#include "rvm/vocab.hpp"

namespace rvm::nquads {

namespace {

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : s_(line), line_(lineno) {}

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(line_, msg); }

  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
  }
  bool at_end() {
    skip_ws();
    return i_ >= s_.size() || s_[i_] == '#';
  }
  char peek() {
    skip_ws();
    return i_ < s_.size() ? s_[i_] : '\0';
  }

  Term term() {
    char c = peek();
    if (c == '<') return Term::uri(iri());
    if (c == '_') return blank();
    if (c == '"') return literal();
    fail(i_ >= s_.size() ? "unexpected end of line" : std::string("unexpected character '") + c + "'");
  }

  std::string iri() {
    ++i_;  // '<'
    std::string out;
    while (i_ < s_.size() && s_[i_] != '>') {
      if (s_[i_] == '\\') {
        ++i_;
        out_escape(out, true);
      } else {
        out += s_[i_++];
      }
    }
    if (i_ >= s_.size()) fail("unterminated IRI");
    ++i_;
    if (out.find(':') == std::string::npos) fail("relative IRI '" + out + "'");
    return out;
  }

  Term blank() {
    if (s_.substr(i_, 2) != "_:") fail("expected blank node");
    i_ += 2;
    std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '-' ||
                              (s_[i_] == '.' && i_ + 1 < s_.size() && s_[i_ + 1] != ' ')))
      ++i_;
    if (i_ == start) fail("empty blank node label");
    return Term::blank(std::string(s_.substr(start, i_ - start)));
  }

  Term literal() {
    ++i_;  // '"'
    std::string lex;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        ++i_;
        out_escape(lex, false);
      } else {
        lex += s_[i_++];
      }
    }
    if (i_ >= s_.size()) fail("unterminated literal");
    ++i_;
    if (i_ < s_.size() && s_[i_] == '@') {
      std::size_t start = ++i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-')) ++i_;
      if (i_ == start) fail("empty language tag");
      return Term::lang_literal(std::move(lex), std::string(s_.substr(start, i_ - start)));
    }
    if (s_.substr(i_, 2) == "^^") {
      i_ += 2;
      if (i_ >= s_.size() || s_[i_] != '<') fail("expected datatype IRI");
      std::string dt = iri();
      if (dt == vocab::kLangString) fail("rdf:langString literal without language tag");
      return Term::literal(std::move(lex), std::move(dt));
    }
    return Term::literal(std::move(lex));
  }

  void out_escape(std::string& out, bool in_iri) {
    if (i_ >= s_.size()) fail("dangling escape");
    char e = s_[i_++];
    if (e == 'u' || e == 'U') {
      std::size_t n = e == 'u' ? 4 : 8;
      if (i_ + n > s_.size()) fail("short unicode escape");
      unsigned long cp = 0;
      for (std::size_t k = 0; k < n; ++k) {
        char h = s_[i_ + k];
        if (!std::isxdigit(static_cast<unsigned char>(h))) fail("bad unicode escape");
        cp = cp * 16 + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(h))
                                                      ? h - '0'
                                                      : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
      }
      i_ += n;
      append_utf8(out, cp);
      return;
    }
    if (in_iri) fail("only unicode escapes are allowed in IRIs");
    switch (e) {
      case 't': out += '\t'; break;
      case 'b': out += '\b'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'f': out += '\f'; break;
      case '"': out += '"'; break;
      case '\'': out += '\''; break;
      case '\\': out += '\\'; break;
      default: fail(std::string("unknown escape '\\") + e + "'");
    }
  }

  Quad quad() {
    Term s = term();
    if (s.is_literal()) fail("literal subject");
    Term p = term();
    if (!p.is_uri()) fail("predicate must be an IRI");
    Term o = term();
    Term g = Term::uri(vocab::kDefaultGraph);
    if (peek() == '<') {
      g = Term::uri(iri());
    } else if (peek() == '_') {
      fail("blank node graph labels are not supported");
    }
    if (peek() != '.') fail("expected '.' at end of statement");
    ++i_;
    if (!at_end()) fail("trailing content after '.'");
    return Quad(std::move(s), std::move(p), std::move(o), std::move(g));
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t i_ = 0;
};

}  // namespace

std::vector<Quad> parse(std::string_view text) {
  std::vector<Quad> out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++lineno;
    LineParser lp(text.substr(start, end - start), lineno);
    if (!lp.at_end()) {
      try {
        out.push_back(lp.quad());
      } catch (const std::invalid_argument& e) {
        throw SyntaxError(lineno, e.what());
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

Term parse_term(std::string_view text) {
  LineParser lp(text, 1);
  try {
    Term t = lp.term();
    if (!lp.at_end()) lp.fail("trailing content after term");
    return t;
  } catch (const std::invalid_argument& e) {
    throw SyntaxError(1, e.what());
  }
}

std::string serialize(std::span<const Quad> quads) {
  std::vector<Quad> sorted(quads.begin(), quads.end());
  std::sort(sorted.begin(), sorted.end(), detail::QuadLess<IndexOrder::GSPO>{});
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::string out;
  for (const Quad& q : sorted) {
    out += q.str();
    out += '\n';
  }
  return out;
}

std::string serialize(const Dataset& data) { return serialize(data.quads()); }

std::string serialize_graph(const Dataset& data, const Term& graph) {
  return serialize(data.match({std::nullopt, std::nullopt, std::nullopt, graph}));
}

void load(Dataset& data, std::span<const Quad> quads) {
  if (data.size() == 0) {
    data.apply({}, quads);
    return;
  }
  std::set<Term> incoming;
  for (const Quad& q : quads) {
    if (q.s.is_blank()) incoming.insert(q.s);
    if (q.o.is_blank()) incoming.insert(q.o);
  }
  std::map<Term, Term> rename;
  for (const Term& b : incoming) {
    Term fresh = data.fresh_blank();
    while (incoming.contains(fresh)) fresh = data.fresh_blank();
    rename.emplace(b, fresh);
  }
  auto map = [&](const Term& t) { return t.is_blank() ? rename.at(t) : t; };
  std::vector<Quad> renamed;
  renamed.reserve(quads.size());
  for (const Quad& q : quads) renamed.emplace_back(map(q.s), q.p, map(q.o), q.g);
  data.apply({}, renamed);
}

Dataset read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Dataset data;
  const auto quads = parse(buf.str());
  data.apply({}, quads, false);
  return data;
}

void write_file(const std::filesystem::path& path, const Dataset& data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << serialize(data);
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rvm::nquads
