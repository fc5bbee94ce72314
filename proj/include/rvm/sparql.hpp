#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rvm/dataset.hpp"
#include "rvm/graph_store.hpp"

// A SPARQL subset: SELECT/ASK over basic graph patterns with optional
// GRAPH <uri> groups, INSERT DATA, DELETE DATA, DELETE WHERE, and the bare
// `DELETE { ... }` form (read as DELETE DATA).
namespace rvm::sparql {

struct Variable {
  std::string name;
  friend bool operator==(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Term, Variable>;

struct TriplePattern {
  PatternTerm s;
  PatternTerm p;
  PatternTerm o;
  std::optional<Term> graph;  // nullopt: any graph

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct SelectQuery {
  std::vector<std::string> vars;
  std::vector<TriplePattern> patterns;
  bool is_ask = false;

  friend bool operator==(const SelectQuery&, const SelectQuery&) = default;
};

struct InsertData {
  std::vector<Quad> quads;
};
struct DeleteData {
  std::vector<Quad> quads;
};
struct DeleteWhere {
  std::vector<TriplePattern> patterns;
};
using UpdateOp = std::variant<InsertData, DeleteData, DeleteWhere>;

using Prefixes = std::map<std::string, std::string, std::less<>>;

/// rdf, rdfs, xsd, owl, rvm.
const Prefixes& builtin_prefixes();

/// Variable name -> bound term.
using Solution = std::map<std::string, Term, std::less<>>;

/// Parses a SELECT or ASK query. Angle-bracketed names whose scheme is a
/// known prefix (`<foaf:knows>`) are expanded like prefixed names.
SelectQuery parse_query(std::string_view text, const Prefixes& extra = {});
UpdateOp parse_update(std::string_view text, const Prefixes& extra = {});

/// Either form, dispatched on the leading keyword.
std::variant<SelectQuery, UpdateOp> parse(std::string_view text, const Prefixes& extra = {});

/// Throws MalformedQuery when a projected variable does not occur in any
/// pattern or a pattern has a literal subject/predicate.
void validate(const SelectQuery& q);

/// Deduplicated projected solutions ordered by the canonical forms of the
/// projected terms, in projection order.
std::vector<Solution> select(const Dataset& data, const SelectQuery& q);
std::vector<Solution> select(const GraphStore& store, const SelectQuery& q);
bool ask(const Dataset& data, const SelectQuery& q);

/// Every complete assignment satisfying the patterns (no projection).
std::vector<Solution> solve(const Dataset& data, std::span<const TriplePattern> patterns);

/// Returns the number of quads changed.
std::size_t update(Dataset& data, const UpdateOp& op);
std::size_t update(GraphStore& store, const UpdateOp& op);

/// Textual SPARQL with full IRIs.
std::string to_string(const SelectQuery& q);

}  // namespace rvm::sparql
