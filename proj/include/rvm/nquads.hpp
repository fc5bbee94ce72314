#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rvm/dataset.hpp"
#include "rvm/graph_store.hpp"

namespace rvm::nquads {

/// Parses N-Quads text. Triples without a graph label go to rvm:default.
/// Throws SyntaxError carrying the 1-based line number.
std::vector<Quad> parse(std::string_view text);

/// Parses a single term in N-Quads syntax (`<iri>`, `"lex"^^<dt>`, `_:b`).
Term parse_term(std::string_view text);

/// Canonical text: one quad per line, sorted by (g, s, p, o).
std::string serialize(std::span<const Quad> quads);
std::string serialize(const Dataset& data);
std::string serialize_graph(const Dataset& data, const Term& graph);

/// Inserts parsed quads, renaming blank labels that would collide with
/// labels already in use.
void load(Dataset& data, std::span<const Quad> quads);

Dataset read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, const Dataset& data);

}  // namespace rvm::nquads
