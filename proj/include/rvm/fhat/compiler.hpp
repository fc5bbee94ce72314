#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rvm/dataset.hpp"
#include "rvm/fhat/instruction.hpp"
#include "rvm/graph_store.hpp"
#include "rvm/neno/typecheck.hpp"
#include "rvm/sparql.hpp"

namespace rvm::fhat {

/// Mints `urn:uuid:` URIs from random version 4 UUIDs.
class UuidMinter {
 public:
  UuidMinter();  // seeded from std::random_device
  explicit UuidMinter(std::uint64_t seed) : rng_(seed) {}

  std::string uuid();
  Term mint() { return Term::uri("urn:uuid:" + uuid()); }

 private:
  std::mt19937_64 rng_;
};

/// The API graph for a checked unit, all quads in rvm:api.
std::vector<Quad> compile_api(const neno::CheckedUnit& unit, UuidMinter& minter);

/// The instruction chain of one method template, in emission order.
std::vector<Instruction> method_chain(const Dataset& data, const Term& method);

struct LoweredPath {
  std::vector<Instruction> chain;  // linked by nextInst, last has none
  std::optional<sparql::SelectQuery> query;  // none for a zero-step path
};

/// Lowers a path to its traversal chain and the equivalent SELECT query.
/// Variable bases appear in the query as variables of the same name.
LoweredPath lower_path(const neno::PathExpr& path, UuidMinter& minter);

struct ObjectInstance {
  Term uri;
  Term class_uri;
  Term graph;
  std::map<std::string, Term> methods;  // method name -> method instance
};

/// Creates an object of `cls` in its own named graph (the object URI),
/// cloning every method's instruction chain with fresh URIs. The API
/// quads are copied into `data` when its rvm:api graph is empty.
/// Throws UnknownClass.
ObjectInstance instantiate(Dataset& data, const Dataset& api, const Term& cls, std::optional<Term> object,
                           UuidMinter& minter);
ObjectInstance instantiate(GraphStore& store, const Dataset& api, const Term& cls, std::optional<Term> object,
                           UuidMinter& minter);

}  // namespace rvm::fhat
