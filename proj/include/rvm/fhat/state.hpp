#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rvm/dataset.hpp"
#include "rvm/graph_store.hpp"
#include "rvm/term.hpp"

namespace rvm::fhat {

/// A set of terms in canonical order without duplicates.
using ValueSet = std::vector<Term>;

ValueSet make_set(std::vector<Term> terms);

struct Binding {
  std::string symbol;
  ValueSet value;
  Term block;
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct Frame {
  // Later bindings shadow earlier ones with the same symbol.
  std::vector<Binding> bindings;
  bool returns_value = false;

  const Binding* find(const std::string& symbol) const;
  Binding* find(const std::string& symbol);
  friend bool operator==(const Frame&, const Frame&) = default;
};

struct RvmState {
  Term uri;
  Term home_graph;
  std::optional<Term> program_location;
  std::vector<ValueSet> operand_stack;  // back() is the top
  std::vector<Term> return_stack;       // back() is the top
  std::vector<Frame> frame_stack;       // back() is the top
  std::uint64_t cycles_remaining = 0;
  bool needs_process = false;
  std::optional<std::string> fault;
  std::optional<std::string> fault_message;

  bool terminal() const { return !program_location.has_value(); }
  friend bool operator==(const RvmState&, const RvmState&) = default;
};

/// Prefix of every state node IRI owned by the machine `rvm`.
std::string state_prefix(const Term& rvm);

/// The quads encoding `state` in its home graph (excluding the rdf:type
/// rvm:RVM triple, which is written separately and never removed).
std::vector<Quad> state_quads(const RvmState& state);

/// Replaces the machine's stored state. Quotas do not apply to state quads.
void store_state(Dataset& data, const RvmState& state);
void store_state(GraphStore& store, const RvmState& state);

/// Throws MalformedState.
RvmState load_state(const Dataset& data, const Term& rvm);
RvmState load_state(const GraphStore& store, const Term& rvm);

/// Graph holding `rvm rdf:type rvm:RVM`, if any.
std::optional<Term> home_graph_of(const Dataset& data, const Term& rvm);

}  // namespace rvm::fhat
