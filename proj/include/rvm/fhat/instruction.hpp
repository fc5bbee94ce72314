#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rvm/dataset.hpp"
#include "rvm/error.hpp"
#include "rvm/term.hpp"

namespace rvm::fhat {

enum class OpKind {
  PushValue,
  Load,
  Add,
  Subtract,
  Multiply,
  Divide,
  Set,
  SetPlus,
  SetMinus,
  SetClear,
  SetQuery,
  TraverseForward,
  TraverseInverse,
  Invoke,
  Return,
  Branch,
  NoOp,
};

const char* kind_name(OpKind kind);
std::string kind_iri(OpKind kind);
std::optional<OpKind> kind_from_iri(const std::string& iri);

/// Raised when an instruction node in the store is not well formed.
class MalformedInstruction : public Error {
 public:
  using Error::Error;
};

/// One RDF-encoded instruction.
struct Instruction {
  Term uri;
  OpKind kind = OpKind::NoOp;
  std::optional<Term> value;
  std::optional<std::string> symbol;
  std::optional<Term> predicate;
  std::optional<Term> invoke_method;
  std::optional<Term> branch_true;
  std::optional<Term> branch_false;
  std::optional<Term> next;
  // Block scope introduced by a declaration (Set/SetClear) or dropped (NoOp).
  std::optional<Term> from_block;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Checks that exactly the properties required by the kind are present.
void validate(const Instruction& inst);

std::vector<Quad> to_quads(const Instruction& inst, const Term& graph);

/// Reads the instruction with subject `uri` from any graph.
/// Throws MalformedInstruction.
Instruction read_instruction(const Dataset& data, const Term& uri);

/// Successor URIs (next, branch targets) in that order.
std::vector<Term> successors(const Instruction& inst);

}  // namespace rvm::fhat
