#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rvm/error.hpp"
#include "rvm/fhat/compiler.hpp"
#include "rvm/fhat/state.hpp"
#include "rvm/graph_store.hpp"

namespace rvm::fhat {

enum class FaultCode { StackUnderflow, TypeFault, CardinalityFault, PermissionDenied, QuotaExceeded, MalformedState };

const char* to_string(FaultCode code);

/// A runtime fault raised by one step. run() records it on the state.
class Fault : public Error {
 public:
  Fault(FaultCode code, const std::string& message) : Error(std::string(to_string(code)) + ": " + message), code_(code) {}
  FaultCode code() const { return code_; }

 private:
  FaultCode code_;
};

enum class Action { Read, Write, Delete };

/// Decides whether the running machine may perform `action` on `graph`.
/// Called with the store already locked; it must only use `data`.
using Guard = std::function<bool(const Dataset& data, const Term& graph, Action action)>;

enum class Mode { Fhat, RFhat };
enum class Outcome { Terminal, Suspended, Faulted };

const char* to_string(Outcome outcome);

struct RunResult {
  Outcome outcome;
  RvmState state;
  std::uint64_t steps = 0;
};

/// Executes the instruction at the program location. Throws Fault; on a
/// fault neither `state` nor the store has been modified.
void step(RvmState& state, Dataset& data, const Guard& guard = {});
void step(RvmState& state, GraphStore& store, const Guard& guard = {});

/// Steps until terminal, faulted or out of cycles, then stores the state.
/// Fhat mode reloads and stores the state around every step.
RunResult run(RvmState state, GraphStore& store, Mode mode, const Guard& guard = {});
RunResult run(GraphStore& store, const Term& rvm, Mode mode, const Guard& guard = {});

/// Builds the state of a fresh machine that will run `method_name` on
/// `object` with `args`. The machine lives in the object's graph.
/// Throws Error when the object has no such method or the arity differs.
RvmState make_entry_state(const Dataset& data, const Term& object, const std::string& method_name,
                          const std::vector<ValueSet>& args, std::uint64_t cycles, const Term& rvm_uri);

/// make_entry_state plus store_state, with needsProcess set.
RvmState spawn(GraphStore& store, const Term& object, const std::string& method_name,
               const std::vector<ValueSet>& args, std::uint64_t cycles, UuidMinter& minter);

/// A PushValue of the machine's own URI, for reflection.
Instruction push_self(const RvmState& state, const Term& uri);

/// Records a fault on the state and makes it terminal.
void record_fault(RvmState& state, FaultCode code, const std::string& message);

}  // namespace rvm::fhat
