#pragma once

#include <optional>

#include "rvm/dataset.hpp"
#include "rvm/graph_store.hpp"

namespace rvm::fhat {

/// Stores fn(input) = output in rvm:memo as a blank node carrying
/// rvm:function, rvm:input and rvm:output. Re-recording the same output is
/// a no-op; a different output throws MemoConflict.
void memo_record(Dataset& data, const Term& fn, const Term& input, const Term& output);
void memo_record(GraphStore& store, const Term& fn, const Term& input, const Term& output);

std::optional<Term> memo_lookup(const Dataset& data, const Term& fn, const Term& input);
std::optional<Term> memo_lookup(const GraphStore& store, const Term& fn, const Term& input);

}  // namespace rvm::fhat
