#include "rvm/fhat/instruction.hpp"

#include <array>

#include "rvm/vocab.hpp"

namespace rvm::fhat {

namespace {

constexpr std::array<const char*, 17> kNames = {
    "PushValue", "Load",     "Add",      "Subtract", "Multiply",        "Divide",          "Set",
    "SetPlus",   "SetMinus", "SetClear", "SetQuery", "TraverseForward", "TraverseInverse", "Invoke",
    "Return",    "Branch",   "NoOp",
};

bool is_setter(OpKind k) {
  return k == OpKind::Set || k == OpKind::SetPlus || k == OpKind::SetMinus || k == OpKind::SetClear ||
         k == OpKind::SetQuery;
}

}  // namespace

const char* kind_name(OpKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::string kind_iri(OpKind kind) { return vocab::rvm(kind_name(kind)); }

std::optional<OpKind> kind_from_iri(const std::string& iri) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (iri == vocab::rvm(kNames[i])) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

void validate(const Instruction& in) {
  auto bad = [&](const std::string& why) {
    throw MalformedInstruction(in.uri.str() + " (" + kind_name(in.kind) + "): " + why);
  };
  const OpKind k = in.kind;
  if ((k == OpKind::PushValue) != in.value.has_value()) bad("value present iff PushValue");
  if (k == OpKind::Load || is_setter(k)) {
    if (in.symbol.has_value() == in.predicate.has_value()) bad("needs exactly one of symbol or predicate");
  } else if (k == OpKind::TraverseForward || k == OpKind::TraverseInverse) {
    if (!in.predicate || in.symbol) bad("needs a predicate only");
  } else if (in.symbol || in.predicate) {
    bad("takes no symbol or predicate");
  }
  if (k == OpKind::Load && in.predicate) bad("Load reads a symbol");
  if ((k == OpKind::Invoke) != in.invoke_method.has_value()) bad("invokeMethod present iff Invoke");
  if (k == OpKind::Branch) {
    if (!in.branch_true || !in.branch_false) bad("Branch needs both targets");
  } else if (in.branch_true || in.branch_false) {
    bad("branch targets only on Branch");
  }
  if ((k == OpKind::Branch || k == OpKind::Return) && in.next) bad("no nextInst allowed");
  if (in.from_block && !(k == OpKind::NoOp || ((k == OpKind::Set || k == OpKind::SetClear) && in.symbol))) {
    bad("fromBlock only on NoOp or a symbol Set/SetClear");
  }
}

std::vector<Quad> to_quads(const Instruction& in, const Term& graph) {
  std::vector<Quad> out;
  auto add = [&](const std::string& p, const Term& o) { out.emplace_back(in.uri, Term::uri(p), o, graph); };
  add(vocab::kType, Term::uri(kind_iri(in.kind)));
  if (in.value) add(vocab::kValue, *in.value);
  if (in.symbol) add(vocab::kSymbol, Term::literal(*in.symbol));
  if (in.predicate) add(vocab::kPredicate, *in.predicate);
  if (in.invoke_method) add(vocab::kInvokeMethod, *in.invoke_method);
  if (in.branch_true) add(vocab::kBranchTrue, *in.branch_true);
  if (in.branch_false) add(vocab::kBranchFalse, *in.branch_false);
  if (in.next) add(vocab::kNextInst, *in.next);
  if (in.from_block) add(vocab::kFromBlock, *in.from_block);
  return out;
}

Instruction read_instruction(const Dataset& data, const Term& uri) {
  Instruction in;
  in.uri = uri;
  if (!uri.is_uri() && !uri.is_blank()) throw MalformedInstruction("instruction reference is a literal: " + uri.str());
  std::optional<OpKind> kind;
  auto quads = data.match({uri, std::nullopt, std::nullopt, std::nullopt});
  auto single = [&](std::optional<Term>& slot, const Quad& q) {
    if (slot && *slot != q.o) throw MalformedInstruction(uri.str() + " has more than one " + q.p.str());
    slot = q.o;
  };
  for (const Quad& q : quads) {
    const std::string& p = q.p.value();
    if (p == vocab::kType) {
      if (auto k = kind_from_iri(q.o.value()); k && q.o.is_uri()) {
        if (kind && *kind != *k) throw MalformedInstruction(uri.str() + " has two instruction kinds");
        kind = k;
      }
    } else if (p == vocab::kValue) {
      single(in.value, q);
    } else if (p == vocab::kSymbol) {
      if (!q.o.is_literal()) throw MalformedInstruction(uri.str() + " symbol is not a literal");
      if (in.symbol && *in.symbol != q.o.value()) throw MalformedInstruction(uri.str() + " has more than one symbol");
      in.symbol = q.o.value();
    } else if (p == vocab::kPredicate) {
      single(in.predicate, q);
    } else if (p == vocab::kInvokeMethod) {
      single(in.invoke_method, q);
    } else if (p == vocab::kBranchTrue) {
      single(in.branch_true, q);
    } else if (p == vocab::kBranchFalse) {
      single(in.branch_false, q);
    } else if (p == vocab::kNextInst) {
      single(in.next, q);
    } else if (p == vocab::kFromBlock) {
      single(in.from_block, q);
    }
  }
  if (!kind) throw MalformedInstruction(uri.str() + " is not an instruction");
  in.kind = *kind;
  if (in.predicate && !in.predicate->is_uri()) throw MalformedInstruction(uri.str() + " predicate is not a URI");
  validate(in);
  return in;
}

std::vector<Term> successors(const Instruction& in) {
  std::vector<Term> out;
  if (in.next) out.push_back(*in.next);
  if (in.branch_true) out.push_back(*in.branch_true);
  if (in.branch_false) out.push_back(*in.branch_false);
  return out;
}

}  // namespace rvm::fhat
