#include "rvm/fhat/memo.hpp"

#include "rvm/error.hpp"
#include "rvm/vocab.hpp"

namespace rvm::fhat {

namespace {

const Term& memo_graph() {
  static const Term g = Term::uri(vocab::kMemoGraph);
  return g;
}

// The memo entry node for (fn, input), if recorded.
std::optional<Term> entry(const Dataset& data, const Term& fn, const Term& input) {
  for (const Quad& q : data.match({std::nullopt, Term::uri(vocab::kFunction), fn, memo_graph()})) {
    if (data.contains(Quad(q.s, Term::uri(vocab::kInput), input, memo_graph()))) return q.s;
  }
  return std::nullopt;
}

}  // namespace

void memo_record(Dataset& data, const Term& fn, const Term& input, const Term& output) {
  if (auto e = entry(data, fn, input)) {
    auto out = data.match({*e, Term::uri(vocab::kOutput), std::nullopt, memo_graph()});
    if (out.size() == 1 && out.front().o == output) return;
    throw MemoConflict("memo entry for " + fn.str() + "(" + input.str() + ") already holds " +
                       (out.empty() ? std::string("nothing") : out.front().o.str()) + ", not " + output.str());
  }
  Term b = data.fresh_blank();
  const Quad add[] = {
      Quad(b, Term::uri(vocab::kFunction), fn, memo_graph()),
      Quad(b, Term::uri(vocab::kInput), input, memo_graph()),
      Quad(b, Term::uri(vocab::kOutput), output, memo_graph()),
  };
  data.apply({}, add);
}

void memo_record(GraphStore& store, const Term& fn, const Term& input, const Term& output) {
  store.write([&](Dataset& d) { memo_record(d, fn, input, output); });
}

std::optional<Term> memo_lookup(const Dataset& data, const Term& fn, const Term& input) {
  auto e = entry(data, fn, input);
  if (!e) return std::nullopt;
  auto out = data.match({*e, Term::uri(vocab::kOutput), std::nullopt, memo_graph()});
  if (out.empty()) return std::nullopt;
  return out.front().o;
}

std::optional<Term> memo_lookup(const GraphStore& store, const Term& fn, const Term& input) {
  return store.read([&](const Dataset& d) { return memo_lookup(d, fn, input); });
}

}  // namespace rvm::fhat
