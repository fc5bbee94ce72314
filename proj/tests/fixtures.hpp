#pragma once

// Shared setup for the compiler, machine, farm and acceptance suites.

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "rvm/fhat/compiler.hpp"
#include "rvm/fhat/machine.hpp"
#include "rvm/neno/parser.hpp"
#include "rvm/neno/typecheck.hpp"
#include "rvm/vocab.hpp"

namespace fixtures {

using rvm::Dataset;
using rvm::Quad;
using rvm::Term;

inline std::string read_data(const std::string& name) {
  std::ifstream in(std::string(RVM_DATA_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Term lanl(const std::string& local) { return Term::uri("http://www.lanl.gov" + local); }
inline Term foaf(const std::string& local) { return Term::uri("http://xmlns.com/foaf/0.1/" + local); }

inline Dataset compile(const std::string& source, rvm::fhat::UuidMinter& minter) {
  Dataset api;
  for (const Quad& q : rvm::fhat::compile_api(rvm::neno::typecheck(rvm::neno::parse(source)), minter)) api.insert(q);
  return api;
}

inline Dataset compile_file(const std::string& name, rvm::fhat::UuidMinter& minter) {
  return compile(read_data(name), minter);
}

/// Runs a straight-line chain as the body of an ad hoc machine whose
/// frame binds `this` to `self`; returns the final state.
inline rvm::fhat::RvmState run_chain(rvm::GraphStore& store, const std::vector<rvm::fhat::Instruction>& chain,
                                     const Term& self = Term::uri("urn:test:self")) {
  using namespace rvm::fhat;
  const Term code = Term::uri("urn:test:code");
  store.write([&](Dataset& d) {
    for (const auto& in : chain)
      for (const Quad& q : to_quads(in, code)) d.insert(q);
  });
  RvmState s;
  s.uri = Term::uri("urn:test:rvm");
  s.home_graph = code;
  s.program_location = chain.front().uri;
  s.frame_stack.push_back({{{"this", {self}, Term::uri("urn:test:block")}}, false});
  s.return_stack.push_back(Term::uri(rvm::vocab::kHalt));
  s.cycles_remaining = 10000;
  return run(s, store, Mode::RFhat).state;
}

/// A random but well-formed machine state.
inline rvm::fhat::RvmState random_state(std::mt19937_64& rng) {
  using namespace rvm::fhat;
  auto n = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::vector<Term> pool = {
      lanl("marko"), lanl("josh"), foaf("knows"), Term::integer(7), Term::integer(-3), Term::real(2.65),
      Term::boolean(true), Term::literal("marko"), Term::literal("x y\n\"z\""), Term::lang_literal("hi", "en"),
      Term::literal("12", rvm::vocab::kXsdInteger), Term::uri(rvm::vocab::kNil), Term::uri("urn:uuid:1")};
  auto set = [&] {
    std::vector<Term> v;
    for (int i = n(0, 3); i > 0; --i) v.push_back(pool[n(0, pool.size() - 1)]);
    return make_set(v);
  };
  RvmState s;
  s.uri = Term::uri("urn:rvm:" + std::to_string(n(0, 1000000)));
  s.home_graph = n(0, 1) ? s.uri : Term::uri("urn:graph:" + std::to_string(n(0, 9)));
  if (n(0, 4)) s.program_location = Term::uri("urn:inst:" + std::to_string(n(0, 99)));
  for (int i = n(0, 4); i > 0; --i) s.operand_stack.push_back(set());
  for (int i = n(0, 3); i > 0; --i) {
    Frame f;
    f.returns_value = n(0, 1);
    for (int j = n(0, 3); j > 0; --j) {
      f.bindings.push_back({n(0, 1) ? "this" : "v" + std::to_string(n(0, 3)), set(),
                            Term::uri("urn:block:" + std::to_string(n(0, 3)))});
    }
    s.frame_stack.push_back(f);
    s.return_stack.push_back(n(0, 1) ? Term::uri(rvm::vocab::kHalt) : Term::uri("urn:inst:" + std::to_string(n(0, 99))));
  }
  s.cycles_remaining = static_cast<std::uint64_t>(n(0, 1 << 30));
  s.needs_process = n(0, 1);
  if (!n(0, 3)) {
    s.fault = "TypeFault";
    s.fault_message = "bad \"thing\"";
  }
  return s;
}

/// Sorted N-Quads lines of a quad list; a canonical serialization.
inline std::vector<std::string> canonical(std::vector<Quad> quads) {
  std::vector<std::string> out;
  for (const Quad& q : quads) out.push_back(q.str());
  std::sort(out.begin(), out.end());
  return out;
}

/// A store holding one compiled program and the objects made from it.
struct World {
  rvm::GraphStore store;
  rvm::fhat::UuidMinter minter;
  Dataset api;

  explicit World(const std::string& file, std::uint64_t seed = 42) : minter(seed), api(compile_file(file, minter)) {}

  rvm::fhat::ObjectInstance make(const Term& cls, std::optional<Term> uri = std::nullopt) {
    return rvm::fhat::instantiate(store, api, cls, uri, minter);
  }

  rvm::fhat::RunResult call(const Term& object, const std::string& method, const std::vector<rvm::fhat::ValueSet>& args,
                            std::uint64_t cycles = 1000000, rvm::fhat::Mode mode = rvm::fhat::Mode::RFhat,
                            const rvm::fhat::Guard& guard = {}) {
    auto s = rvm::fhat::spawn(store, object, method, args, cycles, minter);
    return rvm::fhat::run(store, s.uri, mode, guard);
  }
};

/// The network() scenario: a Socialite lanl:soc and two people.
inline void social_world(World& w) {
  w.make(lanl("Socialite"), lanl("soc"));
  w.make(lanl("Person"), lanl("a"));
  w.make(lanl("Person"), lanl("b"));
}

}  // namespace fixtures
