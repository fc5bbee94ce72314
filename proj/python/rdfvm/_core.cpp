#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rvm/fhat/compiler.hpp"
#include "rvm/fhat/machine.hpp"
#include "rvm/fhat/memo.hpp"
#include "rvm/neno/parser.hpp"
#include "rvm/neno/typecheck.hpp"
#include "rvm/nquads.hpp"
#include "rvm/sparql.hpp"

namespace py = pybind11;
using namespace rvm;

namespace {

Term uri_or_term(const std::string& s) { return s.starts_with("<") ? nquads::parse_term(s) : Term::uri(s); }

Dataset dataset_from(std::string_view text) {
  Dataset d;
  nquads::load(d, nquads::parse(text));
  return d;
}

/// A store plus the minter used for new objects and machines.
class Store {
 public:
  explicit Store(std::optional<std::uint64_t> seed)
      : minter_(seed ? fhat::UuidMinter(*seed) : fhat::UuidMinter()) {}

  void load(const std::string& text) {
    auto quads = nquads::parse(text);
    store_.write([&](Dataset& d) { nquads::load(d, quads); });
  }

  std::string dump(const std::optional<std::string>& graph) const {
    return store_.read([&](const Dataset& d) {
      return graph ? nquads::serialize_graph(d, uri_or_term(*graph)) : nquads::serialize(d);
    });
  }

  std::size_t size() const { return store_.size(); }

  std::string instantiate(const std::string& api, const std::string& cls, const std::optional<std::string>& object) {
    Dataset a = dataset_from(api);
    std::optional<Term> o;
    if (object) o = uri_or_term(*object);
    return fhat::instantiate(store_, a, uri_or_term(cls), o, minter_).graph.value();
  }

  std::string invoke(const std::string& object, const std::string& method, const std::vector<std::string>& args,
                     std::uint64_t cycles) {
    std::vector<fhat::ValueSet> values;
    for (const auto& a : args) values.push_back({nquads::parse_term(a)});
    return fhat::spawn(store_, uri_or_term(object), method, values, cycles, minter_).uri.value();
  }

  py::dict run(const std::string& rvm, const std::string& mode, std::optional<std::uint64_t> max_cycles) {
    Term target = uri_or_term(rvm);
    if (mode != "fhat" && mode != "r-fhat") throw Error("mode must be fhat or r-fhat");
    auto m = mode == "fhat" ? fhat::Mode::Fhat : fhat::Mode::RFhat;
    fhat::RunResult r;
    {
      py::gil_scoped_release release;
      if (max_cycles) {
        fhat::RvmState s = fhat::load_state(store_, target);
        s.cycles_remaining = *max_cycles;
        r = fhat::run(std::move(s), store_, m);
      } else {
        r = fhat::run(store_, target, m);
      }
    }
    py::dict out;
    out["outcome"] = fhat::to_string(r.outcome);
    out["steps"] = r.steps;
    out["fault"] = r.state.fault ? py::cast(*r.state.fault) : py::none();
    py::list top;
    if (!r.state.operand_stack.empty())
      for (const Term& t : r.state.operand_stack.back()) top.append(t.str());
    out["top"] = top;
    return out;
  }

  std::vector<std::map<std::string, std::string>> query(const std::string& text) const {
    auto q = sparql::parse_query(text);
    std::vector<std::map<std::string, std::string>> rows;
    for (const auto& sol : sparql::select(store_, q)) {
      std::map<std::string, std::string> row;
      for (const auto& [k, v] : sol) row[k] = v.str();
      rows.push_back(std::move(row));
    }
    return rows;
  }

  std::size_t update(const std::string& text) { return sparql::update(store_, sparql::parse_update(text)); }

  void memo_record(const std::string& fn, const std::string& in, const std::string& out) {
    fhat::memo_record(store_, uri_or_term(fn), nquads::parse_term(in), nquads::parse_term(out));
  }

  std::optional<std::string> memo_lookup(const std::string& fn, const std::string& in) const {
    auto r = fhat::memo_lookup(store_, uri_or_term(fn), nquads::parse_term(in));
    if (!r) return std::nullopt;
    return r->str();
  }

 private:
  GraphStore store_;
  fhat::UuidMinter minter_;
};

std::string compile(const std::string& source, std::optional<std::uint64_t> seed) {
  auto unit = neno::typecheck(neno::parse(source));
  fhat::UuidMinter minter = seed ? fhat::UuidMinter(*seed) : fhat::UuidMinter();
  return nquads::serialize(fhat::compile_api(unit, minter));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neno compiler, Fhat machine and quad store";
  py::register_exception<Error>(m, "RvmError", PyExc_RuntimeError);

  m.def("compile", &compile, py::arg("source"), py::arg("seed") = py::none(),
        "Compile Neno source to an API graph in N-Quads.");
  m.def("canonical", [](const std::string& text) { return nquads::serialize(dataset_from(text)); },
        "Parse N-Quads and print them canonically.");

  py::class_<Store>(m, "Store")
      .def(py::init<std::optional<std::uint64_t>>(), py::arg("seed") = py::none())
      .def("load", &Store::load, py::arg("nquads"))
      .def("dump", &Store::dump, py::arg("graph") = py::none())
      .def("__len__", &Store::size)
      .def("instantiate", &Store::instantiate, py::arg("api"), py::arg("cls"), py::arg("object") = py::none())
      .def("invoke", &Store::invoke, py::arg("object"), py::arg("method"), py::arg("args") = std::vector<std::string>{},
           py::arg("cycles") = 1000000)
      .def("run", &Store::run, py::arg("rvm"), py::arg("mode") = "r-fhat", py::arg("max_cycles") = py::none())
      .def("query", &Store::query, py::arg("sparql"))
      .def("update", &Store::update, py::arg("sparql"))
      .def("memo_record", &Store::memo_record)
      .def("memo_lookup", &Store::memo_lookup);
}
