#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rvm/farm/farm.hpp"
#include "rvm/fhat/compiler.hpp"
#include "rvm/fhat/machine.hpp"
#include "rvm/neno/parser.hpp"
#include "rvm/neno/typecheck.hpp"
#include "rvm/nquads.hpp"
#include "rvm/sparql.hpp"
#include "rvm/vocab.hpp"

namespace fs = std::filesystem;
using namespace rvm;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void load_store(GraphStore& store, const fs::path& p, bool must_exist) {
  if (!fs::exists(p)) {
    if (must_exist) throw Error("no store at " + p.string());
    return;
  }
  Dataset d = nquads::read_file(p);
  store.write([&](Dataset& x) { x = std::move(d); });
}

void save_store(const GraphStore& store, const fs::path& p) {
  store.read([&](const Dataset& d) { nquads::write_file(p, d); });
}

Term uri_arg(const std::string& s) {
  if (s.starts_with("<")) return nquads::parse_term(s);
  return Term::uri(s);
}

std::string show(const fhat::ValueSet& v) {
  if (v.size() == 1) return v.front().str();
  std::string out = "{";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + v[i].str();
  return out + "}";
}

int serve(const fs::path& config_path) {
  farm::FarmConfig cfg = farm::FarmConfig::load(config_path);
  GraphStore store;
  if (!cfg.store_path.empty()) load_store(store, cfg.store_path, false);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  farm::Farm f(store, cfg, [](const std::string& line) { std::cout << line << std::endl; });
  f.start(true);
  int sig = 0;
  sigwait(&set, &sig);
  f.stop();
  f.save();
  std::cout << "stopped" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile, run and migrate programs stored as RDF"};
  app.require_subcommand(1);

  std::string file, out, api_path, class_uri, store_path, object, method, rvm_uri, mode = "r-fhat", graph, to,
      query_text, config;
  std::vector<std::string> args;
  std::uint64_t cycles = 1000000;
  std::optional<std::uint64_t> max_cycles;

  auto* compile = app.add_subcommand("compile", "Compile a Neno file to its API graph");
  compile->add_option("file", file, "Neno source")->required();
  compile->add_option("-o,--output", out, "API graph (N-Quads)")->required();

  auto* inst = app.add_subcommand("instantiate", "Create an object of a class in a store");
  inst->add_option("--api", api_path, "API graph")->required();
  inst->add_option("--class", class_uri, "class URI")->required();
  inst->add_option("--store", store_path, "store (N-Quads), created if missing")->required();
  inst->add_option("--object", object, "object URI (minted if omitted)");

  auto* invoke = app.add_subcommand("invoke", "Create a runnable machine for a method call");
  invoke->add_option("--store", store_path, "store")->required();
  invoke->add_option("--object", object, "receiver object URI")->required();
  invoke->add_option("--method", method, "method name")->required();
  invoke->add_option("--arg", args, "argument in N-Quads term syntax");
  invoke->add_option("--cycles", cycles, "cycle budget stored on the machine");

  auto* run = app.add_subcommand("run", "Execute a machine");
  run->add_option("--store", store_path, "store")->required();
  run->add_option("--rvm", rvm_uri, "machine URI (first runnable if omitted)");
  run->add_option("--mode", mode, "fhat or r-fhat")->check(CLI::IsMember({"fhat", "r-fhat"}));
  run->add_option("--max-cycles", max_cycles, "cycle budget for this run");

  auto* farm_cmd = app.add_subcommand("farm", "Serve a farm until interrupted");
  farm_cmd->add_option("--config", config, "farm config file")->required();

  auto* migrate = app.add_subcommand("migrate", "Send a graph to a peer farm");
  migrate->add_option("--store", store_path, "store")->required();
  migrate->add_option("--graph", graph, "graph URI")->required();
  migrate->add_option("--to", to, "peer host:port")->required();

  auto* query = app.add_subcommand("query", "Run a SELECT query");
  query->add_option("--store", store_path, "store")->required();
  query->add_option("query", query_text, "SELECT query")->required();

  auto* dump = app.add_subcommand("dump", "Print the store as canonical N-Quads");
  dump->add_option("--store", store_path, "store")->required();
  dump->add_option("--graph", graph, "only this graph");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*compile) {
      auto unit = neno::typecheck(neno::parse(slurp(file)));
      fhat::UuidMinter minter;
      auto quads = fhat::compile_api(unit, minter);
      std::ofstream o(out, std::ios::binary | std::ios::trunc);
      if (!o) throw Error("cannot write " + out);
      o << nquads::serialize(quads);
      std::size_t methods = 0;
      for (const Quad& q : quads)
        if (q.p.value() == vocab::kType && q.o.value() == vocab::kMethod) ++methods;
      std::cerr << "compiled " << unit.unit.classes.size() << " class(es), " << methods << " method(s)\n";
      return 0;
    }
    if (*inst) {
      Dataset api = nquads::read_file(api_path);
      GraphStore store;
      load_store(store, store_path, false);
      fhat::UuidMinter minter;
      auto obj = fhat::instantiate(store, api, uri_arg(class_uri),
                                   object.empty() ? std::nullopt : std::optional<Term>(uri_arg(object)), minter);
      save_store(store, store_path);
      std::cout << obj.graph.value() << "\n";
      return 0;
    }
    if (*invoke) {
      GraphStore store;
      load_store(store, store_path, true);
      std::vector<fhat::ValueSet> values;
      for (const auto& a : args) values.push_back({nquads::parse_term(a)});
      fhat::UuidMinter minter;
      auto s = fhat::spawn(store, uri_arg(object), method, values, cycles, minter);
      save_store(store, store_path);
      std::cout << s.uri.value() << "\n";
      return 0;
    }
    if (*run) {
      GraphStore store;
      load_store(store, store_path, true);
      Term target;
      if (rvm_uri.empty()) {
        auto runnable = farm::poll(store);
        if (runnable.empty()) throw Error("no runnable RVM");
        target = runnable.front();
      } else {
        target = uri_arg(rvm_uri);
      }
      if (!store.read([&](const Dataset& d) { return fhat::home_graph_of(d, target); })) {
        throw Error(target.str() + " is not a machine in this store");
      }
      farm::claim(store, target);
      auto m = mode == "fhat" ? fhat::Mode::Fhat : fhat::Mode::RFhat;
      fhat::RunResult r;
      if (max_cycles) {
        fhat::RvmState s = fhat::load_state(store, target);
        s.cycles_remaining = *max_cycles;
        r = fhat::run(std::move(s), store, m);
      } else {
        r = fhat::run(store, target, m);
      }
      save_store(store, store_path);
      std::cout << target.value() << "\t" << fhat::to_string(r.outcome);
      if (r.outcome == fhat::Outcome::Faulted) {
        std::cout << "\t" << r.state.fault_message.value_or("");
      } else if (r.outcome == fhat::Outcome::Terminal && !r.state.frame_stack.empty() &&
                 r.state.frame_stack.back().returns_value && !r.state.operand_stack.empty()) {
        std::cout << "\t" << show(r.state.operand_stack.back());
      }
      std::cout << "\n";
      return 0;
    }
    if (*farm_cmd) return serve(config);
    if (*migrate) {
      GraphStore store;
      load_store(store, store_path, true);
      farm::migrate_out(store, uri_arg(graph), to);
      save_store(store, store_path);
      std::cout << "migrated " << uri_arg(graph).value() << " to " << to << "\n";
      return 0;
    }
    if (*query) {
      GraphStore store;
      load_store(store, store_path, true);
      auto q = sparql::parse_query(query_text);
      std::vector<std::string> lines;
      for (const auto& row : sparql::select(store, q)) {
        std::string line;
        for (std::size_t i = 0; i < q.vars.size(); ++i) {
          auto it = row.find(q.vars[i]);
          line += (i ? "\t" : "") + (it == row.end() ? std::string() : it->second.str());
        }
        lines.push_back(line);
      }
      std::sort(lines.begin(), lines.end());
      for (const auto& l : lines) std::cout << l << "\n";
      return 0;
    }
    if (*dump) {
      GraphStore store;
      load_store(store, store_path, true);
      store.read([&](const Dataset& d) {
        std::cout << (graph.empty() ? nquads::serialize(d) : nquads::serialize_graph(d, uri_arg(graph)));
      });
      return 0;
    }
  } catch (const farm::PeerUnreachable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const farm::PeerRejected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const MalformedState& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const QuotaExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
