#include "rvm/farm/farm.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "net.hpp"
#include "rvm/fhat/state.hpp"
#include "rvm/nquads.hpp"
#include "rvm/vocab.hpp"

namespace rvm::farm {

using fhat::Action;
using fhat::Outcome;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    unsigned long long n = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return static_cast<T>(n);
  } catch (const std::logic_error&) {
    throw Error(key + " must be a natural number, got '" + v + "'");
  }
}

Term needs(bool v) { return Term::boolean(v); }

}  // namespace

FarmConfig FarmConfig::parse(const std::string& text) {
  FarmConfig c;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(n) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "store") {
      c.store_path = value;
    } else if (key == "listen") {
      c.listen_address = value;
    } else if (key == "peer") {
      std::istringstream ps(value);
      for (std::string p; std::getline(ps, p, ',');)
        if (!trim(p).empty()) c.peers.push_back(trim(p));
    } else if (key == "poll_ms") {
      c.poll_interval_ms = number<std::uint32_t>(key, value);
    } else if (key == "max_workers") {
      c.max_workers = number<std::uint32_t>(key, value);
    } else if (key == "cycle_budget") {
      c.cycle_budget = number<std::uint64_t>(key, value);
    } else if (key == "graph_quota") {
      c.graph_quota = number<std::size_t>(key, value);
    } else {
      throw Error("config line " + std::to_string(n) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

FarmConfig FarmConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  FarmConfig c = parse(ss.str());
  if (!c.store_path.empty() && c.store_path.is_relative()) c.store_path = path.parent_path() / c.store_path;
  return c;
}

void FarmConfig::validate() const {
  if (max_workers < 1) throw Error("max_workers must be at least 1");
  if (poll_interval_ms < 1) throw Error("poll_ms must be at least 1");
  if (!listen_address.empty()) net::parse_address(listen_address);
  for (const auto& p : peers) net::parse_address(p);
}

std::vector<Term> poll(const GraphStore& store) {
  return store.read([](const Dataset& d) {
    std::set<Term> out;
    for (const Quad& q : d.match({std::nullopt, Term::uri(vocab::kNeedsProcess), needs(true), std::nullopt})) {
      if (d.contains({q.s, Term::uri(vocab::kType), Term::uri(vocab::kRVM), q.g})) out.insert(q.s);
    }
    return std::vector<Term>(out.begin(), out.end());
  });
}

bool claim(GraphStore& store, const Term& rvm) {
  auto home = store.read([&](const Dataset& d) { return fhat::home_graph_of(d, rvm); });
  if (!home) return false;
  const Term p = Term::uri(vocab::kNeedsProcess);
  return store.compare_and_swap({rvm, p, needs(true), *home}, {rvm, p, needs(false), *home});
}

namespace {

bool reaches(const Dataset& data, const Term& graph, const Term& home) {
  std::set<Term> seen;
  std::vector<Term> todo{graph};
  while (!todo.empty()) {
    Term g = todo.back();
    todo.pop_back();
    if (g == home) return true;
    if (!seen.insert(g).second) continue;
    for (const Quad& q : data.match({g, Term::uri(vocab::kSpawnedBy), std::nullopt, std::nullopt})) todo.push_back(q.o);
  }
  return false;
}

}  // namespace

bool check_permission(const Dataset& data, const Term& rvm, const Term& graph, Action action) {
  if (action == Action::Read) return true;
  auto home = fhat::home_graph_of(data, rvm);
  return home && reaches(data, graph, *home);
}

bool check_permission(const GraphStore& store, const Term& rvm, const Term& graph, Action action) {
  return store.read([&](const Dataset& d) { return check_permission(d, rvm, graph, action); });
}

fhat::Guard sandbox(const Term& home) {
  return [home](const Dataset& d, const Term& g, Action a) { return a == Action::Read || reaches(d, g, home); };
}

std::vector<Term> owned_graphs(const Dataset& data, const Term& graph) {
  std::vector<Term> out{graph};
  std::set<Term> seen{graph};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const Quad& q : data.match({std::nullopt, Term::uri(vocab::kSpawnedBy), out[i], std::nullopt})) {
      if (q.s.is_uri() && seen.insert(q.s).second) out.push_back(q.s);
    }
  }
  return out;
}

Outcome execute_worker(GraphStore& store, const Term& rvm, const FarmConfig& config) {
  auto home = store.read([&](const Dataset& d) { return fhat::home_graph_of(d, rvm); });
  if (!home) throw Error(rvm.str() + " is not a machine in this store");
  if (config.graph_quota > 0) {
    store.write([&](Dataset& d) {
      for (const Term& g : owned_graphs(d, *home)) d.set_quota(g, config.graph_quota);
    });
  }
  fhat::RvmState state;
  try {
    state = fhat::load_state(store, rvm);
  } catch (const MalformedState&) {
    return fhat::run(store, rvm, fhat::Mode::RFhat).outcome;
  }
  if (state.terminal()) return state.fault ? Outcome::Faulted : Outcome::Terminal;
  state.cycles_remaining = config.cycle_budget;
  return fhat::run(std::move(state), store, fhat::Mode::RFhat, sandbox(*home)).outcome;
}

std::string encode(const Envelope& env) {
  std::string out = "MIGRATE " + env.graph.value() + " " + std::to_string(env.quads.size()) + "\n";
  out += nquads::serialize(env.quads);
  out += "END\n";
  return out;
}

std::string Reply::line() const {
  if (ok) return "ACK " + message + "\n";
  std::string m = message;
  std::replace(m.begin(), m.end(), '\n', ' ');
  return "ERR " + code + " " + m + "\n";
}

Reply receive_migration(const Envelope& env, GraphStore& store, const FarmConfig& config,
                        const std::function<void(const Dataset&)>& persist) {
  auto err = [](std::string code, std::string msg) { return Reply{false, std::move(code), std::move(msg)}; };
  if (!env.graph.is_uri()) return err("parse", "graph must be a URI");

  std::set<Term> allowed{env.graph};
  for (bool grew = true; grew;) {
    grew = false;
    for (const Quad& q : env.quads) {
      if (q.p.value() == vocab::kSpawnedBy && allowed.count(q.o) && q.s.is_uri()) grew |= allowed.insert(q.s).second;
    }
  }
  for (const Quad& q : env.quads) {
    if (!allowed.count(q.g)) return err("parse", "quad in graph " + q.g.str() + " outside the envelope");
  }
  if (config.graph_quota > 0 && env.quads.size() > config.graph_quota) {
    return err("quota", std::to_string(env.quads.size()) + " quads exceed the graph quota of " +
                            std::to_string(config.graph_quota));
  }
  return store.write([&](Dataset& d) {
    for (const Term& g : allowed) {
      if (d.has_graph(g)) return err("conflict", g.value() + " already present");
    }
    nquads::load(d, env.quads);
    if (persist) persist(d);
    return Reply{true, "", env.graph.value()};
  });
}

namespace {

Reply read_reply(net::LineReader& in, std::chrono::milliseconds timeout, const std::string& peer) {
  auto line = in.next(timeout);
  if (!line) throw PeerUnreachable("no reply from " + peer);
  if (line->starts_with("ACK ")) return {true, "", line->substr(4)};
  if (line->starts_with("ERR ")) {
    std::string rest = line->substr(4);
    auto sp = rest.find(' ');
    return {false, rest.substr(0, sp), sp == std::string::npos ? "" : rest.substr(sp + 1)};
  }
  throw PeerUnreachable("unexpected reply from " + peer + ": " + *line);
}

}  // namespace

void migrate_out(GraphStore& store, const Term& graph, const std::string& peer, std::chrono::milliseconds timeout) {
  const net::Address addr = net::parse_address(peer);
  const Term type = Term::uri(vocab::kType), np = Term::uri(vocab::kNeedsProcess);

  // Take the machines out of the poll loop's reach while they travel.
  std::vector<Quad> claimed;
  Envelope env{graph, {}};
  store.write([&](Dataset& d) {
    if (!d.has_graph(graph)) throw Error("no such graph " + graph.str());
    std::vector<Term> graphs = owned_graphs(d, graph);
    for (const Term& g : graphs) {
      auto qs = d.match({std::nullopt, std::nullopt, std::nullopt, g});
      env.quads.insert(env.quads.end(), qs.begin(), qs.end());
    }
    for (const Term& g : graphs) {
      for (const Quad& q : d.match({std::nullopt, type, Term::uri(vocab::kRVM), g})) {
        bool runnable = d.contains({q.s, np, needs(true), g});
        bool live = d.count({q.s, Term::uri(vocab::kProgramLocation), std::nullopt, g}) > 0;
        if (live && !runnable) throw Error(q.s.str() + " is claimed by a worker");
        if (runnable) claimed.emplace_back(q.s, np, needs(true), g);
      }
    }
    for (const Quad& q : claimed) {
      d.erase(q);
      d.insert({q.s, q.p, needs(false), q.g});
    }
  });
  auto release = [&] {
    store.write([&](Dataset& d) {
      for (const Quad& q : claimed) {
        d.erase({q.s, q.p, needs(false), q.g});
        d.insert(q);
      }
    });
  };

  Reply reply;
  try {
    net::Socket sock(net::connect_to(addr, timeout));
    net::send_all(sock.fd(), encode(env));
    net::LineReader in(sock.fd());
    reply = read_reply(in, timeout, peer);
  } catch (...) {
    release();
    throw;
  }
  if (!reply.ok) {
    release();
    throw PeerRejected(reply.code, reply.message);
  }
  store.write([&](Dataset& d) {
    std::vector<Quad> rm;
    for (const Term& g : owned_graphs(d, graph)) {
      auto qs = d.match({std::nullopt, std::nullopt, std::nullopt, g});
      rm.insert(rm.end(), qs.begin(), qs.end());
    }
    d.apply(rm, {}, false);
  });
}

Farm::Farm(GraphStore& store, FarmConfig config, Log log)
    : store_(store), config_(std::move(config)), log_(std::move(log)) {
  config_.validate();
}

Farm::~Farm() { stop(); }

void Farm::note(const std::string& line) const {
  if (log_) log_(line);
}

void Farm::save() const {
  if (config_.store_path.empty()) return;
  std::lock_guard lock(save_mu_);
  store_.read([&](const Dataset& d) { nquads::write_file(config_.store_path, d); });
}

void Farm::start(bool polling) {
  if (running_.exchange(true)) return;
  if (!config_.listen_address.empty()) {
    auto addr = net::parse_address(config_.listen_address);
    listen_fd_ = net::listen_on(addr, port_);
    note("listening " + addr.host + ":" + std::to_string(port_));
    threads_.emplace_back([this] { listen_loop(); });
  }
  if (polling) {
    threads_.emplace_back([this] { poll_loop(); });
    for (std::uint32_t i = 0; i < config_.max_workers; ++i) threads_.emplace_back([this] { worker_loop(); });
  }
}

void Farm::stop() {
  if (!running_.exchange(false)) return;
  cv_.notify_all();
  for (auto& t : threads_) t.join();
  threads_.clear();
  if (listen_fd_ >= 0) {
    close(listen_fd_);
    listen_fd_ = -1;
  }
}

std::size_t Farm::run_once() {
  std::size_t n = 0;
  for (const Term& r : poll(store_)) {
    if (!claim(store_, r)) continue;
    Outcome o = execute_worker(store_, r, config_);
    note("finished " + r.value() + " " + fhat::to_string(o));
    ++n;
  }
  if (n) save();
  return n;
}

void Farm::poll_loop() {
  std::unique_lock lock(mu_);
  while (running_) {
    std::size_t idle = config_.max_workers - busy_ - std::min<std::size_t>(queue_.size(), config_.max_workers - busy_);
    if (idle > 0) {
      lock.unlock();
      std::vector<Term> won;
      for (const Term& r : poll(store_)) {
        if (won.size() == idle) break;
        if (claim(store_, r)) won.push_back(r);
      }
      lock.lock();
      for (auto& r : won) queue_.push_back(std::move(r));
      if (!won.empty()) cv_.notify_all();
    }
    cv_.wait_for(lock, std::chrono::milliseconds(config_.poll_interval_ms), [&] { return wake_ || !running_; });
    wake_ = false;
  }
}

void Farm::worker_loop() {
  std::unique_lock lock(mu_);
  while (running_) {
    cv_.wait(lock, [&] { return !queue_.empty() || !running_; });
    if (!running_) break;
    Term r = queue_.front();
    queue_.pop_front();
    ++busy_;
    lock.unlock();
    try {
      Outcome o = execute_worker(store_, r, config_);
      note("finished " + r.value() + " " + fhat::to_string(o));
      save();
    } catch (const std::exception& e) {
      note("error " + r.value() + " " + e.what());
    }
    lock.lock();
    --busy_;
    wake_ = true;
    cv_.notify_all();
  }
}

void Farm::listen_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) != 1) continue;
    int fd = accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    net::Socket sock(fd);
    try {
      handle(fd);
    } catch (const std::exception& e) {
      note(std::string("connection error ") + e.what());
    }
  }
}

void Farm::handle(int fd) {
  net::LineReader in(fd);
  const auto timeout = std::chrono::seconds(5);
  while (auto line = in.next(timeout)) {
    std::istringstream words(*line);
    std::string cmd, a, b;
    words >> cmd >> a >> b;
    Reply reply;
    if (cmd == "MIGRATE") {
      std::size_t count = 0;
      bool ok_count = true;
      try {
        count = number<std::size_t>("count", b);
      } catch (const Error&) {
        ok_count = false;
      }
      std::string body;
      std::size_t got = 0;
      bool ended = false;
      while (auto l = in.next(timeout)) {
        if (*l == "END") {
          ended = true;
          break;
        }
        body += *l + "\n";
        ++got;
      }
      if (!ended) return;
      if (a.starts_with("<") && a.ends_with(">")) a = a.substr(1, a.size() - 2);
      if (!ok_count || got != count) {
        reply = {false, "parse", "expected " + b + " quads, got " + std::to_string(got)};
      } else {
        try {
          Envelope env{Term::uri(a), nquads::parse(body)};
          if (env.quads.size() != count) throw Error("quad count mismatch");
          reply = receive_migration(env, store_, config_, [&](const Dataset& d) {
            if (config_.store_path.empty()) return;
            std::lock_guard lock(save_mu_);
            nquads::write_file(config_.store_path, d);
          });
        } catch (const std::exception& e) {
          reply = {false, "parse", e.what()};
        }
      }
      note((reply.ok ? "received " : "rejected ") + a + " " + std::to_string(got));
      if (reply.ok) {
        std::lock_guard lock(mu_);
        wake_ = true;
        cv_.notify_all();
      }
    } else if (cmd == "PUSH") {
      try {
        migrate_out(store_, Term::uri(a), b.empty() && !config_.peers.empty() ? config_.peers.front() : b);
        save();
        reply = {true, "", a};
        note("migrated " + a + " " + b);
      } catch (const PeerRejected& e) {
        reply = {false, e.code(), e.what()};
      } catch (const std::exception& e) {
        reply = {false, "migrate", e.what()};
      }
    } else {
      reply = {false, "parse", "unknown command '" + cmd + "'"};
    }
    net::send_all(fd, reply.line());
  }
}

}  // namespace rvm::farm
