#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rvm/error.hpp"
#include "rvm/fhat/machine.hpp"
#include "rvm/graph_store.hpp"

namespace rvm::farm {

struct FarmConfig {
  std::filesystem::path store_path;  // empty: in-memory only
  std::string listen_address;        // host:port, port 0 picks one; empty: no listener
  std::vector<std::string> peers;
  std::uint32_t poll_interval_ms = 100;
  std::uint32_t max_workers = 1;
  std::uint64_t cycle_budget = 100000;
  std::size_t graph_quota = 0;  // 0: unlimited

  /// key=value lines; '#' starts a comment. Throws Error.
  static FarmConfig parse(const std::string& text);
  static FarmConfig load(const std::filesystem::path& path);
  void validate() const;
};

class PeerUnreachable : public Error {
 public:
  using Error::Error;
};

class PeerRejected : public Error {
 public:
  PeerRejected(std::string code, const std::string& message)
      : Error("peer rejected migration (" + code + "): " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Machines typed rvm:RVM with needsProcess true, sorted.
std::vector<Term> poll(const GraphStore& store);

/// Flips needsProcess true to false; true iff this caller won.
bool claim(GraphStore& store, const Term& rvm);

/// Read is always allowed; write and delete only on the machine's home
/// graph or a graph whose rvm:spawnedBy chain reaches it.
bool check_permission(const Dataset& data, const Term& rvm, const Term& graph, fhat::Action action);
bool check_permission(const GraphStore& store, const Term& rvm, const Term& graph, fhat::Action action);

/// The sandbox guard for a machine homed at `home`.
fhat::Guard sandbox(const Term& home);

/// Runs a claimed machine for one cycle budget under the sandbox.
fhat::Outcome execute_worker(GraphStore& store, const Term& rvm, const FarmConfig& config);

struct Envelope {
  Term graph;
  std::vector<Quad> quads;
};

/// The graph plus every graph spawned from it, transitively.
std::vector<Term> owned_graphs(const Dataset& data, const Term& graph);

std::string encode(const Envelope& env);

struct Reply {
  bool ok = false;
  std::string code;  // quota, parse or conflict when !ok
  std::string message;
  std::string line() const;
};

/// Validates and inserts an envelope. `persist` runs under the write lock
/// after the insert and before the reply is produced.
Reply receive_migration(const Envelope& env, GraphStore& store, const FarmConfig& config,
                        const std::function<void(const Dataset&)>& persist = {});

/// Sends `graph` (and the graphs it spawned) to `peer` and deletes them
/// locally once the peer acknowledges. Throws Error, PeerUnreachable or
/// PeerRejected; on any throw the local store is unchanged.
void migrate_out(GraphStore& store, const Term& graph, const std::string& peer,
                 std::chrono::milliseconds timeout = std::chrono::seconds(5));

/// Poll loop, worker pool and wire listener around one store.
class Farm {
 public:
  using Log = std::function<void(const std::string&)>;

  Farm(GraphStore& store, FarmConfig config, Log log = {});
  ~Farm();
  Farm(const Farm&) = delete;
  Farm& operator=(const Farm&) = delete;

  /// Starts the listener and, if `polling`, the poll loop and workers.
  void start(bool polling = true);
  void stop();

  /// Claims and runs every runnable machine once, on the calling thread.
  std::size_t run_once();

  /// Bound listener port, after start().
  std::uint16_t port() const { return port_; }
  const FarmConfig& config() const { return config_; }
  void save() const;

 private:
  void poll_loop();
  void worker_loop();
  void listen_loop();
  void handle(int fd);
  void note(const std::string& line) const;

  GraphStore& store_;
  FarmConfig config_;
  Log log_;
  std::atomic<bool> running_{false};
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Term> queue_;
  std::size_t busy_ = 0;
  bool wake_ = false;
  mutable std::mutex save_mu_;
};

}  // namespace rvm::farm
