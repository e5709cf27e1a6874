#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "frugalmc/graph.hpp"

namespace frugalmc {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SimMode { Sync, Async };

// Pre-computed BFS injection writes parent/child/cross states into the
// node-local port tables before the first handler runs.
struct SimConfig {
  SimMode mode = SimMode::Async;
  uint64_t seed = 0;
  int requester = 1;
  long long max_events = 10000000;
  bool accounting = true;
  bool record_trace = true;
  std::optional<BfsTree> bfs;
};

// Protocol payload: a kind tag plus id arguments, fixed-length id lists,
// and an optional text blob. Ids count one abstract word each; the text
// blob is accounted separately (recipe_chars), not in words().
struct Message {
  std::string kind;
  std::vector<long long> args;
  std::vector<std::vector<int>> lists;
  std::string text;

  int words() const;
};

struct Envelope {
  int src = 0;
  int dst = 0;
  int port = 0;       // receiving port at dst
  long long t = 0;    // causal time of the send
  long long seq = 0;  // per-directed-link FIFO sequence
  Message msg;
};

// time is rounds elapsed in sync mode and the longest happens-before
// chain in async mode. msg_per_link_max sums both directions of a link.
struct Metrics {
  std::map<std::pair<int, int>, long long> per_link;  // directed (src,dst)
  std::map<std::string, long long> per_kind;
  long long total = 0;
  long long payload_words = 0;
  long long max_message_words = 0;
  long long recipe_chars = 0;
  long long time = 0;

  long long max_directed_link() const;
  long long msg_per_link_max() const;
  Metrics& operator+=(const Metrics& o);
};

class Simulation;

// Per-node view handed to handlers: 1-hop neighbor ids, the node's own
// port table, injected BFS port states. Nothing global.
class NodeCtx {
 public:
  int id() const { return id_; }
  int degree() const;
  int neighbor(int port) const;
  int port_to(int nbr) const;
  bool is_requester() const;

  PortState port_state(int port) const;  // Unknown without injection
  int parent_port() const;               // 0 at the root or uninjected

  void send(int port, Message m);
  void decide(bool accept);
  void halt();

 private:
  friend class Simulation;
  NodeCtx(Simulation* s, int id) : sim_(s), id_(id) {}
  Simulation* sim_;
  int id_;
};

// Handlers are deterministic functions of local state and the input
// message; they own all node-local protocol state. on_round_end fires in
// sync mode after a node received at least one message in the round.
// on_poke is an out-of-band controller signal, used between run() calls
// at quiescence to start the next protocol phase.
struct NodeHandler {
  virtual ~NodeHandler() = default;
  virtual void on_start(NodeCtx&) {}
  virtual void on_message(NodeCtx&, int port, const Message&) = 0;
  virtual void on_round_end(NodeCtx&) {}
  virtual void on_poke(NodeCtx&, int) {}
};

using HandlerFactory = std::function<std::unique_ptr<NodeHandler>(int node)>;

// Single-threaded discrete-event loop over per-directed-link FIFO queues.
//   sync:  lock-step rounds; round-i sends are delivered in round i+1,
//          ordered by (receiver, port, queue order)
//   async: repeatedly picks a nonempty link uniformly under the seed
// The run stops at quiescence, when the requesting node halts, or at the
// event cap (SimError with a live-envelope dump). Identical seeds yield
// identical traces. Instances share no state; runs can sit on separate
// threads.
class Simulation {
 public:
  Simulation(const Graph& g, SimConfig cfg);

  void install(const HandlerFactory& make);
  void kick(int node);  // runs on_start at causal time 0
  void kick_all();
  void poke(int node, int tag = 0);  // runs on_poke at the current time
  void run();

  const Graph& graph() const { return *g_; }
  const SimConfig& config() const { return cfg_; }
  const Metrics& metrics() const { return metrics_; }
  const std::vector<std::string>& trace() const { return trace_; }

  bool decided(int node) const;
  bool decision(int node) const;
  bool halted(int node) const;
  bool stopped() const { return stopped_; }
  long long pending() const;

  NodeHandler* handler(int node);

 private:
  friend class NodeCtx;

  void send_from(int src, int port, Message m);
  void deliver(Envelope e);
  std::string dump_pending() const;

  const Graph* g_;
  SimConfig cfg_;
  std::vector<std::unique_ptr<NodeHandler>> handlers_;  // [id], 1-based
  std::vector<std::vector<PortState>> port_state_;      // [id][port-1]
  std::vector<int> parent_port_;                        // [id], 0 at root

  std::map<std::pair<int, int>, std::deque<Envelope>> queues_;
  std::map<std::pair<int, int>, long long> next_seq_;
  std::map<std::pair<int, int>, long long> delivered_seq_;

  Metrics metrics_;
  std::vector<std::string> trace_;
  std::map<int, bool> decisions_;
  std::set<int> halted_;
  bool stopped_ = false;
  long long events_ = 0;
  long long now_ = 0;  // causal time of the running activation
  std::mt19937_64 rng_;
};

}  // namespace frugalmc
