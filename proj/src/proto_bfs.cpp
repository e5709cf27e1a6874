#include <algorithm>

#include "proto_internal.hpp"

namespace frugalmc {
namespace {

// Synchronous layer flood. The requester starts at depth 0; a node picks
// its parent among the first round of BFSGO arrivals, favoring the
// smallest sender id, answers BFSCHILD upward and floods BFSGO on the
// remaining ports. Every other arrival marks a cross edge. Two messages
// cross each link overall.
struct BfsHandler : NodeHandler {
  int depth = -1;
  int parent = 0;  // port, 0 at the requester
  std::vector<PortState> cls;
  struct Arrival {
    int nbr = 0;
    int port = 0;
    int d = 0;
  };
  std::vector<Arrival> wave;

  void on_start(NodeCtx& ctx) override {
    cls.assign(ctx.degree(), PortState::Unknown);
    if (!ctx.is_requester()) return;
    depth = 0;
    Message m{"BFSGO", {0}, {}, ""};
    for (int p = 1; p <= ctx.degree(); ++p) ctx.send(p, m);
  }

  void on_message(NodeCtx& ctx, int port, const Message& m) override {
    if (m.kind == "BFSCHILD") {
      cls[port - 1] = PortState::Child;
      return;
    }
    if (m.kind != "BFSGO") throw ProtocolError("unexpected " + m.kind);
    if (depth < 0) {
      wave.push_back({ctx.neighbor(port), port, static_cast<int>(m.args.at(0))});
      return;
    }
    cls[port - 1] = PortState::Cross;
  }

  void on_round_end(NodeCtx& ctx) override {
    if (depth >= 0 || wave.empty()) return;
    for (const Arrival& a : wave)
      if (a.d != wave.front().d) throw ProtocolError("uneven layer wave");
    std::sort(wave.begin(), wave.end(),
              [](const Arrival& a, const Arrival& b) { return a.nbr < b.nbr; });
    depth = wave.front().d + 1;
    parent = wave.front().port;
    cls[parent - 1] = PortState::Parent;
    for (size_t i = 1; i < wave.size(); ++i) cls[wave[i].port - 1] = PortState::Cross;
    ctx.send(parent, Message{"BFSCHILD", {}, {}, ""});
    Message go{"BFSGO", {depth}, {}, ""};
    for (int p = 1; p <= ctx.degree(); ++p)
      if (p != parent) ctx.send(p, go);
    wave.clear();
  }
};

}  // namespace

BfsResult bfs_protocol(const Graph& g, const SimConfig& cfg) {
  g.require_connected();
  if (cfg.mode != SimMode::Sync)
    throw ProtocolError("the layer flood needs lock-step rounds; run it in sync mode");
  SimConfig c = cfg;
  c.bfs.reset();
  Simulation sim(g, c);
  sim.install([](int) { return std::make_unique<BfsHandler>(); });
  sim.kick_all();
  sim.run();

  BfsResult r;
  r.metrics = sim.metrics();
  BfsTree& t = r.tree;
  t.root = c.requester;
  t.depth.assign(g.n() + 1, -1);
  t.parent.assign(g.n() + 1, 0);
  t.port_state.assign(g.n() + 1, {});
  t.height = 0;
  for (int v = 1; v <= g.n(); ++v) {
    auto* h = static_cast<BfsHandler*>(sim.handler(v));
    if (h->depth < 0) throw ProtocolError("node " + std::to_string(v) + " unreached");
    t.depth[v] = h->depth;
    t.height = std::max(t.height, h->depth);
    t.parent[v] = h->parent ? g.neighbor(v, h->parent) : 0;
    t.port_state[v] = h->cls;
    for (PortState s : h->cls)
      if (s == PortState::Unknown)
        throw ProtocolError("unclassified port at node " + std::to_string(v));
  }
  return r;
}

}  // namespace frugalmc
