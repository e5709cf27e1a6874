#include "frugalmc/netsim.hpp"

#include <set>

#include "doctest.h"
#include "frugalmc/graph.hpp"

using namespace frugalmc;

namespace {

Graph path(int n) {
  std::vector<std::pair<int, int>> es;
  for (int v = 1; v < n; ++v) es.push_back({v, v + 1});
  return Graph::from_edges(n, es);
}

Graph cycle(int n) {
  std::vector<std::pair<int, int>> es;
  for (int v = 1; v < n; ++v) es.push_back({v, v + 1});
  es.push_back({n, 1});
  return Graph::from_edges(n, es);
}

Graph random_connected(std::mt19937_64& r, int n, int extra) {
  std::vector<std::pair<int, int>> es;
  for (int v = 2; v <= n; ++v) es.push_back({(int)(r() % (v - 1)) + 1, v});
  std::set<std::pair<int, int>> have(es.begin(), es.end());
  for (int tries = 0; extra > 0 && tries < 200; ++tries) {
    int a = (int)(r() % n) + 1, b = (int)(r() % n) + 1;
    if (a == b) continue;
    std::pair<int, int> e{std::min(a, b), std::max(a, b)};
    if (!have.insert(e).second) continue;
    es.push_back(e);
    --extra;
  }
  return Graph::from_edges(n, es);
}

struct Inert : NodeHandler {
  void on_message(NodeCtx&, int, const Message&) override {}
};

struct Probe : NodeHandler {
  int parent_nbr = 0;
  std::vector<PortState> states;
  void on_start(NodeCtx& c) override {
    for (int p = 1; p <= c.degree(); ++p) states.push_back(c.port_state(p));
    if (c.parent_port()) parent_nbr = c.neighbor(c.parent_port());
  }
  void on_message(NodeCtx&, int, const Message&) override {}
};

struct Flood : NodeHandler {
  bool seen = false;
  void on_start(NodeCtx& c) override {
    seen = true;
    for (int p = 1; p <= c.degree(); ++p) c.send(p, Message{"FLOOD", {}, {}, ""});
  }
  void on_message(NodeCtx& c, int port, const Message&) override {
    if (seen) return;
    seen = true;
    for (int p = 1; p <= c.degree(); ++p)
      if (p != port) c.send(p, Message{"FLOOD", {}, {}, ""});
  }
};

// flood plus echo convergecast; the requester decides whether the counted
// total matches the expected node count
struct Count : NodeHandler {
  explicit Count(int n) : expect(n) {}
  int expect;
  bool seen = false;
  int parent = 0;
  int waiting = 0;
  long long sum = 1;

  void on_start(NodeCtx& c) override {
    seen = true;
    waiting = c.degree();
    if (waiting == 0) {
      c.decide(expect == 1);
      c.halt();
      return;
    }
    for (int p = 1; p <= c.degree(); ++p) c.send(p, Message{"HELLO", {}, {}, ""});
  }
  void on_message(NodeCtx& c, int port, const Message& m) override {
    if (m.kind == "HELLO") {
      if (seen) {
        c.send(port, Message{"COUNT", {0}, {}, ""});
        return;
      }
      seen = true;
      parent = port;
      waiting = c.degree() - 1;
      for (int p = 1; p <= c.degree(); ++p)
        if (p != port) c.send(p, Message{"HELLO", {}, {}, ""});
      if (waiting == 0) c.send(parent, Message{"COUNT", {sum}, {}, ""});
      return;
    }
    sum += m.args[0];
    if (--waiting > 0) return;
    if (parent) {
      c.send(parent, Message{"COUNT", {sum}, {}, ""});
    } else {
      c.decide(sum == expect);
      c.halt();
    }
  }
};

struct Recorder : NodeHandler {
  std::vector<std::string> kinds;
  void on_message(NodeCtx&, int, const Message& m) override {
    kinds.push_back(m.kind);
  }
};

struct Burst : NodeHandler {
  void on_start(NodeCtx& c) override {
    c.send(1, Message{"A", {}, {}, ""});
    c.send(1, Message{"B", {}, {}, ""});
    c.send(1, Message{"C", {}, {}, ""});
  }
  void on_message(NodeCtx&, int, const Message&) override {}
};

struct PingPong : NodeHandler {
  void on_start(NodeCtx& c) override { c.send(1, Message{"PING", {}, {}, ""}); }
  void on_message(NodeCtx& c, int port, const Message&) override {
    c.send(port, Message{"PING", {}, {}, ""});
  }
};

long long link_sum(const Metrics& m) {
  long long s = 0;
  for (const auto& [k, c] : m.per_link) s += c;
  return s;
}

}  // namespace

TEST_CASE("message word accounting") {
  Message m{"X", {1, 2, 3}, {{4, 5}, {6}}, "recipe text"};
  CHECK(m.words() == 6);
}

TEST_CASE("inert network delivers nothing") {
  Graph g = path(2);
  Simulation sim(g, SimConfig{});
  sim.install([](int) { return std::make_unique<Inert>(); });
  sim.kick_all();
  sim.run();
  CHECK(sim.metrics().total == 0);
  CHECK(sim.metrics().time == 0);
  CHECK(sim.trace().empty());
  CHECK(sim.pending() == 0);
}

TEST_CASE("bfs injection writes port states") {
  Graph g = cycle(6);
  SimConfig cfg;
  cfg.bfs = bfs_tree(g, 1);
  Simulation sim(g, cfg);
  sim.install([](int) { return std::make_unique<Probe>(); });
  sim.kick_all();

  auto* p4 = dynamic_cast<Probe*>(sim.handler(4));
  REQUIRE(p4 != nullptr);
  CHECK(p4->parent_nbr == 3);
  CHECK(p4->states == std::vector<PortState>{PortState::Parent, PortState::Cross});

  auto* p1 = dynamic_cast<Probe*>(sim.handler(1));
  CHECK(p1->parent_nbr == 0);
  CHECK(p1->states == std::vector<PortState>{PortState::Child, PortState::Child});
}

TEST_CASE("flooding a cycle stays within two messages per link") {
  Graph g = cycle(6);
  for (SimMode mode : {SimMode::Sync, SimMode::Async}) {
    SimConfig cfg;
    cfg.mode = mode;
    cfg.seed = 11;
    Simulation sim(g, cfg);
    sim.install([](int) { return std::make_unique<Flood>(); });
    sim.kick(1);
    sim.run();
    CHECK(sim.metrics().msg_per_link_max() <= 2);
    if (mode == SimMode::Sync) CHECK(sim.metrics().time == 4);
    CHECK(sim.metrics().time >= 3);  // eccentricity of the start node
    CHECK(sim.metrics().time <= 5);  // longest simple forwarding chain
    CHECK(link_sum(sim.metrics()) == sim.metrics().total);
    for (int v = 1; v <= 6; ++v)
      CHECK(dynamic_cast<Flood*>(sim.handler(v))->seen);
  }
}

TEST_CASE("trace line format") {
  Graph g = path(2);
  Simulation sim(g, SimConfig{});
  sim.install([](int v) -> std::unique_ptr<NodeHandler> {
    if (v == 1) return std::make_unique<Burst>();
    return std::make_unique<Recorder>();
  });
  sim.kick(1);
  sim.run();
  REQUIRE(sim.trace().size() == 3);
  CHECK(sim.trace()[0] == "t=1 deliver 1->2 port=1 kind=A size=0");
}

TEST_CASE("event cap aborts with a pending dump") {
  Graph g = path(2);
  SimConfig cfg;
  cfg.max_events = 50;
  Simulation sim(g, cfg);
  sim.install([](int) { return std::make_unique<PingPong>(); });
  sim.kick(1);
  try {
    sim.run();
    FAIL("expected SimError");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("event cap") != std::string::npos);
    CHECK(std::string(e.what()).find("PING") != std::string::npos);
  }
}

TEST_CASE("fifo order per link") {
  Graph g = path(2);
  for (SimMode mode : {SimMode::Sync, SimMode::Async}) {
    SimConfig cfg;
    cfg.mode = mode;
    Simulation sim(g, cfg);
    sim.install([](int v) -> std::unique_ptr<NodeHandler> {
      if (v == 1) return std::make_unique<Burst>();
      return std::make_unique<Recorder>();
    });
    sim.kick(1);
    sim.run();
    auto* r = dynamic_cast<Recorder*>(sim.handler(2));
    CHECK(r->kinds == std::vector<std::string>{"A", "B", "C"});
  }
}

TEST_CASE("payload accounting separates recipe text") {
  Graph g = path(2);
  struct Sender : NodeHandler {
    void on_start(NodeCtx& c) override {
      c.send(1, Message{"DATA", {7, 8}, {{1, 2, 3}}, "abcd"});
    }
    void on_message(NodeCtx&, int, const Message&) override {}
  };
  Simulation sim(g, SimConfig{});
  sim.install([](int v) -> std::unique_ptr<NodeHandler> {
    if (v == 1) return std::make_unique<Sender>();
    return std::make_unique<Inert>();
  });
  sim.kick(1);
  sim.run();
  CHECK(sim.metrics().payload_words == 5);
  CHECK(sim.metrics().max_message_words == 5);
  CHECK(sim.metrics().recipe_chars == 4);
  CHECK(sim.metrics().per_kind.at("DATA") == 1);
}

TEST_CASE("identical seeds give identical traces") {
  std::mt19937_64 r(99);
  for (int rep = 0; rep < 20; ++rep) {
    Graph g = random_connected(r, 4 + (int)(r() % 10), (int)(r() % 4));
    uint64_t seed = r();
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
      SimConfig cfg;
      cfg.seed = seed;
      Simulation sim(g, cfg);
      sim.install([](int) { return std::make_unique<Flood>(); });
      sim.kick(1);
      sim.run();
      CHECK(link_sum(sim.metrics()) == sim.metrics().total);
      if (run == 0)
        first = sim.trace();
      else
        CHECK(first == sim.trace());
    }
  }
}

TEST_CASE("verdicts are schedule independent") {
  std::mt19937_64 r(5);
  for (int rep = 0; rep < 4; ++rep) {
    int n = 5 + (int)(r() % 8);
    Graph g = random_connected(r, n, 2);
    for (uint64_t seed = 0; seed < 10; ++seed) {
      SimConfig cfg;
      cfg.seed = seed;
      Simulation sim(g, cfg);
      sim.install([n](int) { return std::make_unique<Count>(n); });
      sim.kick(1);
      sim.run();
      REQUIRE(sim.decided(1));
      CHECK(sim.decision(1));
      CHECK(sim.halted(1));
      CHECK(sim.stopped());
    }
  }
}

TEST_CASE("sync rounds match causal depth on a path") {
  Graph g = path(5);
  SimConfig cfg;
  cfg.mode = SimMode::Sync;
  Simulation sim(g, cfg);
  sim.install([](int) { return std::make_unique<Flood>(); });
  sim.kick(1);
  sim.run();
  CHECK(sim.metrics().time == 4);
  CHECK(sim.metrics().total == 4);
}

namespace {

// counts rounds that delivered to this node; echoes one hop on poke
struct RoundProbe : NodeHandler {
  int rounds = 0;
  int pokes = 0;
  int last_tag = -1;
  void on_message(NodeCtx& c, int port, const Message& m) override {
    if (m.kind == "PING" && m.args[0] > 0)
      c.send(port == 1 && c.degree() > 1 ? 2 : 1, Message{"PING", {m.args[0] - 1}, {}, ""});
    (void)port;
  }
  void on_round_end(NodeCtx&) override { rounds++; }
  void on_poke(NodeCtx& c, int tag) override {
    pokes++;
    last_tag = tag;
    c.send(1, Message{"PING", {0}, {}, ""});
  }
};

}  // namespace

TEST_CASE("sync round hook fires once per receiving round") {
  Graph g = path(3);
  SimConfig cfg;
  cfg.mode = SimMode::Sync;
  Simulation sim(g, cfg);
  sim.install([](int) { return std::make_unique<RoundProbe>(); });
  sim.poke(1, 7);  // sends PING hopping 1->2
  sim.run();
  auto* h1 = static_cast<RoundProbe*>(sim.handler(1));
  auto* h2 = static_cast<RoundProbe*>(sim.handler(2));
  CHECK(h1->pokes == 1);
  CHECK(h1->last_tag == 7);
  CHECK(h2->rounds == 1);
  CHECK(h1->rounds == 0);

  // a second phase resumes at the recorded time
  long long t0 = sim.metrics().time;
  sim.poke(2, 9);
  sim.run();
  CHECK(static_cast<RoundProbe*>(sim.handler(2))->last_tag == 9);
  CHECK(sim.metrics().time == t0 + 1);
}

TEST_CASE("poke skips halted nodes and checks ids") {
  Graph g = path(2);
  SimConfig cfg;
  Simulation sim(g, cfg);
  sim.install([](int) { return std::make_unique<RoundProbe>(); });
  CHECK_THROWS_AS(sim.poke(0), SimError);
  CHECK_THROWS_AS(sim.poke(3), SimError);
}
