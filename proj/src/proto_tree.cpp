#include <algorithm>
#include <map>
#include <optional>

#include "proto_internal.hpp"

namespace frugalmc {
namespace {

// Model checking round on a tree network. Eight waves, each crossing a
// link once: START/ACK set up the rooted structure, TREEDECOMP/DECOMPOVER
// build a per-port bag chain at every node, TREELABELING/LABELINGOVER
// attach sigma labels, AUTOMATON broadcasts the compiled recipe and STATE
// folds the run back to the requester.
//
// Node v keeps one bag per port. The bag at the parent port holds
// (v, parent) and tops v's local chain; the father of bag [v, j] steps
// from j toward the parent port, and the top's father is the sender-side
// bag [u, l_u], so TREEDECOMP carries the sender's port number.
struct TreeHandler : NodeHandler {
  std::shared_ptr<CompileShared> sh;
  std::string sentence;  // requester only

  int l0 = 0;  // parent port, 0 at the requester
  int parent_id = 0;
  NodeStore store;
  std::map<int, SigmaLabel> lambda;          // by port (0 for the solo bag)
  std::map<int, StateId> state;              // chain states by port
  std::map<int, StateId> child_state;        // by child port
  std::vector<bool> got_ack, got_dover, got_lover;
  AutomatonP aut;
  bool folded = false;

  static BagKey key(int v, int j) { return {kChainBag, v, j}; }

  std::vector<int> child_ports(const NodeCtx& ctx) const {
    std::vector<int> out;
    for (int p = 1; p <= ctx.degree(); ++p)
      if (p != l0) out.push_back(p);
    return out;
  }

  bool all_children(const NodeCtx& ctx, const std::vector<bool>& flag) const {
    for (int p : child_ports(ctx))
      if (!flag[p - 1]) return false;
    return true;
  }

  void on_start(NodeCtx& ctx) override {
    got_ack.assign(ctx.degree(), false);
    got_dover.assign(ctx.degree(), false);
    got_lover.assign(ctx.degree(), false);
    if (!ctx.is_requester()) return;
    if (ctx.degree() == 0) {
      make_bags(ctx);
      make_labels(ctx);
      make_automaton(ctx);
      try_fold(ctx);
      return;
    }
    Message m{"START", {}, {}, ""};
    for (int p = 1; p <= ctx.degree(); ++p) ctx.send(p, m);
  }

  void make_bags(NodeCtx& ctx, int father_port_at_parent = 0) {
    int v = ctx.id();
    int d = ctx.degree();
    if (d == 0) {
      StoredBag b;
      b.key = key(v, 0);
      b.tuple = {v, v};
      b.root = true;
      store.bags[b.key] = b;
      return;
    }
    for (int j = 1; j <= d; ++j) {
      StoredBag b;
      b.key = key(v, j);
      if (j == l0) {
        b.tuple = {v, parent_id};
        b.edge_pairs.push_back({v, parent_id});
        b.father = {parent_id, key(parent_id, father_port_at_parent)};
      } else {
        b.tuple = {v, v};
        if (l0 == 0) {
          // requester chain descends from port 1
          if (j == 1)
            b.root = true;
          else
            b.father = {v, key(v, j - 1)};
        } else {
          // chain steps toward the parent port
          b.father = {v, key(v, j < l0 ? j + 1 : j - 1)};
        }
      }
      store.bags[b.key] = b;
    }
  }

  void make_labels(NodeCtx& ctx) {
    int v = ctx.id();
    for (auto& [k, b] : store.bags) {
      int j = static_cast<int>(k[2]);
      if (b.root) {
        lambda[j] = stored_bag_label(b, nullptr);
        continue;
      }
      std::vector<int> ft;
      if (b.father.owner == v) {
        ft = store.bags.at(b.father.key).tuple;
      } else {
        // the father bag [parent, l_u] sits at a child port up there
        ft = {parent_id, parent_id};
      }
      lambda[j] = stored_bag_label(b, &ft);
    }
  }

  void make_automaton(NodeCtx& ctx) {
    FormulaP f = parse_formula(sentence);
    Translation tr = translate_to_tree_sentence(f, 1);
    Recipe rec = make_recipe(tr.sentence, sentence);
    aut = automaton_from_recipe(rec, *sh);
    Message m{"AUTOMATON", {}, {}, rec.text()};
    for (int p = 1; p <= ctx.degree(); ++p) ctx.send(p, m);
  }

  LabelId lid(int j) {
    Label l;
    l.sig = lambda.at(j);
    return intern_plain(aut->pool(), l);
  }

  // chain evaluation once every child subtree has reported
  void try_fold(NodeCtx& ctx) {
    if (!aut || folded) return;
    int d = ctx.degree();
    for (int p : child_ports(ctx))
      if (!child_state.count(p)) return;
    folded = true;
    if (d == 0) {
      StateId s = aut->eval({}, lid(0));
      ctx.decide(aut->accepts(s));
      return;
    }
    if (l0 == 0) {
      state[d] = aut->eval({child_state.at(d)}, lid(d));
      for (int j = d - 1; j >= 1; --j)
        state[j] = aut->eval({child_state.at(j), state.at(j + 1)}, lid(j));
      ctx.decide(aut->accepts(state.at(1)));
      return;
    }
    if (d == 1) {
      state[1] = aut->eval({}, lid(1));
    } else if (l0 == 1) {
      state[d] = aut->eval({child_state.at(d)}, lid(d));
      for (int j = d - 1; j >= 2; --j)
        state[j] = aut->eval({child_state.at(j), state.at(j + 1)}, lid(j));
      state[1] = aut->eval({state.at(2)}, lid(1));
    } else if (l0 == d) {
      state[1] = aut->eval({child_state.at(1)}, lid(1));
      for (int j = 2; j <= d - 1; ++j)
        state[j] = aut->eval({state.at(j - 1), child_state.at(j)}, lid(j));
      state[d] = aut->eval({state.at(d - 1)}, lid(d));
    } else {
      state[1] = aut->eval({child_state.at(1)}, lid(1));
      for (int j = 2; j <= l0 - 1; ++j)
        state[j] = aut->eval({state.at(j - 1), child_state.at(j)}, lid(j));
      state[d] = aut->eval({child_state.at(d)}, lid(d));
      for (int j = d - 1; j >= l0 + 1; --j)
        state[j] = aut->eval({child_state.at(j), state.at(j + 1)}, lid(j));
      state[l0] = aut->eval({state.at(l0 - 1), state.at(l0 + 1)}, lid(l0));
    }
    ctx.send(l0, Message{"STATE", {static_cast<long long>(state.at(l0))}, {}, ""});
  }

  void on_message(NodeCtx& ctx, int port, const Message& m) override {
    if (m.kind == "START") {
      l0 = port;
      parent_id = ctx.neighbor(port);
      if (ctx.degree() > 1) {
        Message fwd{"START", {}, {}, ""};
        for (int p : child_ports(ctx)) ctx.send(p, fwd);
      } else {
        ctx.send(l0, Message{"ACK", {}, {}, ""});
      }
      return;
    }
    if (m.kind == "ACK") {
      got_ack[port - 1] = true;
      if (!all_children(ctx, got_ack)) return;
      if (ctx.is_requester()) {
        make_bags(ctx);
        Message down{"TREEDECOMP", {}, {}, ""};
        for (int p = 1; p <= ctx.degree(); ++p) {
          down.args = {p};
          ctx.send(p, down);
        }
      } else {
        ctx.send(l0, Message{"ACK", {}, {}, ""});
      }
      return;
    }
    if (m.kind == "TREEDECOMP") {
      make_bags(ctx, static_cast<int>(m.args.at(0)));
      if (ctx.degree() == 1) {
        ctx.send(l0, Message{"DECOMPOVER", {}, {}, ""});
      } else {
        Message down{"TREEDECOMP", {}, {}, ""};
        for (int p : child_ports(ctx)) {
          down.args = {p};
          ctx.send(p, down);
        }
      }
      return;
    }
    if (m.kind == "DECOMPOVER") {
      got_dover[port - 1] = true;
      if (!all_children(ctx, got_dover)) return;
      if (ctx.is_requester()) {
        make_labels(ctx);
        Message down{"TREELABELING", {}, {}, ""};
        for (int p = 1; p <= ctx.degree(); ++p) ctx.send(p, down);
      } else {
        ctx.send(l0, Message{"DECOMPOVER", {}, {}, ""});
      }
      return;
    }
    if (m.kind == "TREELABELING") {
      make_labels(ctx);
      if (ctx.degree() == 1) {
        ctx.send(l0, Message{"LABELINGOVER", {}, {}, ""});
      } else {
        Message down{"TREELABELING", {}, {}, ""};
        for (int p : child_ports(ctx)) ctx.send(p, down);
      }
      return;
    }
    if (m.kind == "LABELINGOVER") {
      got_lover[port - 1] = true;
      if (!all_children(ctx, got_lover)) return;
      if (ctx.is_requester()) {
        make_automaton(ctx);
        try_fold(ctx);
      } else {
        ctx.send(l0, Message{"LABELINGOVER", {}, {}, ""});
      }
      return;
    }
    if (m.kind == "AUTOMATON") {
      aut = automaton_from_recipe(Recipe::parse(m.text), *sh);
      if (ctx.degree() > 1) {
        Message down{"AUTOMATON", {}, {}, m.text};
        for (int p : child_ports(ctx)) ctx.send(p, down);
      }
      try_fold(ctx);
      return;
    }
    if (m.kind == "STATE") {
      child_state[port] = static_cast<StateId>(m.args.at(0));
      try_fold(ctx);
      return;
    }
    throw ProtocolError("unexpected " + m.kind + " on a tree network");
  }
};

}  // namespace

ProtocolResult tree_model_check(const Graph& g, const std::string& sentence,
                                const SimConfig& cfg) {
  g.require_connected();
  if (g.m() != g.n() - 1) throw ProtocolError("network is not a tree");
  auto sh = std::make_shared<CompileShared>();
  Simulation sim(g, cfg);
  sim.install([&](int) {
    auto h = std::make_unique<TreeHandler>();
    h->sh = sh;
    h->sentence = sentence;
    return h;
  });
  sim.kick_all();
  sim.run();

  int rq = cfg.requester;
  ProtocolResult r;
  r.metrics = sim.metrics();
  r.decided = sim.decided(rq);
  r.accept = r.decided && sim.decision(rq);
  r.store.node.resize(g.n() + 1);
  for (int v = 1; v <= g.n(); ++v)
    r.store.node[v] = static_cast<TreeHandler*>(sim.handler(v))->store;
  r.store.root = {rq, TreeHandler::key(rq, g.degree(rq) == 0 ? 0 : 1)};

  BfsTree& t = r.tree;
  t.root = rq;
  t.depth.assign(g.n() + 1, 0);
  t.parent.assign(g.n() + 1, 0);
  t.port_state.assign(g.n() + 1, {});
  for (int v = 1; v <= g.n(); ++v) {
    auto* h = static_cast<TreeHandler*>(sim.handler(v));
    t.parent[v] = h->parent_id;
    t.port_state[v].assign(g.degree(v), PortState::Child);
    if (h->l0) t.port_state[v][h->l0 - 1] = PortState::Parent;
  }
  for (int v = 1; v <= g.n(); ++v) {
    int d = 0;
    for (int u = v; u != rq; u = t.parent[u]) d++;
    t.depth[v] = d;
    t.height = std::max(t.height, d);
  }
  return r;
}

}  // namespace frugalmc
