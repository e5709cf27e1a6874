#include <algorithm>
#include <optional>

#include "proto_internal.hpp"

namespace frugalmc {
namespace {

// Relabels a constructed decomposition and folds the automaton run up to
// the root bag at the requester. Every bag announces itself to its
// father's owner (CHILDBAG), which acknowledges with the father's tuple
// (CHILDBAGACK) so the child can compute its up relation. A convergecast
// over the spanning tree (RELABELOVER) tells the requester when every
// announcement has been acknowledged; only then does the automaton
// broadcast start, so no state message can outrun a registration.
//
// States ready within one activation leave in a single STATE message per
// destination. Bags with more than two children fold through the same
// chain a binarized decomposition would introduce: the copies reuse the
// bag's label with the up relation replaced by its eq relation.
struct RunHandler : NodeHandler {
  const NodeStore* mine = nullptr;
  std::shared_ptr<CompileShared> sh;
  Recipe recipe;  // requester only
  int hops = 0;   // 0 = father owners are 1-hop, >0 = flood routing

  struct Kid {
    BagRef ref;
    std::optional<StateId> st;
  };
  std::map<BagKey, std::vector<Kid>> kids;        // children of own bags
  std::map<BagKey, std::vector<int>> ftuple;      // father tuples, remote fathers
  std::map<BagKey, StateId> state;
  std::map<BagRef, BagKey> child_of;              // child ref -> own bag
  std::map<int, std::vector<std::pair<BagKey, StateId>>> outbox;
  detail::FloodCore flood;
  int acks_expected = 0;
  int acks_received = 0;
  bool relover_sent = false;
  std::vector<bool> got_relover;
  AutomatonP aut;

  static bool is_routed(const std::string& kind) {
    return kind == "CHILDBAG" || kind == "CHILDBAGACK" || kind == "STATE";
  }

  void dispatch(NodeCtx& ctx, int dest, Message m) {
    if (hops > 0) {
      flood.originate(ctx, dest, std::move(m));
      return;
    }
    int p = ctx.port_to(dest);
    if (!p)
      throw ProtocolError("father owner " + std::to_string(dest) +
                          " is not a neighbor of " + std::to_string(ctx.id()));
    ctx.send(p, std::move(m));
  }

  std::vector<int> tree_children(const NodeCtx& ctx) const {
    std::vector<int> out;
    for (int p = 1; p <= ctx.degree(); ++p)
      if (ctx.port_state(p) == PortState::Child) out.push_back(p);
    return out;
  }

  void on_start(NodeCtx& ctx) override {
    got_relover.assign(ctx.degree(), false);
    flood.self = ctx.id();
    flood.hops = hops;
    std::map<int, std::vector<std::pair<BagKey, BagKey>>> announce;
    for (const auto& [key, bag] : mine->bags) {
      if (!bag.father.valid()) continue;
      if (bag.father.owner == ctx.id()) {
        if (!mine->bags.count(bag.father.key))
          throw ProtocolError("missing local father of " + bag_key_text(key));
        kids[bag.father.key].push_back({BagRef{ctx.id(), key}, std::nullopt});
        child_of[{ctx.id(), key}] = bag.father.key;
      } else {
        announce[bag.father.owner].push_back({key, bag.father.key});
      }
    }
    acks_expected = static_cast<int>(announce.size());
    for (auto& [owner, entries] : announce) {
      Message m{"CHILDBAG", {}, {}, ""};
      m.args.push_back(static_cast<long long>(entries.size()));
      for (auto& [ck, fk] : entries) {
        detail::put_key(m.args, ck);
        detail::put_key(m.args, fk);
      }
      dispatch(ctx, owner, std::move(m));
    }
    try_relover(ctx);
  }

  void try_relover(NodeCtx& ctx) {
    if (relover_sent || acks_received < acks_expected) return;
    for (int p : tree_children(ctx))
      if (!got_relover[p - 1]) return;
    relover_sent = true;
    if (!ctx.is_requester()) {
      ctx.send(ctx.parent_port(), Message{"RELABELOVER", {}, {}, ""});
      return;
    }
    aut = automaton_from_recipe(recipe, *sh);
    finish_registration();
    Message m{"AUTOMATON", {}, {}, recipe.text()};
    for (int p : tree_children(ctx)) ctx.send(p, m);
    eval_ready(ctx);
  }

  void finish_registration() {
    for (auto& [key, list] : kids)
      std::sort(list.begin(), list.end(),
                [](const Kid& a, const Kid& b) { return a.ref < b.ref; });
  }

  LabelId lid(const SigmaLabel& s) {
    Label l;
    l.sig = s;
    return intern_plain(aut->pool(), l);
  }

  // chain fold matching a binarized decomposition
  StateId fold(const std::vector<StateId>& q, const SigmaLabel& L) {
    size_t m = q.size();
    if (m == 0) return aut->eval({}, lid(L));
    if (m == 1) return aut->eval({q[0]}, lid(L));
    if (m == 2) return aut->eval({q[0], q[1]}, lid(L));
    SigmaLabel Lp = L;
    Lp.up = L.eq;
    StateId s = aut->eval({q[m - 2], q[m - 1]}, lid(Lp));
    for (size_t i = m - 2; i >= 1; --i) s = aut->eval({q[i - 1], s}, lid(i == 1 ? L : Lp));
    return s;
  }

  void eval_ready(NodeCtx& ctx) {
    if (!aut) return;
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& [key, bag] : mine->bags) {
        if (state.count(key)) continue;
        std::vector<StateId> q;
        bool ready = true;
        auto it = kids.find(key);
        if (it != kids.end()) {
          for (Kid& kd : it->second) {
            if (kd.ref.owner == ctx.id()) {
              auto ls = state.find(kd.ref.key);
              if (ls == state.end()) {
                ready = false;
                break;
              }
              q.push_back(ls->second);
            } else if (kd.st) {
              q.push_back(*kd.st);
            } else {
              ready = false;
              break;
            }
          }
        }
        if (!ready) continue;
        const std::vector<int>* ft = nullptr;
        std::vector<int> local_ft;
        if (bag.father.valid()) {
          if (bag.father.owner == ctx.id()) {
            local_ft = mine->bags.at(bag.father.key).tuple;
            ft = &local_ft;
          } else {
            auto fit = ftuple.find(key);
            if (fit == ftuple.end()) continue;  // ack still missing
            ft = &fit->second;
          }
        }
        StateId s = fold(q, stored_bag_label(bag, ft));
        state[key] = s;
        progress = true;
        if (bag.root) {
          ctx.decide(aut->accepts(s));
        } else if (bag.father.owner != ctx.id()) {
          outbox[bag.father.owner].push_back({key, s});
        }
      }
    }
    flush(ctx);
  }

  void flush(NodeCtx& ctx) {
    for (auto& [dest, entries] : outbox) {
      if (entries.empty()) continue;
      Message m{"STATE", {}, {}, ""};
      m.args.push_back(static_cast<long long>(entries.size()));
      for (auto& [ck, st] : entries) {
        detail::put_key(m.args, ck);
        m.args.push_back(static_cast<long long>(st));
      }
      dispatch(ctx, dest, std::move(m));
      entries.clear();
    }
  }

  void handle(NodeCtx& ctx, int from, const Message& m) {
    if (m.kind == "CHILDBAG") {
      size_t pos = 0;
      long long count = m.args.at(pos++);
      Message ack{"CHILDBAGACK", {}, {}, ""};
      ack.args.push_back(count);
      for (long long i = 0; i < count; ++i) {
        BagKey ck = detail::take_key(m.args, pos);
        BagKey fk = detail::take_key(m.args, pos);
        auto it = mine->bags.find(fk);
        if (it == mine->bags.end())
          throw ProtocolError("announced father " + bag_key_text(fk) +
                              " is not stored at " + std::to_string(ctx.id()));
        kids[fk].push_back({BagRef{from, ck}, std::nullopt});
        child_of[{from, ck}] = fk;
        detail::put_key(ack.args, ck);
        detail::put_ints(ack.args, it->second.tuple);
      }
      dispatch(ctx, from, std::move(ack));
      return;
    }
    if (m.kind == "CHILDBAGACK") {
      size_t pos = 0;
      long long count = m.args.at(pos++);
      for (long long i = 0; i < count; ++i) {
        BagKey ck = detail::take_key(m.args, pos);
        ftuple[ck] = detail::take_ints(m.args, pos);
      }
      acks_received++;
      try_relover(ctx);
      return;
    }
    if (m.kind == "STATE") {
      size_t pos = 0;
      long long count = m.args.at(pos++);
      for (long long i = 0; i < count; ++i) {
        BagKey ck = detail::take_key(m.args, pos);
        StateId st = static_cast<StateId>(m.args.at(pos++));
        auto ci = child_of.find({from, ck});
        if (ci == child_of.end())
          throw ProtocolError("state for unregistered bag " + bag_key_text(ck));
        for (Kid& kd : kids.at(ci->second))
          if (kd.ref.owner == from && kd.ref.key == ck) kd.st = st;
      }
      eval_ready(ctx);
      return;
    }
    throw ProtocolError("unexpected " + m.kind + " in the run phase");
  }

  void on_message(NodeCtx& ctx, int port, const Message& m) override {
    if (m.kind == "RELABELOVER") {
      got_relover[port - 1] = true;
      try_relover(ctx);
      return;
    }
    if (m.kind == "AUTOMATON") {
      aut = automaton_from_recipe(Recipe::parse(m.text), *sh);
      finish_registration();
      Message fwd{"AUTOMATON", {}, {}, m.text};
      for (int p : tree_children(ctx)) ctx.send(p, fwd);
      eval_ready(ctx);
      return;
    }
    if (is_routed(m.kind)) {
      if (hops > 0) {
        if (!flood.accept(ctx, port, m)) return;
        handle(ctx, detail::FloodCore::origin_of(m), detail::FloodCore::unwrap(m));
      } else {
        handle(ctx, ctx.neighbor(port), m);
      }
      return;
    }
    throw ProtocolError("unexpected " + m.kind + " in the run phase");
  }
};

}  // namespace

ProtocolResult distributed_run_automaton(const Graph& g, const DistributedBagStore& store,
                                         const BfsTree& tree, const Recipe& recipe,
                                         const SimConfig& cfg, int flood_hops) {
  if (store.root.owner != cfg.requester)
    throw ProtocolError("root bag is not stored at the requester");
  if (!store.find(store.root)) throw ProtocolError("declared root bag is missing");
  auto sh = std::make_shared<CompileShared>();
  SimConfig c = cfg;
  c.bfs = tree;
  Simulation sim(g, c);
  sim.install([&](int v) {
    auto h = std::make_unique<RunHandler>();
    h->mine = &store.node[v];
    h->sh = sh;
    h->hops = flood_hops;
    if (v == c.requester) h->recipe = recipe;
    return h;
  });
  sim.kick_all();
  sim.run();

  ProtocolResult r;
  r.metrics = sim.metrics();
  r.decided = sim.decided(c.requester);
  r.accept = r.decided && sim.decision(c.requester);
  r.tree = tree;
  return r;
}

}  // namespace frugalmc
