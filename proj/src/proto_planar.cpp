#include <algorithm>
#include <set>

#include "proto_internal.hpp"

namespace frugalmc {
namespace {

// Face walk decomposition of a biconnected plane graph.
//
// Phase one pushes every node its root path (ANCESTOR/ANCOVER). Phase two
// walks the spanning tree depth-first (POSTTRAVERSE/BACKTRACK); whenever
// control sits at a node, that node launches a face walk along each of
// its still unvisited outgoing arcs (FACESTART, then FACEWALK hops,
// closed by FACEOVER back at the starter). Every vertex of a face stores
// one copy bag: the triple (first, previous, self) plus the starting arc
// identifies it, and its tuple merges the three root paths. Control
// moves up only when all incoming arcs of a node are visited, so at most
// one walk per face ever exists.
//
// Phase three roots the bag forest. The requester picks a root copy and
// fans father pointers around its face with a forward walk (BAGVISIT,
// following face order) and a backward walk (ANTIBAGVISIT, against it).
// Each hop checks one link of the face; a non-tree link is crossed once
// by NEWFACEBAG, which enters the neighbouring face at the copy holding
// that arc and continues the same way. Non-tree links form a spanning
// tree of the dual, so every face is entered exactly once and every copy
// gets exactly one father, stored on the sending neighbour.
struct PlanarHandler : NodeHandler {
  std::vector<int> rp, rn;  // rotation prev/next by port
  int cap = 0;              // 3k+1

  std::vector<int> anc;
  std::vector<bool> got_ancover, traversed, in_arc, out_arc;
  NodeStore store;
  BagRef root_ref;
  bool finished = false;

  static BagKey face_key(int f1, int f2, int t1, int t2, int t3) {
    return {kFaceBag, f1, f2, t1, t2, t3};
  }

  std::vector<int> child_ports(const NodeCtx& ctx) const {
    std::vector<int> out;
    for (int p = 1; p <= ctx.degree(); ++p)
      if (ctx.port_state(p) == PortState::Child) out.push_back(p);
    return out;
  }

  void on_start(NodeCtx& ctx) override {
    got_ancover.assign(ctx.degree(), false);
    traversed.assign(ctx.degree(), false);
    in_arc.assign(ctx.degree(), false);
    out_arc.assign(ctx.degree(), false);
    if (!ctx.is_requester()) return;
    anc = {ctx.id()};
    Message m{"ANCESTOR", {}, {anc}, ""};
    for (int p : child_ports(ctx)) ctx.send(p, m);
  }

  void store_bag(NodeCtx& ctx, int f1, int f2, int t1, int t2, int t3,
                 const std::vector<int>& A, const std::vector<int>& B,
                 const std::vector<int>& C) {
    StoredBag b;
    b.key = face_key(f1, f2, t1, t2, t3);
    std::set<int> seen;
    for (const auto* list : {&A, &B, &C}) {
      for (size_t i = 0; i < list->size(); ++i) {
        if (i + 1 < list->size()) b.edge_pairs.push_back({(*list)[i], (*list)[i + 1]});
        if (seen.insert((*list)[i]).second) b.tuple.push_back((*list)[i]);
      }
    }
    if (static_cast<int>(b.tuple.size()) > cap)
      throw ProtocolError("bag overflow at node " + std::to_string(ctx.id()) +
                          "; height bound too small");
    while (static_cast<int>(b.tuple.size()) < cap) b.tuple.push_back(b.tuple.back());
    for (int p = 1; p <= ctx.degree(); ++p) {
      int u = ctx.neighbor(p);
      if (seen.count(u)) b.edge_pairs.push_back({ctx.id(), u});
    }
    if (store.bags.count(b.key))
      throw ProtocolError("face copy stored twice at " + std::to_string(ctx.id()));
    store.bags[b.key] = std::move(b);
  }

  // bag of the face whose walk started with the given arc
  StoredBag& by_arc(NodeCtx& ctx, int f1, int f2) {
    for (auto& [k, b] : store.bags)
      if (k[1] == f1 && k[2] == f2) return b;
    throw ProtocolError("no copy for arc " + std::to_string(f1) + "->" +
                        std::to_string(f2) + " at " + std::to_string(ctx.id()));
  }

  // bag of the face containing the arc from the neighbour into this node
  StoredBag& by_in_arc(NodeCtx& ctx, int from, int* pair_index) {
    for (auto& [k, b] : store.bags) {
      long long t[3] = {k[3], k[4], k[5]};
      for (int i = 0; i < 3; ++i)
        if (t[i] == from && t[(i + 1) % 3] == ctx.id()) {
          *pair_index = i;
          return b;
        }
    }
    throw ProtocolError("no face copy entered from " + std::to_string(from) +
                        " at " + std::to_string(ctx.id()));
  }

  void start_walks(NodeCtx& ctx) {
    // descend first, then launch the remaining face walks, then hand
    // control up; with walks in flight the close-out happens in FACEOVER
    for (int p : child_ports(ctx)) {
      if (traversed[p - 1]) continue;
      traversed[p - 1] = true;
      ctx.send(p, Message{"POSTTRAVERSE", {}, {}, ""});
      return;
    }
    bool launched = false;
    for (int p = 1; p <= ctx.degree(); ++p) {
      if (out_arc[p - 1]) continue;
      out_arc[p - 1] = true;
      launched = true;
      ctx.send(p, Message{"FACESTART", {ctx.id(), ctx.neighbor(p)}, {anc, anc}, ""});
    }
    if (!launched) finish_control(ctx);
  }

  void finish_control(NodeCtx& ctx) {
    if (finished) return;
    finished = true;
    if (!ctx.is_requester()) {
      ctx.send(ctx.parent_port(), Message{"BACKTRACK", {}, {}, ""});
      return;
    }
    if (store.bags.empty()) throw ProtocolError("requester stored no face copy");
    root_start(ctx, store.bags.begin()->second);
  }

  void all_arcs_check(NodeCtx& ctx, StoredBag& closed) {
    for (bool v : in_arc)
      if (!v) return;
    if (finished) return;
    finished = true;
    if (!ctx.is_requester()) {
      ctx.send(ctx.parent_port(), Message{"BACKTRACK", {}, {}, ""});
      return;
    }
    root_start(ctx, closed);
  }

  static Message ref_msg(const std::string& kind, const StoredBag& b) {
    return Message{kind, {b.key[1], b.key[2], b.key[3], b.key[4], b.key[5]}, {}, ""};
  }

  void cross_if_nontree(NodeCtx& ctx, int port, const StoredBag& own) {
    if (ctx.port_state(port) == PortState::Cross)
      ctx.send(port, ref_msg("NEWFACEBAG", own));
  }

  void root_start(NodeCtx& ctx, StoredBag& b) {
    b.root = true;
    root_ref = {ctx.id(), b.key};
    int v = ctx.id();
    if (b.key[3] == v) {
      // first position: only the backward walk remains
      int l = ctx.port_to(static_cast<int>(b.key[5]));
      ctx.send(l, ref_msg("ANTIBAGVISIT", b));
      cross_if_nontree(ctx, l, b);
    } else if (b.key[4] == v) {
      // second position: only the forward walk remains
      int lin = ctx.port_to(static_cast<int>(b.key[3]));
      ctx.send(rp[lin - 1], ref_msg("BAGVISIT", b));
      cross_if_nontree(ctx, lin, b);
    } else {
      int lin = ctx.port_to(static_cast<int>(b.key[4]));
      ctx.send(lin, ref_msg("ANTIBAGVISIT", b));
      cross_if_nontree(ctx, lin, b);
      ctx.send(rp[lin - 1], ref_msg("BAGVISIT", b));
    }
  }

  void on_message(NodeCtx& ctx, int l, const Message& m) override {
    int v = ctx.id();
    if (m.kind == "ANCESTOR") {
      anc = m.lists.at(0);
      anc.insert(anc.begin(), v);
      auto kids = child_ports(ctx);
      if (kids.empty()) {
        ctx.send(ctx.parent_port(), Message{"ANCOVER", {}, {}, ""});
        return;
      }
      Message fwd{"ANCESTOR", {}, {anc}, ""};
      for (int p : kids) ctx.send(p, fwd);
      return;
    }
    if (m.kind == "ANCOVER") {
      got_ancover[l - 1] = true;
      for (int p : child_ports(ctx))
        if (!got_ancover[p - 1]) return;
      if (!ctx.is_requester()) {
        ctx.send(ctx.parent_port(), Message{"ANCOVER", {}, {}, ""});
        return;
      }
      start_walks(ctx);
      return;
    }
    if (m.kind == "POSTTRAVERSE") {
      start_walks(ctx);
      return;
    }
    if (m.kind == "BACKTRACK") {
      start_walks(ctx);
      return;
    }
    if (m.kind == "FACESTART") {
      int f1 = static_cast<int>(m.args[0]), f2 = static_cast<int>(m.args[1]);
      in_arc[l - 1] = true;
      int lp = rp[l - 1];
      if (v == f2) {
        ctx.send(lp, Message{"FACESTART", {f1, f2}, {m.lists[0], anc}, ""});
        out_arc[lp - 1] = true;
        return;
      }
      store_bag(ctx, f1, f2, f1, ctx.neighbor(l), v, m.lists[0], m.lists[1], anc);
      ctx.send(l, Message{"ACKFACESTART", {f1, f2}, {m.lists[0], anc}, ""});
      if (ctx.neighbor(lp) == f1)
        ctx.send(lp, Message{"FACEOVER", {f1, f2, ctx.neighbor(l)}, {m.lists[1], anc}, ""});
      else
        ctx.send(lp, Message{"FACEWALK", {f1, f2}, {m.lists[0], anc}, ""});
      out_arc[lp - 1] = true;
      return;
    }
    if (m.kind == "ACKFACESTART") {
      int f1 = static_cast<int>(m.args[0]), f2 = static_cast<int>(m.args[1]);
      store_bag(ctx, f1, f2, f1, v, ctx.neighbor(l), m.lists[0], anc, m.lists[1]);
      return;
    }
    if (m.kind == "FACEWALK") {
      int f1 = static_cast<int>(m.args[0]), f2 = static_cast<int>(m.args[1]);
      in_arc[l - 1] = true;
      store_bag(ctx, f1, f2, f1, ctx.neighbor(l), v, m.lists[0], m.lists[1], anc);
      int lp = rp[l - 1];
      if (ctx.neighbor(lp) == f1)
        ctx.send(lp, Message{"FACEOVER", {f1, f2, ctx.neighbor(l)}, {m.lists[1], anc}, ""});
      else
        ctx.send(lp, Message{"FACEWALK", {f1, f2}, {m.lists[0], anc}, ""});
      out_arc[lp - 1] = true;
      return;
    }
    if (m.kind == "FACEOVER") {
      int f1 = static_cast<int>(m.args[0]), f2 = static_cast<int>(m.args[1]);
      int vp = static_cast<int>(m.args[2]);
      if (v != f1) throw ProtocolError("face closed away from its starter");
      in_arc[l - 1] = true;
      store_bag(ctx, f1, f2, f1, vp, ctx.neighbor(l), anc, m.lists[0], m.lists[1]);
      all_arcs_check(ctx, store.bags.at(face_key(f1, f2, f1, vp, ctx.neighbor(l))));
      return;
    }
    if (m.kind == "BAGVISIT") {
      int f1 = static_cast<int>(m.args[0]), f2 = static_cast<int>(m.args[1]);
      StoredBag& own = by_arc(ctx, f1, f2);
      own.father = {ctx.neighbor(l), {kFaceBag, m.args[0], m.args[1], m.args[2], m.args[3], m.args[4]}};
      cross_if_nontree(ctx, l, own);
      if (v != f1) ctx.send(rp[l - 1], ref_msg("BAGVISIT", own));
      return;
    }
    if (m.kind == "ANTIBAGVISIT") {
      int f1 = static_cast<int>(m.args[0]), f2 = static_cast<int>(m.args[1]);
      StoredBag& own = by_arc(ctx, f1, f2);
      own.father = {ctx.neighbor(l), {kFaceBag, m.args[0], m.args[1], m.args[2], m.args[3], m.args[4]}};
      int lp = rn[l - 1];
      if (ctx.neighbor(lp) == f1) {
        // the backward walk hit the starting arc; cross it if needed
        cross_if_nontree(ctx, lp, own);
        return;
      }
      ctx.send(lp, ref_msg("ANTIBAGVISIT", own));
      cross_if_nontree(ctx, lp, own);
      return;
    }
    if (m.kind == "NEWFACEBAG") {
      int from = ctx.neighbor(l);
      int idx = 0;
      StoredBag& own = by_in_arc(ctx, from, &idx);
      own.father = {from, {kFaceBag, m.args[0], m.args[1], m.args[2], m.args[3], m.args[4]}};
      if (idx == 0) {
        ctx.send(rp[l - 1], ref_msg("BAGVISIT", own));
      } else if (idx == 1) {
        ctx.send(l, ref_msg("ANTIBAGVISIT", own));
        ctx.send(rp[l - 1], ref_msg("BAGVISIT", own));
      } else {
        ctx.send(l, ref_msg("ANTIBAGVISIT", own));
      }
      return;
    }
    throw ProtocolError("unexpected " + m.kind + " in the face walk");
  }
};

}  // namespace

ProtocolResult planar_td_protocol(const Graph& g, int k, const SimConfig& cfg) {
  g.require_connected();
  if (!g.has_rotation())
    throw ProtocolError("face walks need a rotation system on the graph");
  if (g.n() < 3)
    throw ProtocolError("face walks need at least three nodes");
  auto bd = biconnected_components(g);
  if (!bd.bridges.empty() || bd.blocks.size() != 1 ||
      static_cast<int>(bd.blocks[0].size()) != g.n())
    throw ProtocolError("face walks need a biconnected network");
  if (k < 1) throw ProtocolError("height bound must be positive");

  Metrics pre;
  SimConfig c = cfg;
  BfsTree tree = detail::ensure_bfs(g, c, pre);
  if (tree.height > k)
    throw ProtocolError("spanning tree height " + std::to_string(tree.height) +
                        " exceeds the bound " + std::to_string(k));

  Simulation sim(g, c);
  sim.install([&](int v) {
    auto h = std::make_unique<PlanarHandler>();
    h->cap = 3 * k + 1;
    for (int p = 1; p <= g.degree(v); ++p) {
      h->rp.push_back(g.rot_prev(v, p));
      h->rn.push_back(g.rot_next(v, p));
    }
    return h;
  });
  sim.kick_all();
  sim.run();

  ProtocolResult r;
  r.metrics = pre;
  r.metrics += sim.metrics();
  r.tree = tree;
  r.store.node.resize(g.n() + 1);
  for (int v = 1; v <= g.n(); ++v)
    r.store.node[v] = static_cast<PlanarHandler*>(sim.handler(v))->store;
  auto* rq = static_cast<PlanarHandler*>(sim.handler(c.requester));
  if (!rq->root_ref.valid()) throw ProtocolError("face walk ended without a root");
  r.store.root = rq->root_ref;
  for (size_t v = 1; v < r.store.node.size(); ++v)
    for (const auto& [key, bag] : r.store.node[v].bags)
      if (!bag.father.valid() && !bag.root)
        throw ProtocolError("unfathered face copy " + bag_key_text(key));
  return r;
}

}  // namespace frugalmc
