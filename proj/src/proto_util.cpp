#include <algorithm>
#include <sstream>

#include "proto_internal.hpp"

namespace frugalmc {

std::string bag_key_text(const BagKey& k) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < k.size(); ++i) os << (i ? " " : "") << k[i];
  os << "]";
  return os.str();
}

SigmaLabel stored_bag_label(const StoredBag& b, const std::vector<int>* father_tuple) {
  int w = static_cast<int>(b.tuple.size());
  SigmaLabel s;
  s.w = w;
  s.edge = PairRel(w);
  s.eq = PairRel(w);
  s.up = PairRel(w);
  std::set<std::pair<int, int>> adj;
  for (auto [a, c] : b.edge_pairs) {
    adj.insert({a, c});
    adj.insert({c, a});
  }
  for (int i = 1; i <= w; ++i)
    for (int j = 1; j <= w; ++j) {
      if (b.tuple[i - 1] == b.tuple[j - 1]) s.eq.set(i, j);
      if (i != j && adj.count({b.tuple[i - 1], b.tuple[j - 1]})) s.edge.set(i, j);
    }
  if (father_tuple) {
    if (static_cast<int>(father_tuple->size()) != w)
      throw ProtocolError("father tuple width mismatch at bag " + bag_key_text(b.key));
    for (int i = 1; i <= w; ++i)
      for (int j = 1; j <= w; ++j)
        if (b.tuple[i - 1] == (*father_tuple)[j - 1]) s.up.set(i, j);
  }
  return s;
}

const StoredBag* DistributedBagStore::find(const BagRef& r) const {
  if (r.owner < 1 || r.owner >= static_cast<int>(node.size())) return nullptr;
  auto it = node[r.owner].bags.find(r.key);
  if (it == node[r.owner].bags.end()) return nullptr;
  return &it->second;
}

size_t DistributedBagStore::size() const {
  size_t c = 0;
  for (const auto& ns : node) c += ns.bags.size();
  return c;
}

OrderedTreeDecomposition DistributedBagStore::assemble() const {
  std::vector<std::pair<BagRef, const StoredBag*>> all;
  for (size_t v = 1; v < node.size(); ++v)
    for (const auto& [key, bag] : node[v].bags)
      all.push_back({BagRef{static_cast<int>(v), key}, &bag});
  if (all.empty()) throw ProtocolError("empty bag store");
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::map<BagRef, int> index;
  for (size_t i = 0; i < all.size(); ++i) index[all[i].first] = static_cast<int>(i);

  size_t cap = all[0].second->tuple.size();
  OrderedTreeDecomposition t;
  t.k = static_cast<int>(cap) - 1;
  int roots = 0;
  for (size_t i = 0; i < all.size(); ++i) {
    const StoredBag& b = *all[i].second;
    if (b.tuple.size() != cap)
      throw ProtocolError("uneven bag width at " + bag_key_text(b.key));
    OrderedTreeDecomposition::Bag out;
    out.id = static_cast<int>(i);
    out.tuple = b.tuple;
    if (b.father.valid()) {
      auto it = index.find(b.father);
      if (it == index.end())
        throw ProtocolError("dangling father of bag " + bag_key_text(b.key));
      out.parent = it->second;
    } else {
      out.parent = -1;
      roots++;
      if (!(all[i].first == root))
        throw ProtocolError("fatherless bag " + bag_key_text(b.key) +
                            " is not the declared root");
    }
    t.bags.push_back(std::move(out));
  }
  if (roots != 1) throw ProtocolError("store has " + std::to_string(roots) + " roots");
  return t;
}

std::vector<std::string> DistributedBagStore::check_fathers_local(const Graph& g) const {
  std::vector<std::string> bad;
  for (size_t v = 1; v < node.size(); ++v)
    for (const auto& [key, bag] : node[v].bags) {
      if (!bag.father.valid()) continue;
      int u = bag.father.owner;
      if (!find(bag.father))
        bad.push_back("missing father of " + bag_key_text(key));
      else if (u != static_cast<int>(v) && !g.adjacent(static_cast<int>(v), u))
        bad.push_back("far father of " + bag_key_text(key) + " at node " +
                      std::to_string(u));
    }
  return bad;
}

std::vector<std::string> DistributedBagStore::check_fathers_within(const Graph& g,
                                                                   int h) const {
  auto dist = all_distances(g);
  std::vector<std::string> bad;
  for (size_t v = 1; v < node.size(); ++v)
    for (const auto& [key, bag] : node[v].bags) {
      if (!bag.father.valid()) continue;
      if (!find(bag.father)) {
        bad.push_back("missing father of " + bag_key_text(key));
        continue;
      }
      if (dist[v][bag.father.owner] > h)
        bad.push_back("father of " + bag_key_text(key) + " is " +
                      std::to_string(dist[v][bag.father.owner]) + " hops away");
    }
  return bad;
}

NetClass parse_net_class(const std::string& s) {
  if (s == "tree") return NetClass::Tree;
  if (s == "planar-bounded-diameter") return NetClass::PlanarBoundedDiameter;
  if (s == "bounded-degree-tree-length") return NetClass::BoundedDegreeTreeLength;
  throw ProtocolError("unknown network class: " + s);
}

const char* net_class_name(NetClass c) {
  switch (c) {
    case NetClass::Tree: return "tree";
    case NetClass::PlanarBoundedDiameter: return "planar-bounded-diameter";
    case NetClass::BoundedDegreeTreeLength: return "bounded-degree-tree-length";
  }
  return "?";
}

namespace detail {

BfsTree ensure_bfs(const Graph& g, SimConfig& cfg, Metrics& add) {
  if (cfg.bfs) return *cfg.bfs;
  if (cfg.mode != SimMode::Sync)
    throw ProtocolError(
        "async runs need an injected spanning structure; pass one or run "
        "the sync layer protocol first");
  BfsResult r = bfs_protocol(g, cfg);
  add += r.metrics;
  cfg.bfs = r.tree;
  return r.tree;
}

}  // namespace detail
}  // namespace frugalmc
