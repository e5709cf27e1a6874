#include "frugalmc/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace frugalmc {

void Graph::add_edge(int u, int v) {
  if (u < 1 || u > n_ || v < 1 || v > n_)
    throw GraphError("edge endpoint out of range: " + std::to_string(u) + " " +
                     std::to_string(v));
  if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
  if (adjacent(u, v))
    throw GraphError("parallel edge " + std::to_string(u) + " " +
                     std::to_string(v));
  int e = static_cast<int>(edges_.size());
  edges_.emplace_back(u, v);
  adj_[u].push_back({v, static_cast<int>(adj_[v].size()) + 1, e});
  adj_[v].push_back({u, static_cast<int>(adj_[u].size()), e});
}

int Graph::port_to(int v, int w) const {
  const auto& ps = adj_[v];
  for (size_t i = 0; i < ps.size(); ++i)
    if (ps[i].to == w) return static_cast<int>(i) + 1;
  return 0;
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                        bool planar) {
  Graph g;
  if (n < 1) throw GraphError("graph needs at least one vertex");
  g.n_ = n;
  g.declared_planar_ = planar;
  g.adj_.assign(n + 1, {});
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

Graph Graph::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      auto h = line.find('#');
      if (h != std::string::npos) line.erase(h);
      size_t i = line.find_first_not_of(" \t\r");
      if (i == std::string::npos) continue;
      out = line;
      return true;
    }
    return false;
  };

  std::string head;
  if (!next_data_line(head)) throw GraphError("empty graph input");
  std::istringstream hs(head);
  int n = 0, m = 0;
  std::string flag;
  if (!(hs >> n >> m)) throw GraphError("bad header line: " + head);
  bool planar = false;
  if (hs >> flag) {
    if (flag != "planar") throw GraphError("bad header flag: " + flag);
    planar = true;
  }

  Graph g;
  if (n < 1) throw GraphError("graph needs at least one vertex");
  g.n_ = n;
  g.declared_planar_ = planar;
  g.adj_.assign(n + 1, {});
  for (int i = 0; i < m; ++i) {
    std::string el;
    if (!next_data_line(el)) throw GraphError("missing edge line");
    std::istringstream es(el);
    int u = 0, v = 0;
    if (!(es >> u >> v)) throw GraphError("bad edge line: " + el);
    g.add_edge(u, v);
  }

  // optional rotation block: "v: w1 w2 ... wdeg" with neighbor ids
  std::vector<std::vector<int>> rot;
  std::string rl;
  while (next_data_line(rl)) {
    auto colon = rl.find(':');
    if (colon == std::string::npos)
      throw GraphError("bad rotation line: " + rl);
    int v = std::stoi(rl.substr(0, colon));
    if (v < 1 || v > n) throw GraphError("rotation vertex out of range");
    if (rot.empty()) rot.assign(n + 1, {});
    if (!rot[v].empty()) throw GraphError("duplicate rotation for vertex");
    std::istringstream rs(rl.substr(colon + 1));
    int w;
    while (rs >> w) rot[v].push_back(w);
  }
  if (!rot.empty()) g.set_rotation_by_neighbors(rot);
  return g;
}

Graph Graph::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw GraphError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Graph::dump() const {
  std::ostringstream out;
  out << n_ << " " << m();
  if (declared_planar_) out << " planar";
  out << "\n";
  for (auto [u, v] : edges_) out << u << " " << v << "\n";
  if (has_rotation_) {
    for (int v = 1; v <= n_; ++v) {
      out << v << ":";
      for (int p : rotation_[v]) out << " " << adj_[v][p - 1].to;
      out << "\n";
    }
  }
  return out.str();
}

void Graph::set_rotation_by_neighbors(const std::vector<std::vector<int>>& rot) {
  if (static_cast<int>(rot.size()) != n_ + 1)
    throw GraphError("rotation must cover every vertex");
  rotation_.assign(n_ + 1, {});
  for (int v = 1; v <= n_; ++v) {
    if (static_cast<int>(rot[v].size()) != degree(v))
      throw GraphError("rotation at vertex " + std::to_string(v) +
                       " must list every neighbor once");
    std::vector<char> seen(degree(v) + 1, 0);
    for (int w : rot[v]) {
      int p = port_to(v, w);
      if (p == 0)
        throw GraphError("rotation at vertex " + std::to_string(v) +
                         " names non-neighbor " + std::to_string(w));
      if (seen[p])
        throw GraphError("rotation at vertex " + std::to_string(v) +
                         " repeats neighbor " + std::to_string(w));
      seen[p] = 1;
      rotation_[v].push_back(p);
    }
  }
  has_rotation_ = true;
  index_rotation();
}

void Graph::index_rotation() {
  rot_prev_.assign(n_ + 1, {});
  rot_next_.assign(n_ + 1, {});
  for (int v = 1; v <= n_; ++v) {
    int d = degree(v);
    rot_prev_[v].assign(d, 0);
    rot_next_[v].assign(d, 0);
    for (int i = 0; i < d; ++i) {
      int p = rotation_[v][i];
      int prev = rotation_[v][(i + d - 1) % d];
      int next = rotation_[v][(i + 1) % d];
      rot_prev_[v][p - 1] = prev;
      rot_next_[v][p - 1] = next;
    }
  }
}

const std::vector<int>& Graph::rotation(int v) const {
  if (!has_rotation_) throw GraphError("graph has no rotation system");
  return rotation_[v];
}

int Graph::rot_prev(int v, int port) const {
  if (!has_rotation_) throw GraphError("graph has no rotation system");
  return rot_prev_[v][port - 1];
}

int Graph::rot_next(int v, int port) const {
  if (!has_rotation_) throw GraphError("graph has no rotation system");
  return rot_next_[v][port - 1];
}

bool Graph::connected() const {
  std::vector<char> vis(n_ + 1, 0);
  std::deque<int> q{1};
  vis[1] = 1;
  int cnt = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    ++cnt;
    for (const auto& h : adj_[v])
      if (!vis[h.to]) {
        vis[h.to] = 1;
        q.push_back(h.to);
      }
  }
  return cnt == n_;
}

void Graph::require_connected() const {
  if (connected()) return;
  std::vector<char> vis(n_ + 1, 0);
  std::deque<int> q{1};
  vis[1] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (const auto& h : adj_[v])
      if (!vis[h.to]) {
        vis[h.to] = 1;
        q.push_back(h.to);
      }
  }
  int out = 0;
  for (int v = 1; v <= n_; ++v)
    if (!vis[v]) {
      out = v;
      break;
    }
  throw GraphError("graph is disconnected: no path between 1 and " +
                   std::to_string(out));
}

std::vector<std::vector<int>> all_distances(const Graph& g) {
  int n = g.n();
  std::vector<std::vector<int>> dist(n + 1, std::vector<int>(n + 1, -1));
  for (int s = 1; s <= n; ++s) {
    auto& d = dist[s];
    d[s] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (const auto& h : g.ports(v))
        if (d[h.to] < 0) {
          d[h.to] = d[v] + 1;
          q.push_back(h.to);
        }
    }
  }
  return dist;
}

int eccentricity(const Graph& g, int v) {
  auto dist = all_distances(g);
  int e = 0;
  for (int w = 1; w <= g.n(); ++w) {
    if (dist[v][w] < 0) throw GraphError("graph is disconnected");
    e = std::max(e, dist[v][w]);
  }
  return e;
}

GraphStats graph_stats(const Graph& g) {
  g.require_connected();
  GraphStats s;
  s.n = g.n();
  s.m = g.m();
  s.min_degree = s.n > 0 ? g.degree(1) : 0;
  s.max_degree = 0;
  for (int v = 1; v <= g.n(); ++v) {
    s.min_degree = std::min(s.min_degree, g.degree(v));
    s.max_degree = std::max(s.max_degree, g.degree(v));
  }
  auto dist = all_distances(g);
  for (int u = 1; u <= g.n(); ++u)
    for (int v = 1; v <= g.n(); ++v) s.diameter = std::max(s.diameter, dist[u][v]);
  return s;
}

const char* port_state_name(PortState s) {
  switch (s) {
    case PortState::Unknown: return "unknown";
    case PortState::Parent: return "parent";
    case PortState::Child: return "child";
    case PortState::Cross: return "cross";
  }
  return "?";
}

int BfsTree::parent_port(const Graph& g, int v) const {
  if (parent[v] == 0) return 0;
  return g.port_to(v, parent[v]);
}

std::vector<int> BfsTree::children(const Graph& g, int v) const {
  std::vector<int> out;
  for (int p = 1; p <= g.degree(v); ++p)
    if (port_state[v][p - 1] == PortState::Child) out.push_back(g.neighbor(v, p));
  return out;
}

std::vector<int> BfsTree::ancestor_path(int v) const {
  std::vector<int> out;
  for (int x = v; x != 0; x = parent[x]) out.push_back(x);
  return out;
}

BfsTree bfs_tree(const Graph& g, int root) {
  if (root < 1 || root > g.n()) throw GraphError("bfs root out of range");
  g.require_connected();
  BfsTree t;
  t.root = root;
  t.depth.assign(g.n() + 1, -1);
  t.parent.assign(g.n() + 1, 0);
  t.depth[root] = 0;
  std::deque<int> q{root};
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    t.height = std::max(t.height, t.depth[v]);
    for (const auto& h : g.ports(v)) {
      if (t.depth[h.to] < 0) {
        t.depth[h.to] = t.depth[v] + 1;
        q.push_back(h.to);
      }
    }
  }
  // parent = smallest neighbor one level up
  for (int v = 1; v <= g.n(); ++v) {
    if (v == root) continue;
    int best = 0;
    for (const auto& h : g.ports(v))
      if (t.depth[h.to] == t.depth[v] - 1 && (best == 0 || h.to < best)) best = h.to;
    t.parent[v] = best;
  }
  t.port_state.assign(g.n() + 1, {});
  for (int v = 1; v <= g.n(); ++v) {
    t.port_state[v].assign(g.degree(v), PortState::Cross);
    for (int p = 1; p <= g.degree(v); ++p) {
      int w = g.neighbor(v, p);
      if (t.parent[v] == w)
        t.port_state[v][p - 1] = PortState::Parent;
      else if (t.parent[w] == v)
        t.port_state[v][p - 1] = PortState::Child;
    }
  }
  return t;
}

Face trace_face_from(const Graph& g, int u, int v) {
  if (!g.has_rotation()) throw GraphError("graph has no rotation system");
  Face f;
  int a = u, b = v;
  do {
    f.arcs.emplace_back(a, b);
    int pin = g.port_to(b, a);
    int pout = g.rot_prev(b, pin);
    a = b;
    b = g.neighbor(a, pout);
  } while (!(a == u && b == v));
  return f;
}

FaceTrace trace_faces(const Graph& g) {
  if (!g.has_rotation()) throw GraphError("graph has no rotation system");
  FaceTrace out;
  std::vector<std::vector<char>> done(g.n() + 1);
  for (int v = 1; v <= g.n(); ++v) done[v].assign(g.degree(v), 0);
  for (int v = 1; v <= g.n(); ++v) {
    for (int p = 1; p <= g.degree(v); ++p) {
      if (done[v][p - 1]) continue;
      Face f = trace_face_from(g, v, g.neighbor(v, p));
      for (auto [a, b] : f.arcs) done[a][g.port_to(a, b) - 1] = 1;
      out.faces.push_back(std::move(f));
    }
  }
  long f = static_cast<long>(out.faces.size());
  out.euler_ok = (g.n() - g.m() + f == 2);
  return out;
}

BlockDecomposition biconnected_components(const Graph& g) {
  g.require_connected();
  int n = g.n();
  BlockDecomposition out;
  out.edge_block.assign(g.m(), -1);
  std::vector<int> pre(n + 1, -1), low(n + 1, 0), parent(n + 1, 0);
  std::vector<char> art(n + 1, 0);
  std::vector<int> estack;
  int counter = 0;

  struct Frame {
    int v;
    int pi = 0;  // next port index to try (0-based)
  };
  std::vector<Frame> stack;

  auto close_component = [&](int top_edge) {
    std::vector<int> edges;
    while (!estack.empty()) {
      int e = estack.back();
      estack.pop_back();
      edges.push_back(e);
      if (e == top_edge) break;
    }
    if (edges.size() == 1) {
      out.bridges.push_back(g.edges()[edges[0]]);
      return;
    }
    int id = static_cast<int>(out.blocks.size());
    std::vector<int> verts;
    for (int e : edges) {
      out.edge_block[e] = id;
      verts.push_back(g.edges()[e].first);
      verts.push_back(g.edges()[e].second);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    out.blocks.push_back(std::move(verts));
  };

  for (int s = 1; s <= n; ++s) {
    if (pre[s] >= 0) continue;
    pre[s] = counter++;
    low[s] = pre[s];
    stack.push_back({s});
    int root_children = 0;
    while (!stack.empty()) {
      Frame& f = stack.back();
      int v = f.v;
      if (f.pi < g.degree(v)) {
        const auto& h = g.ports(v)[f.pi++];
        int w = h.to;
        if (pre[w] < 0) {
          parent[w] = v;
          estack.push_back(h.edge);
          pre[w] = counter++;
          low[w] = pre[w];
          if (v == s) ++root_children;
          stack.push_back({w});
        } else if (w != parent[v] && pre[w] < pre[v]) {
          estack.push_back(h.edge);
          low[v] = std::min(low[v], pre[w]);
        }
      } else {
        stack.pop_back();
        if (!stack.empty()) {
          int u = stack.back().v;
          low[u] = std::min(low[u], low[v]);
          if (low[v] >= pre[u]) {
            close_component(g.ports(u)[g.port_to(u, v) - 1].edge);
            if (u != s) art[u] = 1;
          }
        }
      }
    }
    if (root_children > 1) art[s] = 1;
  }

  for (int v = 1; v <= n; ++v)
    if (art[v]) out.articulation_points.push_back(v);
  return out;
}

LayeringTree layering_partition(const Graph& g, int source) {
  g.require_connected();
  auto bt = bfs_tree(g, source);
  int n = g.n();
  LayeringTree lt;
  lt.source = source;
  lt.depth = bt.depth;

  // union-find over vertices, rebuilt per layer over the depth>=i subgraph
  std::vector<int> uf(n + 1);
  std::function<int(int)> find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  lt.part_of.assign(n + 1, -1);

  int maxd = bt.height;
  for (int i = maxd; i >= 0; --i) {
    std::iota(uf.begin(), uf.end(), 0);
    for (auto [u, v] : g.edges())
      if (bt.depth[u] >= i && bt.depth[v] >= i) {
        int a = find(u), b = find(v);
        if (a != b) uf[a] = b;
      }
    // parts of layer i: classes restricted to depth == i, smallest member first
    std::vector<std::pair<int, int>> reps;  // (root, member)
    std::vector<std::vector<int>> groups;
    std::vector<int> root_group(n + 1, -1);
    for (int v = 1; v <= n; ++v) {
      if (bt.depth[v] != i) continue;
      int r = find(v);
      if (root_group[r] < 0) {
        root_group[r] = static_cast<int>(groups.size());
        groups.push_back({});
      }
      groups[root_group[r]].push_back(v);
    }
    std::sort(groups.begin(), groups.end());
    for (auto& gmem : groups) {
      int id = static_cast<int>(lt.parts.size());
      for (int v : gmem) lt.part_of[v] = id;
      lt.parts.push_back(std::move(gmem));
      lt.part_layer.push_back(i);
    }
  }

  // layers were appended deepest-first; renumber so parts sort by (layer, members)
  std::vector<int> order(lt.parts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lt.part_layer[a] != lt.part_layer[b]) return lt.part_layer[a] < lt.part_layer[b];
    return lt.parts[a] < lt.parts[b];
  });
  std::vector<int> rank(lt.parts.size());
  for (size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  LayeringTree out;
  out.source = source;
  out.depth = lt.depth;
  out.part_of.assign(n + 1, -1);
  out.parts.resize(lt.parts.size());
  out.part_layer.resize(lt.parts.size());
  for (size_t p = 0; p < lt.parts.size(); ++p) {
    out.parts[rank[p]] = lt.parts[p];
    out.part_layer[rank[p]] = lt.part_layer[p];
  }
  for (int v = 1; v <= n; ++v) out.part_of[v] = rank[lt.part_of[v]];

  // parent part: the unique adjacent part one layer up
  out.part_parent.assign(out.parts.size(), -1);
  for (auto [u, v] : g.edges()) {
    int a = u, b = v;
    if (out.depth[a] == out.depth[b]) continue;
    if (out.depth[a] < out.depth[b]) std::swap(a, b);  // a deeper
    int pa = out.part_of[a], pb = out.part_of[b];
    if (out.part_layer[pa] != out.part_layer[pb] + 1) continue;
    if (out.part_parent[pa] >= 0 && out.part_parent[pa] != pb)
      throw GraphError("layering quotient is not a tree");
    out.part_parent[pa] = pb;
  }
  for (size_t p = 0; p < out.parts.size(); ++p) {
    if (out.part_layer[p] > 0 && out.part_parent[p] < 0)
      throw GraphError("layering part has no parent");
    // a deeper part always hangs off its BFS parents' part
    if (out.part_layer[p] > 0) {
      int any = out.parts[p][0];
      int bp = bt.parent[any];
      if (out.part_of[bp] != out.part_parent[p])
        throw GraphError("layering parent mismatch");
    }
  }
  return out;
}

}  // namespace frugalmc
