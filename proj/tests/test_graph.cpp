#include <doctest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "frugalmc/graph.hpp"

using namespace frugalmc;

namespace {

Graph cycle(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.push_back({i, i + 1});
  e.push_back({n, 1});
  return Graph::from_edges(n, e);
}

Graph path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.push_back({i, i + 1});
  return Graph::from_edges(n, e);
}

Graph complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 1; u <= n; ++u)
    for (int v = u + 1; v <= n; ++v) e.push_back({u, v});
  return Graph::from_edges(n, e);
}

// independent distance oracle
std::vector<std::vector<int>> naive_distances(const Graph& g) {
  int n = g.n();
  const int inf = 1 << 28;
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(n + 1, inf));
  for (int v = 1; v <= n; ++v) d[v][v] = 0;
  for (auto& [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
  for (int w = 1; w <= n; ++w)
    for (int u = 1; u <= n; ++u)
      for (int v = 1; v <= n; ++v)
        d[u][v] = std::min(d[u][v], d[u][w] + d[w][v]);
  return d;
}

int naive_components(const Graph& g, int skip) {
  std::vector<char> seen(g.n() + 1, 0);
  if (skip >= 1) seen[skip] = 1;
  int comps = 0;
  for (int s = 1; s <= g.n(); ++s) {
    if (seen[s]) continue;
    ++comps;
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto& h : g.ports(u))
        if (!seen[h.to]) {
          seen[h.to] = 1;
          q.push(h.to);
        }
    }
  }
  return comps;
}

std::vector<int> naive_articulation(const Graph& g) {
  int base = naive_components(g, 0);
  std::vector<int> out;
  for (int v = 1; v <= g.n(); ++v)
    if (g.degree(v) > 0 && naive_components(g, v) > base) out.push_back(v);
  return out;
}

Graph random_connected(std::mt19937_64& rng, int n) {
  while (true) {
    std::vector<std::pair<int, int>> e;
    for (int u = 1; u <= n; ++u)
      for (int v = u + 1; v <= n; ++v)
        if (rng() % 100 < 35) e.push_back({u, v});
    if (e.empty()) continue;
    Graph g = Graph::from_edges(n, e);
    if (g.connected()) return g;
  }
}

}  // namespace

TEST_CASE("graph parse and dump round trip") {
  std::string text = "4 3\n1 2\n2 3\n2 4\n";
  Graph g = Graph::parse(text);
  CHECK(g.n() == 4);
  CHECK(g.m() == 3);
  CHECK(!g.declared_planar());
  CHECK(!g.has_rotation());
  CHECK(g.adjacent(1, 2));
  CHECK(g.adjacent(2, 4));
  CHECK(!g.adjacent(1, 4));
  Graph h = Graph::parse(g.dump());
  CHECK(h.dump() == g.dump());
}

TEST_CASE("graph parse rejects malformed input") {
  CHECK_THROWS_AS(Graph::parse("2 1\n1 1\n"), GraphError);   // self loop
  CHECK_THROWS_AS(Graph::parse("2 2\n1 2\n2 1\n"), GraphError);  // parallel
  CHECK_THROWS_AS(Graph::parse("2 1\n1 3\n"), GraphError);   // out of range
  CHECK_THROWS_AS(Graph::parse("2\n"), GraphError);
  CHECK_THROWS_AS(Graph::parse(""), GraphError);
}

TEST_CASE("ports and back ports are mutually consistent") {
  Graph g = cycle(6);
  for (int v = 1; v <= 6; ++v)
    for (int p = 1; p <= g.degree(v); ++p) {
      int w = g.neighbor(v, p);
      CHECK(g.neighbor(w, g.back_port(v, p)) == v);
    }
  CHECK(g.port_to(1, 2) >= 1);
  CHECK(g.port_to(1, 4) == 0);
}

TEST_CASE("bfs tree on the six cycle") {
  Graph g = cycle(6);
  BfsTree t = bfs_tree(g, 1);
  CHECK(t.root == 1);
  CHECK(t.depth[1] == 0);
  CHECK(t.depth[2] == 1);
  CHECK(t.depth[6] == 1);
  CHECK(t.depth[3] == 2);
  CHECK(t.depth[5] == 2);
  CHECK(t.depth[4] == 3);
  CHECK(t.height == 3);
  // both neighbors of 4 sit at depth 2, ties go to the smaller id
  CHECK(t.parent[4] == 3);
  CHECK(t.parent[3] == 2);
  CHECK(t.parent[2] == 1);
  CHECK(t.ancestor_path(4) == std::vector<int>{4, 3, 2, 1});
  // port states partition tree and cross edges
  int parents = 0, children = 0, cross = 0;
  for (int v = 1; v <= 6; ++v)
    for (int p = 1; p <= g.degree(v); ++p) {
      PortState s = t.port_state[v][p - 1];
      if (s == PortState::Parent) ++parents;
      if (s == PortState::Child) ++children;
      if (s == PortState::Cross) ++cross;
    }
  CHECK(parents == 5);
  CHECK(children == 5);
  CHECK(cross == 2);  // the edge 4-5 is not a tree edge
}

TEST_CASE("bfs depths equal shortest path distances") {
  std::mt19937_64 rng(20250817);
  for (int it = 0; it < 25; ++it) {
    int n = 3 + (int)(rng() % 8);
    Graph g = random_connected(rng, n);
    auto d = naive_distances(g);
    int root = 1 + (int)(rng() % n);
    BfsTree t = bfs_tree(g, root);
    for (int v = 1; v <= n; ++v) {
      CHECK(t.depth[v] == d[root][v]);
      if (v != root) CHECK(d[root][t.parent[v]] == t.depth[v] - 1);
    }
  }
}

TEST_CASE("graph stats and distances") {
  CHECK(graph_stats(cycle(6)).diameter == 3);
  CHECK(graph_stats(path(4)).diameter == 3);
  CHECK(graph_stats(complete(4)).diameter == 1);
  GraphStats s = graph_stats(cycle(6));
  CHECK(s.n == 6);
  CHECK(s.m == 6);
  CHECK(s.min_degree == 2);
  CHECK(s.max_degree == 2);
  CHECK(eccentricity(path(4), 2) == 2);
  auto d = all_distances(cycle(6));
  CHECK(d[1][4] == 3);
  CHECK(d[2][6] == 2);
}

TEST_CASE("connectivity checks") {
  Graph g = Graph::from_edges(4, {{1, 2}, {3, 4}});
  CHECK(!g.connected());
  CHECK_THROWS_AS(g.require_connected(), GraphError);
  CHECK(path(5).connected());
}

TEST_CASE("rotation system and face tracing on K4") {
  Graph g = complete(4);
  // a planar embedding: 4 sits inside the triangle 1-2-3
  g.set_rotation_by_neighbors({{}, {2, 4, 3}, {3, 4, 1}, {1, 4, 2}, {3, 1, 2}});
  CHECK(g.has_rotation());
  FaceTrace ft = trace_faces(g);
  CHECK(ft.euler_ok);
  CHECK(ft.faces.size() == 4);
  for (auto& f : ft.faces) CHECK(f.arcs.size() == 3);
  // the face through arc 1->2 is the inner triangle 1,2,4
  Face f = trace_face_from(g, 1, 2);
  REQUIRE(f.arcs.size() == 3);
  CHECK(f.arcs[0] == std::pair<int, int>{1, 2});
  CHECK(f.arcs[1] == std::pair<int, int>{2, 4});
  CHECK(f.arcs[2] == std::pair<int, int>{4, 1});
}

TEST_CASE("rotation parse and dump round trip") {
  std::string text = "3 3 planar\n1 2\n2 3\n3 1\n1: 2 3\n2: 3 1\n3: 1 2\n";
  Graph g = Graph::parse(text);
  CHECK(g.declared_planar());
  CHECK(g.has_rotation());
  FaceTrace ft = trace_faces(g);
  CHECK(ft.euler_ok);
  CHECK(ft.faces.size() == 2);
  Graph h = Graph::parse(g.dump());
  CHECK(h.dump() == g.dump());
}

TEST_CASE("blocks and articulation on the bowtie") {
  // two triangles sharing vertex 3
  Graph g = Graph::from_edges(
      5, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}});
  BlockDecomposition b = biconnected_components(g);
  CHECK(b.articulation_points == std::vector<int>{3});
  CHECK(b.bridges.empty());
  REQUIRE(b.blocks.size() == 2);
  std::vector<std::vector<int>> blocks = b.blocks;
  std::sort(blocks.begin(), blocks.end());
  CHECK(blocks[0] == std::vector<int>{1, 2, 3});
  CHECK(blocks[1] == std::vector<int>{3, 4, 5});
}

TEST_CASE("blocks and articulation on a path") {
  Graph g = path(4);
  BlockDecomposition b = biconnected_components(g);
  CHECK(b.blocks.empty());
  CHECK(b.bridges.size() == 3);
  CHECK(b.articulation_points == std::vector<int>{2, 3});
  for (int e = 0; e < g.m(); ++e) CHECK(b.edge_block[e] == -1);
}

TEST_CASE("articulation points match the removal oracle") {
  std::mt19937_64 rng(777);
  for (int it = 0; it < 25; ++it) {
    int n = 3 + (int)(rng() % 8);
    Graph g = random_connected(rng, n);
    BlockDecomposition b = biconnected_components(g);
    CHECK(b.articulation_points == naive_articulation(g));
    // every non-bridge edge lies in exactly one block
    for (int e = 0; e < g.m(); ++e) {
      bool is_bridge =
          std::find(b.bridges.begin(), b.bridges.end(), g.edges()[e]) !=
          b.bridges.end();
      CHECK((b.edge_block[e] == -1) == is_bridge);
      if (!is_bridge) {
        auto& blk = b.blocks[b.edge_block[e]];
        CHECK(std::binary_search(blk.begin(), blk.end(), g.edges()[e].first));
        CHECK(std::binary_search(blk.begin(), blk.end(), g.edges()[e].second));
      }
    }
    // bridges are exactly the edges whose removal disconnects the graph
    for (int e = 0; e < g.m(); ++e) {
      std::vector<std::pair<int, int>> rest;
      for (int e2 = 0; e2 < g.m(); ++e2)
        if (e2 != e) rest.push_back(g.edges()[e2]);
      Graph h = Graph::from_edges(g.n(), rest);
      bool is_bridge =
          std::find(b.bridges.begin(), b.bridges.end(), g.edges()[e]) !=
          b.bridges.end();
      CHECK(is_bridge == !h.connected());
    }
  }
}

TEST_CASE("layering partition of the six cycle") {
  Graph g = cycle(6);
  LayeringTree lt = layering_partition(g, 1);
  REQUIRE(lt.parts.size() == 4);
  CHECK(lt.parts[0] == std::vector<int>{1});
  CHECK(lt.parts[1] == std::vector<int>{2, 6});
  CHECK(lt.parts[2] == std::vector<int>{3, 5});
  CHECK(lt.parts[3] == std::vector<int>{4});
  CHECK(lt.part_parent[0] == -1);
  CHECK(lt.part_parent[1] == 0);
  CHECK(lt.part_parent[2] == 1);
  CHECK(lt.part_parent[3] == 2);
  CHECK(lt.part_layer == std::vector<int>{0, 1, 2, 3});
  for (int v = 1; v <= 6; ++v) {
    auto& p = lt.parts[lt.part_of[v]];
    CHECK(std::find(p.begin(), p.end(), v) != p.end());
  }
}

TEST_CASE("layering partition is a tree partition on random graphs") {
  std::mt19937_64 rng(4242);
  for (int it = 0; it < 20; ++it) {
    int n = 4 + (int)(rng() % 9);
    Graph g = random_connected(rng, n);
    LayeringTree lt = layering_partition(g, 1);
    // parts partition the vertex set
    std::set<int> seen;
    for (auto& p : lt.parts)
      for (int v : p) CHECK(seen.insert(v).second);
    CHECK((int)seen.size() == n);
    // members of one part share their BFS layer
    for (size_t i = 0; i < lt.parts.size(); ++i)
      for (int v : lt.parts[i]) CHECK(lt.depth[v] == lt.part_layer[i]);
    // every edge joins a part to itself or to a neighbor in the quotient
    for (auto& [u, v] : g.edges()) {
      int a = lt.part_of[u], b = lt.part_of[v];
      if (a == b) continue;
      if (lt.part_layer[a] > lt.part_layer[b]) std::swap(a, b);
      CHECK(lt.part_parent[b] == a);
    }
  }
}
