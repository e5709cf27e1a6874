#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace frugalmc {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Port-numbered undirected graph. Vertex ids are 1-based. Ports at each
// vertex are numbered 1..deg(v) in input edge order. Self-loops and
// parallel edges are rejected. An optional rotation system (cyclic port
// order per vertex) carries a combinatorial embedding.
class Graph {
 public:
  struct Half {
    int to = 0;    // neighbor id
    int back = 0;  // port index at the neighbor pointing back here
    int edge = -1; // index into edge list
  };

  Graph() = default;

  // Format:
  //   n m [planar]
  //   u v            (m lines)
  //   v: p1 ... pdeg (optional rotation block, one line per vertex)
  static Graph parse(const std::string& text);
  static Graph load_file(const std::string& path);
  std::string dump() const;

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  bool declared_planar() const { return declared_planar_; }
  bool has_rotation() const { return has_rotation_; }

  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  int neighbor(int v, int port) const { return adj_[v][port - 1].to; }
  int back_port(int v, int port) const { return adj_[v][port - 1].back; }
  const std::vector<Half>& ports(int v) const { return adj_[v]; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // 1-based port from v to w, or 0 if not adjacent
  int port_to(int v, int w) const;
  bool adjacent(int u, int v) const { return port_to(u, v) != 0; }

  // cyclic order of ports at v; only present when has_rotation()
  const std::vector<int>& rotation(int v) const;
  int rot_prev(int v, int port) const;  // port immediately before in cyclic order
  int rot_next(int v, int port) const;

  bool connected() const;
  void require_connected() const;

  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                          bool planar = false);
  // rot[v] lists neighbor ids of v in cyclic order
  void set_rotation_by_neighbors(const std::vector<std::vector<int>>& rot);

 private:
  int n_ = 0;
  bool declared_planar_ = false;
  bool has_rotation_ = false;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<Half>> adj_;       // [v][port-1]
  std::vector<std::vector<int>> rotation_;   // [v] = cyclic list of ports
  std::vector<std::vector<int>> rot_prev_;   // [v][port-1] = preceding port
  std::vector<std::vector<int>> rot_next_;

  void add_edge(int u, int v);
  void index_rotation();
};

struct GraphStats {
  int n = 0;
  int m = 0;
  int min_degree = 0;
  int max_degree = 0;
  int diameter = 0;
};
GraphStats graph_stats(const Graph& g);

// all-pairs shortest path distance (small n); dist[u][v], 1-based
std::vector<std::vector<int>> all_distances(const Graph& g);
int eccentricity(const Graph& g, int v);

enum class PortState : uint8_t { Unknown, Parent, Child, Cross };
const char* port_state_name(PortState s);

struct BfsTree {
  int root = 1;
  int height = 0;
  std::vector<int> depth;   // [n+1], depth[root] = 0
  std::vector<int> parent;  // [n+1], 0 for root
  std::vector<std::vector<PortState>> port_state;  // [v][port-1]

  int parent_port(const Graph& g, int v) const;
  std::vector<int> children(const Graph& g, int v) const;
  // v itself followed by its proper ancestors up to the root
  std::vector<int> ancestor_path(int v) const;
};

// parent choice ties go to the smallest neighbor id
BfsTree bfs_tree(const Graph& g, int root);

struct Face {
  std::vector<std::pair<int, int>> arcs;  // directed arcs in walk order
};

struct FaceTrace {
  std::vector<Face> faces;
  bool euler_ok = false;  // n - m + f == 2
};

// orbits of the next-arc rule: after (u,v) comes (v,w) where (v,w) is
// immediately before (v,u) in v's cyclic order
FaceTrace trace_faces(const Graph& g);
// face containing a given arc, walked from that arc
Face trace_face_from(const Graph& g, int u, int v);

struct BlockDecomposition {
  std::vector<std::vector<int>> blocks;        // nontrivial blocks, sorted vertex sets
  std::vector<int> edge_block;                 // per edge index; -1 for bridges
  std::vector<std::pair<int, int>> bridges;
  std::vector<int> articulation_points;        // sorted
};
BlockDecomposition biconnected_components(const Graph& g);

struct LayeringTree {
  int source = 1;
  std::vector<int> depth;                 // [n+1]
  std::vector<int> part_of;               // [n+1] -> part index
  std::vector<std::vector<int>> parts;    // sorted member lists
  std::vector<int> part_layer;            // layer of each part
  std::vector<int> part_parent;           // -1 for the root part
};

// vertices of equal depth grouped by connectivity through the
// depth->= subgraph; the quotient is a tree rooted at {source}
LayeringTree layering_partition(const Graph& g, int source);

}  // namespace frugalmc
