#pragma once

#include <map>
#include <string>
#include <vector>

#include "frugalmc/automata.hpp"
#include "frugalmc/netsim.hpp"

namespace frugalmc {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bags built by the construction protocols live in per-node stores and
// are addressed by structured keys. The leading word tags the kind:
//   face    {1, arc_u, arc_v, w1, w2, w3}  face walk copy, triple + arc
//   virtual {2, v, port}                    glue node at a port of v
//   chain   {3, v, l}                       per-port bag on tree networks
//   part    {4, partId}                     layering partition bag
using BagKey = std::vector<long long>;
inline constexpr long long kFaceBag = 1;
inline constexpr long long kVirtualBag = 2;
inline constexpr long long kChainBag = 3;
inline constexpr long long kPartBag = 4;

std::string bag_key_text(const BagKey& k);

struct BagRef {
  int owner = 0;  // node storing the bag; 0 = none
  BagKey key;

  bool valid() const { return owner != 0; }
  bool operator==(const BagRef& o) const { return owner == o.owner && key == o.key; }
  bool operator<(const BagRef& o) const {
    if (owner != o.owner) return owner < o.owner;
    return key < o.key;
  }
};

// tuple is stored already padded to the protocol's uniform capacity.
// edge_pairs lists vertex id pairs the owner knows to be adjacent; the
// label derives adjacency of tuple positions from it.
struct StoredBag {
  BagKey key;
  std::vector<int> tuple;
  BagRef father;  // invalid at the root
  std::vector<std::pair<int, int>> edge_pairs;
  bool root = false;
};

// label of a bag from local data; father_tuple null at the root
SigmaLabel stored_bag_label(const StoredBag& b, const std::vector<int>* father_tuple);

struct NodeStore {
  std::map<BagKey, StoredBag> bags;
};

// Decomposition spread over the nodes of the network. Bags are globally
// identified by (owner, key); assemble() orders them by that pair into
// dense ids, so sibling order in the assembled tree is the ascending
// (owner, key) order.
struct DistributedBagStore {
  std::vector<NodeStore> node;  // [n+1], 1-based
  BagRef root;

  const StoredBag* find(const BagRef& r) const;
  size_t size() const;
  OrderedTreeDecomposition assemble() const;
  // empty means ok; entries name bags whose father is not stored on the
  // owner itself or a direct neighbor (resp. within h hops)
  std::vector<std::string> check_fathers_local(const Graph& g) const;
  std::vector<std::string> check_fathers_within(const Graph& g, int h) const;
};

struct ProtocolResult {
  bool decided = false;
  bool accept = false;
  Metrics metrics;
  DistributedBagStore store;
  BfsTree tree;  // spanning structure the run used, when one exists
};

struct BfsResult {
  BfsTree tree;
  Metrics metrics;
};

// distributed BFS layer flood; sync mode only, ties go to the smallest
// neighbor id, so the result matches bfs_tree(g, cfg.requester)
BfsResult bfs_protocol(const Graph& g, const SimConfig& cfg);

// full model checking round on a tree network: decomposition, labeling,
// automaton broadcast and bottom-up run, at most 8 messages per link
ProtocolResult tree_model_check(const Graph& g, const std::string& sentence,
                                const SimConfig& cfg);

// face walk decomposition of a biconnected plane graph (rotation system
// required, n >= 3); k bounds the BFS tree height, bags get 3k+1 slots
ProtocolResult planar_td_protocol(const Graph& g, int k, const SimConfig& cfg);

// block tree of face walk decompositions glued through virtual bags;
// handles cut vertices and bridges of a connected plane graph
ProtocolResult blocks_and_connect_protocol(const Graph& g, int k, const SimConfig& cfg);

// layering partition decomposition; every partition class must have hop
// diameter at most 3t+1 (holds on graphs of tree-length t)
ProtocolResult layering_td_protocol(const Graph& g, int t, const SimConfig& cfg);

// relabel a constructed decomposition and run the compiled automaton
// bottom-up over it; flood_hops 0 routes father traffic over single
// links, positive values route by destination id with that hop budget
ProtocolResult distributed_run_automaton(const Graph& g, const DistributedBagStore& store,
                                         const BfsTree& tree, const Recipe& recipe,
                                         const SimConfig& cfg, int flood_hops = 0);

enum class NetClass { Tree, PlanarBoundedDiameter, BoundedDegreeTreeLength };

NetClass parse_net_class(const std::string& s);
const char* net_class_name(NetClass c);

struct E2EOptions {
  SimConfig sim;
  int k = -1;  // planar: BFS height bound; -1 derives it from the graph
  int t = -1;  // layering: class radius parameter; -1 derives it
  bool with_bfs = false;  // async: run the sync BFS round first and inject
};

struct E2EReport {
  std::string instance;
  std::string net_class;
  std::string sentence;
  bool decided = false;
  bool decision = false;
  bool oracle = false;
  bool oracle_match = false;
  bool decomposition_valid = false;
  int width = -1;
  int bags = 0;
  int rank = 0;
  long long msg_per_link_max = 0;
  long long total_messages = 0;
  long long time = 0;
  uint64_t seed = 0;
  std::string mode;
  double wall_seconds = 0;

  std::string to_json() const;
};

// run the class protocol end to end, then check the outcome against the
// centralized pipeline on the same graph and sentence
E2EReport model_check_e2e(const Graph& g, NetClass cls, const std::string& sentence,
                          const E2EOptions& opts, const std::string& instance = "");

}  // namespace frugalmc
