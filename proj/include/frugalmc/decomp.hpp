#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frugalmc/graph.hpp"

namespace frugalmc {

struct DecompError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rooted tree of bags. Every bag is a (k+1)-tuple of vertex ids, repeats
// allowed; ids are dense indices into `bags`.
struct OrderedTreeDecomposition {
  int k = 0;
  struct Bag {
    int id = 0;
    int parent = -1;  // -1 at the root
    std::vector<int> tuple;
  };
  std::vector<Bag> bags;

  int root() const;
  std::vector<std::vector<int>> children() const;  // ascending ids

  // line format: "bagid parentid v1 ... v_{k+1}"
  static OrderedTreeDecomposition parse(const std::string& text);
  std::string dump() const;
};

// empty means valid; entries name the offending vertices/bags
std::vector<std::string> validate_decomposition(const Graph& g,
                                                const OrderedTreeDecomposition& t);

struct DecompMeasures {
  int width = 0;   // max deduplicated bag size - 1
  int rank = 0;    // max child count
  int length = 0;  // max in-graph distance within a bag
};
DecompMeasures decomposition_measures(const Graph& g,
                                      const OrderedTreeDecomposition& t);

// relation on tuple positions 1..w, bitset-backed
struct PairRel {
  int w = 0;
  std::vector<uint64_t> bits;

  PairRel() = default;
  explicit PairRel(int width) : w(width), bits((size_t(width) * width + 63) / 64, 0) {}
  bool contains(int i, int j) const {
    size_t b = size_t(i - 1) * w + (j - 1);
    return (bits[b >> 6] >> (b & 63)) & 1;
  }
  void set(int i, int j) {
    size_t b = size_t(i - 1) * w + (j - 1);
    bits[b >> 6] |= uint64_t(1) << (b & 63);
  }
  bool operator==(const PairRel& o) const { return w == o.w && bits == o.bits; }
  std::string text() const;  // {(1,2),(2,1)}
};

struct SigmaLabel {
  int w = 0;
  PairRel edge;     // positions whose contents are adjacent in the graph
  PairRel eq;       // positions with equal contents
  PairRel up;       // position content equals parent-bag position content
  bool operator==(const SigmaLabel& o) const {
    return w == o.w && edge == o.edge && eq == o.eq && up == o.up;
  }
  std::string text() const;
};

size_t hash_value(const SigmaLabel& s);

// node label: an opaque symbol or a sigma label
struct Label {
  std::string sym;
  std::optional<SigmaLabel> sig;

  bool is_sigma() const { return sig.has_value(); }
  bool operator==(const Label& o) const { return sym == o.sym && sig == o.sig; }
  std::string text() const;
};

struct LabeledTree {
  struct Node {
    int parent = -1;
    std::vector<int> children;  // order is significant
    Label label;
  };
  std::vector<Node> nodes;
  int root = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  int rank() const;
  bool sigma_labeled() const;

  int add(int parent, Label l);  // appends; parent -1 makes it the root
  static LabeledTree single(Label l);
  void check() const;  // parent/child consistency, single root
};

// compute the label of a bag from its tuple, its parent's tuple (nullptr at
// the root), and an adjacency predicate
SigmaLabel sigma_label_of(const std::vector<int>& tuple,
                          const std::vector<int>* parent_tuple,
                          const Graph& g);

LabeledTree sigma_relabel(const Graph& g, const OrderedTreeDecomposition& t);

// chains >2 children (in list order) through copies of the parent node;
// chain copies keep the parent's label with `up` set to the parent's `eq`
LabeledTree fold_to_binary(const LabeledTree& t);

// bag per part: members ascending, then parent-part members ascending,
// padded to `capacity` by repeating the last entry; capacity 0 = tightest
OrderedTreeDecomposition layering_decomposition(const LayeringTree& lt,
                                                const Graph& g,
                                                int capacity = 0);

}  // namespace frugalmc
