#include "frugalmc/decomp.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace frugalmc {

int OrderedTreeDecomposition::root() const {
  int r = -1;
  for (const auto& b : bags)
    if (b.parent < 0) {
      if (r >= 0) throw DecompError("multiple roots");
      r = b.id;
    }
  if (r < 0) throw DecompError("no root bag");
  return r;
}

std::vector<std::vector<int>> OrderedTreeDecomposition::children() const {
  std::vector<std::vector<int>> ch(bags.size());
  for (const auto& b : bags)
    if (b.parent >= 0) ch[b.parent].push_back(b.id);
  return ch;
}

OrderedTreeDecomposition OrderedTreeDecomposition::parse(const std::string& text) {
  OrderedTreeDecomposition t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    Bag b;
    if (!(ls >> b.id >> b.parent)) continue;
    int v;
    while (ls >> v) b.tuple.push_back(v);
    if (b.tuple.empty()) throw DecompError("bag with empty tuple");
    t.bags.push_back(std::move(b));
  }
  if (t.bags.empty()) throw DecompError("no bags");
  std::sort(t.bags.begin(), t.bags.end(),
            [](const Bag& a, const Bag& b) { return a.id < b.id; });
  for (size_t i = 0; i < t.bags.size(); ++i)
    if (t.bags[i].id != static_cast<int>(i))
      throw DecompError("bag ids must be dense from 0");
  t.k = static_cast<int>(t.bags[0].tuple.size()) - 1;
  return t;
}

std::string OrderedTreeDecomposition::dump() const {
  std::ostringstream out;
  for (const auto& b : bags) {
    out << b.id << " " << b.parent;
    for (int v : b.tuple) out << " " << v;
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> validate_decomposition(const Graph& g,
                                                const OrderedTreeDecomposition& t) {
  std::vector<std::string> bad;
  int nb = static_cast<int>(t.bags.size());
  if (nb == 0) return {"no bags"};
  int roots = 0;
  for (const auto& b : t.bags) {
    if (b.id < 0 || b.id >= nb || t.bags[b.id].id != b.id) {
      bad.push_back("bag ids not dense");
      return bad;
    }
    if (b.parent < 0)
      ++roots;
    else if (b.parent >= nb)
      bad.push_back("bag " + std::to_string(b.id) + " has unknown parent");
    if (static_cast<int>(b.tuple.size()) != t.k + 1)
      bad.push_back("bag " + std::to_string(b.id) + " tuple length differs");
    for (int v : b.tuple)
      if (v < 1 || v > g.n())
        bad.push_back("bag " + std::to_string(b.id) + " names unknown vertex " +
                      std::to_string(v));
  }
  if (roots != 1) bad.push_back("expected one root, found " + std::to_string(roots));
  if (!bad.empty()) return bad;

  // acyclic under parent pointers
  {
    std::vector<int> mark(nb, 0);
    for (int s = 0; s < nb; ++s) {
      int x = s;
      while (x >= 0 && mark[x] == 0) {
        mark[x] = 1;
        x = t.bags[x].parent;
      }
      if (x >= 0 && mark[x] == 1) {
        bad.push_back("parent pointers form a cycle");
        return bad;
      }
      for (int y = s; y >= 0 && mark[y] == 1; y = t.bags[y].parent) mark[y] = 2;
    }
  }

  std::vector<std::set<int>> content(nb);
  for (const auto& b : t.bags) content[b.id] = {b.tuple.begin(), b.tuple.end()};

  for (auto [u, v] : g.edges()) {
    bool covered = false;
    for (int b = 0; b < nb && !covered; ++b)
      covered = content[b].count(u) && content[b].count(v);
    if (!covered)
      bad.push_back("edge " + std::to_string(u) + " " + std::to_string(v) +
                    " not inside any bag");
  }

  auto ch = t.children();
  for (int v = 1; v <= g.n(); ++v) {
    std::vector<int> occ;
    for (int b = 0; b < nb; ++b)
      if (content[b].count(v)) occ.push_back(b);
    if (occ.empty()) {
      bad.push_back("vertex " + std::to_string(v) + " in no bag");
      continue;
    }
    // connected iff exactly one occurrence bag has a parent outside
    int tops = 0;
    for (int b : occ) {
      int p = t.bags[b].parent;
      if (p < 0 || !content[p].count(v)) ++tops;
    }
    if (tops != 1)
      bad.push_back("vertex " + std::to_string(v) + " occurrences disconnected");
  }
  return bad;
}

DecompMeasures decomposition_measures(const Graph& g,
                                      const OrderedTreeDecomposition& t) {
  DecompMeasures m;
  auto dist = all_distances(g);
  auto ch = t.children();
  for (const auto& b : t.bags) {
    std::vector<int> u(b.tuple);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    m.width = std::max(m.width, static_cast<int>(u.size()) - 1);
    m.rank = std::max(m.rank, static_cast<int>(ch[b.id].size()));
    for (size_t i = 0; i < u.size(); ++i)
      for (size_t j = i + 1; j < u.size(); ++j) {
        int d = dist[u[i]][u[j]];
        if (d < 0) throw DecompError("bag spans disconnected vertices");
        m.length = std::max(m.length, d);
      }
  }
  return m;
}

std::string PairRel::text() const {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (int i = 1; i <= w; ++i)
    for (int j = 1; j <= w; ++j)
      if (contains(i, j)) {
        if (!first) out << ",";
        out << "(" << i << "," << j << ")";
        first = false;
      }
  out << "}";
  return out.str();
}

std::string SigmaLabel::text() const {
  return "(" + edge.text() + "," + eq.text() + "," + up.text() + ")";
}

size_t hash_value(const SigmaLabel& s) {
  size_t h = std::hash<int>()(s.w);
  auto mix = [&h](const PairRel& r) {
    for (uint64_t word : r.bits) h = h * 1099511628211ULL + word;
  };
  mix(s.edge);
  mix(s.eq);
  mix(s.up);
  return h;
}

std::string Label::text() const { return is_sigma() ? sig->text() : sym; }

int LabeledTree::rank() const {
  int r = 0;
  for (const auto& n : nodes) r = std::max(r, static_cast<int>(n.children.size()));
  return r;
}

bool LabeledTree::sigma_labeled() const {
  for (const auto& n : nodes)
    if (!n.label.is_sigma()) return false;
  return !nodes.empty();
}

int LabeledTree::add(int parent, Label l) {
  int id = static_cast<int>(nodes.size());
  Node n;
  n.parent = parent;
  n.label = std::move(l);
  nodes.push_back(std::move(n));
  if (parent >= 0)
    nodes[parent].children.push_back(id);
  else
    root = id;
  return id;
}

LabeledTree LabeledTree::single(Label l) {
  LabeledTree t;
  t.add(-1, std::move(l));
  return t;
}

void LabeledTree::check() const {
  if (nodes.empty()) throw DecompError("empty tree");
  int roots = 0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.parent < 0) {
      ++roots;
      continue;
    }
    const auto& ch = nodes[n.parent].children;
    if (std::find(ch.begin(), ch.end(), static_cast<int>(i)) == ch.end())
      throw DecompError("parent/child lists disagree");
  }
  if (roots != 1) throw DecompError("tree must have one root");
}

SigmaLabel sigma_label_of(const std::vector<int>& tuple,
                          const std::vector<int>* parent_tuple, const Graph& g) {
  int w = static_cast<int>(tuple.size());
  SigmaLabel s;
  s.w = w;
  s.edge = PairRel(w);
  s.eq = PairRel(w);
  s.up = PairRel(w);
  for (int i = 1; i <= w; ++i)
    for (int j = 1; j <= w; ++j) {
      if (tuple[i - 1] == tuple[j - 1]) s.eq.set(i, j);
      if (g.adjacent(tuple[i - 1], tuple[j - 1])) s.edge.set(i, j);
    }
  if (parent_tuple) {
    if (parent_tuple->size() != tuple.size())
      throw DecompError("parent tuple length differs");
    for (int i = 1; i <= w; ++i)
      for (int j = 1; j <= w; ++j)
        if (tuple[i - 1] == (*parent_tuple)[j - 1]) s.up.set(i, j);
  }
  return s;
}

LabeledTree sigma_relabel(const Graph& g, const OrderedTreeDecomposition& t) {
  auto bad = validate_decomposition(g, t);
  if (!bad.empty()) throw DecompError("invalid decomposition: " + bad.front());
  LabeledTree out;
  out.nodes.resize(t.bags.size());
  out.root = t.root();
  for (const auto& b : t.bags) {
    auto& n = out.nodes[b.id];
    n.parent = b.parent;
    const std::vector<int>* pt = b.parent >= 0 ? &t.bags[b.parent].tuple : nullptr;
    n.label.sig = sigma_label_of(b.tuple, pt, g);
  }
  auto ch = t.children();
  for (size_t i = 0; i < ch.size(); ++i) out.nodes[i].children = ch[i];
  return out;
}

LabeledTree fold_to_binary(const LabeledTree& t) {
  LabeledTree out;
  out.nodes.reserve(t.nodes.size());

  // copy nodes first so original ids survive
  for (const auto& n : t.nodes) {
    LabeledTree::Node c;
    c.parent = n.parent;
    c.label = n.label;
    out.nodes.push_back(std::move(c));
  }
  out.root = t.root;

  auto chain_label = [](const Label& parent) {
    Label l = parent;
    if (l.is_sigma()) l.sig->up = l.sig->eq;
    return l;
  };

  for (size_t v = 0; v < t.nodes.size(); ++v) {
    const auto& ch = t.nodes[v].children;
    if (ch.size() <= 2) {
      out.nodes[v].children = ch;
      continue;
    }
    int holder = static_cast<int>(v);
    out.nodes[v].children.clear();
    for (size_t i = 0; i + 2 < ch.size(); ++i) {
      int link = static_cast<int>(out.nodes.size());
      LabeledTree::Node c;
      c.parent = holder;
      c.label = chain_label(out.nodes[v].label);
      out.nodes.push_back(std::move(c));
      out.nodes[holder].children = {ch[i], link};
      out.nodes[ch[i]].parent = holder;
      holder = link;
    }
    out.nodes[holder].children = {ch[ch.size() - 2], ch[ch.size() - 1]};
    out.nodes[ch[ch.size() - 2]].parent = holder;
    out.nodes[ch[ch.size() - 1]].parent = holder;
  }
  out.check();
  return out;
}

OrderedTreeDecomposition layering_decomposition(const LayeringTree& lt,
                                                const Graph& g, int capacity) {
  OrderedTreeDecomposition t;
  int need = 1;
  for (size_t p = 0; p < lt.parts.size(); ++p) {
    int sz = static_cast<int>(lt.parts[p].size());
    if (lt.part_parent[p] >= 0)
      sz += static_cast<int>(lt.parts[lt.part_parent[p]].size());
    need = std::max(need, sz);
  }
  if (capacity == 0) capacity = need;
  if (capacity < need)
    throw DecompError("capacity " + std::to_string(capacity) +
                      " below largest bag " + std::to_string(need));
  t.k = capacity - 1;
  for (size_t p = 0; p < lt.parts.size(); ++p) {
    OrderedTreeDecomposition::Bag b;
    b.id = static_cast<int>(p);
    b.parent = lt.part_parent[p];
    b.tuple = lt.parts[p];
    if (lt.part_parent[p] >= 0) {
      const auto& pp = lt.parts[lt.part_parent[p]];
      b.tuple.insert(b.tuple.end(), pp.begin(), pp.end());
    }
    while (static_cast<int>(b.tuple.size()) < capacity)
      b.tuple.push_back(b.tuple.back());
    t.bags.push_back(std::move(b));
  }
  (void)g;
  return t;
}

}  // namespace frugalmc
