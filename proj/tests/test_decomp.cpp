#include <doctest.h>

#include <algorithm>
#include <set>

#include "frugalmc/decomp.hpp"
#include "frugalmc/mso.hpp"

using namespace frugalmc;

namespace {

Graph path4() {
  return Graph::from_edges(4, {{1, 2}, {2, 3}, {3, 4}});
}

OrderedTreeDecomposition path4_decomp() {
  OrderedTreeDecomposition t;
  t.k = 1;
  t.bags = {{0, -1, {1, 2}}, {1, 0, {2, 3}}, {2, 1, {3, 4}}};
  return t;
}

Graph cycle6() {
  return Graph::from_edges(6, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 1}});
}

OrderedTreeDecomposition cycle6_decomp() {
  OrderedTreeDecomposition t;
  t.k = 2;
  t.bags = {{0, -1, {1, 2, 6}},
            {1, 0, {2, 3, 6}},
            {2, 1, {3, 6, 5}},
            {3, 2, {3, 4, 5}}};
  return t;
}

}  // namespace

TEST_CASE("decomposition parse and dump round trip") {
  OrderedTreeDecomposition t = path4_decomp();
  std::string text = t.dump();
  OrderedTreeDecomposition u = OrderedTreeDecomposition::parse(text);
  CHECK(u.k == 1);
  REQUIRE(u.bags.size() == 3);
  CHECK(u.bags[1].parent == 0);
  CHECK(u.bags[1].tuple == std::vector<int>{2, 3});
  CHECK(u.dump() == text);
  CHECK(u.root() == 0);
  CHECK(u.children()[0] == std::vector<int>{1});
}

TEST_CASE("validation accepts correct decompositions") {
  CHECK(validate_decomposition(path4(), path4_decomp()).empty());
  CHECK(validate_decomposition(cycle6(), cycle6_decomp()).empty());
}

TEST_CASE("validation rejects broken decompositions") {
  Graph g = path4();

  OrderedTreeDecomposition missing_edge = path4_decomp();
  missing_edge.bags[2].tuple = {3, 3};  // edge 3-4 no longer covered
  CHECK(!validate_decomposition(g, missing_edge).empty());

  OrderedTreeDecomposition split = path4_decomp();
  // vertex 2 occurs in bags 0 and 2 but not in bag 1 in between
  split.bags[1].tuple = {3, 3};
  split.bags[2].tuple = {2, 3};
  CHECK(!validate_decomposition(g, split).empty());

  OrderedTreeDecomposition vertex_range = path4_decomp();
  vertex_range.bags[0].tuple = {1, 9};
  CHECK(!validate_decomposition(g, vertex_range).empty());

  OrderedTreeDecomposition two_roots = path4_decomp();
  two_roots.bags[1].parent = -1;
  CHECK(!validate_decomposition(g, two_roots).empty());
}

TEST_CASE("decomposition measures") {
  DecompMeasures m = decomposition_measures(path4(), path4_decomp());
  CHECK(m.width == 1);
  CHECK(m.rank == 1);
  CHECK(m.length == 1);

  DecompMeasures c = decomposition_measures(cycle6(), cycle6_decomp());
  CHECK(c.width == 2);
  CHECK(c.rank == 1);
  CHECK(c.length == 3);  // bag {2,3,6}: distance 3 between 3 and 6
}

TEST_CASE("sigma labels of a path decomposition") {
  Graph g = path4();
  OrderedTreeDecomposition t = path4_decomp();

  SigmaLabel root = sigma_label_of(t.bags[0].tuple, nullptr, g);
  CHECK(root.w == 2);
  CHECK(root.edge.contains(1, 2));
  CHECK(root.edge.contains(2, 1));
  CHECK(!root.edge.contains(1, 1));
  CHECK(root.eq.contains(1, 1));
  CHECK(root.eq.contains(2, 2));
  CHECK(!root.eq.contains(1, 2));
  CHECK(root.up.text() == "{}");

  SigmaLabel mid = sigma_label_of(t.bags[1].tuple, &t.bags[0].tuple, g);
  // bag (2,3) under (1,2): only position 1 overlaps, onto parent position 2
  CHECK(mid.up.contains(1, 2));
  CHECK(!mid.up.contains(1, 1));
  CHECK(!mid.up.contains(2, 1));
  CHECK(!mid.up.contains(2, 2));
  CHECK(mid.up.text() == "{(1,2)}");

  SigmaLabel dup = sigma_label_of({2, 2}, nullptr, g);
  CHECK(dup.eq.contains(1, 2));
  CHECK(dup.eq.contains(2, 1));
  CHECK(dup.eq.contains(1, 1));
  CHECK(!dup.edge.contains(1, 2));  // no self loops
}

TEST_CASE("sigma relabel produces a consistent labeled tree") {
  Graph g = cycle6();
  LabeledTree lt = sigma_relabel(g, cycle6_decomp());
  lt.check();
  CHECK(lt.size() == 4);
  CHECK(lt.sigma_labeled());
  CHECK(lt.nodes[lt.root].label.sig->up.text() == "{}");
  for (int u = 0; u < lt.size(); ++u)
    if (u != lt.root) CHECK(lt.nodes[u].label.sig->up.text() != "{}");
}

TEST_CASE("canonical pairs enumerate graph vertices exactly once") {
  Graph g = path4();
  LabeledTree lt = sigma_relabel(g, path4_decomp());
  auto cp = canonical_pairs(lt);
  // first occurrences: 1 and 2 at the root, 3 and 4 at positions 2 below
  REQUIRE(cp.size() == 4);
  CHECK(cp[0] == std::pair<int, int>{0, 1});
  CHECK(cp[1] == std::pair<int, int>{0, 2});
  CHECK(cp[2] == std::pair<int, int>{1, 2});
  CHECK(cp[3] == std::pair<int, int>{2, 2});

  Graph c = cycle6();
  LabeledTree ct = sigma_relabel(c, cycle6_decomp());
  CHECK(canonical_pairs(ct).size() == 6);
}

TEST_CASE("thread steps move along equal contents") {
  Graph g = path4();
  OrderedTreeDecomposition t = path4_decomp();
  SigmaLabel mid = sigma_label_of(t.bags[1].tuple, &t.bags[0].tuple, g);
  CHECK(up_step(mid, 0b01) == 0b10);   // child pos 1 meets parent pos 2
  CHECK(up_step(mid, 0b10) == 0);      // vertex 3 is new in this bag
  CHECK(down_step(mid, 0b10) == 0b01);
  CHECK(down_step(mid, 0b01) == 0);

  Graph h = Graph::from_edges(2, {{1, 2}});
  SigmaLabel dup = sigma_label_of({1, 1}, nullptr, h);
  CHECK(eq_closure(dup, 0b01) == 0b11);
  SigmaLabel plain = sigma_label_of({1, 2}, nullptr, h);
  CHECK(eq_closure(plain, 0b01) == 0b01);
}

TEST_CASE("fold to binary keeps semantics and bounds rank") {
  // a star bag layout: one root bag with four children
  Graph g = Graph::from_edges(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}});
  OrderedTreeDecomposition t;
  t.k = 1;
  t.bags = {{0, -1, {1, 1}},
            {1, 0, {1, 2}},
            {2, 0, {1, 3}},
            {3, 0, {1, 4}},
            {4, 0, {1, 5}}};
  REQUIRE(validate_decomposition(g, t).empty());
  LabeledTree lt = sigma_relabel(g, t);
  CHECK(lt.rank() == 4);
  LabeledTree b = fold_to_binary(lt);
  b.check();
  CHECK(b.rank() <= 2);
  CHECK(b.size() > lt.size());
  // chain copies are position-transparent: canonical pairs are preserved
  CHECK(canonical_pairs(b).size() == canonical_pairs(lt).size());
  // and evaluation agrees on both shapes
  Translation tr = translate_to_tree_sentence(
      parse_formula("exists x. forall y. (x=y | E(x,y))"), t.k);
  CHECK(eval_tree_sentence(lt, tr.sentence) == eval_tree_sentence(b, tr.sentence));
  CHECK(eval_tree_sentence(b, tr.sentence));
}

TEST_CASE("layering decomposition of the six cycle") {
  Graph g = cycle6();
  LayeringTree lt = layering_partition(g, 1);
  OrderedTreeDecomposition t = layering_decomposition(lt, g);
  CHECK(validate_decomposition(g, t).empty());
  REQUIRE(t.bags.size() == 4);
  CHECK(t.k == 3);  // tightest capacity is 4: parts {3,5} plus parent {2,6}
  CHECK(t.bags[0].tuple == std::vector<int>{1, 1, 1, 1});
  CHECK(t.bags[1].tuple == std::vector<int>{2, 6, 1, 1});
  CHECK(t.bags[2].tuple == std::vector<int>{3, 5, 2, 6});
  CHECK(t.bags[3].tuple == std::vector<int>{4, 3, 5, 5});
  // measured length obeys the layering bound
  DecompMeasures m = decomposition_measures(g, t);
  CHECK(m.length <= 3 * 1 + 1);

  CHECK_THROWS_AS(layering_decomposition(lt, g, 2), DecompError);
  OrderedTreeDecomposition wide = layering_decomposition(lt, g, 6);
  CHECK(wide.k == 5);
  CHECK(validate_decomposition(g, wide).empty());
}
