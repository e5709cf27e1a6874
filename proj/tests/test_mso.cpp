#include <doctest.h>

#include <queue>
#include <random>

#include "frugalmc/mso.hpp"

using namespace frugalmc;

namespace {

Graph from_edges(int n, std::vector<std::pair<int, int>> e) {
  return Graph::from_edges(n, e);
}

Graph cycle(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.push_back({i, i + 1});
  e.push_back({n, 1});
  return from_edges(n, e);
}

Graph complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 1; u <= n; ++u)
    for (int v = u + 1; v <= n; ++v) e.push_back({u, v});
  return from_edges(n, e);
}

Graph star(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 2; i <= leaves + 1; ++i) e.push_back({1, i});
  return from_edges(leaves + 1, e);
}

bool run(const Graph& g, const std::string& s) {
  return eval_graph_sentence(g, parse_formula(s));
}

// specialized independent checkers
bool naive_bipartite(const Graph& g) {
  std::vector<int> color(g.n() + 1, -1);
  for (int s = 1; s <= g.n(); ++s) {
    if (color[s] != -1) continue;
    color[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto& h : g.ports(u)) {
        if (color[h.to] == -1) {
          color[h.to] = 1 - color[u];
          q.push(h.to);
        } else if (color[h.to] == color[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

bool naive_triangle(const Graph& g) {
  for (int a = 1; a <= g.n(); ++a)
    for (int b = a + 1; b <= g.n(); ++b)
      for (int c = b + 1; c <= g.n(); ++c)
        if (g.adjacent(a, b) && g.adjacent(b, c) && g.adjacent(a, c))
          return true;
  return false;
}

bool naive_dominating_pair(const Graph& g) {
  for (int x = 1; x <= g.n(); ++x)
    for (int y = 1; y <= g.n(); ++y) {
      bool all = true;
      for (int z = 1; z <= g.n() && all; ++z)
        if (z != x && z != y && !g.adjacent(x, z) && !g.adjacent(y, z))
          all = false;
      if (all) return true;
    }
  return false;
}

LabeledTree leaf(const std::string& sym) {
  Label l;
  l.sym = sym;
  return LabeledTree::single(l);
}

int grow(LabeledTree& t, int parent, const std::string& sym) {
  Label l;
  l.sym = sym;
  return t.add(parent, l);
}

}  // namespace

TEST_CASE("parser round trips the sentence suites") {
  for (auto& s : graph_sentence_suite()) {
    FormulaP f = parse_formula(s.text);
    FormulaP g = parse_formula(formula_text(f));
    CHECK(equal(f, g));
  }
  for (auto& s : tree_sentence_suite()) {
    FormulaP f = parse_formula(s.text);
    FormulaP g = parse_formula(formula_text(f));
    CHECK(equal(f, g));
  }
}

TEST_CASE("parser precedence and scoping") {
  // implication associates to the right, conjunction binds tighter
  FormulaP f = parse_formula("forall x. (x=x -> x=x & x=x -> x=x)");
  FormulaP g = parse_formula("forall x. (x=x -> ((x=x & x=x) -> x=x))");
  CHECK(equal(f, g));
  // negation over a quantifier keeps its scope
  FormulaP h = parse_formula("exists x. (!forall y. y=x & x=x)");
  CHECK(h->a->kind == FKind::Not);
  // quantifier bodies stretch maximally
  FormulaP q = parse_formula("exists x. x=x & exists y. y=y");
  CHECK(q->kind == FKind::Exists);
  CHECK(q->a->kind == FKind::And);
}

TEST_CASE("parser reports offending tokens") {
  CHECK_THROWS_WITH_AS(parse_formula("exists x. y=x"),
                       doctest::Contains("unbound variable 'y'"), MsoError);
  CHECK_THROWS_WITH_AS(parse_formula("exists X. X(X)"),
                       doctest::Contains("must start with a lowercase"),
                       MsoError);
  CHECK_THROWS_WITH_AS(parse_formula("forall x. Q(x)"),
                       doctest::Contains("unknown predicate"), MsoError);
  CHECK_THROWS_WITH_AS(parse_formula("exists x. x=x)"),
                       doctest::Contains("trailing input"), MsoError);
  CHECK_THROWS_AS(parse_formula("Exists x. x=x"), MsoError);
  CHECK_THROWS_AS(parse_formula("exists x. E(x)"), MsoError);
  CHECK_THROWS_AS(parse_formula(""), MsoError);
}

TEST_CASE("free variables and sentence checks") {
  FormulaP f = parse_formula("exists x. x=x");
  CHECK(is_sentence(f));
  CHECK(uses_graph_vocabulary(f));
  FormulaP atom = Formula::edge("x", "y");
  auto fv = free_vars(atom);
  REQUIRE(fv.size() == 2);
  CHECK(fv[0].first == "x");
  CHECK(fv[0].second == Sort::Elem);
  FormulaP m = Formula::mem("X", "x");
  CHECK(free_vars(m)[0].second == Sort::Set);
  CHECK(!is_sentence(m));
}

TEST_CASE("graph sentences on fixed instances") {
  Graph c6 = cycle(6), c5 = cycle(5), k4 = complete(4), s5 = star(5);
  Graph k1 = from_edges(1, {});

  CHECK(run(c6, "exists x. x=x"));
  CHECK(run(k1, "exists x. x=x"));

  CHECK(run(c6, "exists x. exists y. E(x,y)"));
  CHECK(!run(k1, "exists x. exists y. E(x,y)"));

  const std::string twocol =
      "Exists X. forall x. forall y. (E(x,y) -> !(X(x) <-> X(y)))";
  CHECK(run(c6, twocol));
  CHECK(!run(c5, twocol));
  CHECK(!run(k4, twocol));
  CHECK(run(s5, twocol));

  const std::string isolated = "exists x. forall y. !E(x,y)";
  CHECK(!run(c6, isolated));
  CHECK(run(k1, isolated));

  const std::string triangle =
      "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))";
  CHECK(run(k4, triangle));
  CHECK(!run(c6, triangle));

  const std::string dompair =
      "exists x. exists y. forall z. (z=x | z=y | E(x,z) | E(y,z))";
  CHECK(run(c6, dompair));   // opposite vertices cover the cycle
  CHECK(!run(cycle(7), dompair));
  CHECK(run(k4, dompair));
  CHECK(run(s5, dompair));
}

TEST_CASE("graph sentences match specialized checkers on random graphs") {
  std::mt19937_64 rng(91);
  const std::string twocol =
      "Exists X. forall x. forall y. (E(x,y) -> !(X(x) <-> X(y)))";
  const std::string triangle =
      "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))";
  const std::string dompair =
      "exists x. exists y. forall z. (z=x | z=y | E(x,z) | E(y,z))";
  for (int it = 0; it < 30; ++it) {
    int n = 2 + (int)(rng() % 7);
    std::vector<std::pair<int, int>> e;
    for (int u = 1; u <= n; ++u)
      for (int v = u + 1; v <= n; ++v)
        if (rng() % 10 < 4) e.push_back({u, v});
    Graph g = from_edges(n, e);
    CHECK(run(g, twocol) == naive_bipartite(g));
    CHECK(run(g, triangle) == naive_triangle(g));
    CHECK(run(g, dompair) == naive_dominating_pair(g));
  }
}

TEST_CASE("tree sentences on small labeled trees") {
  LabeledTree a = leaf("a");
  CHECK(eval_tree_sentence(a, parse_formula("exists x. Pa(x)")));
  CHECK(eval_tree_sentence(a, parse_formula("forall x. Pa(x)")));
  CHECK(!eval_tree_sentence(a, parse_formula("exists x. exists y. E1(x,y)")));
  CHECK(eval_tree_sentence(
      a, parse_formula("exists x. (Pa(x) & forall y. (!E1(y,x) & !E2(y,x)))")));

  LabeledTree t = leaf("a");
  int l = grow(t, 0, "b");
  grow(t, 0, "a");
  grow(t, l, "a");
  // shape: a(b(a), a) with E1 the first child
  CHECK(eval_tree_sentence(t, parse_formula("exists x. Pb(x)")));
  CHECK(!eval_tree_sentence(t, parse_formula("forall x. Pa(x)")));
  CHECK(eval_tree_sentence(t, parse_formula("exists x. exists y. E1(x,y)")));
  CHECK(!eval_tree_sentence(
      t, parse_formula("forall x. forall y. (E1(x,y) -> Pb(y))")));
  CHECK(eval_tree_sentence(
      t, parse_formula("forall x. forall y. (E2(x,y) -> Pa(y))")));
  CHECK(eval_tree_sentence(
      t,
      parse_formula(
          "exists x. exists y. (Pa(x) & Pb(y) & (E1(x,y) | E2(x,y)))")));
  // set quantification: the b nodes are exactly the E1 children of the root
  CHECK(eval_tree_sentence(
      t, parse_formula("Exists X. forall y. (X(y) <-> Pb(y))")));
}

TEST_CASE("translated sentences agree with direct evaluation") {
  struct Case {
    Graph g;
    OrderedTreeDecomposition t;
  };
  std::vector<Case> cases;

  {
    Case c{from_edges(2, {{1, 2}}), {}};
    c.t.k = 1;
    c.t.bags = {{0, -1, {1, 2}}};
    cases.push_back(c);
  }
  {
    Case c{from_edges(3, {{1, 2}, {2, 3}}), {}};
    c.t.k = 1;
    c.t.bags = {{0, -1, {1, 2}}, {1, 0, {2, 3}}};
    cases.push_back(c);
  }
  {
    Case c{complete(3), {}};
    c.t.k = 2;
    c.t.bags = {{0, -1, {1, 2, 3}}};
    cases.push_back(c);
  }
  {
    Case c{from_edges(4, {{1, 2}, {2, 3}, {3, 4}}), {}};
    c.t.k = 1;
    c.t.bags = {{0, -1, {2, 1}}, {1, 0, {2, 3}}, {2, 1, {3, 4}}};
    cases.push_back(c);
  }
  {
    Case c{cycle(6), {}};
    c.t.k = 2;
    c.t.bags = {{0, -1, {1, 2, 6}},
                {1, 0, {2, 3, 6}},
                {2, 1, {3, 6, 5}},
                {3, 2, {3, 4, 5}}};
    cases.push_back(c);
  }
  {
    Case c{star(4), {}};
    c.t.k = 1;
    c.t.bags = {{0, -1, {1, 1}},
                {1, 0, {1, 2}},
                {2, 0, {1, 3}},
                {3, 0, {1, 4}},
                {4, 0, {1, 5}}};
    cases.push_back(c);
  }

  for (auto& c : cases) {
    REQUIRE(validate_decomposition(c.g, c.t).empty());
    LabeledTree lt = sigma_relabel(c.g, c.t);
    CHECK((int)canonical_pairs(lt).size() == c.g.n());
    for (auto& s : graph_sentence_suite()) {
      FormulaP f = parse_formula(s.text);
      Translation tr = translate_to_tree_sentence(f, c.t.k);
      CHECK(is_sentence(tr.sentence));
      bool want = eval_graph_sentence(c.g, f);
      bool got = eval_tree_sentence(lt, tr.sentence);
      INFO(s.name, " on n=", c.g.n());
      CHECK(want == got);
    }
  }
}

namespace {

using F = Formula;

FormulaP not_member_of_any(const std::vector<std::string>& tup,
                           const std::string& u, int skip) {
  std::vector<FormulaP> parts;
  for (int j = 1; j <= (int)tup.size(); ++j) {
    if (j == skip) continue;
    parts.push_back(F::lnot(F::mem(tup[j - 1], u)));
  }
  if (parts.empty()) return FormulaP();
  return F::land(parts);
}

FormulaP expanded_exactly_one(const std::vector<std::string>& tup) {
  int w = (int)tup.size();
  std::vector<FormulaP> here;
  for (int i = 1; i <= w; ++i) {
    FormulaP m = F::mem(tup[i - 1], "u");
    FormulaP rest = not_member_of_any(tup, "u", i);
    here.push_back(rest ? F::land(m, rest) : m);
  }
  FormulaP nowhere_else = not_member_of_any(tup, "v", 0);
  FormulaP others = F::quant(FKind::Forall, "v", Sort::Elem,
                             F::lor(F::eq("v", "u"), nowhere_else));
  return F::quant(FKind::Exists, "u", Sort::Elem,
                  F::land(F::lor(here), others));
}

FormulaP expanded_first_position(const std::vector<std::string>& tup) {
  int w = (int)tup.size();
  std::vector<FormulaP> parts;
  for (int j = 2; j <= w; ++j)
    for (int i = 1; i < j; ++i)
      parts.push_back(F::implies(
          F::mem(tup[j - 1], "u"),
          F::land(F::lnot(F::label(LabelPred::eq_has(i, j), "u")),
                  F::lnot(F::label(LabelPred::eq_has(j, i), "u")))));
  if (parts.empty())
    return F::quant(FKind::Forall, "u", Sort::Elem, F::eq("u", "u"));
  return F::quant(FKind::Forall, "u", Sort::Elem, F::land(parts));
}

FormulaP expanded_top_occurrence(const std::vector<std::string>& tup) {
  int w = (int)tup.size();
  std::vector<FormulaP> parts;
  for (int i = 1; i <= w; ++i)
    for (int j = 1; j <= w; ++j)
      parts.push_back(
          F::implies(F::mem(tup[i - 1], "u"),
                     F::lnot(F::label(LabelPred::up_has(i, j), "u"))));
  return F::quant(FKind::Forall, "u", Sort::Elem, F::land(parts));
}

FormulaP all_set_values_satisfy(const std::vector<std::string>& tup,
                                FormulaP body) {
  FormulaP f = std::move(body);
  for (auto it = tup.rbegin(); it != tup.rend(); ++it)
    f = F::quant(FKind::Forall, *it, Sort::Set, f);
  return f;
}

}  // namespace

TEST_CASE("encoding guards match their formula expansion") {
  std::vector<std::pair<LabeledTree, int>> trees;
  {
    Graph g = from_edges(4, {{1, 2}, {2, 3}, {3, 4}});
    OrderedTreeDecomposition t;
    t.k = 1;
    t.bags = {{0, -1, {1, 2}}, {1, 0, {2, 3}}, {2, 1, {3, 4}}};
    trees.push_back({fold_to_binary(sigma_relabel(g, t)), 2});
  }
  {
    Graph g = cycle(6);
    OrderedTreeDecomposition t;
    t.k = 2;
    t.bags = {{0, -1, {1, 2, 6}},
              {1, 0, {2, 3, 6}},
              {2, 1, {3, 6, 5}},
              {3, 2, {3, 4, 5}}};
    trees.push_back({fold_to_binary(sigma_relabel(g, t)), 3});
  }
  {
    Graph g = star(4);
    OrderedTreeDecomposition t;
    t.k = 1;
    t.bags = {{0, -1, {1, 1}},
              {1, 0, {1, 2}},
              {2, 0, {1, 3}},
              {3, 0, {1, 4}},
              {4, 0, {1, 5}}};
    trees.push_back({fold_to_binary(sigma_relabel(g, t)), 2});
  }
  // guards also have to behave on plain symbol labels
  {
    auto sym = [](const std::string& s) {
      Label l;
      l.sym = s;
      return l;
    };
    LabeledTree t;
    int r = t.add(-1, sym("a"));
    int b = t.add(r, sym("b"));
    t.add(r, sym("a"));
    t.add(b, sym("b"));
    trees.push_back({t, 2});
  }

  for (auto& [t, w] : trees) {
    std::vector<std::string> tup;
    for (int i = 1; i <= w; ++i) tup.push_back("G" + std::to_string(i));
    FormulaP elem_expansion =
        F::land({expanded_exactly_one(tup), expanded_first_position(tup),
                 expanded_top_occurrence(tup)});
    FormulaP set_expansion = F::land(expanded_first_position(tup),
                                     expanded_top_occurrence(tup));
    CHECK(eval_tree_sentence(
        t, all_set_values_satisfy(
               tup, F::iff(F::enc_guard(tup, Sort::Elem), elem_expansion))));
    CHECK(eval_tree_sentence(
        t, all_set_values_satisfy(
               tup, F::iff(F::enc_guard(tup, Sort::Set), set_expansion))));
  }
}
