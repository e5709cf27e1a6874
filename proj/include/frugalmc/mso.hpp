#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "frugalmc/decomp.hpp"

namespace frugalmc {

struct MsoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Sort : uint8_t { Elem, Set };

// predicate over node labels used by tree-vocabulary atoms; Pc(x) becomes
// SymbolIs, the pair kinds probe sigma-label relations
struct LabelPred {
  enum class Kind : uint8_t { SymbolIs, EdgeHas, EqHas, UpHas };
  Kind kind = Kind::SymbolIs;
  std::string sym;
  int i = 0, j = 0;

  bool eval(const Label& l) const;
  std::string text() const;
  bool operator==(const LabelPred& o) const {
    return kind == o.kind && sym == o.sym && i == o.i && j == o.j;
  }

  static LabelPred symbol(std::string s);
  static LabelPred edge_has(int i, int j);
  static LabelPred eq_has(int i, int j);
  static LabelPred up_has(int i, int j);
};

enum class FKind : uint8_t {
  EdgeAtom,    // E(x,y), graph adjacency
  EqAtom,      // x = y
  MemAtom,     // X(x)
  ChildAtom,   // Ei(x,y): y is the i-th child of x
  LabelAtom,   // label predicate at x
  ThreadAtom,  // equality thread from (s, pos i) down to (t, pos p)
  EncGuard,    // the tuple of set variables is a valid encoding
  Not,
  And,
  Or,
  Implies,
  Iff,
  Exists,
  Forall,
};

// quantifier enumeration domain; ElemEnc/SetEnc quantify a (k+1)-tuple of
// set variables restricted to element/set encodings over sigma labels (the
// matching guard is still conjoined in the body, so plain enumeration
// agrees; the domain just makes the oracle tractable)
enum class QuantDomain : uint8_t { All, ElemEnc, SetEnc };

struct Formula;
using FormulaP = std::shared_ptr<const Formula>;

struct Formula {
  FKind kind;
  std::string x, y;  // atom variables; ThreadAtom uses x=s, y=t
  int i = 0, p = 0;  // ChildAtom index / ThreadAtom positions
  LabelPred pred;
  FormulaP a, b;
  std::vector<std::string> vars;  // quantified tuple (size 1 unless encoded)
  Sort sort = Sort::Elem;
  QuantDomain dom = QuantDomain::All;

  static FormulaP edge(std::string x, std::string y);
  static FormulaP eq(std::string x, std::string y);
  static FormulaP mem(std::string X, std::string x);
  static FormulaP child(int i, std::string x, std::string y);
  static FormulaP label(LabelPred p, std::string x);
  static FormulaP thread(int i, int p, std::string s, std::string t);
  // sort Elem: the components hold exactly one bit overall and it sits on a
  // first, top position; sort Set: every member bit sits on such a position
  static FormulaP enc_guard(std::vector<std::string> tuple, Sort s);
  static FormulaP lnot(FormulaP a);
  static FormulaP land(FormulaP a, FormulaP b);
  static FormulaP lor(FormulaP a, FormulaP b);
  static FormulaP implies(FormulaP a, FormulaP b);
  static FormulaP iff(FormulaP a, FormulaP b);
  static FormulaP land(std::vector<FormulaP> fs);  // empty = true
  static FormulaP lor(std::vector<FormulaP> fs);   // empty = false
  static FormulaP quant(FKind k, std::string v, Sort s, FormulaP body);
  static FormulaP quant_tuple(FKind k, std::vector<std::string> vs, Sort s,
                              QuantDomain dom, FormulaP body);
};

bool equal(const FormulaP& a, const FormulaP& b);

FormulaP parse_formula(const std::string& text);
std::string formula_text(const FormulaP& f);

// free variables with sorts, in first-use order
std::vector<std::pair<std::string, Sort>> free_vars(const FormulaP& f);
bool is_sentence(const FormulaP& f);
bool uses_graph_vocabulary(const FormulaP& f);  // EdgeAtom only among specials
bool uses_tree_vocabulary(const FormulaP& f);

struct EvalLimits {
  int max_elements = 14;  // caps 2^n set-quantifier enumeration
};

bool eval_graph_sentence(const Graph& g, const FormulaP& f, EvalLimits lim = {});
bool eval_tree_sentence(const LabeledTree& t, const FormulaP& f, EvalLimits lim = {});

// canonical (node, position) pairs: position contents that first occur at
// this node and at this position; these are exactly the element encodings
std::vector<std::pair<int, int>> canonical_pairs(const LabeledTree& t);

// thread step helpers shared by the evaluator and the automata; positions
// are 1-based, bit j-1 of a mask stands for position j
uint64_t eq_closure(const SigmaLabel& s, uint64_t mask);
// child positions to parent positions along the child's up relation
uint64_t up_step(const SigmaLabel& child, uint64_t child_mask);
// parent positions to child positions, the converse
uint64_t down_step(const SigmaLabel& child, uint64_t parent_mask);

struct NamedSentence {
  std::string name;
  std::string text;
};
const std::vector<NamedSentence>& graph_sentence_suite();
const std::vector<NamedSentence>& tree_sentence_suite();

struct TupleEncoding {
  int k = 0;
  std::vector<std::pair<std::string, std::vector<std::string>>> vars;
};

struct Translation {
  FormulaP sentence;
  TupleEncoding enc;
};

// graph sentence to an equivalent sentence over sigma-labeled trees of
// width k decompositions
Translation translate_to_tree_sentence(const FormulaP& f, int k);

}  // namespace frugalmc
