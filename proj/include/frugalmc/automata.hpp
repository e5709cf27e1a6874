#pragma once

#include <memory>
#include <unordered_map>

#include "frugalmc/mso.hpp"

namespace frugalmc {

struct AutomatonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// raised when lazy state materialization exceeds the shared budget
struct BlowupError : AutomatonError {
  using AutomatonError::AutomatonError;
};

using StateId = uint32_t;
using LabelId = uint32_t;

// absorbing sentinels shared by every automaton: dead never accepts again,
// univ always accepts; neither occupies budget
inline constexpr StateId kDeadState = 0xfffffffeu;
inline constexpr StateId kUnivState = 0xffffffffu;

// labels are interned (base symbol, track bits) pairs; free-variable tracks
// are packed into a word so quantifier stages can extend labels cheaply
class LabelPool {
 public:
  LabelId intern(const Label& base);
  // append m tracks valued by the low m bits of add
  LabelId extend(LabelId parent, uint64_t add, int m);
  const Label& base(LabelId id) const { return bases_[entries_[id].base]; }
  uint64_t bits(LabelId id) const { return entries_[id].bits; }
  int width(LabelId id) const { return entries_[id].nbits; }
  size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    uint32_t base;
    uint8_t nbits;
    uint64_t bits;
  };
  struct Key {
    uint32_t base;
    uint8_t nbits;
    uint64_t bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };
  LabelId place(uint32_t base, uint64_t bits, int nbits);

  std::vector<Entry> entries_;
  std::vector<Label> bases_;
  std::unordered_map<std::string, uint32_t> base_index_;
  std::unordered_map<Key, LabelId, KeyHash> index_;
};

// shared resource caps; exceeding any raises BlowupError, never a wrong
// answer: states count discovered automaton states, labels count interned
// label variants, work counts transition evaluations
struct CompileBudget {
  size_t max_states = 1000000;
  size_t max_labels = 4000000;
  size_t max_work = 200000000;
  size_t used = 0;
  size_t labels = 0;
  size_t work = 0;
  void charge(size_t n = 1);
  void charge_labels(size_t n = 1);
  void charge_work(size_t n = 1);
};

// shared across one compiled sentence and everything derived from it
struct CompileShared {
  std::shared_ptr<LabelPool> pool = std::make_shared<LabelPool>();
  std::shared_ptr<CompileBudget> budget = std::make_shared<CompileBudget>();
  // structural sharing of identical subautomata
  std::unordered_map<std::string, std::shared_ptr<class TreeAutomaton>> built;
};

// deterministic bottom-up automaton; states materialize lazily as
// transitions are evaluated, every automaton is total
class TreeAutomaton {
 public:
  explicit TreeAutomaton(CompileShared sh) : sh_(std::move(sh)) {}
  virtual ~TreeAutomaton() = default;

  // transition on a node with the given child states (empty for leaves)
  StateId eval(const std::vector<StateId>& children, LabelId l);
  // sentinel-aware acceptance; accepting() only sees materialized states
  bool accepts(StateId s) const {
    if (s == kDeadState) return false;
    if (s == kUnivState) return true;
    return accepting(s);
  }
  virtual bool accepting(StateId s) const = 0;
  virtual void expr(std::ostream& os) const = 0;
  std::string expr_text() const;

  LabelPool& pool() { return *sh_.pool; }
  CompileBudget& budget() { return *sh_.budget; }
  const CompileShared& shared() const { return sh_; }

 protected:
  virtual StateId step(const std::vector<StateId>& children, LabelId l) = 0;
  // label accessors for transition functions
  uint8_t bit_of(LabelId l, int track) const;
  const SigmaLabel& sigma_of(LabelId l) const;
  const Label& base_of(LabelId l) const { return sh_.pool->base(l); }
  CompileShared sh_;

 private:
  // transitions memoized per (child states, label); ranks above 2 fall back
  // to a byte-string key
  struct MemoKey {
    StateId c0, c1;
    LabelId l;
    bool operator==(const MemoKey&) const = default;
  };
  struct MemoHash {
    size_t operator()(const MemoKey& k) const;
  };
  std::unordered_map<MemoKey, StateId, MemoHash> memo_;
  std::unordered_map<std::string, StateId> memo_wide_;
};

using AutomatonP = std::shared_ptr<TreeAutomaton>;

LabelId intern_plain(LabelPool& pool, const Label& l);

struct RunResult {
  std::vector<StateId> state;
  bool accepted = false;
};

RunResult run_automaton(TreeAutomaton& a, const LabeledTree& t);

// compile a tree-vocabulary sentence (encoded quantifiers and thread atoms
// included) into a deterministic automaton
AutomatonP compile_sentence(const FormulaP& f);
AutomatonP compile_sentence(const FormulaP& f, CompileShared& sh);

// portable construction expression plus provenance
struct Recipe {
  std::string source;  // sentence text the automaton came from
  int rank = 2;
  std::string expr;

  std::string text() const;
  static Recipe parse(const std::string& s);
};

Recipe make_recipe(const FormulaP& f, const std::string& source);
AutomatonP automaton_from_recipe(const Recipe& r);
AutomatonP automaton_from_recipe(const Recipe& r, CompileShared& sh);

}  // namespace frugalmc
