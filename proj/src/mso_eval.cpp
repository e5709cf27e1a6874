#include <algorithm>
#include <cstring>
#include <unordered_map>

#include "frugalmc/mso.hpp"

namespace frugalmc {

uint64_t eq_closure(const SigmaLabel& s, uint64_t mask) {
  int w = s.w;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int j = 1; j <= w; ++j) {
      if (mask >> (j - 1) & 1) continue;
      for (int j2 = 1; j2 <= w; ++j2) {
        if (!(mask >> (j2 - 1) & 1)) continue;
        if (s.eq.contains(j, j2) || s.eq.contains(j2, j)) {
          mask |= uint64_t(1) << (j - 1);
          grew = true;
          break;
        }
      }
    }
  }
  return mask;
}

uint64_t up_step(const SigmaLabel& child, uint64_t child_mask) {
  uint64_t out = 0;
  for (int j1 = 1; j1 <= child.w; ++j1) {
    if (!(child_mask >> (j1 - 1) & 1)) continue;
    for (int j2 = 1; j2 <= child.w; ++j2)
      if (child.up.contains(j1, j2)) out |= uint64_t(1) << (j2 - 1);
  }
  return out;
}

uint64_t down_step(const SigmaLabel& child, uint64_t parent_mask) {
  uint64_t out = 0;
  for (int j2 = 1; j2 <= child.w; ++j2) {
    if (!(parent_mask >> (j2 - 1) & 1)) continue;
    for (int j1 = 1; j1 <= child.w; ++j1)
      if (child.up.contains(j1, j2)) out |= uint64_t(1) << (j1 - 1);
  }
  return out;
}

std::vector<std::pair<int, int>> canonical_pairs(const LabeledTree& t) {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < t.size(); ++u) {
    const Label& l = t.nodes[u].label;
    if (!l.is_sigma()) throw MsoError("canonical pairs need sigma labels");
    const SigmaLabel& s = *l.sig;
    for (int i = 1; i <= s.w; ++i) {
      bool first_pos = true;
      for (int i2 = 1; i2 < i && first_pos; ++i2)
        if (s.eq.contains(i2, i) || s.eq.contains(i, i2)) first_pos = false;
      if (!first_pos) continue;
      bool top = true;
      for (int j = 1; j <= s.w && top; ++j)
        if (s.up.contains(i, j)) top = false;
      if (top) out.emplace_back(u, i);
    }
  }
  return out;
}

// ------------------------------------------------------------- graph eval

namespace {

struct GVal {
  int elem = 0;
  uint64_t set = 0;
};

struct GEnv {
  std::vector<std::pair<std::string, GVal>> vals;
  const GVal& get(const std::string& n) const {
    for (auto it = vals.rbegin(); it != vals.rend(); ++it)
      if (it->first == n) return it->second;
    throw MsoError("unbound variable '" + n + "' during evaluation");
  }
};

bool geval(const Graph& g, const FormulaP& f, GEnv& env,
           const EvalLimits& lim) {
  switch (f->kind) {
    case FKind::EdgeAtom:
      return g.adjacent(env.get(f->x).elem, env.get(f->y).elem);
    case FKind::EqAtom:
      return env.get(f->x).elem == env.get(f->y).elem;
    case FKind::MemAtom:
      return env.get(f->x).set >> (env.get(f->y).elem - 1) & 1;
    case FKind::ChildAtom:
    case FKind::LabelAtom:
    case FKind::ThreadAtom:
    case FKind::EncGuard:
      throw MsoError("tree vocabulary atom in a graph sentence");
    case FKind::Not:
      return !geval(g, f->a, env, lim);
    case FKind::And:
      return geval(g, f->a, env, lim) && geval(g, f->b, env, lim);
    case FKind::Or:
      return geval(g, f->a, env, lim) || geval(g, f->b, env, lim);
    case FKind::Implies:
      return !geval(g, f->a, env, lim) || geval(g, f->b, env, lim);
    case FKind::Iff:
      return geval(g, f->a, env, lim) == geval(g, f->b, env, lim);
    case FKind::Exists:
    case FKind::Forall: {
      if (f->vars.size() != 1 || f->dom != QuantDomain::All)
        throw MsoError("encoded quantifier in a graph sentence");
      bool ex = f->kind == FKind::Exists;
      const std::string& v = f->vars[0];
      if (f->sort == Sort::Elem) {
        if (g.n() > 62) throw MsoError("graph too large for evaluation");
        for (int u = 1; u <= g.n(); ++u) {
          env.vals.push_back({v, GVal{u, 0}});
          bool r = geval(g, f->a, env, lim);
          env.vals.pop_back();
          if (r == ex) return ex;
        }
        return !ex;
      }
      if (g.n() > lim.max_elements)
        throw MsoError("graph too large for set quantification");
      uint64_t top = uint64_t(1) << g.n();
      for (uint64_t m = 0; m < top; ++m) {
        env.vals.push_back({v, GVal{0, m}});
        bool r = geval(g, f->a, env, lim);
        env.vals.pop_back();
        if (r == ex) return ex;
      }
      return !ex;
    }
  }
  throw MsoError("unreachable");
}

}  // namespace

bool eval_graph_sentence(const Graph& g, const FormulaP& f, EvalLimits lim) {
  if (!is_sentence(f)) throw MsoError("formula has free variables");
  GEnv env;
  return geval(g, f, env, lim);
}

// -------------------------------------------------------------- tree eval

namespace {

struct Bits {
  std::vector<uint64_t> w;
  explicit Bits(int n = 0) : w((n + 63) / 64, 0) {}
  bool get(int i) const { return w[i >> 6] >> (i & 63) & 1; }
  void set(int i) { w[i >> 6] |= uint64_t(1) << (i & 63); }
  bool operator==(const Bits& o) const { return w == o.w; }
};

struct TVal {
  int node = -1;  // Elem
  Bits set;       // Set
};

struct TEnv {
  std::vector<std::pair<std::string, TVal>> vals;
  const TVal& get(const std::string& n) const {
    for (auto it = vals.rbegin(); it != vals.rend(); ++it)
      if (it->first == n) return it->second;
    throw MsoError("unbound variable '" + n + "' during evaluation");
  }
};

struct TreeEval {
  const LabeledTree& t;
  const EvalLimits& lim;
  int n;
  std::vector<std::pair<int, int>> canon;
  bool canon_ready = false;

  // thread reach masks per (source node, source position)
  std::unordered_map<uint64_t, std::vector<uint64_t>> threads;
  // free variables per subformula, for quantifier memoization
  std::unordered_map<const Formula*, std::vector<std::pair<std::string, Sort>>>
      fv;
  std::unordered_map<const Formula*, std::unordered_map<std::string, bool>>
      memo;

  TreeEval(const LabeledTree& tr, const EvalLimits& l)
      : t(tr), lim(l), n(tr.size()) {}

  const SigmaLabel& sig(int u) const {
    const Label& l = t.nodes[u].label;
    if (!l.is_sigma()) throw MsoError("sigma label required");
    return *l.sig;
  }

  const std::vector<std::pair<int, int>>& canonicals() {
    if (!canon_ready) {
      canon = canonical_pairs(t);
      canon_ready = true;
    }
    return canon;
  }

  const std::vector<uint64_t>& thread_from(int s, int i) {
    uint64_t key = uint64_t(s) << 8 | uint64_t(i);
    auto it = threads.find(key);
    if (it != threads.end()) return it->second;
    std::vector<uint64_t> reach(n, 0);
    if (sig(s).w > 64) throw MsoError("tuple width exceeds 64");
    reach[s] = eq_closure(sig(s), uint64_t(1) << (i - 1));
    // children of u follow u in a preorder walk; nodes store children lists
    std::vector<int> stack = {s};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (!reach[u]) continue;
      for (int c : t.nodes[u].children) {
        uint64_t m = down_step(sig(c), reach[u]);
        if (m) {
          reach[c] = eq_closure(sig(c), m);
          stack.push_back(c);
        }
      }
    }
    return threads.emplace(key, std::move(reach)).first->second;
  }

  const std::vector<std::pair<std::string, Sort>>& freevars(const Formula* f) {
    auto it = fv.find(f);
    if (it != fv.end()) return it->second;
    std::vector<std::pair<std::string, Sort>> v =
        free_vars(FormulaP(f, [](const Formula*) {}));
    return fv.emplace(f, std::move(v)).first->second;
  }

  std::string fingerprint(const Formula* f, const TEnv& env) {
    std::string key;
    for (auto& [name, sort] : freevars(f)) {
      const TVal& v = env.get(name);
      if (sort == Sort::Elem) {
        key.append(reinterpret_cast<const char*>(&v.node), sizeof v.node);
      } else {
        key.append(reinterpret_cast<const char*>(v.set.w.data()),
                   v.set.w.size() * sizeof(uint64_t));
      }
      key.push_back(';');
    }
    return key;
  }

  bool eval(const FormulaP& f, TEnv& env) {
    switch (f->kind) {
      case FKind::EdgeAtom:
        throw MsoError("graph adjacency atom in a tree sentence");
      case FKind::EqAtom:
        return env.get(f->x).node == env.get(f->y).node;
      case FKind::MemAtom:
        return env.get(f->x).set.get(env.get(f->y).node);
      case FKind::ChildAtom: {
        int u = env.get(f->x).node, v = env.get(f->y).node;
        const auto& ch = t.nodes[u].children;
        return f->i <= (int)ch.size() && ch[f->i - 1] == v;
      }
      case FKind::LabelAtom:
        return f->pred.eval(t.nodes[env.get(f->x).node].label);
      case FKind::ThreadAtom: {
        int s = env.get(f->x).node, u = env.get(f->y).node;
        return thread_from(s, f->i)[u] >> (f->p - 1) & 1;
      }
      case FKind::EncGuard: {
        int w = (int)f->vars.size();
        int total = 0;
        for (int pos = 1; pos <= w; ++pos) {
          const Bits& s = env.get(f->vars[pos - 1]).set;
          for (int u = 0; u < n; ++u) {
            if (!s.get(u)) continue;
            ++total;
            const Label& l = t.nodes[u].label;
            if (!l.is_sigma()) continue;
            for (int q = 1; q < pos; ++q)
              if (l.sig->eq.contains(q, pos) || l.sig->eq.contains(pos, q))
                return false;
            for (int q = 1; q <= l.sig->w; ++q)
              if (l.sig->up.contains(pos, q)) return false;
          }
        }
        return f->sort == Sort::Set || total == 1;
      }
      case FKind::Not:
        return !eval(f->a, env);
      case FKind::And:
        return eval(f->a, env) && eval(f->b, env);
      case FKind::Or:
        return eval(f->a, env) || eval(f->b, env);
      case FKind::Implies:
        return !eval(f->a, env) || eval(f->b, env);
      case FKind::Iff:
        return eval(f->a, env) == eval(f->b, env);
      case FKind::Exists:
      case FKind::Forall: {
        std::string key = fingerprint(f.get(), env);
        auto& m = memo[f.get()];
        auto it = m.find(key);
        if (it != m.end()) return it->second;
        bool r = eval_quant(f, env);
        m.emplace(std::move(key), r);
        return r;
      }
    }
    throw MsoError("unreachable");
  }

  bool eval_quant(const FormulaP& f, TEnv& env) {
    bool ex = f->kind == FKind::Exists;
    size_t base = env.vals.size();
    auto pop_to_base = [&] { env.vals.resize(base); };
    if (f->dom == QuantDomain::All) {
      if (f->vars.size() != 1)
        throw MsoError("plain quantifier binds a single variable");
      const std::string& v = f->vars[0];
      if (f->sort == Sort::Elem) {
        for (int u = 0; u < n; ++u) {
          env.vals.push_back({v, TVal{u, Bits(0)}});
          bool r = eval(f->a, env);
          pop_to_base();
          if (r == ex) return ex;
        }
        return !ex;
      }
      if (n > lim.max_elements)
        throw MsoError("tree too large for set quantification");
      for (uint64_t msk = 0; msk < (uint64_t(1) << n); ++msk) {
        TVal val{-1, Bits(n)};
        val.set.w[0] = msk;
        env.vals.push_back({v, std::move(val)});
        bool r = eval(f->a, env);
        pop_to_base();
        if (r == ex) return ex;
      }
      return !ex;
    }
    // encoded tuple domains
    int w = (int)f->vars.size();
    if (n > 0 && sig(0).w != w)
      throw MsoError("tuple width does not match sigma labels");
    const auto& cp = canonicals();
    if (f->dom == QuantDomain::ElemEnc) {
      for (auto& [u, pos] : cp) {
        for (int j = 1; j <= w; ++j) {
          TVal val{-1, Bits(n)};
          if (j == pos) val.set.set(u);
          env.vals.push_back({f->vars[j - 1], std::move(val)});
        }
        bool r = eval(f->a, env);
        pop_to_base();
        if (r == ex) return ex;
      }
      return !ex;
    }
    // SetEnc
    if ((int)cp.size() > lim.max_elements)
      throw MsoError("too many canonical pairs for set quantification");
    for (uint64_t msk = 0; msk < (uint64_t(1) << cp.size()); ++msk) {
      std::vector<TVal> vals(w, TVal{-1, Bits(0)});
      for (int j = 0; j < w; ++j) vals[j].set = Bits(n);
      for (size_t c = 0; c < cp.size(); ++c)
        if (msk >> c & 1) vals[cp[c].second - 1].set.set(cp[c].first);
      for (int j = 0; j < w; ++j)
        env.vals.push_back({f->vars[j], std::move(vals[j])});
      bool r = eval(f->a, env);
      pop_to_base();
      if (r == ex) return ex;
    }
    return !ex;
  }
};

}  // namespace

bool eval_tree_sentence(const LabeledTree& t, const FormulaP& f,
                        EvalLimits lim) {
  if (!is_sentence(f)) throw MsoError("formula has free variables");
  if (t.size() == 0) throw MsoError("empty tree");
  TreeEval ev(t, lim);
  TEnv env;
  return ev.eval(f, env);
}

}  // namespace frugalmc
