#include <sstream>

#include "frugalmc/mso.hpp"

namespace frugalmc {

namespace {

using F = Formula;

struct Translator {
  int w;  // tuple width k+1
  TupleEncoding enc;
  // graph variable scope, innermost last: name -> component set variables
  std::vector<std::pair<std::string, std::vector<std::string>>> scope;
  int fresh = 0;

  std::string fresh_elem() {
    std::ostringstream os;
    os << "t@" << fresh++;
    return os.str();
  }

  const std::vector<std::string>& tuple_of(const std::string& v) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == v) return it->second;
    throw MsoError("unbound variable '" + v + "' in translation");
  }

  std::vector<std::string> make_tuple(const std::string& v) {
    std::vector<std::string> names;
    for (int i = 1; i <= w; ++i) {
      std::ostringstream os;
      os << v << "#" << enc.vars.size() << "." << i;
      names.push_back(os.str());
    }
    enc.vars.emplace_back(v, names);
    return names;
  }

  // some component X_i holds a node whose thread reaches position p at t
  FormulaP reach(const std::vector<std::string>& tup, int p,
                 const std::string& t) {
    std::string s = fresh_elem();
    std::vector<FormulaP> alts;
    for (int i = 1; i <= w; ++i)
      alts.push_back(F::land(F::mem(tup[i - 1], s), F::thread(i, p, s, t)));
    return F::quant(FKind::Exists, s, Sort::Elem, F::lor(alts));
  }

  FormulaP edge_atom(const std::vector<std::string>& xs,
                     const std::vector<std::string>& ys) {
    std::string t = fresh_elem();
    std::vector<FormulaP> alts;
    for (int p = 1; p <= w; ++p)
      for (int q = 1; q <= w; ++q) {
        if (p == q) continue;
        alts.push_back(F::land({F::label(LabelPred::edge_has(p, q), t),
                                reach(xs, p, t), reach(ys, q, t)}));
      }
    return F::quant(FKind::Exists, t, Sort::Elem, F::lor(alts));
  }

  FormulaP componentwise(const std::vector<std::string>& xs,
                         const std::vector<std::string>& ys, bool equality) {
    std::string u = fresh_elem();
    std::vector<FormulaP> parts;
    for (int i = 0; i < w; ++i) {
      FormulaP l = F::mem(xs[i], u), r = F::mem(ys[i], u);
      parts.push_back(equality ? F::iff(l, r) : F::implies(l, r));
    }
    return F::quant(FKind::Forall, u, Sort::Elem, F::land(parts));
  }

  FormulaP rec(const FormulaP& f) {
    switch (f->kind) {
      case FKind::EdgeAtom:
        return edge_atom(tuple_of(f->x), tuple_of(f->y));
      case FKind::EqAtom:
        return componentwise(tuple_of(f->x), tuple_of(f->y), true);
      case FKind::MemAtom:
        return componentwise(tuple_of(f->y), tuple_of(f->x), false);
      case FKind::ChildAtom:
      case FKind::LabelAtom:
      case FKind::ThreadAtom:
      case FKind::EncGuard:
        throw MsoError("tree vocabulary atom in a graph sentence");
      case FKind::Not:
        return F::lnot(rec(f->a));
      case FKind::And:
        return F::land(rec(f->a), rec(f->b));
      case FKind::Or:
        return F::lor(rec(f->a), rec(f->b));
      case FKind::Implies:
        return F::implies(rec(f->a), rec(f->b));
      case FKind::Iff:
        return F::iff(rec(f->a), rec(f->b));
      case FKind::Exists:
      case FKind::Forall: {
        if (f->vars.size() != 1 || f->dom != QuantDomain::All)
          throw MsoError("encoded quantifier in a graph sentence");
        bool ex = f->kind == FKind::Exists;
        bool elem = f->sort == Sort::Elem;
        auto tup = make_tuple(f->vars[0]);
        scope.emplace_back(f->vars[0], tup);
        FormulaP body = rec(f->a);
        scope.pop_back();
        FormulaP guard =
            F::enc_guard(tup, elem ? Sort::Elem : Sort::Set);
        FormulaP wrapped =
            ex ? F::land(guard, body) : F::implies(guard, body);
        return F::quant_tuple(f->kind, tup, Sort::Set,
                              elem ? QuantDomain::ElemEnc : QuantDomain::SetEnc,
                              wrapped);
      }
    }
    throw MsoError("unreachable");
  }
};

}  // namespace

Translation translate_to_tree_sentence(const FormulaP& f, int k) {
  if (!is_sentence(f)) throw MsoError("only sentences can be translated");
  if (!uses_graph_vocabulary(f))
    throw MsoError("tree vocabulary atom in a graph sentence");
  if (k < 0) throw MsoError("negative width");
  Translator tr;
  tr.w = k + 1;
  tr.enc.k = k;
  FormulaP out = tr.rec(f);
  Translation res;
  res.sentence = out;
  res.enc = std::move(tr.enc);
  return res;
}

}  // namespace frugalmc
