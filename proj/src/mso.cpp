#include "frugalmc/mso.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace frugalmc {

LabelPred LabelPred::symbol(std::string s) {
  LabelPred p;
  p.kind = Kind::SymbolIs;
  p.sym = std::move(s);
  return p;
}
LabelPred LabelPred::edge_has(int i, int j) {
  LabelPred p;
  p.kind = Kind::EdgeHas;
  p.i = i;
  p.j = j;
  return p;
}
LabelPred LabelPred::eq_has(int i, int j) {
  LabelPred p;
  p.kind = Kind::EqHas;
  p.i = i;
  p.j = j;
  return p;
}
LabelPred LabelPred::up_has(int i, int j) {
  LabelPred p;
  p.kind = Kind::UpHas;
  p.i = i;
  p.j = j;
  return p;
}

bool LabelPred::eval(const Label& l) const {
  switch (kind) {
    case Kind::SymbolIs:
      return !l.is_sigma() && l.sym == sym;
    case Kind::EdgeHas:
      return l.is_sigma() && l.sig->edge.contains(i, j);
    case Kind::EqHas:
      return l.is_sigma() && l.sig->eq.contains(i, j);
    case Kind::UpHas:
      return l.is_sigma() && l.sig->up.contains(i, j);
  }
  return false;
}

std::string LabelPred::text() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::SymbolIs:
      os << "P" << sym;
      break;
    case Kind::EdgeHas:
      os << "edge" << i << "," << j;
      break;
    case Kind::EqHas:
      os << "eq" << i << "," << j;
      break;
    case Kind::UpHas:
      os << "up" << i << "," << j;
      break;
  }
  return os.str();
}

namespace {

FormulaP mk(FKind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}

Formula* mut(const FormulaP& f) { return const_cast<Formula*>(f.get()); }

}  // namespace

FormulaP Formula::edge(std::string x, std::string y) {
  auto f = mk(FKind::EdgeAtom);
  mut(f)->x = std::move(x);
  mut(f)->y = std::move(y);
  return f;
}
FormulaP Formula::eq(std::string x, std::string y) {
  auto f = mk(FKind::EqAtom);
  mut(f)->x = std::move(x);
  mut(f)->y = std::move(y);
  return f;
}
FormulaP Formula::mem(std::string X, std::string x) {
  auto f = mk(FKind::MemAtom);
  mut(f)->x = std::move(X);
  mut(f)->y = std::move(x);
  return f;
}
FormulaP Formula::child(int i, std::string x, std::string y) {
  auto f = mk(FKind::ChildAtom);
  mut(f)->i = i;
  mut(f)->x = std::move(x);
  mut(f)->y = std::move(y);
  return f;
}
FormulaP Formula::label(LabelPred p, std::string x) {
  auto f = mk(FKind::LabelAtom);
  mut(f)->pred = std::move(p);
  mut(f)->x = std::move(x);
  return f;
}
FormulaP Formula::thread(int i, int p, std::string s, std::string t) {
  auto f = mk(FKind::ThreadAtom);
  mut(f)->i = i;
  mut(f)->p = p;
  mut(f)->x = std::move(s);
  mut(f)->y = std::move(t);
  return f;
}
FormulaP Formula::enc_guard(std::vector<std::string> tuple, Sort s) {
  if (tuple.empty()) throw MsoError("empty guard tuple");
  auto f = mk(FKind::EncGuard);
  mut(f)->vars = std::move(tuple);
  mut(f)->sort = s;
  return f;
}
FormulaP Formula::lnot(FormulaP a) {
  auto f = mk(FKind::Not);
  mut(f)->a = std::move(a);
  return f;
}
FormulaP Formula::land(FormulaP a, FormulaP b) {
  auto f = mk(FKind::And);
  mut(f)->a = std::move(a);
  mut(f)->b = std::move(b);
  return f;
}
FormulaP Formula::lor(FormulaP a, FormulaP b) {
  auto f = mk(FKind::Or);
  mut(f)->a = std::move(a);
  mut(f)->b = std::move(b);
  return f;
}
FormulaP Formula::implies(FormulaP a, FormulaP b) {
  auto f = mk(FKind::Implies);
  mut(f)->a = std::move(a);
  mut(f)->b = std::move(b);
  return f;
}
FormulaP Formula::iff(FormulaP a, FormulaP b) {
  auto f = mk(FKind::Iff);
  mut(f)->a = std::move(a);
  mut(f)->b = std::move(b);
  return f;
}

FormulaP Formula::land(std::vector<FormulaP> fs) {
  if (fs.empty()) {
    // vacuous truth as x=x under any quantifier is unusable without a free
    // variable; encode true as !(A & !A) is overkill, use a nullary trick:
    // forall over empty tuple is not representable, so callers avoid empty
    // conjunctions except where a tautology literal works
    throw MsoError("empty conjunction");
  }
  FormulaP r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = land(r, fs[i]);
  return r;
}
FormulaP Formula::lor(std::vector<FormulaP> fs) {
  if (fs.empty()) throw MsoError("empty disjunction");
  FormulaP r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = lor(r, fs[i]);
  return r;
}

FormulaP Formula::quant(FKind k, std::string v, Sort s, FormulaP body) {
  return quant_tuple(k, {std::move(v)}, s, QuantDomain::All, std::move(body));
}
FormulaP Formula::quant_tuple(FKind k, std::vector<std::string> vs, Sort s,
                              QuantDomain dom, FormulaP body) {
  if (k != FKind::Exists && k != FKind::Forall)
    throw MsoError("quantifier kind expected");
  if (vs.empty()) throw MsoError("empty quantifier tuple");
  auto f = mk(k);
  mut(f)->vars = std::move(vs);
  mut(f)->sort = s;
  mut(f)->dom = dom;
  mut(f)->a = std::move(body);
  return f;
}

bool equal(const FormulaP& a, const FormulaP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->x != b->x || a->y != b->y || a->i != b->i ||
      a->p != b->p || !(a->pred == b->pred) || a->vars != b->vars ||
      a->sort != b->sort || a->dom != b->dom)
    return false;
  return equal(a->a, b->a) && equal(a->b, b->b);
}

// ---------------------------------------------------------------- parsing

namespace {

struct Token {
  enum Kind { Ident, Sym, End } kind;
  std::string s;
  size_t pos;
};

struct Lexer {
  const std::string& src;
  size_t i = 0;
  Token cur;

  explicit Lexer(const std::string& s) : src(s) { advance(); }

  [[noreturn]] void fail(const std::string& msg, size_t at) const {
    std::ostringstream os;
    os << "parse error at offset " << at << ": " << msg;
    throw MsoError(os.str());
  }

  void advance() {
    while (i < src.size() && std::isspace((unsigned char)src[i])) ++i;
    cur.pos = i;
    if (i >= src.size()) {
      cur = {Token::End, "", i};
      return;
    }
    char c = src[i];
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum((unsigned char)src[j]) || src[j] == '_'))
        ++j;
      cur = {Token::Ident, src.substr(i, j - i), i};
      i = j;
      return;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      cur = {Token::Sym, "->", i};
      i += 2;
      return;
    }
    if (c == '<' && i + 2 < src.size() && src[i + 1] == '-' &&
        src[i + 2] == '>') {
      cur = {Token::Sym, "<->", i};
      i += 3;
      return;
    }
    if (std::string("()=!&|.,").find(c) != std::string::npos) {
      cur = {Token::Sym, std::string(1, c), i};
      i += 1;
      return;
    }
    fail("unexpected character '" + std::string(1, c) + "'", i);
  }

  bool at_sym(const std::string& s) const {
    return cur.kind == Token::Sym && cur.s == s;
  }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) fail("expected '" + s + "', found '" + cur.s + "'", cur.pos);
    advance();
  }
};

struct Parser {
  Lexer lx;
  // in-scope variables, innermost last
  std::vector<std::pair<std::string, Sort>> scope;

  explicit Parser(const std::string& s) : lx(s) {}

  bool lookup(const std::string& name, Sort* out) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) {
        *out = it->second;
        return true;
      }
    return false;
  }

  FormulaP parse() {
    FormulaP f = iff();
    if (lx.cur.kind != Token::End)
      lx.fail("trailing input '" + lx.cur.s + "'", lx.cur.pos);
    return f;
  }

  FormulaP iff() {
    FormulaP l = imp();
    while (lx.at_sym("<->")) {
      lx.advance();
      l = Formula::iff(l, imp());
    }
    return l;
  }

  FormulaP imp() {
    FormulaP l = disj();
    if (lx.at_sym("->")) {
      lx.advance();
      return Formula::implies(l, imp());
    }
    return l;
  }

  FormulaP disj() {
    FormulaP l = conj();
    while (lx.at_sym("|")) {
      lx.advance();
      l = Formula::lor(l, conj());
    }
    return l;
  }

  FormulaP conj() {
    FormulaP l = unary();
    while (lx.at_sym("&")) {
      lx.advance();
      l = Formula::land(l, unary());
    }
    return l;
  }

  FormulaP unary() {
    if (lx.at_sym("!")) {
      lx.advance();
      return Formula::lnot(unary());
    }
    if (lx.cur.kind == Token::Ident &&
        (lx.cur.s == "exists" || lx.cur.s == "forall" || lx.cur.s == "Exists" ||
         lx.cur.s == "Forall")) {
      return quantifier();
    }
    if (lx.at_sym("(")) {
      lx.advance();
      FormulaP f = iff();
      lx.expect_sym(")");
      return f;
    }
    return atom();
  }

  FormulaP quantifier() {
    std::string kw = lx.cur.s;
    size_t kwpos = lx.cur.pos;
    lx.advance();
    FKind k = (kw == "exists" || kw == "Exists") ? FKind::Exists : FKind::Forall;
    Sort s = (kw == "exists" || kw == "forall") ? Sort::Elem : Sort::Set;
    if (lx.cur.kind != Token::Ident)
      lx.fail("expected variable after '" + kw + "'", lx.cur.pos);
    std::string v = lx.cur.s;
    bool upper = std::isupper((unsigned char)v[0]);
    if (s == Sort::Elem && upper)
      lx.fail("element variable '" + v + "' must start with a lowercase letter",
              lx.cur.pos);
    if (s == Sort::Set && !upper)
      lx.fail("set variable '" + v + "' must start with an uppercase letter",
              lx.cur.pos);
    if (v == "exists" || v == "forall" || v == "Exists" || v == "Forall")
      lx.fail("keyword '" + v + "' cannot be a variable", lx.cur.pos);
    lx.advance();
    lx.expect_sym(".");
    scope.emplace_back(v, s);
    FormulaP body = iff();
    scope.pop_back();
    (void)kwpos;
    return Formula::quant(k, v, s, body);
  }

  std::string elem_var() {
    if (lx.cur.kind != Token::Ident)
      lx.fail("expected a variable, found '" + lx.cur.s + "'", lx.cur.pos);
    std::string v = lx.cur.s;
    Sort s;
    if (!lookup(v, &s)) lx.fail("unbound variable '" + v + "'", lx.cur.pos);
    if (s != Sort::Elem)
      lx.fail("'" + v + "' is a set variable, element expected", lx.cur.pos);
    lx.advance();
    return v;
  }

  FormulaP atom() {
    if (lx.cur.kind != Token::Ident)
      lx.fail("expected a formula, found '" + lx.cur.s + "'", lx.cur.pos);
    std::string name = lx.cur.s;
    size_t npos = lx.cur.pos;
    lx.advance();
    if (lx.at_sym("(")) {
      lx.advance();
      Sort s;
      bool bound = lookup(name, &s);
      if (bound && s == Sort::Set) {
        std::string x = elem_var();
        lx.expect_sym(")");
        return Formula::mem(name, x);
      }
      if (bound) lx.fail("element variable '" + name + "' used as a predicate", npos);
      if (name == "E") {
        std::string x = elem_var();
        lx.expect_sym(",");
        std::string y = elem_var();
        lx.expect_sym(")");
        return Formula::edge(x, y);
      }
      if (name.size() > 1 && name[0] == 'E' &&
          std::all_of(name.begin() + 1, name.end(),
                      [](char c) { return std::isdigit((unsigned char)c); })) {
        int idx = std::stoi(name.substr(1));
        if (idx < 1) lx.fail("child index must be at least 1", npos);
        std::string x = elem_var();
        lx.expect_sym(",");
        std::string y = elem_var();
        lx.expect_sym(")");
        return Formula::child(idx, x, y);
      }
      if (name.size() > 1 && name[0] == 'P') {
        std::string x = elem_var();
        lx.expect_sym(")");
        return Formula::label(LabelPred::symbol(name.substr(1)), x);
      }
      lx.fail("unknown predicate '" + name + "'", npos);
    }
    // bare ident: must be x = y
    Sort s;
    if (!lookup(name, &s)) lx.fail("unbound variable '" + name + "'", npos);
    if (s != Sort::Elem)
      lx.fail("'" + name + "' is a set variable, element expected", npos);
    lx.expect_sym("=");
    std::string y = elem_var();
    return Formula::eq(name, y);
  }
};

}  // namespace

FormulaP parse_formula(const std::string& text) {
  Parser p(text);
  return p.parse();
}

// --------------------------------------------------------------- printing

namespace {

void print_rec(const FormulaP& f, std::ostream& os) {
  switch (f->kind) {
    case FKind::EdgeAtom:
      os << "E(" << f->x << "," << f->y << ")";
      return;
    case FKind::EqAtom:
      os << f->x << "=" << f->y;
      return;
    case FKind::MemAtom:
      os << f->x << "(" << f->y << ")";
      return;
    case FKind::ChildAtom:
      os << "E" << f->i << "(" << f->x << "," << f->y << ")";
      return;
    case FKind::LabelAtom:
      if (f->pred.kind == LabelPred::Kind::SymbolIs)
        os << "P" << f->pred.sym << "(" << f->x << ")";
      else
        os << "[" << f->pred.text() << "](" << f->x << ")";
      return;
    case FKind::ThreadAtom:
      os << "Thread" << f->i << "," << f->p << "(" << f->x << "," << f->y
         << ")";
      return;
    case FKind::EncGuard: {
      os << "Guard[" << (f->sort == Sort::Elem ? "elem" : "set") << "](";
      for (size_t i = 0; i < f->vars.size(); ++i)
        os << (i ? "," : "") << f->vars[i];
      os << ")";
      return;
    }
    case FKind::Not: {
      os << "!";
      // a quantifier body extends maximally rightward, keep it delimited
      bool wrap = f->a->kind == FKind::Exists || f->a->kind == FKind::Forall ||
                  f->a->kind == FKind::EqAtom;
      if (wrap) os << "(";
      print_rec(f->a, os);
      if (wrap) os << ")";
      return;
    }
    case FKind::And:
    case FKind::Or:
    case FKind::Implies:
    case FKind::Iff: {
      const char* op = f->kind == FKind::And       ? " & "
                       : f->kind == FKind::Or      ? " | "
                       : f->kind == FKind::Implies ? " -> "
                                                   : " <-> ";
      os << "(";
      print_rec(f->a, os);
      os << op;
      print_rec(f->b, os);
      os << ")";
      return;
    }
    case FKind::Exists:
    case FKind::Forall: {
      bool ex = f->kind == FKind::Exists;
      if (f->vars.size() == 1 && f->dom == QuantDomain::All) {
        os << (ex ? (f->sort == Sort::Elem ? "exists " : "Exists ")
                  : (f->sort == Sort::Elem ? "forall " : "Forall "));
        os << f->vars[0] << ". ";
      } else {
        os << (ex ? "Exists" : "Forall");
        os << (f->dom == QuantDomain::ElemEnc  ? "[elem]"
               : f->dom == QuantDomain::SetEnc ? "[set]"
                                               : "[all]");
        for (size_t i = 0; i < f->vars.size(); ++i)
          os << (i ? "," : " ") << f->vars[i];
        os << ". ";
      }
      print_rec(f->a, os);
      return;
    }
  }
}

}  // namespace

std::string formula_text(const FormulaP& f) {
  std::ostringstream os;
  print_rec(f, os);
  return os.str();
}

// ------------------------------------------------------------- inspection

namespace {

void free_vars_rec(const FormulaP& f,
                   std::vector<std::pair<std::string, Sort>>& bound,
                   std::vector<std::pair<std::string, Sort>>& out) {
  auto is_bound = [&](const std::string& v) {
    for (auto& b : bound)
      if (b.first == v) return true;
    return false;
  };
  auto add = [&](const std::string& v, Sort s) {
    if (is_bound(v)) return;
    for (auto& o : out)
      if (o.first == v) return;
    out.emplace_back(v, s);
  };
  if (!f) return;
  switch (f->kind) {
    case FKind::EdgeAtom:
    case FKind::EqAtom:
    case FKind::ChildAtom:
      add(f->x, Sort::Elem);
      add(f->y, Sort::Elem);
      return;
    case FKind::ThreadAtom:
      add(f->x, Sort::Elem);
      add(f->y, Sort::Elem);
      return;
    case FKind::MemAtom:
      add(f->x, Sort::Set);
      add(f->y, Sort::Elem);
      return;
    case FKind::LabelAtom:
      add(f->x, Sort::Elem);
      return;
    case FKind::EncGuard:
      for (auto& v : f->vars) add(v, Sort::Set);
      return;
    case FKind::Not:
      free_vars_rec(f->a, bound, out);
      return;
    case FKind::And:
    case FKind::Or:
    case FKind::Implies:
    case FKind::Iff:
      free_vars_rec(f->a, bound, out);
      free_vars_rec(f->b, bound, out);
      return;
    case FKind::Exists:
    case FKind::Forall: {
      size_t n0 = bound.size();
      for (auto& v : f->vars) bound.emplace_back(v, f->sort);
      free_vars_rec(f->a, bound, out);
      bound.resize(n0);
      return;
    }
  }
}

void scan_kinds(const FormulaP& f, bool& has_edge, bool& has_tree) {
  if (!f) return;
  switch (f->kind) {
    case FKind::EdgeAtom:
      has_edge = true;
      break;
    case FKind::ChildAtom:
    case FKind::LabelAtom:
    case FKind::ThreadAtom:
    case FKind::EncGuard:
      has_tree = true;
      break;
    default:
      break;
  }
  scan_kinds(f->a, has_edge, has_tree);
  scan_kinds(f->b, has_edge, has_tree);
}

}  // namespace

std::vector<std::pair<std::string, Sort>> free_vars(const FormulaP& f) {
  std::vector<std::pair<std::string, Sort>> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

bool is_sentence(const FormulaP& f) { return free_vars(f).empty(); }

bool uses_graph_vocabulary(const FormulaP& f) {
  bool e = false, t = false;
  scan_kinds(f, e, t);
  return !t;
}

bool uses_tree_vocabulary(const FormulaP& f) {
  bool e = false, t = false;
  scan_kinds(f, e, t);
  return !e;
}

// ------------------------------------------------------------------ suites

const std::vector<NamedSentence>& graph_sentence_suite() {
  static const std::vector<NamedSentence> suite = {
      {"nonempty", "exists x. x=x"},
      {"has-edge", "exists x. exists y. E(x,y)"},
      {"two-colorable",
       "Exists X. forall x. forall y. (E(x,y) -> !(X(x) <-> X(y)))"},
      {"has-isolated", "exists x. forall y. !E(x,y)"},
      {"has-triangle",
       "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))"},
      {"dominating-pair",
       "exists x. exists y. forall z. (z=x | z=y | E(x,z) | E(y,z))"},
  };
  return suite;
}

const std::vector<NamedSentence>& tree_sentence_suite() {
  static const std::vector<NamedSentence> suite = {
      {"has-a", "exists x. Pa(x)"},
      {"all-a", "forall x. Pa(x)"},
      {"has-left-child", "exists x. exists y. E1(x,y)"},
      {"root-is-a",
       "exists x. (Pa(x) & forall y. (!E1(y,x) & !E2(y,x)))"},
      {"left-children-are-b", "forall x. forall y. (E1(x,y) -> Pb(y))"},
      {"alternating",
       "forall x. forall y. ((E1(x,y) | E2(x,y)) -> !(Pa(x) <-> Pa(y)))"},
      {"a-above-b",
       "exists x. exists y. (Pa(x) & Pb(y) & (E1(x,y) | E2(x,y)))"},
  };
  return suite;
}

}  // namespace frugalmc
