#include "frugalmc/automata.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <sstream>

namespace frugalmc {

namespace {

void append_u32(std::string& s, uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  s.append(buf, 4);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace

size_t LabelPool::KeyHash::operator()(const Key& k) const {
  uint64_t x = k.bits + 0x9e3779b97f4a7c15ull * (uint64_t(k.base) << 8 | k.nbits);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return (size_t)x;
}

LabelId LabelPool::place(uint32_t base, uint64_t bits, int nbits) {
  Key k{base, (uint8_t)nbits, bits};
  auto it = index_.find(k);
  if (it != index_.end()) return it->second;
  LabelId id = (LabelId)entries_.size();
  entries_.push_back(Entry{base, (uint8_t)nbits, bits});
  index_.emplace(k, id);
  return id;
}

LabelId LabelPool::intern(const Label& base) {
  std::string key = base.is_sigma() ? "S" : "y";
  key += base.text();
  auto it = base_index_.find(key);
  uint32_t bi;
  if (it != base_index_.end()) {
    bi = it->second;
  } else {
    bi = (uint32_t)bases_.size();
    bases_.push_back(base);
    base_index_.emplace(std::move(key), bi);
  }
  return place(bi, 0, 0);
}

LabelId LabelPool::extend(LabelId parent, uint64_t add, int m) {
  const Entry& e = entries_[parent];
  if (e.nbits + m > 64) throw AutomatonError("track depth exceeds 64");
  return place(e.base, e.bits | add << e.nbits, e.nbits + m);
}

void CompileBudget::charge(size_t n) {
  used += n;
  if (used > max_states)
    throw BlowupError("automaton state budget exceeded");
}

void CompileBudget::charge_labels(size_t n) {
  labels += n;
  if (labels > max_labels)
    throw BlowupError("automaton label budget exceeded");
}

void CompileBudget::charge_work(size_t n) {
  work += n;
  if (work > max_work)
    throw BlowupError("automaton work budget exceeded");
}

size_t TreeAutomaton::MemoHash::operator()(const MemoKey& k) const {
  uint64_t x = (uint64_t(k.c0) << 32 | k.c1) + 0x9e3779b97f4a7c15ull * k.l;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return (size_t)x;
}

// sentinel for an absent child slot in a memo key; real states stay far
// below it because they are charged against the budget
inline constexpr StateId kNoChild = 0xfffffffdu;

StateId TreeAutomaton::eval(const std::vector<StateId>& children, LabelId l) {
  // sentinels absorb: a dead (univ) subtree keeps the whole run dead (univ)
  for (StateId c : children)
    if (c == kDeadState) return kDeadState;
  for (StateId c : children)
    if (c == kUnivState) return kUnivState;
  // every call is one transition evaluation, memoized or not, so charging
  // here keeps the budget proportional to actual running time
  sh_.budget->charge_work();
  if (children.size() <= 2) {
    MemoKey k{children.size() > 0 ? children[0] : kNoChild,
              children.size() > 1 ? children[1] : kNoChild, l};
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    StateId s = step(children, l);
    memo_.emplace(k, s);
    return s;
  }
  std::string key;
  key.reserve(4 * children.size() + 4);
  for (StateId c : children) append_u32(key, c);
  append_u32(key, l);
  auto it = memo_wide_.find(key);
  if (it != memo_wide_.end()) return it->second;
  StateId s = step(children, l);
  memo_wide_.emplace(std::move(key), s);
  return s;
}

std::string TreeAutomaton::expr_text() const {
  std::ostringstream os;
  expr(os);
  return os.str();
}

LabelId intern_plain(LabelPool& pool, const Label& l) { return pool.intern(l); }

uint8_t TreeAutomaton::bit_of(LabelId l, int track) const {
  const LabelPool& p = *sh_.pool;
  if (track < 0 || track >= p.width(l))
    throw AutomatonError("track out of range");
  return (p.bits(l) >> track) & 1;
}

const SigmaLabel& TreeAutomaton::sigma_of(LabelId l) const {
  const Label& b = sh_.pool->base(l);
  if (!b.is_sigma())
    throw AutomatonError("sigma label required by a thread transition");
  return *b.sig;
}

namespace {

// ------------------------------------------------------------------ atoms

// accepts when exactly one node carries the track bit
class SingletonA final : public TreeAutomaton {
 public:
  SingletonA(CompileShared sh, int track) : TreeAutomaton(sh), track_(track) {
    budget().charge(2);
  }
  bool accepting(StateId s) const override { return s == 1; }
  void expr(std::ostream& os) const override {
    os << "(single " << track_ << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    int total = bit_of(l, track_);
    for (StateId c : cs) total += (int)c;
    return total > 1 ? kDeadState : (StateId)total;
  }

 private:
  int track_;
};

// x = y over singleton element tracks
class EqA final : public TreeAutomaton {
 public:
  EqA(CompileShared sh, int tx, int ty)
      : TreeAutomaton(sh), tx_(tx), ty_(ty) {
    budget().charge(4);
  }
  // 0 none, 1 ok, 3 x alone, 4 y alone
  bool accepting(StateId s) const override { return s == 1; }
  void expr(std::ostream& os) const override {
    os << "(eq " << tx_ << " " << ty_ << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    int cx = 0, cy = 0, cok = 0;
    for (StateId c : cs) {
      if (c == 1) ++cok;
      if (c == 3) ++cx;
      if (c == 4) ++cy;
    }
    bool bx = bit_of(l, tx_), by = bit_of(l, ty_);
    if (bx && by && !cx && !cy && !cok) return 1;
    cx += bx;
    cy += by;
    if (cok > 1 || (cok && (cx || cy))) return kDeadState;
    if (cok == 1) return 1;
    if (cx > 1 || cy > 1 || (cx && cy)) return kDeadState;
    if (cx) return 3;
    if (cy) return 4;
    return 0;
  }

 private:
  int tx_, ty_;
};

// x is a member of X
class MemA final : public TreeAutomaton {
 public:
  MemA(CompileShared sh, int tX, int tx)
      : TreeAutomaton(sh), tX_(tX), tx_(tx) {
    budget().charge(2);
  }
  bool accepting(StateId s) const override { return s == 1; }
  void expr(std::ostream& os) const override {
    os << "(mem " << tX_ << " " << tx_ << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    int ok = 0;
    for (StateId c : cs) ok += (int)c;
    if (bit_of(l, tx_)) {
      if (!bit_of(l, tX_)) return kDeadState;
      ++ok;
    }
    return ok > 1 ? kDeadState : (StateId)ok;
  }

 private:
  int tX_, tx_;
};

// y is the i-th child of x
class ChildA final : public TreeAutomaton {
 public:
  ChildA(CompileShared sh, int i, int tx, int ty)
      : TreeAutomaton(sh), i_(i), tx_(tx), ty_(ty) {
    budget().charge(3);
  }
  // 0 none, 1 pending y, 2 ok
  bool accepting(StateId s) const override { return s == 2; }
  void expr(std::ostream& os) const override {
    os << "(child " << i_ << " " << tx_ << " " << ty_ << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    int pend_at = -1, npend = 0, nok = 0;
    for (size_t j = 0; j < cs.size(); ++j) {
      if (cs[j] == 1) {
        ++npend;
        pend_at = (int)j + 1;
      }
      if (cs[j] == 2) ++nok;
    }
    if (npend > 1) return kDeadState;
    bool bx = bit_of(l, tx_), by = bit_of(l, ty_);
    int resolved = 0;
    if (npend == 1) {
      if (bx && pend_at == i_)
        resolved = 1;
      else
        return kDeadState;
    }
    int total = nok + resolved;
    if (total > 1) return kDeadState;
    if (by) {
      if (total || npend) return kDeadState;
      return 1;
    }
    return total ? 2 : 0;
  }

 private:
  int i_, tx_, ty_;
};

// label predicate holds at x
class LabA final : public TreeAutomaton {
 public:
  LabA(CompileShared sh, LabelPred p, int tx)
      : TreeAutomaton(sh), pred_(std::move(p)), tx_(tx) {
    budget().charge(3);
  }
  bool accepting(StateId s) const override { return s == 1; }
  void expr(std::ostream& os) const override {
    os << "(lab ";
    switch (pred_.kind) {
      case LabelPred::Kind::SymbolIs:
        os << "(sym " << quote(pred_.sym) << ")";
        break;
      case LabelPred::Kind::EdgeHas:
        os << "(edgep " << pred_.i << " " << pred_.j << ")";
        break;
      case LabelPred::Kind::EqHas:
        os << "(eqp " << pred_.i << " " << pred_.j << ")";
        break;
      case LabelPred::Kind::UpHas:
        os << "(upp " << pred_.i << " " << pred_.j << ")";
        break;
    }
    os << " " << tx_ << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    int ok = 0;
    for (StateId c : cs) ok += (int)c;
    if (bit_of(l, tx_)) {
      if (!pred_.eval(base_of(l))) return kDeadState;
      ++ok;
    }
    return ok > 1 ? kDeadState : (StateId)ok;
  }

 private:
  LabelPred pred_;
  int tx_;
};

// a position thread from (s, i) descends to (t, p)
class ThreadA final : public TreeAutomaton {
 public:
  ThreadA(CompileShared sh, int i, int p, int ts, int tt)
      : TreeAutomaton(sh), i_(i), p_(p), ts_(ts), tt_(tt) {
    budget().charge(2);
  }
  // 0 none, 1 ok, >=3 mask states (positions handed to the parent)
  bool accepting(StateId s) const override { return s == 1; }
  void expr(std::ostream& os) const override {
    os << "(thread " << i_ << " " << p_ << " " << ts_ << " " << tt_ << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    uint64_t carried = 0;
    bool have_carry = false;
    int nok = 0;
    for (StateId c : cs) {
      if (c == 1) ++nok;
      if (c >= 3) {
        if (have_carry) return kDeadState;
        have_carry = true;
        carried = masks_[c - 3];
      }
    }
    bool bs = bit_of(l, ts_), bt = bit_of(l, tt_);
    if (nok > 1 || (nok && (have_carry || bs || bt))) return kDeadState;
    if (nok == 1) return 1;
    const SigmaLabel* sg = nullptr;
    if (have_carry || bs || bt) sg = &sigma_of(l);
    if (have_carry) {
      if (bt) return kDeadState;
      uint64_t cur = eq_closure(*sg, carried);
      if (bs) return (cur >> (i_ - 1) & 1) ? 1 : kDeadState;
      uint64_t up = up_step(*sg, cur);
      return up ? mask_state(up) : kDeadState;
    }
    if (bt) {
      if (sg->w > 64) throw AutomatonError("tuple width exceeds 64");
      uint64_t cur = eq_closure(*sg, uint64_t(1) << (p_ - 1));
      if (bs) return (cur >> (i_ - 1) & 1) ? 1 : kDeadState;
      uint64_t up = up_step(*sg, cur);
      return up ? mask_state(up) : kDeadState;
    }
    if (bs) return kDeadState;
    return 0;
  }

 private:
  StateId mask_state(uint64_t m) {
    auto it = mask_index_.find(m);
    if (it != mask_index_.end()) return it->second;
    budget().charge();
    StateId s = (StateId)(masks_.size() + 3);
    masks_.push_back(m);
    mask_index_.emplace(m, s);
    return s;
  }

  int i_, p_, ts_, tt_;
  std::vector<uint64_t> masks_;
  std::unordered_map<uint64_t, StateId> mask_index_;
};

// shared by both guards: a bit on tuple position pos may only sit on a
// first, top position of its label
bool guard_bit_ok(const Label& base, int pos) {
  if (!base.is_sigma()) return true;
  const SigmaLabel& sg = *base.sig;
  for (int q = 1; q < pos; ++q)
    if (sg.eq.contains(q, pos) || sg.eq.contains(pos, q)) return false;
  for (int q = 1; q <= sg.w; ++q)
    if (sg.up.contains(pos, q)) return false;
  return true;
}

// the tracks carry exactly one bit overall, on a valid position
class ElemGuardA final : public TreeAutomaton {
 public:
  ElemGuardA(CompileShared sh, std::vector<int> tracks)
      : TreeAutomaton(sh), tracks_(std::move(tracks)) {
    budget().charge(2);
  }
  bool accepting(StateId s) const override { return s == 1; }
  void expr(std::ostream& os) const override {
    os << "(gelem";
    for (int t : tracks_) os << " " << t;
    os << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    int total = 0;
    for (StateId c : cs) total += (int)c;
    for (size_t j = 0; j < tracks_.size(); ++j) {
      if (!bit_of(l, tracks_[j])) continue;
      if (!guard_bit_ok(base_of(l), (int)j + 1)) return kDeadState;
      ++total;
    }
    return total > 1 ? kDeadState : (StateId)total;
  }

 private:
  std::vector<int> tracks_;
};

// every bit on the tracks sits on a valid position
class SetGuardA final : public TreeAutomaton {
 public:
  SetGuardA(CompileShared sh, std::vector<int> tracks)
      : TreeAutomaton(sh), tracks_(std::move(tracks)) {
    budget().charge(1);
  }
  bool accepting(StateId s) const override { return s == 0; }
  void expr(std::ostream& os) const override {
    os << "(gset";
    for (int t : tracks_) os << " " << t;
    os << ")";
  }

 protected:
  StateId step(const std::vector<StateId>&, LabelId l) override {
    for (size_t j = 0; j < tracks_.size(); ++j)
      if (bit_of(l, tracks_[j]) && !guard_bit_ok(base_of(l), (int)j + 1))
        return kDeadState;
    return 0;
  }

 private:
  std::vector<int> tracks_;
};

// ------------------------------------------------------------ connectives

enum class Comb : uint8_t { And, Or, Imp, Iff };

class ProductA final : public TreeAutomaton {
 public:
  ProductA(CompileShared sh, AutomatonP a, AutomatonP b, Comb c)
      : TreeAutomaton(sh), a_(std::move(a)), b_(std::move(b)), comb_(c) {}

  bool accepting(StateId s) const override {
    bool fa = a_->accepts(pairs_[s].first);
    bool fb = b_->accepts(pairs_[s].second);
    switch (comb_) {
      case Comb::And:
        return fa && fb;
      case Comb::Or:
        return fa || fb;
      case Comb::Imp:
        return !fa || fb;
      case Comb::Iff:
        return fa == fb;
    }
    return false;
  }

  void expr(std::ostream& os) const override {
    const char* n = comb_ == Comb::And   ? "and"
                    : comb_ == Comb::Or  ? "or"
                    : comb_ == Comb::Imp ? "imp"
                                         : "iff";
    os << "(" << n << " ";
    a_->expr(os);
    os << " ";
    b_->expr(os);
    os << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    std::vector<StateId> as(cs.size()), bs(cs.size());
    for (size_t j = 0; j < cs.size(); ++j) {
      as[j] = pairs_[cs[j]].first;
      bs[j] = pairs_[cs[j]].second;
    }
    return intern(a_->eval(as, l), b_->eval(bs, l));
  }

 private:
  StateId intern(StateId sa, StateId sb) {
    // collapse pairs whose verdict can no longer change
    bool da = sa == kDeadState, ua = sa == kUnivState;
    bool db = sb == kDeadState, ub = sb == kUnivState;
    switch (comb_) {
      case Comb::And:
        if (da || db) return kDeadState;
        if (ua && ub) return kUnivState;
        break;
      case Comb::Or:
        if (ua || ub) return kUnivState;
        if (da && db) return kDeadState;
        break;
      case Comb::Imp:
        if (da || ub) return kUnivState;
        if (ua && db) return kDeadState;
        break;
      case Comb::Iff:
        if ((da && db) || (ua && ub)) return kUnivState;
        if ((da && ub) || (ua && db)) return kDeadState;
        break;
    }
    uint64_t key = uint64_t(sa) << 32 | sb;
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    budget().charge();
    StateId s = (StateId)pairs_.size();
    pairs_.emplace_back(sa, sb);
    index_.emplace(key, s);
    return s;
  }

  AutomatonP a_, b_;
  Comb comb_;
  std::vector<std::pair<StateId, StateId>> pairs_;
  std::unordered_map<uint64_t, StateId> index_;
};

class NotA final : public TreeAutomaton {
 public:
  NotA(CompileShared sh, AutomatonP a) : TreeAutomaton(sh), a_(std::move(a)) {}
  bool accepting(StateId s) const override { return !a_->accepts(s); }
  void expr(std::ostream& os) const override {
    os << "(not ";
    a_->expr(os);
    os << ")";
  }
  const AutomatonP& inner() const { return a_; }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    StateId s = a_->eval(cs, l);
    if (s == kDeadState) return kUnivState;
    if (s == kUnivState) return kDeadState;
    return s;
  }

 private:
  AutomatonP a_;
};

// existential projection of the last m tracks, by subset construction;
// dead candidates are dropped, a universal candidate absorbs the subset.
// onebit marks element-encoded tuples: their guard kills any label with
// two bits on the projected tracks at the same node, so only the zero
// and one-bit extensions can contribute and the rest are never built
class ProjectA final : public TreeAutomaton {
 public:
  ProjectA(CompileShared sh, AutomatonP a, int m = 1, bool onebit = false)
      : TreeAutomaton(sh), a_(std::move(a)), m_(m), onebit_(onebit) {
    if (m_ < 1 || m_ > 48) throw AutomatonError("bad projection width");
  }

  bool accepting(StateId s) const override {
    for (StateId q : subsets_[s])
      if (a_->accepts(q)) return true;
    return false;
  }

  void expr(std::ostream& os) const override {
    if (onebit_)
      os << "(proje " << m_ << " ";
    else if (m_ == 1)
      os << "(proj ";
    else
      os << "(projm " << m_ << " ";
    a_->expr(os);
    os << ")";
  }

 protected:
  StateId step(const std::vector<StateId>& cs, LabelId l) override {
    const std::vector<LabelId>& ext = extensions(l);
    std::vector<StateId> out;
    bool univ = false;
    auto push = [&](const std::vector<StateId>& combo) {
      for (LabelId le : ext) {
        StateId q = a_->eval(combo, le);
        if (q == kDeadState) continue;
        if (q == kUnivState) {
          univ = true;
          return;
        }
        out.push_back(q);
      }
    };
    if (cs.empty()) {
      push(cs);
    } else if (cs.size() == 1) {
      std::vector<StateId> combo(1);
      for (StateId q : subsets_[cs[0]]) {
        combo[0] = q;
        push(combo);
        if (univ) break;
      }
    } else if (cs.size() == 2) {
      std::vector<StateId> combo(2);
      for (StateId q0 : subsets_[cs[0]]) {
        combo[0] = q0;
        for (StateId q1 : subsets_[cs[1]]) {
          combo[1] = q1;
          push(combo);
          if (univ) break;
        }
        if (univ) break;
      }
    } else {
      std::vector<StateId> combo(cs.size());
      std::function<void(size_t)> walk = [&](size_t j) {
        if (univ) return;
        if (j == cs.size()) {
          push(combo);
          return;
        }
        for (StateId q : subsets_[cs[j]]) {
          combo[j] = q;
          walk(j + 1);
          if (univ) return;
        }
      };
      walk(0);
    }
    if (univ) return kUnivState;
    if (out.empty()) return kDeadState;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return intern(std::move(out));
  }

 private:
  const std::vector<LabelId>& extensions(LabelId l) {
    auto it = ext_.find(l);
    if (it != ext_.end()) return it->second;
    // every extension is a fresh pool entry, so charge before materializing
    std::vector<LabelId> ids;
    if (onebit_) {
      budget().charge_labels(size_t(m_) + 1);
      ids.reserve(size_t(m_) + 1);
      ids.push_back(pool().extend(l, 0, m_));
      for (int j = 0; j < m_; ++j)
        ids.push_back(pool().extend(l, uint64_t(1) << j, m_));
    } else {
      budget().charge_labels(size_t(1) << m_);
      ids.reserve(size_t(1) << m_);
      for (uint64_t b = 0; b < (uint64_t(1) << m_); ++b)
        ids.push_back(pool().extend(l, b, m_));
    }
    return ext_.emplace(l, std::move(ids)).first->second;
  }

  StateId intern(std::vector<StateId> set) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (StateId q : set) h = (h ^ q) * 0x100000001b3ull;
    auto& bucket = buckets_[h];
    for (StateId cand : bucket)
      if (subsets_[cand] == set) return cand;
    budget().charge();
    StateId s = (StateId)subsets_.size();
    subsets_.push_back(std::move(set));
    bucket.push_back(s);
    return s;
  }

  AutomatonP a_;
  int m_;
  bool onebit_;
  std::vector<std::vector<StateId>> subsets_;
  std::unordered_map<LabelId, std::vector<LabelId>> ext_;
  std::unordered_map<uint64_t, std::vector<StateId>> buckets_;
};

// -------------------------------------------------------------- compiling

struct Compiler {
  CompileShared& sh;

  AutomatonP memoize(const AutomatonP& a) {
    std::string e = a->expr_text();
    auto it = sh.built.find(e);
    if (it != sh.built.end()) return it->second;
    sh.built.emplace(std::move(e), a);
    return a;
  }

  int track_of(const std::vector<std::string>& ctx, const std::string& v) {
    for (int j = (int)ctx.size() - 1; j >= 0; --j)
      if (ctx[j] == v) return j;
    throw AutomatonError("free variable '" + v + "' has no track");
  }

  AutomatonP mk_not(const AutomatonP& a) {
    if (auto* n = dynamic_cast<const NotA*>(a.get())) return n->inner();
    return memoize(std::make_shared<NotA>(sh, a));
  }

  static FormulaP negate_into(const FormulaP& q) {
    return Formula::quant_tuple(FKind::Exists, q->vars, q->sort, q->dom,
                                Formula::lnot(q->a));
  }

  AutomatonP go(const FormulaP& f, std::vector<std::string>& ctx) {
    switch (f->kind) {
      case FKind::EdgeAtom:
        throw AutomatonError("graph adjacency atom cannot be compiled");
      case FKind::EqAtom:
        return memoize(std::make_shared<EqA>(sh, track_of(ctx, f->x),
                                             track_of(ctx, f->y)));
      case FKind::MemAtom:
        return memoize(std::make_shared<MemA>(sh, track_of(ctx, f->x),
                                              track_of(ctx, f->y)));
      case FKind::ChildAtom:
        return memoize(std::make_shared<ChildA>(
            sh, f->i, track_of(ctx, f->x), track_of(ctx, f->y)));
      case FKind::LabelAtom:
        return memoize(
            std::make_shared<LabA>(sh, f->pred, track_of(ctx, f->x)));
      case FKind::ThreadAtom:
        return memoize(std::make_shared<ThreadA>(
            sh, f->i, f->p, track_of(ctx, f->x), track_of(ctx, f->y)));
      case FKind::EncGuard: {
        std::vector<int> tracks;
        for (auto& v : f->vars) tracks.push_back(track_of(ctx, v));
        if (f->sort == Sort::Elem)
          return memoize(std::make_shared<ElemGuardA>(sh, std::move(tracks)));
        return memoize(std::make_shared<SetGuardA>(sh, std::move(tracks)));
      }
      case FKind::Not:
        if (f->a->kind == FKind::Not) return go(f->a->a, ctx);
        if (f->a->kind == FKind::Forall) return go(negate_into(f->a), ctx);
        return mk_not(go(f->a, ctx));
      case FKind::And:
      case FKind::Or:
      case FKind::Implies:
      case FKind::Iff: {
        Comb c = f->kind == FKind::And       ? Comb::And
                 : f->kind == FKind::Or      ? Comb::Or
                 : f->kind == FKind::Implies ? Comb::Imp
                                             : Comb::Iff;
        return memoize(
            std::make_shared<ProductA>(sh, go(f->a, ctx), go(f->b, ctx), c));
      }
      case FKind::Exists:
      case FKind::Forall: {
        if (f->kind == FKind::Forall) return mk_not(go(negate_into(f), ctx));
        size_t base = ctx.size();
        for (auto& v : f->vars) ctx.push_back(v);
        AutomatonP a = go(f->a, ctx);
        if (f->sort == Sort::Elem) {
          for (size_t j = 0; j < f->vars.size(); ++j) {
            auto guard =
                memoize(std::make_shared<SingletonA>(sh, (int)(base + j)));
            a = memoize(std::make_shared<ProductA>(sh, a, guard, Comb::And));
          }
        }
        bool onebit = f->dom == QuantDomain::ElemEnc;
        a = memoize(
            std::make_shared<ProjectA>(sh, a, (int)f->vars.size(), onebit));
        ctx.resize(base);
        return a;
      }
    }
    throw AutomatonError("unreachable");
  }
};

}  // namespace

RunResult run_automaton(TreeAutomaton& a, const LabeledTree& t) {
  if (t.size() == 0) throw AutomatonError("empty tree");
  RunResult r;
  r.state.resize(t.size());
  LabelPool& pool = a.pool();
  // iterative post-order; node ids carry no ordering guarantees
  std::vector<std::pair<int, size_t>> stack = {{t.root, 0}};
  while (!stack.empty()) {
    auto& [u, next] = stack.back();
    const auto& ch = t.nodes[u].children;
    if (next < ch.size()) {
      int c = ch[next++];
      stack.push_back({c, 0});
      continue;
    }
    std::vector<StateId> cs;
    cs.reserve(ch.size());
    for (int c : ch) cs.push_back(r.state[c]);
    r.state[u] = a.eval(cs, intern_plain(pool, t.nodes[u].label));
    stack.pop_back();
  }
  r.accepted = a.accepts(r.state[t.root]);
  return r;
}

AutomatonP compile_sentence(const FormulaP& f, CompileShared& sh) {
  if (!is_sentence(f)) throw AutomatonError("only sentences compile");
  Compiler c{sh};
  std::vector<std::string> ctx;
  return c.go(f, ctx);
}

AutomatonP compile_sentence(const FormulaP& f) {
  CompileShared sh;
  return compile_sentence(f, sh);
}

// ---------------------------------------------------------------- recipes

namespace {

struct Sexpr {
  // atom when children empty and text set; string literals keep quotes off
  std::string text;
  bool is_string = false;
  bool is_list = false;
  std::vector<Sexpr> kids;
};

struct SexprParser {
  const std::string& s;
  size_t i = 0;

  explicit SexprParser(const std::string& src) : s(src) {}

  [[noreturn]] void fail(const std::string& m) const {
    throw AutomatonError("recipe parse error at offset " + std::to_string(i) +
                         ": " + m);
  }

  void skip_ws() {
    while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
  }

  Sexpr parse() {
    Sexpr e = node();
    skip_ws();
    if (i != s.size()) fail("trailing input");
    return e;
  }

  Sexpr node() {
    skip_ws();
    if (i >= s.size()) fail("unexpected end");
    if (s[i] == '(') {
      ++i;
      Sexpr e;
      e.is_list = true;
      while (true) {
        skip_ws();
        if (i >= s.size()) fail("missing ')'");
        if (s[i] == ')') {
          ++i;
          return e;
        }
        e.kids.push_back(node());
      }
    }
    if (s[i] == '"') {
      ++i;
      Sexpr e;
      e.is_string = true;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\' && i + 1 < s.size()) {
          ++i;
          e.text.push_back(s[i] == 'n' ? '\n' : s[i]);
        } else {
          e.text.push_back(s[i]);
        }
        ++i;
      }
      if (i >= s.size()) fail("unterminated string");
      ++i;
      return e;
    }
    Sexpr e;
    size_t j = i;
    while (j < s.size() && !std::isspace((unsigned char)s[j]) && s[j] != '(' &&
           s[j] != ')' && s[j] != '"')
      ++j;
    if (j == i) fail("unexpected character");
    e.text = s.substr(i, j - i);
    i = j;
    return e;
  }
};

int want_int(const Sexpr& e) {
  if (e.is_list || e.is_string) throw AutomatonError("recipe: number expected");
  try {
    return std::stoi(e.text);
  } catch (...) {
    throw AutomatonError("recipe: bad number '" + e.text + "'");
  }
}

const std::string& head(const Sexpr& e) {
  if (!e.is_list || e.kids.empty() || e.kids[0].is_list ||
      e.kids[0].is_string)
    throw AutomatonError("recipe: malformed expression");
  return e.kids[0].text;
}

void want_arity(const Sexpr& e, size_t n) {
  if (e.kids.size() != n + 1)
    throw AutomatonError("recipe: wrong arity for '" + head(e) + "'");
}

LabelPred pred_from(const Sexpr& e) {
  const std::string& h = head(e);
  if (h == "sym") {
    want_arity(e, 1);
    if (!e.kids[1].is_string)
      throw AutomatonError("recipe: symbol string expected");
    return LabelPred::symbol(e.kids[1].text);
  }
  want_arity(e, 2);
  int i = want_int(e.kids[1]), j = want_int(e.kids[2]);
  if (h == "edgep") return LabelPred::edge_has(i, j);
  if (h == "eqp") return LabelPred::eq_has(i, j);
  if (h == "upp") return LabelPred::up_has(i, j);
  throw AutomatonError("recipe: unknown predicate '" + h + "'");
}

AutomatonP build_expr(const Sexpr& e, CompileShared& sh);

AutomatonP build_memo(CompileShared& sh,
                      const std::function<AutomatonP()>& make) {
  // rebuild the canonical text to dedupe structurally equal parts
  AutomatonP a = make();
  std::string key = a->expr_text();
  auto it = sh.built.find(key);
  if (it != sh.built.end()) return it->second;
  sh.built.emplace(std::move(key), a);
  return a;
}

AutomatonP build_expr(const Sexpr& e, CompileShared& sh) {
  const std::string& h = head(e);
  if (h == "single") {
    want_arity(e, 1);
    return build_memo(sh, [&] {
      return std::make_shared<SingletonA>(sh, want_int(e.kids[1]));
    });
  }
  if (h == "eq") {
    want_arity(e, 2);
    return build_memo(sh, [&] {
      return std::make_shared<EqA>(sh, want_int(e.kids[1]),
                                   want_int(e.kids[2]));
    });
  }
  if (h == "mem") {
    want_arity(e, 2);
    return build_memo(sh, [&] {
      return std::make_shared<MemA>(sh, want_int(e.kids[1]),
                                    want_int(e.kids[2]));
    });
  }
  if (h == "child") {
    want_arity(e, 3);
    return build_memo(sh, [&] {
      return std::make_shared<ChildA>(sh, want_int(e.kids[1]),
                                      want_int(e.kids[2]),
                                      want_int(e.kids[3]));
    });
  }
  if (h == "lab") {
    want_arity(e, 2);
    return build_memo(sh, [&] {
      return std::make_shared<LabA>(sh, pred_from(e.kids[1]),
                                    want_int(e.kids[2]));
    });
  }
  if (h == "thread") {
    want_arity(e, 4);
    return build_memo(sh, [&] {
      return std::make_shared<ThreadA>(sh, want_int(e.kids[1]),
                                       want_int(e.kids[2]),
                                       want_int(e.kids[3]),
                                       want_int(e.kids[4]));
    });
  }
  if (h == "gelem" || h == "gset") {
    if (e.kids.size() < 2)
      throw AutomatonError("recipe: wrong arity for '" + h + "'");
    std::vector<int> tracks;
    for (size_t j = 1; j < e.kids.size(); ++j)
      tracks.push_back(want_int(e.kids[j]));
    return build_memo(sh, [&]() -> AutomatonP {
      if (h == "gelem") return std::make_shared<ElemGuardA>(sh, tracks);
      return std::make_shared<SetGuardA>(sh, tracks);
    });
  }
  if (h == "projm" || h == "proje") {
    want_arity(e, 2);
    return build_memo(sh, [&] {
      return std::make_shared<ProjectA>(sh, build_expr(e.kids[2], sh),
                                        want_int(e.kids[1]), h == "proje");
    });
  }
  if (h == "not") {
    want_arity(e, 1);
    return build_memo(
        sh, [&] { return std::make_shared<NotA>(sh, build_expr(e.kids[1], sh)); });
  }
  if (h == "proj") {
    want_arity(e, 1);
    return build_memo(sh, [&] {
      return std::make_shared<ProjectA>(sh, build_expr(e.kids[1], sh));
    });
  }
  if (h == "and" || h == "or" || h == "imp" || h == "iff") {
    want_arity(e, 2);
    Comb c = h == "and"  ? Comb::And
             : h == "or" ? Comb::Or
             : h == "imp" ? Comb::Imp
                          : Comb::Iff;
    return build_memo(sh, [&] {
      return std::make_shared<ProductA>(sh, build_expr(e.kids[1], sh),
                                        build_expr(e.kids[2], sh), c);
    });
  }
  throw AutomatonError("recipe: unknown operator '" + h + "'");
}

}  // namespace

std::string Recipe::text() const {
  std::ostringstream os;
  os << "(automaton (rank " << rank << ") (source " << quote(source)
     << ") (expr " << expr << "))";
  return os.str();
}

Recipe Recipe::parse(const std::string& s) {
  SexprParser p(s);
  Sexpr e = p.parse();
  if (head(e) != "automaton" || e.kids.size() != 4)
    throw AutomatonError("recipe: 'automaton' wrapper expected");
  Recipe r;
  bool have_rank = false, have_source = false, have_expr = false;
  for (size_t j = 1; j < e.kids.size(); ++j) {
    const Sexpr& part = e.kids[j];
    const std::string& h = head(part);
    if (h == "rank") {
      want_arity(part, 1);
      r.rank = want_int(part.kids[1]);
      have_rank = true;
    } else if (h == "source") {
      want_arity(part, 1);
      if (!part.kids[1].is_string)
        throw AutomatonError("recipe: source string expected");
      r.source = part.kids[1].text;
      have_source = true;
    } else if (h == "expr") {
      want_arity(part, 1);
      std::ostringstream os;
      std::function<void(const Sexpr&)> dump = [&](const Sexpr& x) {
        if (x.is_string) {
          os << quote(x.text);
          return;
        }
        if (!x.is_list) {
          os << x.text;
          return;
        }
        os << "(";
        for (size_t m = 0; m < x.kids.size(); ++m) {
          if (m) os << " ";
          dump(x.kids[m]);
        }
        os << ")";
      };
      dump(part.kids[1]);
      r.expr = os.str();
      have_expr = true;
    } else {
      throw AutomatonError("recipe: unknown section '" + h + "'");
    }
  }
  if (!have_rank || !have_source || !have_expr)
    throw AutomatonError("recipe: missing section");
  return r;
}

Recipe make_recipe(const FormulaP& f, const std::string& source) {
  CompileShared sh;
  AutomatonP a = compile_sentence(f, sh);
  Recipe r;
  r.source = source;
  r.rank = 2;
  r.expr = a->expr_text();
  return r;
}

AutomatonP automaton_from_recipe(const Recipe& r, CompileShared& sh) {
  SexprParser p(r.expr);
  Sexpr e = p.parse();
  return build_expr(e, sh);
}

AutomatonP automaton_from_recipe(const Recipe& r) {
  CompileShared sh;
  return automaton_from_recipe(r, sh);
}

}  // namespace frugalmc
