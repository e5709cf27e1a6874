#pragma once

#include <array>
#include <set>

#include "frugalmc/protocols.hpp"

namespace frugalmc {
namespace detail {

inline std::vector<int> ints_of_key(const BagKey& k) {
  std::vector<int> out;
  out.reserve(k.size());
  for (long long x : k) out.push_back(static_cast<int>(x));
  return out;
}

inline BagKey key_of_ints(const std::vector<int>& v) {
  return BagKey(v.begin(), v.end());
}

// args-stream helpers; keys and tuples are written length-prefixed
inline void put_key(std::vector<long long>& args, const BagKey& k) {
  args.push_back(static_cast<long long>(k.size()));
  args.insert(args.end(), k.begin(), k.end());
}

inline BagKey take_key(const std::vector<long long>& args, size_t& pos) {
  size_t len = static_cast<size_t>(args.at(pos++));
  BagKey k(args.begin() + pos, args.begin() + pos + len);
  pos += len;
  return k;
}

inline void put_ints(std::vector<long long>& args, const std::vector<int>& v) {
  args.push_back(static_cast<long long>(v.size()));
  args.insert(args.end(), v.begin(), v.end());
}

inline std::vector<int> take_ints(const std::vector<long long>& args, size_t& pos) {
  size_t len = static_cast<size_t>(args.at(pos++));
  std::vector<int> v;
  v.reserve(len);
  for (size_t i = 0; i < len; ++i) v.push_back(static_cast<int>(args.at(pos + i)));
  pos += len;
  return v;
}

// Destination-routed delivery by bounded flooding. Outgoing payloads are
// wrapped with an [origin, dest, serial, hop] prefix; every node forwards
// unseen copies with a decremented budget and the addressee unwraps. One
// serial space per origin node.
struct FloodCore {
  int self = 0;
  int hops = 0;
  long long next_serial = 0;
  std::set<std::array<long long, 3>> seen;

  Message wrap(int dest, Message m) {
    std::vector<long long> args = {self, dest, next_serial++, hops};
    args.insert(args.end(), m.args.begin(), m.args.end());
    m.args = std::move(args);
    return m;
  }

  void originate(NodeCtx& ctx, int dest, Message m) {
    Message w = wrap(dest, std::move(m));
    for (int p = 1; p <= ctx.degree(); ++p) ctx.send(p, w);
  }

  static Message unwrap(const Message& m) {
    Message inner;
    inner.kind = m.kind;
    inner.args.assign(m.args.begin() + 4, m.args.end());
    inner.lists = m.lists;
    inner.text = m.text;
    return inner;
  }

  static int origin_of(const Message& m) { return static_cast<int>(m.args.at(0)); }

  // true when the payload is addressed to this node and seen first
  bool accept(NodeCtx& ctx, int port, const Message& m) {
    long long origin = m.args.at(0), dest = m.args.at(1), serial = m.args.at(2);
    if (!seen.insert({origin, dest, serial}).second) return false;
    if (dest == self) return true;
    long long hop = m.args.at(3);
    if (hop > 0) {
      Message fwd = m;
      fwd.args[3] = hop - 1;
      for (int p = 1; p <= ctx.degree(); ++p)
        if (p != port) ctx.send(p, fwd);
    }
    return false;
  }
};

// runs the sync BFS round when the config carries no injected tree;
// async callers must inject one
BfsTree ensure_bfs(const Graph& g, SimConfig& cfg, Metrics& add);

}  // namespace detail
}  // namespace frugalmc
