#include "frugalmc/netsim.hpp"

#include <algorithm>
#include <sstream>

namespace frugalmc {

int Message::words() const {
  size_t w = args.size();
  for (const auto& l : lists) w += l.size();
  return static_cast<int>(w);
}

long long Metrics::max_directed_link() const {
  long long best = 0;
  for (const auto& [k, c] : per_link) best = std::max(best, c);
  return best;
}

long long Metrics::msg_per_link_max() const {
  std::map<std::pair<int, int>, long long> both;
  for (const auto& [k, c] : per_link)
    both[{std::min(k.first, k.second), std::max(k.first, k.second)}] += c;
  long long best = 0;
  for (const auto& [k, c] : both) best = std::max(best, c);
  return best;
}

Metrics& Metrics::operator+=(const Metrics& o) {
  for (const auto& [k, c] : o.per_link) per_link[k] += c;
  for (const auto& [k, c] : o.per_kind) per_kind[k] += c;
  total += o.total;
  payload_words += o.payload_words;
  max_message_words = std::max(max_message_words, o.max_message_words);
  recipe_chars += o.recipe_chars;
  time += o.time;
  return *this;
}

int NodeCtx::degree() const { return sim_->graph().degree(id_); }

int NodeCtx::neighbor(int port) const {
  if (port < 1 || port > degree()) throw SimError("bad port");
  return sim_->graph().neighbor(id_, port);
}

int NodeCtx::port_to(int nbr) const { return sim_->graph().port_to(id_, nbr); }

bool NodeCtx::is_requester() const { return id_ == sim_->config().requester; }

PortState NodeCtx::port_state(int port) const {
  if (port < 1 || port > degree()) throw SimError("bad port");
  return sim_->port_state_[id_][port - 1];
}

int NodeCtx::parent_port() const { return sim_->parent_port_[id_]; }

void NodeCtx::send(int port, Message m) {
  sim_->send_from(id_, port, std::move(m));
}

void NodeCtx::decide(bool accept) { sim_->decisions_[id_] = accept; }

void NodeCtx::halt() {
  sim_->halted_.insert(id_);
  if (is_requester()) sim_->stopped_ = true;
}

Simulation::Simulation(const Graph& g, SimConfig cfg)
    : g_(&g), cfg_(std::move(cfg)), rng_(cfg_.seed) {
  g.require_connected();
  handlers_.resize(g.n() + 1);
  port_state_.resize(g.n() + 1);
  parent_port_.assign(g.n() + 1, 0);
  for (int v = 1; v <= g.n(); ++v)
    port_state_[v].assign(g.degree(v), PortState::Unknown);
  if (cfg_.bfs) {
    const BfsTree& b = *cfg_.bfs;
    if ((int)b.parent.size() != g.n() + 1)
      throw SimError("bfs injection does not match the graph");
    for (int v = 1; v <= g.n(); ++v) {
      for (int p = 1; p <= g.degree(v); ++p) {
        int w = g.neighbor(v, p);
        PortState s = PortState::Cross;
        if (b.parent[v] == w) {
          s = PortState::Parent;
          parent_port_[v] = p;
        } else if (b.parent[w] == v) {
          s = PortState::Child;
        }
        port_state_[v][p - 1] = s;
      }
    }
  }
}

void Simulation::install(const HandlerFactory& make) {
  for (int v = 1; v <= g_->n(); ++v) handlers_[v] = make(v);
}

void Simulation::kick(int node) {
  if (node < 1 || node > g_->n()) throw SimError("bad node id");
  if (!handlers_[node]) throw SimError("no handler installed");
  now_ = 0;
  NodeCtx ctx(this, node);
  handlers_[node]->on_start(ctx);
}

void Simulation::kick_all() {
  for (int v = 1; v <= g_->n(); ++v) kick(v);
}

void Simulation::poke(int node, int tag) {
  if (node < 1 || node > g_->n()) throw SimError("bad node id");
  if (!handlers_[node]) throw SimError("no handler installed");
  if (halted_.count(node)) return;
  now_ = metrics_.time;
  NodeCtx ctx(this, node);
  handlers_[node]->on_poke(ctx, tag);
}

void Simulation::send_from(int src, int port, Message m) {
  if (port < 1 || port > g_->degree(src)) throw SimError("bad send port");
  int dst = g_->neighbor(src, port);
  Envelope e;
  e.src = src;
  e.dst = dst;
  e.port = g_->back_port(src, port);
  e.t = now_;
  e.seq = next_seq_[{src, dst}]++;
  e.msg = std::move(m);
  queues_[{src, dst}].push_back(std::move(e));
}

void Simulation::deliver(Envelope e) {
  auto link = std::make_pair(e.src, e.dst);
  if (e.seq != delivered_seq_[link]++) throw SimError("fifo order violated");
  if (++events_ > cfg_.max_events)
    throw SimError("event cap exceeded delivering " + e.msg.kind + " " +
                   std::to_string(e.src) + "->" + std::to_string(e.dst) +
                   "; pending:\n" + dump_pending());

  metrics_.per_link[link]++;
  metrics_.per_kind[e.msg.kind]++;
  metrics_.total++;
  if (cfg_.accounting) {
    long long w = e.msg.words();
    metrics_.payload_words += w;
    metrics_.max_message_words = std::max(metrics_.max_message_words, w);
    metrics_.recipe_chars += (long long)e.msg.text.size();
  }
  now_ = e.t + 1;
  metrics_.time = std::max(metrics_.time, now_);
  if (cfg_.record_trace) {
    std::ostringstream os;
    os << "t=" << now_ << " deliver " << e.src << "->" << e.dst
       << " port=" << e.port << " kind=" << e.msg.kind
       << " size=" << e.msg.words();
    trace_.push_back(os.str());
  }
  if (halted_.count(e.dst)) return;
  NodeCtx ctx(this, e.dst);
  handlers_[e.dst]->on_message(ctx, e.port, e.msg);
}

void Simulation::run() {
  if (cfg_.mode == SimMode::Sync) {
    while (!stopped_) {
      std::vector<Envelope> round;
      for (auto& [link, q] : queues_)
        while (!q.empty()) {
          round.push_back(std::move(q.front()));
          q.pop_front();
        }
      if (round.empty()) break;
      std::stable_sort(round.begin(), round.end(),
                       [](const Envelope& a, const Envelope& b) {
                         if (a.dst != b.dst) return a.dst < b.dst;
                         if (a.port != b.port) return a.port < b.port;
                         return a.seq < b.seq;
                       });
      long long tmax = 0;
      std::set<int> touched;
      for (const auto& e : round) {
        tmax = std::max(tmax, e.t + 1);
        touched.insert(e.dst);
      }
      for (auto& e : round) {
        if (stopped_) return;
        deliver(std::move(e));
      }
      now_ = tmax;
      for (int v : touched) {
        if (stopped_) return;
        if (halted_.count(v)) continue;
        NodeCtx ctx(this, v);
        handlers_[v]->on_round_end(ctx);
      }
    }
    return;
  }
  while (!stopped_) {
    std::vector<std::pair<int, int>> live;
    for (const auto& [link, q] : queues_)
      if (!q.empty()) live.push_back(link);
    if (live.empty()) break;
    auto link = live[rng_() % live.size()];
    auto& q = queues_[link];
    Envelope e = std::move(q.front());
    q.pop_front();
    deliver(std::move(e));
  }
}

bool Simulation::decided(int node) const { return decisions_.count(node) > 0; }

bool Simulation::decision(int node) const {
  auto it = decisions_.find(node);
  if (it == decisions_.end()) throw SimError("node has not decided");
  return it->second;
}

bool Simulation::halted(int node) const { return halted_.count(node) > 0; }

long long Simulation::pending() const {
  long long c = 0;
  for (const auto& [link, q] : queues_) c += (long long)q.size();
  return c;
}

NodeHandler* Simulation::handler(int node) {
  if (node < 1 || node > g_->n()) throw SimError("bad node id");
  return handlers_[node].get();
}

std::string Simulation::dump_pending() const {
  std::ostringstream os;
  for (const auto& [link, q] : queues_) {
    if (q.empty()) continue;
    os << "  " << link.first << "->" << link.second << ":";
    for (const auto& e : q) os << " " << e.msg.kind;
    os << "\n";
  }
  return os.str();
}

}  // namespace frugalmc
