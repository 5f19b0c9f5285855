#pragma once

// Ring world and synchronous round engine.
//
// Nodes are 0..n-1 on a cycle; "up" is the +1 neighbor, "down" is -1. In an
// oriented ring every node labels its down edge as port 1, and Left means
// down for every agent. In an unoriented ring the port labeling is arbitrary
// and each agent fixes its own frame at its first step: Left is whichever
// direction port 1 points at its homebase, kept for the rest of the run.
//
// One round is Look, Compute, Move in lockstep: every live agent observes the
// same start-of-round snapshot, transitions, and all actions apply
// simultaneously. An agent whose move lands on the black hole is dead at end
// of round; tokens it carried are destroyed. Links are identified by their
// lower endpoint going up: link v is the edge {v, v+1 mod n}. A marked link
// is dangerous from both endpoints and disabled for traversal.

#include <array>
#include <cassert>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bhs/agent.hpp"

namespace bhs {

struct ScenarioSpec {
  int n = 0;
  int black_hole = 0;
  std::vector<int> homebases;
  bool oriented = true;
  // Unoriented only: per node, true when port 1 is the up edge. Size n.
  std::vector<std::uint8_t> port_one_up;
  std::string protocol;
  int round_bound = 0;  // 0 = default bound
  int k() const { return static_cast<int>(homebases.size()); }
};

inline int default_round_bound(int n) { return 30 * n + 30; }

inline std::optional<std::string> validate_spec(const ScenarioSpec& s) {
  if (s.n < 3) return "ring size must be at least 3";
  if (s.black_hole < 0 || s.black_hole >= s.n) return "black hole outside the ring";
  if (s.homebases.empty()) return "no homebases";
  if (s.k() > s.n - 1) return "more agents than safe nodes";
  std::vector<char> seen(static_cast<std::size_t>(s.n), 0);
  for (int h : s.homebases) {
    if (h < 0 || h >= s.n) return "homebase outside the ring";
    if (h == s.black_hole) return "homebase on the black hole";
    if (seen[static_cast<std::size_t>(h)]) return "duplicate homebase";
    seen[static_cast<std::size_t>(h)] = 1;
  }
  if (!s.oriented && static_cast<int>(s.port_one_up.size()) != s.n)
    return "unoriented ring needs a port labeling of size n";
  if (s.round_bound < 0) return "negative round bound";
  return std::nullopt;
}

enum class AgentStatus : std::uint8_t { alive, dead, halted };

inline const char* to_string(AgentStatus s) {
  switch (s) {
    case AgentStatus::alive: return "alive";
    case AgentStatus::dead: return "dead";
    default: return "halted";
  }
}

struct AgentInstance {
  int id = 0;
  AgentStatus status = AgentStatus::alive;
  int node = 0;
  int state = 0;
  std::uint8_t carried = 0;
  bool left_is_up = false;  // orientation: the agent's Left mapped to up/down
  Rel arrival = Rel::none;  // agent-relative direction of its last move
};

enum class FatalKind : std::uint8_t { token_conflict, marked_traversal, protocol_fault };

inline const char* to_string(FatalKind k) {
  switch (k) {
    case FatalKind::token_conflict: return "token-conflict";
    case FatalKind::marked_traversal: return "traversal-of-marked-link";
    default: return "protocol-fault";
  }
}

struct Fatal {
  FatalKind kind = FatalKind::protocol_fault;
  int round = 0;
  int agent = -1;
  std::string detail;
};

struct MarkEvent {
  int link = 0;   // link id
  int node = 0;   // endpoint the mark was placed from
  int agent = -1;
  int round = 0;
};

struct AgentRound {
  int id = 0;
  int state_before = 0;
  int state_after = 0;
  Percept percept;
  Action action;
  int node_after = 0;
  AgentStatus status_after = AgentStatus::alive;
  std::uint8_t carried_after = 0;
  bool left_is_up = false;
  int died_link = -1;  // link crossed into the black hole, when dead
};

struct RoundRecord {
  int round = 0;
  std::vector<AgentRound> agents;  // one entry per agent alive at round start
  std::vector<std::array<int, 2>> token_deltas;  // (node, delta)
  std::vector<MarkEvent> marks_added;
};

enum class Termination : std::uint8_t { quiescence, extinction, bound, fault, invalid };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::quiescence: return "quiescence";
    case Termination::extinction: return "extinction";
    case Termination::bound: return "bound";
    case Termination::fault: return "fault";
    default: return "invalid";
  }
}

struct Trace {
  ScenarioSpec spec;
  int round_bound = 0;
  std::vector<RoundRecord> rounds;
  Termination termination = Termination::invalid;
  std::optional<Fatal> fatal;
  int rounds_used() const { return static_cast<int>(rounds.size()); }
};

class RingWorld {
 public:
  RingWorld(const ScenarioSpec& spec, const Automaton& automaton)
      : spec_(spec), automaton_(&automaton) {
    assert(!validate_spec(spec));
    tokens_.assign(static_cast<std::size_t>(spec.n), 0);
    marked_.assign(static_cast<std::size_t>(spec.n), 0);
    port_one_up_ = spec.oriented
                       ? std::vector<std::uint8_t>(static_cast<std::size_t>(spec.n), 0)
                       : spec.port_one_up;
    const int budget = automaton.info.tokens_per_agent;
    agents_.reserve(spec.homebases.size());
    for (int i = 0; i < spec.k(); ++i) {
      AgentInstance a;
      a.id = i;
      a.node = spec.homebases[static_cast<std::size_t>(i)];
      a.state = automaton.initial;
      a.carried = static_cast<std::uint8_t>(budget);
      a.left_is_up = fix_orientation(a.node);
      agents_.push_back(a);
    }
  }

  int n() const { return spec_.n; }
  int round() const { return round_; }
  int black_hole() const { return spec_.black_hole; }
  const std::vector<AgentInstance>& agents() const { return agents_; }
  const Automaton& automaton() const { return *automaton_; }
  int tokens_at(int node) const { return tokens_[static_cast<std::size_t>(node)]; }
  bool link_marked(int link) const { return marked_[static_cast<std::size_t>(link)] != 0; }
  int destroyed_tokens() const { return destroyed_; }

  int up(int v) const { return v + 1 == spec_.n ? 0 : v + 1; }
  int down(int v) const { return v == 0 ? spec_.n - 1 : v - 1; }
  int link_up(int v) const { return v; }               // edge {v, v+1}
  int link_down(int v) const { return down(v); }       // edge {v-1, v}

  // First-step rule: Left is clockwise-down in an oriented ring, otherwise
  // whichever direction port 1 points at the given node.
  bool fix_orientation(int homebase) const {
    if (spec_.oriented) return false;
    return port_one_up_[static_cast<std::size_t>(homebase)] != 0;
  }

  int alive_count() const {
    int c = 0;
    for (const auto& a : agents_) c += a.status == AgentStatus::alive;
    return c;
  }
  int halted_count() const {
    int c = 0;
    for (const auto& a : agents_) c += a.status == AgentStatus::halted;
    return c;
  }

  // Look stage for one agent, from the current (start-of-round) state.
  Percept observe(const AgentInstance& a) const {
    assert(a.status == AgentStatus::alive);
    Percept p;
    p.tokens_here = tokens_[static_cast<std::size_t>(a.node)];
    p.carried = a.carried;
    p.arrival = a.arrival;
    const int left_link = a.left_is_up ? link_up(a.node) : link_down(a.node);
    const int right_link = a.left_is_up ? link_down(a.node) : link_up(a.node);
    p.left_marked = link_marked(left_link);
    p.right_marked = link_marked(right_link);
    for (const auto& other : agents_) {
      if (other.id == a.id || other.status != AgentStatus::alive || other.node != a.node)
        continue;
      const std::uint64_t bit = std::uint64_t{1} << other.state;
      if (other.left_is_up == a.left_is_up)
        p.agreeing |= bit;
      else
        p.disagreeing |= bit;
    }
    return p;
  }

  // One synchronous round. Returns the record; a fatal event is recorded in
  // the record's owner (the caller's trace) via the optional out parameter.
  RoundRecord step(std::optional<Fatal>& fatal_out) {
    assert(alive_count() > 0);
    RoundRecord rec;
    rec.round = round_;

    struct Decision {
      int idx;
      Percept percept;
      int next_state;
      Action action;
    };
    std::vector<Decision> decisions;
    decisions.reserve(agents_.size());

    // Look + Compute against the start-of-round snapshot.
    std::optional<Fatal> fatal;
    for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
      auto& a = agents_[static_cast<std::size_t>(i)];
      if (a.status != AgentStatus::alive) continue;
      const Percept p = observe(a);
      auto [next, act] = automaton_->decide(a.state, p);
      if (next == automaton_->fault && !fatal) {
        fatal = Fatal{FatalKind::protocol_fault, round_, a.id,
                      "no transition from " + automaton_->state_name(a.state)};
      }
      decisions.push_back({i, p, next, act});
    }

    // Validate token operations against the snapshot.
    std::vector<int> picks(static_cast<std::size_t>(spec_.n), 0);
    std::vector<int> puts(static_cast<std::size_t>(spec_.n), 0);
    const int budget = automaton_->info.tokens_per_agent;
    for (const auto& d : decisions) {
      const auto& a = agents_[static_cast<std::size_t>(d.idx)];
      if (d.action.token == TokenOp::put) {
        if (a.carried < 1 && !fatal)
          fatal = Fatal{FatalKind::token_conflict, round_, a.id, "put without a carried token"};
        ++puts[static_cast<std::size_t>(a.node)];
      } else if (d.action.token == TokenOp::pick) {
        if (!automaton_->info.movable && !fatal)
          fatal = Fatal{FatalKind::token_conflict, round_, a.id, "pick of an unmovable token"};
        if (a.carried >= budget && !fatal)
          fatal = Fatal{FatalKind::token_conflict, round_, a.id, "pick over the token budget"};
        ++picks[static_cast<std::size_t>(a.node)];
      }
    }
    for (int v = 0; v < spec_.n && !fatal; ++v) {
      if (picks[static_cast<std::size_t>(v)] > tokens_[static_cast<std::size_t>(v)])
        fatal = Fatal{FatalKind::token_conflict, round_, -1,
                      "simultaneous picks exceed tokens at node " + std::to_string(v)};
      const int after = tokens_[static_cast<std::size_t>(v)] -
                        picks[static_cast<std::size_t>(v)] + puts[static_cast<std::size_t>(v)];
      if (after > 2)
        fatal = Fatal{FatalKind::token_conflict, round_, -1,
                      "more than two tokens at node " + std::to_string(v)};
    }

    // Traversal legality is judged against start-of-round marks, consistent
    // with the snapshot the movers decided on.
    const std::vector<std::uint8_t> marks_before = marked_;
    auto link_of_move = [&](const AgentInstance& a, Rel move) {
      const bool up_move = (move == Rel::left) == a.left_is_up;
      return up_move ? link_up(a.node) : link_down(a.node);
    };
    for (const auto& d : decisions) {
      if (fatal) break;
      if (d.action.move == Rel::none) continue;
      const auto& a = agents_[static_cast<std::size_t>(d.idx)];
      if (marks_before[static_cast<std::size_t>(link_of_move(a, d.action.move))]) {
        fatal = Fatal{FatalKind::marked_traversal, round_, a.id,
                      "attempt to cross a marked link"};
      }
    }

    if (fatal) {
      // Record the attempted round without applying it.
      for (const auto& d : decisions) {
        const auto& a = agents_[static_cast<std::size_t>(d.idx)];
        rec.agents.push_back({a.id, a.state, d.next_state, d.percept, d.action, a.node,
                              a.status, a.carried, a.left_is_up, -1});
      }
      fatal_out = fatal;
      ++round_;
      return rec;
    }

    // Move stage: marks, token ops, moves, deaths, halts -- all simultaneous.
    for (const auto& d : decisions) {
      auto& a = agents_[static_cast<std::size_t>(d.idx)];
      if (d.action.mark != Rel::none) {
        const bool up_mark = (d.action.mark == Rel::left) == a.left_is_up;
        const int link = up_mark ? link_up(a.node) : link_down(a.node);
        if (!marked_[static_cast<std::size_t>(link)]) {
          marked_[static_cast<std::size_t>(link)] = 1;
          rec.marks_added.push_back({link, a.node, a.id, round_});
        }
      }
      if (d.action.token == TokenOp::put) --a.carried;
      if (d.action.token == TokenOp::pick) ++a.carried;
    }
    for (int v = 0; v < spec_.n; ++v) {
      const int delta = puts[static_cast<std::size_t>(v)] - picks[static_cast<std::size_t>(v)];
      if (delta != 0) {
        tokens_[static_cast<std::size_t>(v)] =
            static_cast<std::uint8_t>(tokens_[static_cast<std::size_t>(v)] + delta);
        rec.token_deltas.push_back({v, delta});
      }
    }
    for (const auto& d : decisions) {
      auto& a = agents_[static_cast<std::size_t>(d.idx)];
      const int state_before = a.state;
      a.state = d.next_state;
      if (d.action.flip_orientation) {
        a.left_is_up = !a.left_is_up;
        if (a.arrival == Rel::left) a.arrival = Rel::right;
        else if (a.arrival == Rel::right) a.arrival = Rel::left;
      }
      int died_link = -1;
      if (d.action.move != Rel::none) {
        const bool up_move = (d.action.move == Rel::left) == a.left_is_up;
        const int link = up_move ? link_up(a.node) : link_down(a.node);
        a.node = up_move ? up(a.node) : down(a.node);
        a.arrival = d.action.move;
        if (a.node == spec_.black_hole) {
          a.status = AgentStatus::dead;
          destroyed_ += a.carried;
          died_link = link;
        }
      }
      if (a.status == AgentStatus::alive && d.action.halt) a.status = AgentStatus::halted;
      rec.agents.push_back({a.id, state_before, a.state, d.percept, d.action, a.node,
                            a.status, a.carried, a.left_is_up, died_link});
    }
    ++round_;
    return rec;
  }

  // Sum of placed tokens plus tokens carried by non-dead agents plus tokens
  // destroyed in the black hole. Constant over a run.
  int token_account() const {
    int total = destroyed_;
    for (int v = 0; v < spec_.n; ++v) total += tokens_[static_cast<std::size_t>(v)];
    for (const auto& a : agents_)
      if (a.status != AgentStatus::dead) total += a.carried;
    return total;
  }

  std::vector<int> marked_links() const {
    std::vector<int> out;
    for (int v = 0; v < spec_.n; ++v)
      if (marked_[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
  }

 private:
  ScenarioSpec spec_;
  const Automaton* automaton_;
  std::vector<std::uint8_t> tokens_;
  std::vector<std::uint8_t> marked_;  // by link id
  std::vector<std::uint8_t> port_one_up_;
  std::vector<AgentInstance> agents_;
  int round_ = 0;
  int destroyed_ = 0;
};

// Runs until quiescence (no reachable future change), extinction, a fatal
// event, or the round bound. Quiescence is detected as an exact repeat of the
// essential world state: a deterministic lockstep system that revisits a
// state cycles forever, whether the cycle is a one-round wait loop or a full
// patrol lap.
inline Trace run(const ScenarioSpec& spec, const Automaton& automaton, int round_bound = 0) {
  Trace trace;
  trace.spec = spec;
  if (round_bound == 0)
    round_bound = spec.round_bound > 0 ? spec.round_bound : default_round_bound(spec.n);
  trace.round_bound = round_bound;
  if (validate_spec(spec) || round_bound < 1) {
    trace.termination = Termination::invalid;
    return trace;
  }
  RingWorld world(spec, automaton);

  using Snapshot = std::vector<std::uint64_t>;
  auto snapshot = [&world]() {
    Snapshot s;
    for (int v = 0; v < world.n(); ++v)
      s.push_back((static_cast<std::uint64_t>(world.tokens_at(v)) << 1) |
                  static_cast<std::uint64_t>(world.link_marked(v)));
    for (const auto& a : world.agents()) {
      std::uint64_t w = static_cast<std::uint64_t>(a.node);
      w = (w << 8) | static_cast<std::uint64_t>(a.state);
      w = (w << 2) | static_cast<std::uint64_t>(a.status);
      w = (w << 2) | static_cast<std::uint64_t>(a.carried);
      w = (w << 1) | static_cast<std::uint64_t>(a.left_is_up);
      w = (w << 2) | static_cast<std::uint64_t>(a.arrival);
      s.push_back(w);
    }
    return s;
  };

  std::set<Snapshot> seen;
  seen.insert(snapshot());

  for (int t = 0; t < round_bound; ++t) {
    if (world.alive_count() == 0) {
      trace.termination =
          world.halted_count() > 0 ? Termination::quiescence : Termination::extinction;
      return trace;
    }
    std::optional<Fatal> fatal;
    trace.rounds.push_back(world.step(fatal));
    if (fatal) {
      trace.fatal = fatal;
      trace.termination = Termination::fault;
      return trace;
    }
    if (!seen.insert(snapshot()).second) {
      trace.termination = Termination::quiescence;
      return trace;
    }
  }
  if (world.alive_count() == 0) {
    trace.termination =
        world.halted_count() > 0 ? Termination::quiescence : Termination::extinction;
    return trace;
  }
  trace.termination = Termination::bound;
  return trace;
}

}  // namespace bhs
