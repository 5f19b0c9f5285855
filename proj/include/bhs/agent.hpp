#pragma once

// Moore-automaton machinery for constant-memory ring agents: the percept and
// action vocabularies, guard-rule transition tables, and protocol metadata.
//
// An automaton is a fixed set of states; each state carries one output action
// (Moore: the action depends only on the state) and an ordered list of guarded
// transition rules evaluated top to bottom against the percept of the round.
// The first matching rule wins. A percept matched by no rule sends the agent
// to the absorbing FAULT state, which the engine reports as a protocol fault.

#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bhs {

// Agent-relative direction. `none` doubles as "no move" in actions and
// "did not arrive through an edge" in percepts.
enum class Rel : std::uint8_t { none, left, right };

inline const char* to_string(Rel r) {
  switch (r) {
    case Rel::left: return "left";
    case Rel::right: return "right";
    default: return "none";
  }
}

enum class TokenOp : std::uint8_t { none, put, pick };

// One round's output. Marking occupies the whole action slot: a state that
// marks never also moves. `flip_orientation` is the follower-alignment
// exception: the agent adopts the opposite left/right frame before acting.
struct Action {
  TokenOp token = TokenOp::none;
  Rel move = Rel::none;
  Rel mark = Rel::none;
  bool halt = false;
  bool flip_orientation = false;
};

inline std::string to_string(const Action& a) {
  std::string s;
  auto add = [&s](const std::string& part) {
    if (!s.empty()) s += ", ";
    s += part;
  };
  if (a.flip_orientation) add("flip orientation");
  if (a.token == TokenOp::put) add("put token");
  if (a.token == TokenOp::pick) add("pick token");
  if (a.move != Rel::none) add(std::string("move ") + to_string(a.move));
  if (a.mark != Rel::none) add(std::string("mark ") + to_string(a.mark));
  if (a.halt) add("halt");
  if (s.empty()) s = "none";
  return s;
}

// What one agent sees at the start of a round, already translated into its
// own left/right frame. Co-located agents are exposed as two bit masks over
// automaton states, split by whether the other agent's orientation agrees
// with the observer's. Two agents in the same state with the same agreement
// are indistinguishable (set semantics). Halted agents are invisible.
struct Percept {
  std::uint64_t agreeing = 0;
  std::uint64_t disagreeing = 0;
  std::uint8_t tokens_here = 0;  // placed tokens only, never carried ones
  std::uint8_t carried = 0;
  Rel arrival = Rel::none;
  bool left_marked = false;
  bool right_marked = false;

  std::uint64_t present() const { return agreeing | disagreeing; }

  bool operator==(const Percept&) const = default;
};

enum class TokenCond : std::uint8_t { any, eq0, eq1, eq2, ge1 };
enum class LinkCond : std::uint8_t { any, marked, clear };
enum class Presence : std::uint8_t { present, absent, agreeing, disagreeing };

struct StateCond {
  std::uint64_t family = 0;
  Presence kind = Presence::present;
  std::string label;  // family name, for the dump
};

// Exists a co-located agent in family `a` and one in family `b` with equal
// orientation. Families must be disjoint so the two witnesses are distinct.
struct PairCond {
  std::uint64_t a = 0, b = 0;
  std::string label_a, label_b;
};

struct Guard {
  TokenCond tokens = TokenCond::any;
  LinkCond left_link = LinkCond::any;
  LinkCond right_link = LinkCond::any;
  bool no_agents = false;    // no visible co-located agent
  bool some_agent = false;   // at least one visible co-located agent
  std::vector<StateCond> conds;
  std::optional<PairCond> oriented_pair;

  Guard& tok(TokenCond t) { tokens = t; return *this; }
  Guard& left(LinkCond c) { left_link = c; return *this; }
  Guard& right(LinkCond c) { right_link = c; return *this; }
  Guard& alone() { no_agents = true; return *this; }
  Guard& company() { some_agent = true; return *this; }
  Guard& has(std::uint64_t fam, std::string label) {
    conds.push_back({fam, Presence::present, std::move(label)});
    return *this;
  }
  Guard& lacks(std::uint64_t fam, std::string label) {
    conds.push_back({fam, Presence::absent, std::move(label)});
    return *this;
  }
  Guard& agreeing(std::uint64_t fam, std::string label) {
    conds.push_back({fam, Presence::agreeing, std::move(label)});
    return *this;
  }
  Guard& disagreeing(std::uint64_t fam, std::string label) {
    conds.push_back({fam, Presence::disagreeing, std::move(label)});
    return *this;
  }
  Guard& pair(std::uint64_t a, std::string la, std::uint64_t b, std::string lb) {
    oriented_pair = PairCond{a, b, std::move(la), std::move(lb)};
    return *this;
  }

  bool matches(const Percept& p) const {
    switch (tokens) {
      case TokenCond::any: break;
      case TokenCond::eq0: if (p.tokens_here != 0) return false; break;
      case TokenCond::eq1: if (p.tokens_here != 1) return false; break;
      case TokenCond::eq2: if (p.tokens_here != 2) return false; break;
      case TokenCond::ge1: if (p.tokens_here < 1) return false; break;
    }
    if (left_link == LinkCond::marked && !p.left_marked) return false;
    if (left_link == LinkCond::clear && p.left_marked) return false;
    if (right_link == LinkCond::marked && !p.right_marked) return false;
    if (right_link == LinkCond::clear && p.right_marked) return false;
    const std::uint64_t present = p.present();
    if (no_agents && present != 0) return false;
    if (some_agent && present == 0) return false;
    for (const auto& c : conds) {
      switch (c.kind) {
        case Presence::present: if ((present & c.family) == 0) return false; break;
        case Presence::absent: if ((present & c.family) != 0) return false; break;
        case Presence::agreeing: if ((p.agreeing & c.family) == 0) return false; break;
        case Presence::disagreeing: if ((p.disagreeing & c.family) == 0) return false; break;
      }
    }
    if (oriented_pair) {
      const auto& pc = *oriented_pair;
      const bool both_agree = (p.agreeing & pc.a) != 0 && (p.agreeing & pc.b) != 0;
      const bool both_disagree = (p.disagreeing & pc.a) != 0 && (p.disagreeing & pc.b) != 0;
      if (!both_agree && !both_disagree) return false;
    }
    return true;
  }

  std::string text() const {
    std::string s;
    auto add = [&s](const std::string& part) {
      if (!s.empty()) s += " & ";
      s += part;
    };
    switch (tokens) {
      case TokenCond::any: break;
      case TokenCond::eq0: add("tokens==0"); break;
      case TokenCond::eq1: add("tokens==1"); break;
      case TokenCond::eq2: add("tokens==2"); break;
      case TokenCond::ge1: add("tokens>=1"); break;
    }
    if (left_link == LinkCond::marked) add("left link marked");
    if (left_link == LinkCond::clear) add("left link clear");
    if (right_link == LinkCond::marked) add("right link marked");
    if (right_link == LinkCond::clear) add("right link clear");
    if (no_agents) add("no other agent");
    if (some_agent) add("some other agent");
    for (const auto& c : conds) {
      switch (c.kind) {
        case Presence::present: add(c.label + " present"); break;
        case Presence::absent: add("no " + c.label); break;
        case Presence::agreeing: add(c.label + " present, same orientation"); break;
        case Presence::disagreeing: add(c.label + " present, opposite orientation"); break;
      }
    }
    if (oriented_pair)
      add(oriented_pair->label_a + " and " + oriented_pair->label_b + " share orientation");
    if (s.empty()) s = "always";
    return s;
  }
};

struct Rule {
  Guard when;
  int target = 0;
};

// One row of the resource table: what the protocol needs to be correct.
struct ProtocolInfo {
  std::string name;
  int min_agents = 1;
  int tokens_per_agent = 0;
  bool movable = false;
  bool needs_orientation = false;
};

class Automaton {
 public:
  struct State {
    std::string name;
    Action out;
    std::vector<Rule> rules;
  };

  std::vector<State> states;
  int initial = 0;
  int fault = 0;
  ProtocolInfo info;
  // Named state groups used by verifier property packs (e.g. "LEADER",
  // "RIGHT_LEADER", "CHECK_LEFT", "LEADER_ENTRY", "FOLLOWER_ENTRY").
  std::map<std::string, std::uint64_t> families;
  // States invisible to this protocol's guards: agents still completing
  // their opening are not rendezvous participants and no branch reads them.
  std::uint64_t socially_invisible = 0;

  int size() const { return static_cast<int>(states.size()); }

  std::uint64_t family(const std::string& name) const {
    auto it = families.find(name);
    return it == families.end() ? 0 : it->second;
  }

  // delta then phi: the action of the round is the output of the state the
  // agent transitions into.
  std::pair<int, Action> decide(int state, const Percept& p) const {
    assert(state >= 0 && state < size());
    Percept masked = p;
    masked.agreeing &= ~socially_invisible;
    masked.disagreeing &= ~socially_invisible;
    for (const auto& r : states[state].rules)
      if (r.when.matches(masked)) return {r.target, states[r.target].out};
    return {fault, states[fault].out};
  }

  const std::string& state_name(int s) const { return states[s].name; }

  int state_index(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (states[i].name == name) return i;
    return -1;
  }

  // Human-readable machine listing for documentation and golden-file diffs.
  std::string dump() const {
    std::string out;
    out += "machine " + info.name + "\n";
    out += "  agents >= " + std::to_string(info.min_agents);
    out += ", tokens per agent = " + std::to_string(info.tokens_per_agent);
    out += info.movable ? " (movable)" : " (unmovable)";
    out += info.needs_orientation ? ", oriented ring required" : ", any ring";
    out += "\n  initial state " + states[initial].name + "\n\n";
    for (const auto& st : states) {
      out += "state " + st.name + ": " + to_string(st.out) + "\n";
      for (const auto& r : st.rules)
        out += "  -> " + states[r.target].name + "  when " + r.when.text() + "\n";
      if (st.rules.empty()) out += "  (terminal)\n";
    }
    return out;
  }
};

class AutomatonBuilder {
 public:
  explicit AutomatonBuilder(ProtocolInfo info) {
    a_.info = std::move(info);
    a_.fault = add_state("FAULT", Action{.halt = true});
  }

  int add_state(const std::string& name, Action out) {
    assert(a_.size() < 64);
    a_.states.push_back({name, out, {}});
    return a_.size() - 1;
  }

  void rule(int from, Guard g, int to) {
    assert(from >= 0 && from < a_.size() && to >= 0 && to < a_.size());
    a_.states[from].rules.push_back({std::move(g), to});
  }

  void always(int from, int to) { rule(from, Guard{}, to); }

  static std::uint64_t mask(std::initializer_list<int> ids) {
    std::uint64_t m = 0;
    for (int i : ids) m |= std::uint64_t{1} << i;
    return m;
  }

  void family(const std::string& name, std::uint64_t m) { a_.families[name] = m; }

  void socially_invisible(std::uint64_t m) { a_.socially_invisible = m; }

  Automaton finish(int initial) {
    a_.initial = initial;
    return std::move(a_);
  }

 private:
  Automaton a_;
};

}  // namespace bhs
