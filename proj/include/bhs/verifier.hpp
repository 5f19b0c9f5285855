#pragma once

// Judges a completed trace against the search success criterion and checks
// the per-protocol execution properties.
//
// Success means: both links incident to the black hole are marked, no other
// link is marked, at least one agent is alive or halted, and the run
// terminated before the round bound. A wrong mark dominates every other
// failure reason.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bhs/agent.hpp"
#include "bhs/protocols.hpp"
#include "bhs/world.hpp"

namespace bhs {

enum class Outcome : std::uint8_t { success, failure };

enum class FailureReason : std::uint8_t {
  none,
  wrong_link_marked,
  missing_link_mark,
  no_survivor,
  timeout,
  protocol_fault,
};

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::wrong_link_marked: return "wrong-link-marked";
    case FailureReason::missing_link_mark: return "missing-link-mark";
    case FailureReason::no_survivor: return "no-survivor";
    case FailureReason::timeout: return "timeout";
    default: return "protocol-fault";
  }
}

struct Verdict {
  Outcome outcome = Outcome::failure;
  FailureReason reason = FailureReason::protocol_fault;
  int dead_count = 0;
  int survivors = 0;
  int rounds_used = 0;
  std::vector<int> marked_links;
};

struct DeathEvent {
  int agent = 0;
  int round = 0;
  int state = 0;    // state whose move entered the black hole
  int link = 0;     // link crossed
  int carried = 0;  // tokens still carried (destroyed)
};

// Flat view of the per-agent facts the verifier needs.
struct TraceFacts {
  std::vector<AgentStatus> final_status;
  std::vector<DeathEvent> deaths;
  std::vector<MarkEvent> marks;                  // first placements only
  std::vector<std::uint64_t> states_seen;        // per agent, mask of states held
  std::vector<int> right_leader_entry_round;     // -1 when never
  std::vector<std::uint8_t> right_leader_orientation;  // left_is_up at entry
  // (node, round) -> entries into the given family this round
  std::map<std::pair<int, int>, int> leader_entries;
  std::map<std::pair<int, int>, int> follower_entries;
};

inline TraceFacts gather_facts(const Trace& trace, const Automaton& automaton) {
  TraceFacts f;
  const int k = trace.spec.k();
  f.final_status.assign(static_cast<std::size_t>(k), AgentStatus::alive);
  f.states_seen.assign(static_cast<std::size_t>(k), 0);
  f.right_leader_entry_round.assign(static_cast<std::size_t>(k), -1);
  f.right_leader_orientation.assign(static_cast<std::size_t>(k), 0);
  const std::uint64_t rl = automaton.family("RIGHT_LEADER");
  const std::uint64_t leader_entry = automaton.family("LEADER_ENTRY");
  const std::uint64_t follower_entry = automaton.family("FOLLOWER_ENTRY");
  for (const auto& round : trace.rounds) {
    for (const auto& ar : round.agents) {
      const auto idx = static_cast<std::size_t>(ar.id);
      f.final_status[idx] = ar.status_after;
      f.states_seen[idx] |= std::uint64_t{1} << ar.state_after;
      const std::uint64_t bit_after = std::uint64_t{1} << ar.state_after;
      const std::uint64_t bit_before = std::uint64_t{1} << ar.state_before;
      if ((bit_after & rl) && f.right_leader_entry_round[idx] < 0) {
        f.right_leader_entry_round[idx] = round.round;
        f.right_leader_orientation[idx] = ar.left_is_up;
      }
      if ((bit_after & leader_entry) && !(bit_before & leader_entry))
        ++f.leader_entries[{ar.node_after, round.round}];
      if ((bit_after & follower_entry) && !(bit_before & follower_entry))
        ++f.follower_entries[{ar.node_after, round.round}];
      if (ar.status_after == AgentStatus::dead && ar.died_link >= 0)
        f.deaths.push_back({ar.id, round.round, ar.state_after, ar.died_link, ar.carried_after});
    }
    for (const auto& m : round.marks_added) f.marks.push_back(m);
  }
  return f;
}

inline Verdict judge(const Trace& trace) {
  Verdict v;
  const int n = trace.spec.n;
  const int bh = trace.spec.black_hole;
  std::set<int> marked;
  int survivors = 0;
  std::vector<AgentStatus> final_status(static_cast<std::size_t>(trace.spec.k()),
                                        AgentStatus::alive);
  for (const auto& round : trace.rounds) {
    for (const auto& m : round.marks_added) marked.insert(m.link);
    for (const auto& ar : round.agents)
      final_status[static_cast<std::size_t>(ar.id)] = ar.status_after;
  }
  for (auto s : final_status) {
    if (s == AgentStatus::dead) ++v.dead_count;
    else ++survivors;
  }
  v.survivors = survivors;
  v.rounds_used = trace.rounds_used();
  v.marked_links.assign(marked.begin(), marked.end());

  const int link_below = bh == 0 ? n - 1 : bh - 1;
  const int link_above = bh;
  bool wrong = false;
  for (int l : marked)
    if (l != link_below && l != link_above) wrong = true;
  const bool missing = !marked.count(link_below) || !marked.count(link_above);

  if (wrong) { v.reason = FailureReason::wrong_link_marked; return v; }
  if (trace.termination == Termination::fault || trace.termination == Termination::invalid) {
    v.reason = FailureReason::protocol_fault;
    return v;
  }
  if (trace.termination == Termination::bound) { v.reason = FailureReason::timeout; return v; }
  if (survivors == 0) { v.reason = FailureReason::no_survivor; return v; }
  if (missing) { v.reason = FailureReason::missing_link_mark; return v; }
  v.outcome = Outcome::success;
  v.reason = FailureReason::none;
  return v;
}

// Every marked link must have been entered earlier by an agent that died
// through it: marking without a witness death is impossible for a correct
// scheme.
inline std::vector<std::string> lemma1_violations(const Trace& trace,
                                                  const TraceFacts& facts) {
  std::vector<std::string> out;
  for (const auto& m : facts.marks) {
    bool witnessed = false;
    for (const auto& d : facts.deaths)
      if (d.link == m.link && d.round < m.round) { witnessed = true; break; }
    if (!witnessed)
      out.push_back("link " + std::to_string(m.link) + " marked at round " +
                    std::to_string(m.round) + " with no prior death through it");
  }
  (void)trace;
  return out;
}

// Bullet-list execution properties for the shipped protocols.
inline std::vector<std::string> check_properties(const Trace& trace,
                                                 const Automaton& automaton) {
  std::vector<std::string> out;
  const TraceFacts facts = gather_facts(trace, automaton);
  const std::string& name = automaton.info.name;
  const auto deaths = static_cast<int>(facts.deaths.size());

  auto in_family = [](std::uint64_t fam, int state) {
    return (fam & (std::uint64_t{1} << state)) != 0;
  };

  if (name == "ring1") {
    if (deaths != 2) out.push_back("expected exactly 2 deaths, saw " + std::to_string(deaths));
  } else if (name == "ring2" || name == "ring3") {
    const std::uint64_t check_left = automaton.family("CHECK_LEFT");
    const std::uint64_t lead = automaton.family("LEADER");
    const std::uint64_t rl = automaton.family("RIGHT_LEADER");
    const std::uint64_t opening = automaton.family("OPENING");

    int rl_agents = 0;
    std::vector<std::uint8_t> rl_orients;
    for (std::size_t i = 0; i < facts.right_leader_entry_round.size(); ++i) {
      if (facts.right_leader_entry_round[i] >= 0) {
        ++rl_agents;
        rl_orients.push_back(facts.right_leader_orientation[i]);
      }
    }
    bool any_leader = false;
    const std::uint64_t leader_entry = automaton.family("LEADER_ENTRY");
    for (auto seen : facts.states_seen)
      if (seen & leader_entry) any_leader = true;

    for (const auto& [key, count] : facts.leader_entries) {
      if (count > 1)
        out.push_back("two leaders created at node " + std::to_string(key.first) +
                      " in round " + std::to_string(key.second));
      auto it = facts.follower_entries.find(key);
      const int followers = it == facts.follower_entries.end() ? 0 : it->second;
      // A leader may legitimately end up without a follower (its candidate was
      // recruited as a right-follower first) and then stands down at the next
      // mark check; several followers for one leader is a pairing defect.
      if (followers > count)
        out.push_back("leader at node " + std::to_string(key.first) + " round " +
                      std::to_string(key.second) + " paired with " +
                      std::to_string(followers) + " followers");
    }
    if (!any_leader) out.push_back("no leader was ever created");

    if (name == "ring2") {
      int cl_deaths = 0;
      for (const auto& d : facts.deaths) {
        if (in_family(check_left, d.state)) ++cl_deaths;
        if (!in_family(check_left | lead | rl, d.state))
          out.push_back("agent died in forbidden state " + automaton.state_name(d.state));
      }
      if (cl_deaths != 1)
        out.push_back("expected exactly 1 CHECK-LEFT death, saw " + std::to_string(cl_deaths));
      if (deaths > 3) out.push_back("more than 3 deaths: " + std::to_string(deaths));
      if (rl_agents != 1)
        out.push_back("expected exactly 1 RIGHT-LEADER, saw " + std::to_string(rl_agents));
    } else {
      int early_deaths = 0;
      std::map<int, int> leaderish_deaths_by_link;
      for (const auto& d : facts.deaths) {
        if (d.carried >= 1) ++early_deaths;
        if (in_family(lead | rl, d.state)) ++leaderish_deaths_by_link[d.link];
        if (d.carried == 0 && !in_family(lead | rl, d.state))
          out.push_back("agent with both tokens placed died in state " +
                        automaton.state_name(d.state));
        if (d.carried >= 1 && !in_family(opening, d.state))
          out.push_back("pre-second-token death outside the opening: " +
                        automaton.state_name(d.state));
      }
      if (early_deaths != 2)
        out.push_back("expected exactly 2 deaths before the second token, saw " +
                      std::to_string(early_deaths));
      if (deaths > 4) out.push_back("more than 4 deaths: " + std::to_string(deaths));
      if (rl_agents < 1 || rl_agents > 2)
        out.push_back("expected 1 or 2 RIGHT-LEADERs, saw " + std::to_string(rl_agents));
      if (rl_agents == 2 && rl_orients[0] == rl_orients[1])
        out.push_back("two RIGHT-LEADERs with the same orientation");
      for (const auto& [link, count] : leaderish_deaths_by_link)
        if (count > 1)
          out.push_back("several leaders died through link " + std::to_string(link));
    }
  }
  return out;
}

}  // namespace bhs
