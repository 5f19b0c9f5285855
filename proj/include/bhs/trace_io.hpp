#pragma once

// Trace serialization: line-delimited records, one per round, preceded by a
// header carrying the full scenario so any trace file is self-describing and
// replayable, and closed by a summary line with the verdict.

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bhs/harness.hpp"
#include "bhs/verifier.hpp"
#include "bhs/world.hpp"

namespace bhs {

inline ordered_json percept_to_json(const Percept& p) {
  ordered_json j;
  j["agree"] = p.agreeing;
  j["disagree"] = p.disagreeing;
  j["tokens"] = p.tokens_here;
  j["carried"] = p.carried;
  j["arrival"] = to_string(p.arrival);
  j["left_marked"] = p.left_marked;
  j["right_marked"] = p.right_marked;
  return j;
}

inline void write_trace(std::ostream& os, const Trace& trace, const Automaton& automaton) {
  ordered_json header;
  header["type"] = "header";
  header["spec"] = spec_to_json(trace.spec);
  header["round_bound"] = trace.round_bound;
  os << header.dump() << "\n";
  for (const auto& round : trace.rounds) {
    ordered_json j;
    j["type"] = "round";
    j["round"] = round.round;
    ordered_json agents = ordered_json::array();
    for (const auto& ar : round.agents) {
      ordered_json a;
      a["id"] = ar.id;
      a["from"] = automaton.state_name(ar.state_before);
      a["to"] = automaton.state_name(ar.state_after);
      a["action"] = to_string(ar.action);
      a["node"] = ar.node_after;
      a["status"] = to_string(ar.status_after);
      a["carried"] = ar.carried_after;
      a["left_is_up"] = ar.left_is_up;
      if (ar.died_link >= 0) a["died_link"] = ar.died_link;
      a["percept"] = percept_to_json(ar.percept);
      agents.push_back(std::move(a));
    }
    j["agents"] = agents;
    ordered_json deltas = ordered_json::array();
    for (const auto& d : round.token_deltas) deltas.push_back({d[0], d[1]});
    j["token_deltas"] = deltas;
    ordered_json marks = ordered_json::array();
    for (const auto& m : round.marks_added)
      marks.push_back({{"link", m.link}, {"node", m.node}, {"agent", m.agent}});
    j["marks_added"] = marks;
    os << j.dump() << "\n";
  }
  const Verdict v = judge(trace);
  ordered_json end;
  end["type"] = "end";
  end["termination"] = to_string(trace.termination);
  end["rounds"] = trace.rounds_used();
  end["verdict"] = v.outcome == Outcome::success ? "success" : "failure";
  end["reason"] = to_string(v.reason);
  end["dead"] = v.dead_count;
  end["marked_links"] = v.marked_links;
  if (trace.fatal) end["fatal"] = std::string(to_string(trace.fatal->kind));
  os << end.dump() << "\n";
}

struct StoredTrace {
  ScenarioSpec spec;
  std::string verdict;
  std::string reason;
  int rounds = 0;
};

// Reads back the header and summary; the round records in between are for
// human and diff consumption.
inline std::optional<StoredTrace> read_trace_summary(std::istream& is) {
  StoredTrace out;
  std::string line;
  bool have_header = false, have_end = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("type")) return std::nullopt;
    const std::string type = j["type"].get<std::string>();
    if (type == "header") {
      auto spec = spec_from_json(j["spec"]);
      if (!spec) return std::nullopt;
      out.spec = *spec;
      have_header = true;
    } else if (type == "end") {
      out.verdict = j.value("verdict", "");
      out.reason = j.value("reason", "");
      out.rounds = j.value("rounds", 0);
      have_end = true;
    }
  }
  if (!have_header || !have_end) return std::nullopt;
  return out;
}

struct ReplayResult {
  bool reproduced = false;
  std::string stored_verdict, replayed_verdict;
  int stored_rounds = 0, replayed_rounds = 0;
};

// Re-simulates the stored scenario and compares verdict and round count.
inline std::optional<ReplayResult> replay(std::istream& is) {
  auto stored = read_trace_summary(is);
  if (!stored) return std::nullopt;
  auto automaton = automaton_by_name(stored->spec.protocol);
  if (!automaton) return std::nullopt;
  const Trace trace = run(stored->spec, *automaton);
  const Verdict v = judge(trace);
  ReplayResult r;
  r.stored_verdict = stored->verdict;
  r.replayed_verdict = v.outcome == Outcome::success ? "success" : "failure";
  r.stored_rounds = stored->rounds;
  r.replayed_rounds = trace.rounds_used();
  r.reproduced = r.stored_verdict == r.replayed_verdict && r.stored_rounds == r.replayed_rounds;
  return r;
}

// Fixed-width strip of the ring, one line per round, for eyeballing runs.
inline std::string render_strip(const RingWorld& world, const std::string& label) {
  std::ostringstream os;
  os << label << "\t";
  for (int v = 0; v < world.n(); ++v) {
    os << (world.link_marked(world.link_down(v)) ? 'X' : '|');
    std::string cell;
    if (v == world.black_hole()) cell += "BH";
    for (int t = 0; t < world.tokens_at(v); ++t) cell += '*';
    int agents_here = 0;
    std::string state;
    for (const auto& a : world.agents()) {
      if (a.status == AgentStatus::dead || a.node != v) continue;
      ++agents_here;
      state = world.automaton().state_name(a.state);
    }
    if (agents_here > 1) cell += std::to_string(agents_here) + "x";
    if (agents_here >= 1) cell += state;
    cell.resize(14, ' ');
    os << cell;
  }
  os << (world.link_marked(world.link_down(0)) ? 'X' : '|');
  return os.str();
}

}  // namespace bhs
