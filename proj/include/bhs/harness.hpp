#pragma once

// Scenario generation, sweeps, and adversarial search.
//
// Scenario canonical form fixes the black hole at node 0 (rotation symmetry
// of the anonymous ring); unoriented scenarios are additionally deduplicated
// against their mirror image (reflection through node 0, which flips every
// port label). Sweeps are embarrassingly parallel: results are gathered by
// scenario index, so the report is byte-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bhs/protocols.hpp"
#include "bhs/verifier.hpp"
#include "bhs/world.hpp"

namespace bhs {

using ordered_json = nlohmann::ordered_json;

inline std::string labeling_string(const ScenarioSpec& s) {
  std::string out;
  for (auto b : s.port_one_up) out += b ? '1' : '0';
  return out;
}

inline ordered_json spec_to_json(const ScenarioSpec& s) {
  ordered_json j;
  j["protocol"] = s.protocol;
  j["n"] = s.n;
  j["black_hole"] = s.black_hole;
  j["homebases"] = s.homebases;
  j["oriented"] = s.oriented;
  if (!s.oriented) j["labeling"] = labeling_string(s);
  if (s.round_bound > 0) j["round_bound"] = s.round_bound;
  return j;
}

inline std::optional<ScenarioSpec> spec_from_json(const ordered_json& j) {
  ScenarioSpec s;
  if (!j.contains("n") || !j.contains("black_hole") || !j.contains("homebases"))
    return std::nullopt;
  s.protocol = j.value("protocol", std::string{});
  s.n = j["n"].get<int>();
  s.black_hole = j["black_hole"].get<int>();
  s.homebases = j["homebases"].get<std::vector<int>>();
  s.oriented = j.value("oriented", true);
  if (!s.oriented) {
    const std::string lab = j.value("labeling", std::string{});
    for (char c : lab) s.port_one_up.push_back(c == '1');
  }
  s.round_bound = j.value("round_bound", 0);
  if (validate_spec(s)) return std::nullopt;
  return s;
}

// Deterministic generator, independent of the standard library.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

inline void combinations(int n, int k, int start, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int v = start; v < n; ++v) {
    cur.push_back(v);
    combinations(n, k, v + 1, cur, out);
    cur.pop_back();
  }
}

// All placements of k homebases on nodes 1..n-1 with the black hole at 0.
inline std::vector<std::vector<int>> placements(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  combinations(n, k, 1, cur, out);
  return out;
}

// Mirror image through node 0: node v maps to n-v, and every port label
// flips side.
inline std::pair<std::vector<int>, std::vector<std::uint8_t>> reflected(
    const std::vector<int>& homebases, const std::vector<std::uint8_t>& labeling, int n) {
  std::vector<int> hb;
  for (int h : homebases) hb.push_back(h == 0 ? 0 : n - h);
  std::sort(hb.begin(), hb.end());
  std::vector<std::uint8_t> lab(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    const int rv = v == 0 ? 0 : n - v;
    lab[static_cast<std::size_t>(rv)] = !labeling[static_cast<std::size_t>(v)];
  }
  return {hb, lab};
}

struct Enumeration {
  std::vector<ScenarioSpec> specs;
  bool over_budget = false;  // estimated count passed the configured cap
};

// Exhaustive canonical scenarios for one protocol over n and k ranges.
// Oriented: every placement. Unoriented: every placement x labeling pair,
// keeping the lexicographically smaller of each mirror pair.
inline Enumeration enumerate_exhaustive(const ProtocolInfo& info, const std::string& protocol,
                                        int n_lo, int n_hi, bool unoriented,
                                        long budget_cap = 2000000) {
  Enumeration out;
  long estimate = 0;
  for (int n = n_lo; n <= n_hi; ++n) {
    long per_n = 0;
    for (int k = info.min_agents; k <= n - 1; ++k) {
      long c = 1;
      for (int i = 0; i < k; ++i) c = c * (n - 1 - i) / (i + 1);
      per_n += c;
    }
    estimate += unoriented ? per_n << n : per_n;
  }
  out.over_budget = estimate > budget_cap;

  for (int n = n_lo; n <= n_hi; ++n) {
    for (int k = info.min_agents; k <= n - 1; ++k) {
      for (const auto& hb : placements(n, k)) {
        if (!unoriented) {
          ScenarioSpec s;
          s.protocol = protocol;
          s.n = n;
          s.black_hole = 0;
          s.homebases = hb;
          s.oriented = true;
          out.specs.push_back(std::move(s));
          continue;
        }
        for (long bits = 0; bits < (1L << n); ++bits) {
          std::vector<std::uint8_t> lab(static_cast<std::size_t>(n), 0);
          for (int v = 0; v < n; ++v) lab[static_cast<std::size_t>(v)] = (bits >> v) & 1;
          const auto mirror = reflected(hb, lab, n);
          if (std::tie(mirror.first, mirror.second) < std::tie(hb, lab)) continue;
          ScenarioSpec s;
          s.protocol = protocol;
          s.n = n;
          s.black_hole = 0;
          s.homebases = hb;
          s.oriented = false;
          s.port_one_up = lab;
          out.specs.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

// Seed-deterministic sample of `count` scenarios for one ring size: each
// draw picks an agent count, a placement, and (for unoriented protocols) a
// fresh labeling.
inline std::vector<ScenarioSpec> sample_scenarios(const ProtocolInfo& info,
                                                  const std::string& protocol, int n, int count,
                                                  std::uint64_t seed, bool unoriented) {
  std::vector<ScenarioSpec> out;
  for (int i = 0; i < count; ++i) {
    SplitMix64 rng(seed ^ (static_cast<std::uint64_t>(n) << 32) ^
                   static_cast<std::uint64_t>(i) * 0x9e3779b9ull);
    ScenarioSpec s;
    s.protocol = protocol;
    s.n = n;
    s.black_hole = 0;
    const int k_max = n - 1;
    const int k = info.min_agents +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(k_max - info.min_agents + 1)));
    std::vector<int> nodes;
    for (int v = 1; v < n; ++v) nodes.push_back(v);
    for (int j = 0; j < k; ++j) {
      const auto pick = j + static_cast<int>(rng.below(nodes.size() - static_cast<std::size_t>(j)));
      std::swap(nodes[static_cast<std::size_t>(j)], nodes[static_cast<std::size_t>(pick)]);
    }
    s.homebases.assign(nodes.begin(), nodes.begin() + k);
    std::sort(s.homebases.begin(), s.homebases.end());
    if (unoriented) {
      s.oriented = false;
      s.port_one_up.resize(static_cast<std::size_t>(n));
      for (int v = 0; v < n; ++v) s.port_one_up[static_cast<std::size_t>(v)] = rng.next() & 1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct RunOutcome {
  Verdict verdict;
  int property_violations = 0;
  int lemma_violations = 0;
  int rounds = 0;
  int n = 0;
  std::string first_violation;
};

inline RunOutcome run_scenario(const ScenarioSpec& spec, const Automaton& automaton) {
  const Trace trace = run(spec, automaton);
  RunOutcome r;
  r.verdict = judge(trace);
  r.rounds = trace.rounds_used();
  r.n = spec.n;
  const auto violations = check_properties(trace, automaton);
  r.property_violations = static_cast<int>(violations.size());
  if (!violations.empty()) r.first_violation = violations.front();
  const TraceFacts facts = gather_facts(trace, automaton);
  r.lemma_violations = static_cast<int>(lemma1_violations(trace, facts).size());
  return r;
}

struct SweepReport {
  std::string protocol;
  std::string mode;
  std::uint64_t seed = 0;
  long total = 0;
  long successes = 0;
  std::map<std::string, long> failures_by_reason;
  long property_violations = 0;
  long lemma_violations = 0;
  std::map<int, int> max_rounds_by_n;
  std::vector<ScenarioSpec> failure_exemplars;  // first few, in canonical order
  std::vector<std::string> violation_exemplars;

  bool all_success() const {
    return successes == total && property_violations == 0 && lemma_violations == 0;
  }

  // Least-squares slope of max rounds against ring size.
  double fitted_slope() const {
    if (max_rounds_by_n.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(max_rounds_by_n.size());
    for (const auto& [n, r] : max_rounds_by_n) {
      sx += n;
      sy += r;
      sxx += static_cast<double>(n) * n;
      sxy += static_cast<double>(n) * r;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }

  ordered_json to_json() const {
    ordered_json j;
    j["protocol"] = protocol;
    j["mode"] = mode;
    if (mode != "exhaustive") j["seed"] = seed;
    j["scenarios"] = total;
    j["successes"] = successes;
    ordered_json fails = ordered_json::object();
    for (const auto& [reason, count] : failures_by_reason) fails[reason] = count;
    j["failures"] = fails;
    j["property_violations"] = property_violations;
    j["lemma1_violations"] = lemma_violations;
    ordered_json rounds = ordered_json::array();
    for (const auto& [n, r] : max_rounds_by_n) rounds.push_back({n, r});
    j["max_rounds_by_n"] = rounds;
    char slope[32];
    std::snprintf(slope, sizeof slope, "%.6f", fitted_slope());
    j["fitted_slope"] = slope;
    ordered_json ex = ordered_json::array();
    for (const auto& s : failure_exemplars) ex.push_back(spec_to_json(s));
    j["failure_exemplars"] = ex;
    j["violation_exemplars"] = violation_exemplars;
    return j;
  }
};

// Runs every scenario and aggregates in input order; `jobs` only controls
// parallelism, never the report.
inline SweepReport sweep(const std::vector<ScenarioSpec>& specs, const Automaton& automaton,
                         int jobs = 1, int exemplar_cap = 8) {
  std::vector<RunOutcome> results(specs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) results[i] = run_scenario(specs[i], automaton);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= specs.size()) return;
        results[i] = run_scenario(specs[i], automaton);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepReport rep;
  rep.protocol = automaton.info.name;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& r = results[i];
    ++rep.total;
    if (r.verdict.outcome == Outcome::success) {
      ++rep.successes;
    } else {
      ++rep.failures_by_reason[to_string(r.verdict.reason)];
      if (static_cast<int>(rep.failure_exemplars.size()) < exemplar_cap)
        rep.failure_exemplars.push_back(specs[i]);
    }
    rep.property_violations += r.property_violations;
    if (r.property_violations > 0 &&
        static_cast<int>(rep.violation_exemplars.size()) < exemplar_cap)
      rep.violation_exemplars.push_back(r.first_violation);
    rep.lemma_violations += r.lemma_violations;
    auto& mr = rep.max_rounds_by_n[r.n];
    mr = std::max(mr, r.rounds);
  }
  return rep;
}

// First scenario, in canonical lexicographic order over (n, placement,
// labeling), on which the automaton fails the search criterion.
inline std::optional<ScenarioSpec> adversary_search(const Automaton& automaton, int k, int n_max,
                                                    bool include_labelings = false) {
  for (int n = std::max(3, k + 1); n <= n_max; ++n) {
    for (const auto& hb : placements(n, k)) {
      if (!include_labelings) {
        ScenarioSpec s;
        s.protocol = automaton.info.name;
        s.n = n;
        s.black_hole = 0;
        s.homebases = hb;
        s.oriented = true;
        if (run_scenario(s, automaton).verdict.outcome == Outcome::failure) return s;
        continue;
      }
      for (long bits = 0; bits < (1L << n); ++bits) {
        ScenarioSpec s;
        s.protocol = automaton.info.name;
        s.n = n;
        s.black_hole = 0;
        s.homebases = hb;
        s.oriented = false;
        s.port_one_up.assign(static_cast<std::size_t>(n), 0);
        for (int v = 0; v < n; ++v) s.port_one_up[static_cast<std::size_t>(v)] = (bits >> v) & 1;
        if (run_scenario(s, automaton).verdict.outcome == Outcome::failure) return s;
      }
    }
  }
  return std::nullopt;
}

// Observes a solo agent on an effectively infinite ring (no other agents, no
// black hole in reach) and reports where it first drops a token: x is the
// signed displacement at the drop, p the farthest distance wandered before
// it. Automata that never drop report (0, 0).
struct DropProfile {
  int x = 0;
  int p = 0;
  bool dropped = false;
};

inline DropProfile probe_token_drop(const Automaton& automaton, int horizon = 128) {
  const int n = 4 * horizon + 8;
  ScenarioSpec spec;
  spec.protocol = automaton.info.name;
  spec.n = n;
  spec.black_hole = 0;
  spec.homebases = {n / 2};
  spec.oriented = true;
  spec.round_bound = horizon;
  const Trace trace = run(spec, automaton, horizon);
  DropProfile out;
  int far = 0;
  for (const auto& round : trace.rounds) {
    for (const auto& ar : round.agents) {
      const int displacement = ar.node_after - n / 2;
      if (ar.action.token == TokenOp::put && !out.dropped) {
        out.dropped = true;
        // The put landed on the node occupied at the start of the round.
        out.x = ar.action.move == Rel::none ? displacement
                                            : displacement + (ar.node_after > n / 2 ? -1 : 1);
        out.p = std::max(far, std::abs(out.x));
        return out;
      }
      far = std::max(far, std::abs(displacement));
    }
  }
  return out;
}

enum class TheoremId { one, three, four };

struct TheoremWitness {
  std::string name;
  Automaton automaton;
  std::vector<ScenarioSpec> scenarios;
};

// The lower-bound constructions, instantiated for the bundled automata.
//
// one(k, p): rings of size 2k(p+1) and 2(k+1)(p+1) with agents spaced
//   2(p+1) apart and the hole centered in one gap, run against the
//   single-unmovable-token automaton that drops after p steps. Every
//   surviving copy marks in lockstep, so marks land a fixed distance apart
//   and cannot all be right.
// three(t, x, y), 1 <= x,y <= 2t: ring of size 8t+x+y, three agents spaced
//   4t apart, hole at distances x and y from its neighbors; run with the
//   oriented two-token protocol below its agent minimum.
// four(t, x), 1 <= x <= 2t: ring of size 3(4t+1)+2x, four agents spaced
//   4t+1 apart, hole centered symmetrically, with the port labeling chosen
//   mirror-symmetric so the two nearest agents die simultaneously and the
//   survivors stay locked in symmetry; run with the unoriented two-token
//   protocol below its agent minimum.
inline std::optional<TheoremWitness> theorem_scenario(TheoremId id,
                                                      const std::vector<int>& params) {
  if (id == TheoremId::one) {
    if (params.size() != 2) return std::nullopt;
    const int k = params[0], p = params[1];
    if (k < 2 || p < 0 || p > 16) return std::nullopt;
    TheoremWitness w{"one", build_single_unmovable_witness(p), {}};
    for (int agents : {k, k + 1}) {
      const int n = 2 * agents * (p + 1);
      ScenarioSpec s;
      s.protocol = w.automaton.info.name;
      s.n = n;
      s.black_hole = 0;
      s.oriented = true;
      for (int i = 0; i < agents; ++i) s.homebases.push_back((p + 1) + 2 * (p + 1) * i);
      if (validate_spec(s)) return std::nullopt;
      w.scenarios.push_back(std::move(s));
    }
    return w;
  }
  if (id == TheoremId::three) {
    if (params.size() != 3) return std::nullopt;
    const int t = params[0], x = params[1], y = params[2];
    if (t < 1 || x < 1 || x > 2 * t || y < 1 || y > 2 * t) return std::nullopt;
    TheoremWitness w{"three", build_ring2(), {}};
    ScenarioSpec s;
    s.protocol = "ring2";
    s.n = 8 * t + x + y;
    s.black_hole = 0;
    s.oriented = true;
    s.homebases = {y, y + 4 * t, y + 8 * t};
    if (validate_spec(s)) return std::nullopt;
    w.scenarios.push_back(std::move(s));
    return w;
  }
  if (params.size() != 2) return std::nullopt;
  const int t = params[0], x = params[1];
  if (t < 1 || x < 1 || x > 2 * t) return std::nullopt;
  TheoremWitness w{"four", build_ring3(), {}};
  const int spacing = 4 * t + 1;
  ScenarioSpec s;
  s.protocol = "ring3";
  s.n = 3 * spacing + 2 * x;
  s.black_hole = 0;
  s.oriented = false;
  s.homebases = {x, x + spacing, x + 2 * spacing, x + 3 * spacing};
  s.port_one_up.assign(static_cast<std::size_t>(s.n), 0);
  for (int v = 1; v < s.n; ++v)
    s.port_one_up[static_cast<std::size_t>(v)] = v > s.n / 2;  // mirror-symmetric labeling
  if (validate_spec(s)) return std::nullopt;
  w.scenarios.push_back(std::move(s));
  return w;
}

// Rotates a canonical scenario: node v of the original becomes v + shift.
inline ScenarioSpec rotate_spec(const ScenarioSpec& spec, int shift) {
  ScenarioSpec s = spec;
  s.black_hole = (spec.black_hole + shift) % spec.n;
  for (auto& h : s.homebases) h = (h + shift) % spec.n;
  std::sort(s.homebases.begin(), s.homebases.end());
  if (!spec.oriented) {
    s.port_one_up.assign(static_cast<std::size_t>(spec.n), 0);
    for (int v = 0; v < spec.n; ++v)
      s.port_one_up[static_cast<std::size_t>((v + shift) % spec.n)] =
          spec.port_one_up[static_cast<std::size_t>(v)];
  }
  return s;
}

}  // namespace bhs
