// Batch command line for the ring search simulator: run one scenario, sweep
// scenario families, hunt for counterexamples, materialize the lower-bound
// constructions, dump the protocol state machines, and replay stored traces.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bhs/harness.hpp"
#include "bhs/protocols.hpp"
#include "bhs/trace_io.hpp"
#include "bhs/verifier.hpp"

namespace {

struct RangeArg {
  int lo = 0, hi = 0;
};

bool parse_range(const std::string& text, RangeArg& out) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      out.lo = out.hi = std::stoi(text);
    } else {
      out.lo = std::stoi(text.substr(0, dots));
      out.hi = std::stoi(text.substr(dots + 2));
    }
  } catch (...) {
    return false;
  }
  return out.lo > 0 && out.hi >= out.lo;
}

std::vector<int> parse_csv_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> parse_labeling(const std::string& text) {
  std::vector<std::uint8_t> out;
  for (char c : text) {
    if (c != '0' && c != '1') return std::nullopt;
    out.push_back(c == '1');
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronous ring black hole search simulator"};
  app.require_subcommand(1);

  std::string protocol = "ring1";
  std::string out_path;
  std::string format = "human";
  int jobs = 1;
  std::uint64_t seed = 1;

  // --- run ---
  auto* cmd_run = app.add_subcommand("run", "run one scenario and print its trace");
  int run_n = 0, run_bh = 0, run_bound = 0;
  std::string run_homebases, run_labeling;
  bool run_oriented = true, run_unoriented = false;
  cmd_run->add_option("--protocol", protocol, "ring1 | ring2 | ring3")->required();
  cmd_run->add_option("--n", run_n, "ring size")->required();
  cmd_run->add_option("--bh", run_bh, "black hole node");
  cmd_run->add_option("--homebases", run_homebases, "comma-separated homebases")->required();
  cmd_run->add_option("--labeling", run_labeling, "per-node port-1 side, e.g. 0100110");
  cmd_run->add_flag("--oriented", run_oriented, "consistent global orientation (default)");
  cmd_run->add_flag("--unoriented", run_unoriented, "arbitrary port labeling");
  cmd_run->add_option("--bound", run_bound, "round bound (default 30n+30)");
  cmd_run->add_option("--format", format, "human | structured");
  cmd_run->add_option("--out", out_path, "write output to a file");

  // --- sweep ---
  auto* cmd_sweep = app.add_subcommand("sweep", "run a scenario family and report");
  std::string sweep_n = "4..9";
  bool sweep_exhaustive = false, sweep_sampled = false;
  cmd_sweep->add_option("--protocol", protocol)->required();
  cmd_sweep->add_option("--n", sweep_n, "ring size or range, e.g. 6..9")->required();
  cmd_sweep->add_flag("--exhaustive", sweep_exhaustive, "every placement (and labeling)");
  cmd_sweep->add_flag("--sampled", sweep_sampled, "256 seeded samples per ring size");
  cmd_sweep->add_option("--seed", seed, "sampling seed");
  cmd_sweep->add_option("--jobs", jobs, "worker threads");
  cmd_sweep->add_option("--out", out_path, "write the report to a file");

  // --- adversary ---
  auto* cmd_adv = app.add_subcommand(
      "adversary", "search for the first failing scenario (exit 1 when found)");
  int adv_agents = 2, adv_nmax = 20, adv_tokens = 0;
  bool adv_unoriented = false;
  cmd_adv->add_option("--protocol", protocol)->required();
  cmd_adv->add_option("--agents", adv_agents, "agent count to force")->required();
  cmd_adv->add_option("--tokens", adv_tokens, "token budget (informational; fixed per protocol)");
  cmd_adv->add_option("--nmax", adv_nmax, "largest ring size to try");
  cmd_adv->add_flag("--unoriented", adv_unoriented, "also enumerate port labelings");
  cmd_adv->add_option("--out", out_path);

  // --- theorem ---
  auto* cmd_thm = app.add_subcommand(
      "theorem", "materialize a lower-bound construction and run it (exit 0 when it fails as "
                 "predicted)");
  std::string thm_id = "one";
  int thm_k = 3, thm_p = 0, thm_t = 2, thm_x = 1, thm_y = 1;
  cmd_thm->add_option("--id", thm_id, "one | three | four")->required();
  cmd_thm->add_option("--k", thm_k, "agents (theorem one)");
  cmd_thm->add_option("--p", thm_p, "drop delay (theorem one)");
  cmd_thm->add_option("--t", thm_t, "tokens per agent (theorems three and four)");
  cmd_thm->add_option("--x", thm_x, "hole gap");
  cmd_thm->add_option("--y", thm_y, "second hole gap (theorem three)");
  cmd_thm->add_option("--out", out_path);

  // --- dump-fsm ---
  auto* cmd_dump = app.add_subcommand("dump-fsm", "print a protocol's state machine");
  cmd_dump->add_option("--protocol", protocol)->required();
  cmd_dump->add_option("--out", out_path);

  // --- replay ---
  auto* cmd_replay = app.add_subcommand("replay", "re-run a stored trace and compare");
  std::string replay_path;
  cmd_replay->add_option("--in", replay_path, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  using namespace bhs;

  if (cmd_run->parsed()) {
    auto automaton = automaton_by_name(protocol);
    if (!automaton) {
      std::fprintf(stderr, "unknown protocol '%s'\n", protocol.c_str());
      return 2;
    }
    ScenarioSpec spec;
    spec.protocol = protocol;
    spec.n = run_n;
    spec.black_hole = run_bh;
    spec.homebases = parse_csv_ints(run_homebases);
    spec.oriented = !run_unoriented && run_labeling.empty();
    spec.round_bound = run_bound;
    if (!spec.oriented) {
      auto lab = parse_labeling(run_labeling);
      if (!lab || static_cast<int>(lab->size()) != run_n) {
        std::fprintf(stderr, "unoriented runs need --labeling with one bit per node\n");
        return 2;
      }
      spec.port_one_up = *lab;
    }
    if (auto err = validate_spec(spec)) {
      std::fprintf(stderr, "invalid scenario: %s\n", err->c_str());
      return 2;
    }
    const Trace trace = run(spec, *automaton);
    const Verdict v = judge(trace);
    std::ostringstream os;
    if (format == "structured") {
      write_trace(os, trace, *automaton);
    } else {
      RingWorld world(spec, *automaton);
      os << render_strip(world, "start") << "\n";
      for (const auto& rec : trace.rounds) {
        std::optional<Fatal> fatal;
        world.step(fatal);
        os << render_strip(world, "r" + std::to_string(rec.round)) << "\n";
      }
      os << "termination: " << to_string(trace.termination)
         << ", rounds: " << trace.rounds_used()
         << ", verdict: " << (v.outcome == Outcome::success ? "success" : "failure")
         << " (" << to_string(v.reason) << ")"
         << ", dead: " << v.dead_count << ", marked links:";
      for (int l : v.marked_links) os << " " << l;
      os << "\n";
      for (const auto& viol : check_properties(trace, *automaton))
        os << "property violation: " << viol << "\n";
    }
    emit(os.str(), out_path);
    return v.outcome == Outcome::success ? 0 : 1;
  }

  if (cmd_sweep->parsed()) {
    auto id = protocol_from_string(protocol);
    if (!id) {
      std::fprintf(stderr, "unknown protocol '%s'\n", protocol.c_str());
      return 2;
    }
    RangeArg range;
    if (!parse_range(sweep_n, range)) {
      std::fprintf(stderr, "bad --n range '%s'\n", sweep_n.c_str());
      return 2;
    }
    const Automaton automaton = build_protocol(*id);
    const bool unoriented = !automaton.info.needs_orientation && *id != ProtocolId::ring1;
    std::vector<ScenarioSpec> specs;
    SweepReport report;
    if (sweep_sampled) {
      for (int n = range.lo; n <= range.hi; ++n) {
        auto batch = sample_scenarios(automaton.info, protocol, n, 256, seed, unoriented);
        specs.insert(specs.end(), batch.begin(), batch.end());
      }
      report = sweep(specs, automaton, jobs);
      report.mode = "sampled";
      report.seed = seed;
    } else {
      auto e = enumerate_exhaustive(automaton.info, protocol, range.lo, range.hi, unoriented);
      if (e.over_budget)
        std::fprintf(stderr, "warning: exhaustive enumeration above the configured budget\n");
      report = sweep(e.specs, automaton, jobs);
      report.mode = "exhaustive";
    }
    emit(report.to_json().dump(2) + "\n", out_path);
    return report.all_success() ? 0 : 1;
  }

  if (cmd_adv->parsed()) {
    auto automaton = automaton_by_name(protocol);
    if (!automaton) {
      std::fprintf(stderr, "unknown protocol '%s'\n", protocol.c_str());
      return 2;
    }
    auto found = adversary_search(*automaton, adv_agents, adv_nmax, adv_unoriented);
    if (!found) {
      emit("none\n", out_path);
      return 0;
    }
    emit(spec_to_json(*found).dump(2) + "\n", out_path);
    return 1;  // a counterexample exists
  }

  if (cmd_thm->parsed()) {
    std::optional<TheoremWitness> witness;
    if (thm_id == "one")
      witness = theorem_scenario(TheoremId::one, {thm_k, thm_p});
    else if (thm_id == "three")
      witness = theorem_scenario(TheoremId::three, {thm_t, thm_x, thm_y});
    else if (thm_id == "four")
      witness = theorem_scenario(TheoremId::four, {thm_t, thm_x});
    if (!witness) {
      std::fprintf(stderr, "bad theorem id or parameters\n");
      return 2;
    }
    std::ostringstream os;
    bool all_failed = true;
    for (const auto& spec : witness->scenarios) {
      const Trace trace = run(spec, witness->automaton);
      const Verdict v = judge(trace);
      ordered_json j;
      j["spec"] = spec_to_json(spec);
      j["verdict"] = v.outcome == Outcome::success ? "success" : "failure";
      j["reason"] = to_string(v.reason);
      j["rounds"] = trace.rounds_used();
      j["dead"] = v.dead_count;
      os << j.dump(2) << "\n";
      all_failed = all_failed && v.outcome == Outcome::failure;
    }
    emit(os.str(), out_path);
    return all_failed ? 0 : 1;  // the construction is expected to defeat the automaton
  }

  if (cmd_dump->parsed()) {
    auto automaton = automaton_by_name(protocol);
    if (!automaton) {
      std::fprintf(stderr, "unknown protocol '%s'\n", protocol.c_str());
      return 2;
    }
    emit(automaton->dump(), out_path);
    return 0;
  }

  if (cmd_replay->parsed()) {
    std::ifstream is(replay_path);
    if (!is) {
      std::fprintf(stderr, "cannot open '%s'\n", replay_path.c_str());
      return 2;
    }
    auto result = replay(is);
    if (!result) {
      std::fprintf(stderr, "not a readable trace file\n");
      return 2;
    }
    std::printf("stored: %s in %d rounds; replayed: %s in %d rounds; %s\n",
                result->stored_verdict.c_str(), result->stored_rounds,
                result->replayed_verdict.c_str(), result->replayed_rounds,
                result->reproduced ? "reproduced" : "MISMATCH");
    return result->reproduced ? 0 : 1;
  }
  return 2;
}
