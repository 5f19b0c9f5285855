// Acceptance suite: the correctness claims and matching lower bounds the
// artifact must witness, each checked end to end and reported on one line.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "bhs/harness.hpp"
#include "bhs/protocols.hpp"
#include "bhs/trace_io.hpp"
#include "bhs/verifier.hpp"

using namespace bhs;

namespace {

constexpr int kJobs = 8;
constexpr std::uint64_t kSeed = 2024;

std::map<int, int> g_rounds_by_n;  // pooled across every accepted sweep

void pool_rounds(const SweepReport& rep) {
  for (const auto& [n, r] : rep.max_rounds_by_n) {
    auto& cur = g_rounds_by_n[n];
    cur = std::max(cur, r);
  }
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, "criterion " << criterion << ": " << detail);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TEST_CASE("1: movable-token sweep, oriented rings") {
  const auto t0 = std::chrono::steady_clock::now();
  const Automaton a = build_ring1();
  auto e = enumerate_exhaustive(a.info, "ring1", 4, 12, /*unoriented=*/false);
  const SweepReport rep = sweep(e.specs, a, kJobs);
  pool_rounds(rep);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "ring1 oriented n=4..12: " << rep.successes << "/" << rep.total
     << " success, death-count violations " << rep.property_violations << ", "
     << secs << "s";
  report(1, rep.total > 0 && rep.all_success() && secs < 60.0, os.str());
}

TEST_CASE("2: movable-token sweep, every labeling") {
  const Automaton a = build_ring1();
  auto e = enumerate_exhaustive(a.info, "ring1", 4, 9, /*unoriented=*/true);
  const SweepReport rep = sweep(e.specs, a, kJobs);
  pool_rounds(rep);
  std::ostringstream os;
  os << "ring1 unoriented n=4..9: " << rep.successes << "/" << rep.total << " success";
  report(2, rep.total > 0 && rep.all_success(), os.str());
}

TEST_CASE("3: oriented two-token sweep with its property pack") {
  const Automaton a = build_ring2();
  auto e = enumerate_exhaustive(a.info, "ring2", 5, 12, /*unoriented=*/false);
  const SweepReport rep = sweep(e.specs, a, kJobs);
  pool_rounds(rep);
  std::ostringstream os;
  os << "ring2 oriented n=5..12: " << rep.successes << "/" << rep.total
     << " success, property violations " << rep.property_violations;
  report(3, rep.total > 0 && rep.all_success(), os.str());
}

TEST_CASE("4: unoriented two-token sweep, exhaustive then sampled") {
  const Automaton a = build_ring3();
  auto e = enumerate_exhaustive(a.info, "ring3", 6, 9, /*unoriented=*/true);
  const SweepReport exhaustive = sweep(e.specs, a, kJobs);
  pool_rounds(exhaustive);

  std::vector<ScenarioSpec> sampled;
  for (int n = 10; n <= 40; ++n) {
    auto batch = sample_scenarios(a.info, "ring3", n, 256, kSeed, /*unoriented=*/true);
    sampled.insert(sampled.end(), batch.begin(), batch.end());
  }
  const SweepReport sampled_rep = sweep(sampled, a, kJobs);
  pool_rounds(sampled_rep);

  std::ostringstream os;
  os << "ring3 unoriented exhaustive n=6..9: " << exhaustive.successes << "/"
     << exhaustive.total << ", sampled n=10..40: " << sampled_rep.successes << "/"
     << sampled_rep.total << ", property violations "
     << exhaustive.property_violations + sampled_rep.property_violations;
  report(4,
         exhaustive.total > 0 && exhaustive.all_success() && sampled_rep.total == 31 * 256 &&
             sampled_rep.all_success(),
         os.str());
}

TEST_CASE("5: linear-time envelope over every accepted sweep") {
  REQUIRE(!g_rounds_by_n.empty());
  bool within = true;
  for (const auto& [n, r] : g_rounds_by_n)
    if (r > 30 * n + 30) within = false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(g_rounds_by_n.size());
  for (const auto& [n, r] : g_rounds_by_n) {
    sx += n;
    sy += r;
    sxx += static_cast<double>(n) * n;
    sxy += static_cast<double>(n) * r;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  std::ostringstream os;
  os << "max rounds within 30n+30 over " << g_rounds_by_n.size()
     << " ring sizes, fitted slope " << slope;
  report(5, within && slope < 30.0, os.str());
}

TEST_CASE("6: lower-bound witnesses") {
  bool ok = true;
  std::ostringstream os;

  auto w1 = adversary_search(build_ring1(), 2, 20);
  ok = ok && w1.has_value() && w1->n <= 20;
  os << "ring1 k=2 fails at n=" << (w1 ? w1->n : -1);

  auto w2 = adversary_search(build_ring2(), 3, 20);
  ok = ok && w2.has_value() && w2->n <= 20;
  os << ", ring2 k=3 at n=" << (w2 ? w2->n : -1);

  auto w3 = adversary_search(build_ring3(), 4, 20);
  ok = ok && w3.has_value() && w3->n <= 20;
  os << ", ring3 k=4 at n=" << (w3 ? w3->n : -1);

  int failures = 0, runs = 0;
  for (auto [id, params] : std::vector<std::pair<TheoremId, std::vector<int>>>{
           {TheoremId::one, {3, 2}},
           {TheoremId::one, {4, 1}},
           {TheoremId::three, {2, 3, 2}},
           {TheoremId::three, {2, 1, 4}},
           {TheoremId::four, {2, 2}},
           {TheoremId::four, {2, 4}}}) {
    auto witness = theorem_scenario(id, params);
    REQUIRE(witness);
    for (const auto& spec : witness->scenarios) {
      ++runs;
      failures += run_scenario(spec, witness->automaton).verdict.outcome == Outcome::failure;
    }
  }
  ok = ok && failures == runs;
  os << "; constructions defeated " << failures << "/" << runs;
  report(6, ok, os.str());
}

TEST_CASE("7: every marked link was bought with a death") {
  // Re-run representative slices of each sweep family, counting violations of
  // the death-before-mark trace property.
  long violations = 0, traces = 0;
  const Automaton r1 = build_ring1();
  for (const auto& spec : enumerate_exhaustive(r1.info, "ring1", 4, 9, false).specs) {
    const Trace t = run(spec, r1);
    const TraceFacts f = gather_facts(t, r1);
    violations += static_cast<long>(lemma1_violations(t, f).size());
    ++traces;
  }
  const Automaton r2 = build_ring2();
  for (const auto& spec : enumerate_exhaustive(r2.info, "ring2", 5, 10, false).specs) {
    const Trace t = run(spec, r2);
    const TraceFacts f = gather_facts(t, r2);
    violations += static_cast<long>(lemma1_violations(t, f).size());
    ++traces;
  }
  const Automaton r3 = build_ring3();
  for (const auto& spec : enumerate_exhaustive(r3.info, "ring3", 6, 8, true).specs) {
    const Trace t = run(spec, r3);
    const TraceFacts f = gather_facts(t, r3);
    violations += static_cast<long>(lemma1_violations(t, f).size());
    ++traces;
  }
  std::ostringstream os;
  os << violations << " violations across " << traces << " traces";
  report(7, traces > 0 && violations == 0, os.str());
}

TEST_CASE("8: determinism across worker counts and replays") {
  const Automaton r2 = build_ring2();
  auto e2 = enumerate_exhaustive(r2.info, "ring2", 5, 12, false);
  const std::string serial = sweep(e2.specs, r2, 1).to_json().dump();
  const std::string parallel = sweep(e2.specs, r2, 8).to_json().dump();
  const bool sweep_bytes_equal = serial == parallel;

  const Automaton r3 = build_ring3();
  std::vector<ScenarioSpec> sampled;
  for (int n = 10; n <= 14; ++n) {
    auto batch = sample_scenarios(r3.info, "ring3", n, 256, kSeed, true);
    sampled.insert(sampled.end(), batch.begin(), batch.end());
  }
  const bool sampled_bytes_equal =
      sweep(sampled, r3, 1).to_json().dump() == sweep(sampled, r3, 8).to_json().dump();

  // A stored failure exemplar replays to its recorded verdict.
  auto failing = adversary_search(r2, 3, 20);
  REQUIRE(failing);
  const Trace t = run(*failing, r2);
  std::stringstream file;
  write_trace(file, t, r2);
  auto replayed = replay(file);
  const bool replay_ok = replayed && replayed->reproduced &&
                         replayed->stored_verdict == "failure";

  std::ostringstream os;
  os << "exhaustive report bytes " << (sweep_bytes_equal ? "equal" : "differ")
     << ", sampled report bytes " << (sampled_bytes_equal ? "equal" : "differ")
     << ", failure exemplar " << (replay_ok ? "reproduced" : "diverged");
  report(8, sweep_bytes_equal && sampled_bytes_equal && replay_ok, os.str());
}
