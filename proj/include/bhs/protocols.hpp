#pragma once

// The three shipped protocols, compiled into explicit Moore machines.
//
// Compilation conventions, applied uniformly:
//  - "Move <dir> until X" becomes a self-looping move state whose transition
//    checks X on the node the previous move landed on. "until the NEXT node"
//    means the walk takes at least one step before the first check.
//  - "Wait until X" becomes a no-action self-loop guarded on X.
//  - A walk that ends in "put the token and branch on the company" folds into
//    one transition: the branch reads the same percept that ended the walk
//    and the put rides the entry state of the chosen target. Both partners of
//    a pairing therefore commit in the same round, each reacting to the
//    other's previous state, which keeps the subsequent probe/wait cycles
//    phase-locked.
//  - Guard chains are evaluated top to bottom exactly as written; the first
//    match wins. A branch point that matches nothing holds in place and
//    re-evaluates (ring2), or takes the written catch-all (ring3).
//  - A leader launches a paired walk only once a committed follower is
//    visible; the follower commits only once the leader (or its waiting
//    right-leader) is visible. One dispatcher round on each side makes the
//    rendezvous race-free.
//
// Cautious walk (movable token): put, step forward, step back to pick the
// token up, step forward again; the token guards the probed link for the
// three rounds. Paired walk (unmovable tokens): the leader probes forward and
// comes back while the follower waits two rounds; a leader missing on the
// third round reveals the black hole behind the probed link.

#include <optional>
#include <string>
#include <vector>

#include "bhs/agent.hpp"
#include "bhs/world.hpp"

namespace bhs {

enum class ProtocolId { ring1, ring2, ring3 };

inline const char* to_string(ProtocolId p) {
  switch (p) {
    case ProtocolId::ring1: return "ring1";
    case ProtocolId::ring2: return "ring2";
    default: return "ring3";
  }
}

inline std::optional<ProtocolId> protocol_from_string(const std::string& s) {
  if (s == "ring1") return ProtocolId::ring1;
  if (s == "ring2") return ProtocolId::ring2;
  if (s == "ring3") return ProtocolId::ring3;
  return std::nullopt;
}

// --- ring1: k >= 3 agents, one movable token each, any ring ----------
//
// Sweep left by cautious walk until an abandoned token (a token with no agent
// beside it) or an already-marked link stops the walk; mark left; sweep right
// the same way; mark right; halt.
//
// The correctness of the sweep rests on every walker staying at the same
// cautious-walk phase, so a token seen at a check round can only be an
// abandoned one or belong to an agent standing beside it. Marking therefore
// rides along with the turn-around step (mark left + put + move right in one
// round) instead of spending a round, which would shear the walker out of
// phase with everyone else.
inline Automaton build_ring1() {
  AutomatonBuilder b({"ring1", 3, 1, /*movable=*/true, /*needs_orientation=*/false});

  const int start = b.add_state("START", {});
  const int l_put = b.add_state("SWEEP_L_PUT", {.token = TokenOp::put, .move = Rel::left});
  const int l_back = b.add_state("SWEEP_L_BACK", {.move = Rel::right});
  const int l_pick = b.add_state("SWEEP_L_PICK", {.token = TokenOp::pick, .move = Rel::left});
  const int turn =
      b.add_state("MARK_LEFT_TURN", {.token = TokenOp::put, .move = Rel::right, .mark = Rel::left});
  const int r_back = b.add_state("SWEEP_R_BACK", {.move = Rel::left});
  const int r_pick = b.add_state("SWEEP_R_PICK", {.token = TokenOp::pick, .move = Rel::right});
  const int r_put = b.add_state("SWEEP_R_PUT", {.token = TokenOp::put, .move = Rel::right});
  const int mark_r = b.add_state("MARK_RIGHT", {.mark = Rel::right, .halt = true});

  b.always(start, l_put);
  b.always(l_put, l_back);
  b.rule(l_back, Guard{}.tok(TokenCond::ge1), l_pick);  // own token must be back home
  b.rule(l_pick, Guard{}.tok(TokenCond::ge1).alone(), turn);
  b.rule(l_pick, Guard{}.left(LinkCond::marked), turn);
  b.always(l_pick, l_put);
  b.always(turn, r_back);
  b.always(r_put, r_back);
  b.rule(r_back, Guard{}.tok(TokenCond::ge1), r_pick);
  b.rule(r_pick, Guard{}.tok(TokenCond::ge1).alone(), mark_r);
  b.rule(r_pick, Guard{}.right(LinkCond::marked), mark_r);
  b.always(r_pick, r_put);

  b.family("OPENING", AutomatonBuilder::mask({l_put, l_back, l_pick}));
  return b.finish(start);
}

// --- ring2: k >= 4 agents, two unmovable tokens each, oriented -------
inline Automaton build_ring2() {
  AutomatonBuilder b({"ring2", 4, 2, /*movable=*/false, /*needs_orientation=*/true});

  const int start = b.add_state("START", {});
  const int place1 = b.add_state("PLACE_FIRST", {.token = TokenOp::put});
  const int check_l = b.add_state("CHECK_LEFT", {.move = Rel::left});
  const int go_back = b.add_state("GO_BACK", {.move = Rel::right});
  const int f_put = b.add_state("FOLLOWER_PLACE", {.token = TokenOp::put});
  const int ls_put = b.add_state("LEFT_SEARCHER_PLACE", {.token = TokenOp::put});
  const int a_put = b.add_state("ALONE_PLACE", {.token = TokenOp::put});
  const int a_walk = b.add_state("ALONE_WALK", {.move = Rel::left});
  const int a_hold = b.add_state("ALONE_HOLD", {});
  const int waiting = b.add_state("WAITING", {});
  const int leader = b.add_state("LEADER", {});
  const int l_probe = b.add_state("LEADER_PROBE", {.move = Rel::left});
  const int l_return = b.add_state("LEADER_RETURN", {.move = Rel::right});
  const int l_adv = b.add_state("LEADER_ADVANCE", {.move = Rel::left});
  const int f_join = b.add_state("FOLLOWER_JOIN", {});
  const int fw1 = b.add_state("FOLLOWER_WAIT_1", {});
  const int fw2 = b.add_state("FOLLOWER_WAIT_2", {});
  const int f_adv = b.add_state("FOLLOWER_ADVANCE", {.move = Rel::left});
  const int f_mark = b.add_state("FOLLOWER_MARK", {.mark = Rel::left});
  const int ls_join = b.add_state("LEFT_SEARCHER_JOIN", {});
  const int ls_walk = b.add_state("LEFT_SEARCHER_WALK", {.move = Rel::left});
  const int ls_wait = b.add_state("LEFT_SEARCHER_WAIT", {});
  const int rs_join = b.add_state("RIGHT_SEARCHER_JOIN", {});
  const int rs_walk = b.add_state("RIGHT_SEARCHER_WALK", {.move = Rel::right});
  const int rs_wait = b.add_state("RIGHT_SEARCHER_WAIT", {});
  const int rl_join = b.add_state("RIGHT_LEADER_JOIN", {});
  const int rl_walk = b.add_state("RIGHT_LEADER_WALK", {.move = Rel::right});
  const int rl_wait = b.add_state("RIGHT_LEADER_WAIT", {});
  const int rl_probe = b.add_state("RIGHT_LEADER_PROBE", {.move = Rel::right});
  const int rl_return = b.add_state("RIGHT_LEADER_RETURN", {.move = Rel::left});
  const int rl_adv = b.add_state("RIGHT_LEADER_ADVANCE", {.move = Rel::right});
  const int rf_join = b.add_state("RIGHT_FOLLOWER_JOIN", {});
  const int rfw1 = b.add_state("RIGHT_FOLLOWER_WAIT_1", {});
  const int rfw2 = b.add_state("RIGHT_FOLLOWER_WAIT_2", {});
  const int rf_adv = b.add_state("RIGHT_FOLLOWER_ADVANCE", {.move = Rel::right});
  const int rf_mark = b.add_state("RIGHT_FOLLOWER_MARK", {.mark = Rel::right});
  const int done = b.add_state("DONE", {.halt = true});

  const auto mask = AutomatonBuilder::mask;
  // A go-back agent stays visible as a pairing partner through its arrival
  // round (walking state) and, when nobody paired with it on arrival, through
  // its placement round too; an owner that committed to another role while
  // placing is no longer up for pairing.
  const std::uint64_t GB = mask({go_back, a_put});
  const std::uint64_t ALONE = mask({a_walk, a_hold});
  const std::uint64_t WAIT = mask({waiting});
  const std::uint64_t LEAD = mask({leader, l_probe, l_return, l_adv});
  const std::uint64_t LEAD_NEW = mask({leader});
  const std::uint64_t LEAD_WALK = mask({l_probe, l_return, l_adv});
  const std::uint64_t FW_MID = mask({fw1, fw2});
  const std::uint64_t RL = mask({rl_join, rl_walk, rl_wait, rl_probe, rl_return, rl_adv});
  const std::uint64_t RL_AT_GATE = mask({rl_wait});
  const std::uint64_t RF = mask({rf_join, rfw1, rfw2, rf_adv});

  b.always(start, place1);
  b.always(place1, check_l);

  b.rule(check_l, Guard{}.tok(TokenCond::ge1), go_back);
  b.always(check_l, check_l);

  // Arrival home: place the second token and branch on the company seen on
  // arrival, in one transition.
  b.rule(go_back, Guard{}.tok(TokenCond::ge1).has(LEAD, "LEADER"), ls_put);
  b.rule(go_back, Guard{}.tok(TokenCond::ge1).has(ALONE | WAIT, "ALONE or WAITING"), f_put);
  b.rule(go_back, Guard{}.tok(TokenCond::ge1), a_put);
  b.always(go_back, go_back);

  // ALONE: stop at a single-token node, or at a double-token node holding a
  // go-back agent; branch in the written order. An already-present leader
  // sends the newcomer off searching rather than minting a second leader.
  // Unmatched company holds in place; once the stop condition itself
  // dissolves the walk resumes.
  // A walker stopping where another agent already holds the pairing claim
  // steps aside as a searcher: two identical holders could never break the
  // tie between themselves.
  const std::uint64_t HOLD = mask({a_hold});
  auto alone_rules = [&](int from, int resume, bool holder) {
    b.rule(from, Guard{}.tok(TokenCond::eq1).has(RL_AT_GATE, "waiting RIGHT-LEADER"), rf_join);
    b.rule(from,
           Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").has(RL_AT_GATE,
                                                              "waiting RIGHT-LEADER"),
           rf_join);
    b.rule(from, Guard{}.tok(TokenCond::eq1).has(LEAD, "LEADER"), ls_join);
    b.rule(from, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").has(LEAD, "LEADER"), ls_join);
    if (!holder) {
      b.rule(from, Guard{}.tok(TokenCond::eq1).has(HOLD, "holding ALONE"), ls_join);
      b.rule(from, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").has(HOLD, "holding ALONE"),
             ls_join);
    }
    b.rule(from, Guard{}.tok(TokenCond::eq1).has(GB, "GO-BACK").lacks(WAIT, "WAITING"), leader);
    b.rule(from, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").lacks(WAIT, "WAITING"), leader);
    b.rule(from, Guard{}.tok(TokenCond::eq1).has(WAIT, "WAITING").lacks(GB, "GO-BACK"), f_join);
    b.rule(from, Guard{}.tok(TokenCond::eq1).alone(), waiting);
    b.rule(from, Guard{}.tok(TokenCond::eq1), a_hold);
    b.rule(from, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK"), a_hold);
    b.always(from, resume);
  };
  // The placement round itself can bring a new arrival: branch once more on
  // the put-round percept before walking off alone.
  b.rule(a_put, Guard{}.has(LEAD, "LEADER"), ls_join);
  b.rule(a_put, Guard{}.has(ALONE | WAIT, "ALONE or WAITING"), f_join);
  b.always(a_put, a_walk);
  alone_rules(a_walk, a_walk, false);
  alone_rules(a_hold, a_walk, true);

  b.rule(waiting, Guard{}.has(LEAD, "LEADER"), ls_join);
  b.rule(waiting, Guard{}.has(GB | ALONE, "GO-BACK or ALONE"), leader);
  b.rule(waiting, Guard{}.has(RL_AT_GATE, "waiting RIGHT-LEADER"), rf_join);
  b.always(waiting, waiting);

  // The pact is mutual: a leader probes only while its committed follower is
  // beside it in the matching phase, and stands down when a foreign pair
  // already works this node (mid-wait follower or mid-walk leader present).
  const std::uint64_t F_NEW = mask({f_put, f_join});
  b.rule(leader, Guard{}.left(LinkCond::marked), rs_join);
  b.rule(leader, Guard{}.has(LEAD_WALK, "mid-walk LEADER"), ls_join);
  b.rule(leader, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), ls_join);
  b.rule(leader, Guard{}.has(F_NEW, "new FOLLOWER"), l_probe);
  b.always(leader, ls_join);
  b.always(l_probe, l_return);
  b.always(l_return, l_adv);
  b.rule(l_adv, Guard{}.left(LinkCond::marked), rs_join);
  b.rule(l_adv, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), ls_join);
  b.rule(l_adv, Guard{}.has(mask({f_adv}), "advancing FOLLOWER"), l_probe);
  b.always(l_adv, ls_join);

  // Followers recognize their leader by the exact phase state: a returning
  // leader is in LEADER_RETURN at the wake-up check, a co-advanced one in
  // LEADER_ADVANCE. A passing foreign leader in some other phase cannot mask
  // a death. At cycle boundaries a follower stands down on the same evidence
  // its leader does (a foreign mid-wait follower at the node). Stranded
  // followers head right to serve as right-followers.
  for (int entry : {f_put, f_join}) {
    b.rule(entry, Guard{}.left(LinkCond::marked), rs_join);
    b.rule(entry, Guard{}.has(LEAD_WALK, "mid-walk LEADER"), ls_join);
    b.rule(entry, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), ls_join);
    b.rule(entry, Guard{}.has(LEAD_NEW, "new LEADER"), fw1);
    b.always(entry, ls_join);
  }
  b.always(fw1, fw2);
  b.rule(fw2, Guard{}.left(LinkCond::marked), rs_join);
  b.rule(fw2, Guard{}.has(mask({l_return}), "returned LEADER"), f_adv);
  b.always(fw2, f_mark);  // the leader did not return: black hole ahead
  b.rule(f_adv, Guard{}.left(LinkCond::marked), rs_join);
  b.rule(f_adv, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), ls_join);
  b.rule(f_adv, Guard{}.has(mask({l_adv}), "advancing LEADER"), fw1);
  b.always(f_adv, ls_join);
  b.always(f_mark, rl_join);

  // A marked left link means the hole is just ahead: continue as a
  // right-searcher instead of walking into it.
  for (int entry : {ls_put, ls_join}) {
    b.rule(entry, Guard{}.left(LinkCond::marked), rs_join);
    b.rule(entry, Guard{}.tok(TokenCond::eq1), ls_wait);
    b.always(entry, ls_walk);
  }
  b.rule(ls_walk, Guard{}.left(LinkCond::marked), rs_join);
  b.rule(ls_walk, Guard{}.tok(TokenCond::eq1), ls_wait);
  b.always(ls_walk, ls_walk);
  b.rule(ls_wait, Guard{}.has(RL_AT_GATE, "waiting RIGHT-LEADER"), rf_join);
  b.rule(ls_wait, Guard{}.tok(TokenCond::eq1), ls_wait);
  b.always(ls_wait, ls_walk);  // a second token appeared: not a gate after all

  b.rule(rs_join, Guard{}.tok(TokenCond::eq1), rs_wait);
  b.always(rs_join, rs_walk);
  b.rule(rs_walk, Guard{}.tok(TokenCond::eq1), rs_wait);
  b.always(rs_walk, rs_walk);
  b.rule(rs_wait, Guard{}.has(RL_AT_GATE, "waiting RIGHT-LEADER"), rf_join);
  b.rule(rs_wait, Guard{}.tok(TokenCond::eq1), rs_wait);
  b.always(rs_wait, rs_walk);

  b.rule(rl_join, Guard{}.tok(TokenCond::eq1), rl_wait);
  b.always(rl_join, rl_walk);
  b.rule(rl_walk, Guard{}.tok(TokenCond::eq1), rl_wait);
  b.always(rl_walk, rl_walk);
  b.rule(rl_wait, Guard{}.right(LinkCond::marked), done);  // other side already found
  b.rule(rl_wait, Guard{}.has(RF, "RIGHT-FOLLOWER"), rl_probe);
  b.always(rl_wait, rl_wait);
  b.always(rl_probe, rl_return);
  b.always(rl_return, rl_adv);
  b.rule(rl_adv, Guard{}.right(LinkCond::marked), done);
  b.always(rl_adv, rl_probe);

  b.rule(rf_join, Guard{}.has(RL_AT_GATE, "waiting RIGHT-LEADER"), rfw1);
  b.always(rf_join, rf_join);
  b.always(rfw1, rfw2);
  b.rule(rfw2, Guard{}.has(mask({rl_return}), "returned RIGHT-LEADER"), rf_adv);
  b.always(rfw2, rf_mark);
  b.rule(rf_adv, Guard{}.has(mask({rl_adv}), "advancing RIGHT-LEADER"), rfw1);
  b.always(rf_adv, rf_join);
  b.always(rf_mark, done);

  b.family("CHECK_LEFT", mask({check_l}));
  b.family("OPENING", mask({place1, check_l, go_back}));
  b.family("LEADER", LEAD);
  b.family("RIGHT_LEADER", RL);
  b.family("LEADER_ENTRY", mask({leader}));
  b.family("FOLLOWER_ENTRY", mask({f_put, f_join}));
  b.socially_invisible(mask({start, place1, check_l}));
  return b.finish(start);
}

// --- ring3: k >= 5 agents, two unmovable tokens each, any ring --------
inline Automaton build_ring3() {
  AutomatonBuilder b({"ring3", 5, 2, /*movable=*/false, /*needs_orientation=*/false});

  const int start = b.add_state("START", {});
  const int place1 = b.add_state("PLACE_FIRST", {.token = TokenOp::put});
  const int check_l = b.add_state("CHECK_LEFT", {.move = Rel::left});
  const int cr_back = b.add_state("CHECK_RIGHT_BACK", {.move = Rel::right});
  const int cr_on = b.add_state("CHECK_RIGHT_ON", {.move = Rel::right});
  const int go_back = b.add_state("GO_BACK", {.move = Rel::left});
  const int rf_put_keep = b.add_state("RIGHT_FOLLOWER_PLACE", {.token = TokenOp::put});
  const int rf_put_flip =
      b.add_state("RIGHT_FOLLOWER_PLACE_FLIP", {.token = TokenOp::put, .flip_orientation = true});
  const int s_put = b.add_state("SEARCHER_PLACE", {.token = TokenOp::put});
  const int f_put_keep = b.add_state("FOLLOWER_PLACE", {.token = TokenOp::put});
  const int f_put_flip =
      b.add_state("FOLLOWER_PLACE_FLIP", {.token = TokenOp::put, .flip_orientation = true});
  const int a_put = b.add_state("ALONE_PLACE", {.token = TokenOp::put});
  const int a_walk = b.add_state("ALONE_WALK", {.move = Rel::left});
  const int waiting = b.add_state("WAITING", {});
  const int leader = b.add_state("LEADER", {});
  const int l_probe = b.add_state("LEADER_PROBE", {.move = Rel::left});
  const int l_return = b.add_state("LEADER_RETURN", {.move = Rel::right});
  const int l_adv = b.add_state("LEADER_ADVANCE", {.move = Rel::left});
  const int f_keep = b.add_state("FOLLOWER_ALIGN", {});
  const int f_flip = b.add_state("FOLLOWER_ALIGN_FLIP", {.flip_orientation = true});
  const int fw1 = b.add_state("FOLLOWER_WAIT_1", {});
  const int fw2 = b.add_state("FOLLOWER_WAIT_2", {});
  const int f_adv = b.add_state("FOLLOWER_ADVANCE", {.move = Rel::left});
  const int f_mark = b.add_state("FOLLOWER_MARK", {.mark = Rel::left});
  const int s_join = b.add_state("SEARCHER_JOIN", {});
  const int s_walk = b.add_state("SEARCHER_WALK", {.move = Rel::right});
  const int rl_join = b.add_state("RIGHT_LEADER_JOIN", {});
  const int rl_walk = b.add_state("RIGHT_LEADER_WALK", {.move = Rel::right});
  const int rl_meet_a = b.add_state("RIGHT_LEADER_MEET_NEAR", {});
  const int slow_step = b.add_state("RIGHT_LEADER_SLOW_STEP", {.move = Rel::right});
  const int slow_p1 = b.add_state("RIGHT_LEADER_SLOW_PAUSE_1", {});
  const int slow_p2 = b.add_state("RIGHT_LEADER_SLOW_PAUSE_2", {});
  const int rl_meet_b = b.add_state("RIGHT_LEADER_MEET_FAR", {});
  const int rl_home = b.add_state("RIGHT_LEADER_RETURN_WALK", {.move = Rel::left});
  const int rl_meet_c = b.add_state("RIGHT_LEADER_MEET_BACK", {});
  const int rl_probe = b.add_state("RIGHT_LEADER_PROBE", {.move = Rel::right});
  const int rl_return = b.add_state("RIGHT_LEADER_RETURN", {.move = Rel::left});
  const int rl_adv = b.add_state("RIGHT_LEADER_ADVANCE", {.move = Rel::right});
  const int rf_wait = b.add_state("RIGHT_FOLLOWER_WAIT", {});
  const int rf_keep = b.add_state("RIGHT_FOLLOWER_ALIGN", {});
  const int rf_flip = b.add_state("RIGHT_FOLLOWER_ALIGN_FLIP", {.flip_orientation = true});
  const int rfw1 = b.add_state("RIGHT_FOLLOWER_WAIT_1", {});
  const int rfw2 = b.add_state("RIGHT_FOLLOWER_WAIT_2", {});
  const int rf_adv = b.add_state("RIGHT_FOLLOWER_ADVANCE", {.move = Rel::right});
  const int rf_mark = b.add_state("RIGHT_FOLLOWER_MARK", {.mark = Rel::right});
  const int done = b.add_state("DONE", {.halt = true});

  const auto mask = AutomatonBuilder::mask;
  // As in ring2, an owner stays a pairing partner through an uncommitted
  // second-token placement.
  const std::uint64_t GB = mask({go_back, a_put});
  const std::uint64_t ALONE = mask({a_walk});
  const std::uint64_t WAIT = mask({waiting});
  const std::uint64_t LEAD = mask({leader, l_probe, l_return, l_adv});
  const std::uint64_t LEAD_NEW = mask({leader});
  const std::uint64_t LEAD_WALK = mask({l_probe, l_return, l_adv});
  const std::uint64_t FW_MID = mask({fw1, fw2});
  const std::uint64_t RL = mask({rl_join, rl_walk, rl_meet_a, slow_step, slow_p1, slow_p2,
                                 rl_meet_b, rl_home, rl_meet_c, rl_probe, rl_return, rl_adv});
  const std::uint64_t RL_MEET = mask({rl_meet_a, rl_meet_b, rl_meet_c});
  const std::uint64_t RF = mask({rf_put_keep, rf_put_flip, rf_keep, rf_flip, rfw1, rfw2, rf_adv});

  b.always(start, place1);
  b.always(place1, check_l);

  b.rule(check_l, Guard{}.tok(TokenCond::ge1), cr_back);
  b.always(check_l, check_l);
  b.rule(cr_back, Guard{}.tok(TokenCond::ge1), cr_on);
  b.always(cr_back, cr_back);
  b.rule(cr_on, Guard{}.tok(TokenCond::ge1), go_back);
  b.always(cr_on, cr_on);

  // Arrival home: place the second token and branch, following the written
  // order; the follower aligns to its pairing partner's orientation.
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).agreeing(RL_MEET, "waiting RIGHT-LEADER"),
         rf_put_keep);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).disagreeing(RL_MEET, "waiting RIGHT-LEADER"),
         rf_put_flip);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).has(LEAD, "LEADER"), s_put);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).agreeing(WAIT, "WAITING"), f_put_keep);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).disagreeing(WAIT, "WAITING"), f_put_flip);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).agreeing(ALONE, "ALONE"), f_put_keep);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1).disagreeing(ALONE, "ALONE"), f_put_flip);
  b.rule(go_back, Guard{}.tok(TokenCond::eq1), a_put);
  b.always(go_back, go_back);

  // ALONE: stops as in ring2, branches in the written order with the
  // orientation-agreement tie-breaks, catch-all SEARCHER.
  // The placement round itself can bring a new arrival: branch once more on
  // the put-round percept before walking off alone. The token is already
  // down, so the follower entries here only align.
  b.rule(a_put, Guard{}.agreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_keep);
  b.rule(a_put, Guard{}.disagreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_flip);
  b.rule(a_put, Guard{}.has(LEAD, "LEADER"), s_join);
  b.rule(a_put, Guard{}.agreeing(WAIT, "WAITING"), f_keep);
  b.rule(a_put, Guard{}.disagreeing(WAIT, "WAITING"), f_flip);
  b.rule(a_put, Guard{}.agreeing(ALONE, "ALONE"), f_keep);
  b.rule(a_put, Guard{}.disagreeing(ALONE, "ALONE"), f_flip);
  b.always(a_put, a_walk);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).alone(), waiting);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).agreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_keep);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).disagreeing(RL_MEET, "waiting RIGHT-LEADER"),
         rf_flip);
  b.rule(a_walk,
         Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").agreeing(RL_MEET,
                                                                 "waiting RIGHT-LEADER"),
         rf_keep);
  b.rule(a_walk,
         Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").disagreeing(RL_MEET,
                                                                    "waiting RIGHT-LEADER"),
         rf_flip);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).has(LEAD, "LEADER"), s_join);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").has(LEAD, "LEADER"), s_join);
  b.rule(a_walk,
         Guard{}.tok(TokenCond::eq1).has(WAIT, "WAITING").lacks(GB, "GO-BACK")
             .pair(ALONE, "ALONE", WAIT, "WAITING"),
         s_join);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).agreeing(WAIT, "WAITING").lacks(GB, "GO-BACK"),
         f_keep);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).disagreeing(WAIT, "WAITING").lacks(GB, "GO-BACK"),
         f_flip);
  b.rule(a_walk,
         Guard{}.tok(TokenCond::eq1).has(GB, "GO-BACK").lacks(WAIT, "WAITING")
             .pair(ALONE, "ALONE", GB, "GO-BACK"),
         s_join);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1).has(GB, "GO-BACK").lacks(WAIT, "WAITING"), leader);
  b.rule(a_walk,
         Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").lacks(WAIT, "WAITING")
             .pair(ALONE, "ALONE", GB, "GO-BACK"),
         s_join);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK").lacks(WAIT, "WAITING"), leader);
  // Two walkers meeting head-on at a single-token node both wait: the node's
  // owner is still out, returns within finite time, and pairs with whichever
  // waiter shares its orientation.
  b.rule(a_walk,
         Guard{}.tok(TokenCond::eq1).has(ALONE, "ALONE").lacks(WAIT, "WAITING")
             .lacks(GB, "GO-BACK").lacks(LEAD, "LEADER").lacks(RL, "RIGHT-LEADER"),
         waiting);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq1), s_join);
  b.rule(a_walk, Guard{}.tok(TokenCond::eq2).has(GB, "GO-BACK"), s_join);
  b.always(a_walk, a_walk);

  b.rule(waiting, Guard{}.agreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_keep);
  b.rule(waiting, Guard{}.disagreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_flip);
  b.rule(waiting,
         Guard{}.has(GB | ALONE, "GO-BACK or ALONE").lacks(LEAD, "LEADER")
             .pair(WAIT, "WAITING", GB | ALONE, "GO-BACK or ALONE"),
         s_join);
  b.rule(waiting, Guard{}.has(GB | ALONE, "GO-BACK or ALONE").lacks(LEAD, "LEADER"), leader);
  b.rule(waiting, Guard{}.has(~WAIT, "non-waiting arrival"), s_join);
  b.always(waiting, waiting);

  // The pact is mutual: a leader probes only while its committed follower is
  // beside it, aligned, and in the matching phase; it stands down when a
  // foreign pair already works this node.
  const std::uint64_t F_NEW = mask({f_put_keep, f_put_flip, f_keep, f_flip});
  b.rule(leader, Guard{}.left(LinkCond::marked), s_join);
  b.rule(leader, Guard{}.has(LEAD_WALK, "mid-walk LEADER"), s_join);
  b.rule(leader, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), s_join);
  b.rule(leader, Guard{}.agreeing(F_NEW, "new FOLLOWER"), l_probe);
  b.always(leader, s_join);
  b.always(l_probe, l_return);
  b.always(l_return, l_adv);
  b.rule(l_adv, Guard{}.left(LinkCond::marked), s_join);
  b.rule(l_adv, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), s_join);
  b.rule(l_adv, Guard{}.agreeing(mask({f_adv}), "advancing FOLLOWER"), l_probe);
  b.always(l_adv, s_join);

  // Followers recognize their leader by its exact phase state and stand down
  // at cycle boundaries on the same evidence their leader does; a stranded
  // follower heads right to serve as a right-follower.
  // After alignment the follower and its leader share a frame, so every
  // leader sighting in the cycle requires orientation agreement; a pair
  // walking the other way can never be mistaken for the own leader.
  for (int entry : {f_put_keep, f_put_flip, f_keep, f_flip}) {
    b.rule(entry, Guard{}.left(LinkCond::marked), s_join);
    b.rule(entry, Guard{}.has(LEAD_WALK, "mid-walk LEADER"), s_join);
    b.rule(entry, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), s_join);
    b.rule(entry, Guard{}.agreeing(LEAD_NEW, "new LEADER"), fw1);
    b.always(entry, s_join);
  }
  b.always(fw1, fw2);
  b.rule(fw2, Guard{}.left(LinkCond::marked), s_join);
  b.rule(fw2, Guard{}.agreeing(mask({l_return}), "returned LEADER"), f_adv);
  b.always(fw2, f_mark);
  b.rule(f_adv, Guard{}.left(LinkCond::marked), s_join);
  b.rule(f_adv, Guard{}.has(FW_MID, "mid-wait FOLLOWER"), s_join);
  b.rule(f_adv, Guard{}.agreeing(mask({l_adv}), "advancing LEADER"), fw1);
  b.always(f_adv, s_join);
  b.always(f_mark, rl_join);

  for (int entry : {s_put, s_join}) {
    b.rule(entry, Guard{}.tok(TokenCond::eq1), rf_wait);
    b.always(entry, s_walk);
  }
  b.rule(s_walk, Guard{}.tok(TokenCond::eq1), rf_wait);
  b.always(s_walk, s_walk);

  // The right-leader walks to the near gate; if nobody is there it slow-walks
  // (one move, two pauses) to the far gate, and failing that returns. It
  // launches the paired walk once a follower has committed.
  b.rule(rl_join, Guard{}.tok(TokenCond::eq1), rl_meet_a);
  b.always(rl_join, rl_walk);
  b.rule(rl_walk, Guard{}.tok(TokenCond::eq1), rl_meet_a);
  b.always(rl_walk, rl_walk);
  b.rule(rl_meet_a, Guard{}.right(LinkCond::marked), done);  // other side already found
  b.rule(rl_meet_a, Guard{}.agreeing(RF, "RIGHT-FOLLOWER"), rl_probe);
  b.rule(rl_meet_a, Guard{}.alone(), slow_step);
  b.always(rl_meet_a, rl_meet_a);
  b.always(slow_step, slow_p1);
  b.always(slow_p1, slow_p2);
  b.rule(slow_p2, Guard{}.tok(TokenCond::eq1), rl_meet_b);
  b.always(slow_p2, slow_step);
  b.rule(rl_meet_b, Guard{}.right(LinkCond::marked), done);
  b.rule(rl_meet_b, Guard{}.agreeing(RF, "RIGHT-FOLLOWER"), rl_probe);
  b.rule(rl_meet_b, Guard{}.alone(), rl_home);
  b.always(rl_meet_b, rl_meet_b);
  b.rule(rl_home, Guard{}.tok(TokenCond::eq1), rl_meet_c);
  b.always(rl_home, rl_home);
  // A slow opener can outlast one tour; patrol again rather than parking
  // beside an empty gate forever.
  b.rule(rl_meet_c, Guard{}.right(LinkCond::marked), done);
  b.rule(rl_meet_c, Guard{}.agreeing(RF, "RIGHT-FOLLOWER"), rl_probe);
  b.rule(rl_meet_c, Guard{}.alone(), slow_step);
  b.always(rl_meet_c, rl_meet_c);
  b.always(rl_probe, rl_return);
  b.always(rl_return, rl_adv);
  b.rule(rl_adv, Guard{}.right(LinkCond::marked), done);
  b.always(rl_adv, rl_probe);

  b.rule(rf_wait, Guard{}.agreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_keep);
  b.rule(rf_wait, Guard{}.disagreeing(RL_MEET, "waiting RIGHT-LEADER"), rf_flip);
  b.rule(rf_wait, Guard{}.tok(TokenCond::eq1), rf_wait);
  b.always(rf_wait, s_walk);  // a second token appeared: not a gate after all
  for (int entry : {rf_put_keep, rf_put_flip, rf_keep, rf_flip}) {
    b.rule(entry, Guard{}.agreeing(RL_MEET, "waiting RIGHT-LEADER"), rfw1);
    b.always(entry, rf_wait);
  }
  b.always(rfw1, rfw2);
  b.rule(rfw2, Guard{}.agreeing(mask({rl_return}), "returned RIGHT-LEADER"), rf_adv);
  b.always(rfw2, rf_mark);
  b.rule(rf_adv, Guard{}.agreeing(mask({rl_adv}), "advancing RIGHT-LEADER"), rfw1);
  b.always(rf_adv, rf_wait);
  b.always(rf_mark, done);

  b.family("CHECK_LEFT", mask({check_l}));
  b.family("CHECK_RIGHT", mask({cr_back, cr_on}));
  b.family("OPENING", mask({place1, check_l, cr_back, cr_on, go_back}));
  b.family("LEADER", LEAD);
  b.family("RIGHT_LEADER", RL);
  b.family("LEADER_ENTRY", mask({leader}));
  b.family("FOLLOWER_ENTRY", mask({f_put_keep, f_put_flip, f_keep, f_flip}));
  b.socially_invisible(mask({start, place1, check_l, cr_back, cr_on}));
  return b.finish(start);
}

inline Automaton build_protocol(ProtocolId id) {
  switch (id) {
    case ProtocolId::ring1: return build_ring1();
    case ProtocolId::ring2: return build_ring2();
    default: return build_ring3();
  }
}

// A plausible one-unmovable-token attempt, used to witness the matching lower
// bound: walk left `put_delay` steps, drop the token, keep walking left to
// the next token and mark the link beyond it. Scattered copies drop their
// tokens in lockstep, so the survivors end up marking links a fixed distance
// apart and at most one of those marks can be right.
inline Automaton build_single_unmovable_witness(int put_delay) {
  AutomatonBuilder b({"thm1w-p" + std::to_string(put_delay), 2, 1,
                      /*movable=*/false, /*needs_orientation=*/false});
  const int start = b.add_state("START", {});
  std::vector<int> delay;
  for (int i = 0; i < put_delay; ++i)
    delay.push_back(b.add_state("WALK_" + std::to_string(i + 1), {.move = Rel::left}));
  const int drop = b.add_state("DROP", {.token = TokenOp::put});
  const int seek = b.add_state("SEEK", {.move = Rel::left});
  const int mark = b.add_state("MARK", {.mark = Rel::left});
  const int done = b.add_state("DONE", {.halt = true});

  int prev = start;
  for (int s : delay) {
    b.always(prev, s);
    prev = s;
  }
  b.always(prev, drop);
  b.always(drop, seek);
  b.rule(seek, Guard{}.tok(TokenCond::ge1), mark);
  b.always(seek, seek);
  b.always(mark, done);
  return b.finish(start);
}

// Resolves serialized protocol names, including witness variants.
inline std::optional<Automaton> automaton_by_name(const std::string& name) {
  if (name == "ring1") return build_ring1();
  if (name == "ring2") return build_ring2();
  if (name == "ring3") return build_ring3();
  if (name.rfind("thm1w-p", 0) == 0) {
    const int p = std::stoi(name.substr(7));
    if (p >= 0 && p <= 16) return build_single_unmovable_witness(p);
  }
  return std::nullopt;
}

}  // namespace bhs
