#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synth/bdd.hpp"
#include "synth/game.hpp"
#include "synth/sat.hpp"

namespace synth::learn {

// CNF in DIMACS conventions: variables 1-based, negative = negated.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  std::string to_dimacs() const;
};

// Propositional encoding of the transition relation, usable both for the
// current step and (through latch_next) the successor state. Slot order:
// game latches in file order, then the virtual out latch when the circuit
// drives out combinationally.
struct TransitionCnf {
  Cnf cnf;
  std::vector<int> latch_now;    // sat var per latch slot, current state
  std::vector<int> latch_next;   // sat var per latch slot, next state
  std::vector<int> unc_inputs;   // sat var per X_u input
  std::vector<int> ctrl_inputs;  // sat var per X_c input
  bool has_virtual_out = false;  // last slot is the virtual out latch
  size_t out_slot = 0;           // slot carrying the out signal
};

// Circuit-to-CNF bridge via the diagrams of the update functions; models
// projected to (L, X_u, X_c, L') are exactly the transition relation.
TransitionCnf tseitin(game::GameEncoding& enc);

// Clause over latch slots; `positive` is the literal phase.
struct RegionLit {
  size_t slot;
  bool positive;
};
struct RegionClause {
  std::vector<RegionLit> lits;
};

struct LearnedRegion {
  std::vector<RegionClause> clauses;
  uint64_t iterations = 0;
  uint64_t literals_dropped = 0;
  bool satisfied_by_zero() const;  // does the all-zero state satisfy W
};

struct ForcedState {
  std::vector<bool> state;  // full cube over latch slots
  std::vector<bool> unc;    // witnessing uncontrollable valuation
};

// Incremental two-solver learner. Solver A proposes a state of W from
// which leaving W looks forced, solver B searches a controllable response
// keeping the successor in W; a response blocks the candidate, a failure
// certifies it.
class Learner {
 public:
  explicit Learner(game::GameEncoding& enc);

  // State s of W with some sigma_u such that every controllable choice
  // leaves W; nullopt once W and upre(not W) are disjoint.
  std::optional<ForcedState> find_forced_state();

  // Drops literals of the certified cube (ascending slot order) while
  // every W-state under the cube still escapes under the witness, then
  // adds the blocking clause to the region and returns it.
  RegionClause generalize_blocking_clause(const ForcedState& forced);

  void add_region_clause(const RegionClause& clause);
  const LearnedRegion& region() const { return region_; }
  const TransitionCnf& transition() const { return tc_; }

  // Region as a diagram over the real latches (virtual out at 0).
  bdd::Func region_to_bdd() const;

 private:
  void new_activation_epoch();

  game::GameEncoding& enc_;
  TransitionCnf tc_;
  LearnedRegion region_;
  sat::Solver a_;  // W(L) & T & not W(L')
  sat::Solver b_;  // W(L) & T & W(L')
  std::vector<sat::Var> a_clause_neg_;  // per region clause: its primed negation
  sat::Var a_act_ = -1;                 // activation var of the current epoch
};

struct LearnResult {
  LearnedRegion region;
  bool realizable = false;
};

// Counterexample loop: initialize W to the safe states and strengthen by
// generalized blocking clauses until no forced escape remains.
LearnResult learn_winning_region(game::GameEncoding& enc);

}  // namespace synth::learn
