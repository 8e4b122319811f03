#pragma once

#include <map>
#include <vector>

#include "synth/aiger.hpp"
#include "synth/bdd.hpp"
#include "synth/game.hpp"

namespace synth::extract {

// Deterministic controller: one function per controllable input, over the
// latches and the uncontrollable inputs only.
struct Strategy {
  std::vector<bdd::Var> order;          // determinization order used
  std::map<bdd::Var, bdd::Func> fns;    // controllable var -> f_c(L, X_u)
};

// Non-deterministic winning strategy: lambda(L, X_u, X_c) holds exactly on
// the triples whose successor stays in the winning region (and does not
// raise out). Throws std::logic_error on an unrealizable region.
bdd::Func strategy_relation(game::GameEncoding& enc, const game::WinningRegion& w);

// Co-factor determinization: outputs are fixed one at a time in the given
// order, choosing 1 wherever the relation does not force 0, and the
// relation is rewritten under each choice before the next output.
Strategy determinize_cofactor(game::GameEncoding& enc, const bdd::Func& lambda,
                              const std::vector<bdd::Var>& order);

// Forward reachable states under the strategy; every f_c is then
// restricted to them (size never increases, behavior on reachable states
// unchanged).
Strategy minimize_by_reachability(game::GameEncoding& enc, const Strategy& strat);

// Emits a solution circuit: controllable inputs removed and redefined as
// AND gates computing f_c via Shannon expansion of the diagrams (one mux
// of 3 AND gates per node, shared nodes emitted once).
aiger::Aig strategy_to_aig(const aiger::Aig& spec, game::GameEncoding& enc,
                           const Strategy& strat);

}  // namespace synth::extract
