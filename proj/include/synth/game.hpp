#pragma once

#include <map>
#include <optional>
#include <vector>

#include "synth/aiger.hpp"
#include "synth/bdd.hpp"

namespace synth::game {

// Symbolic safety game: per-latch update functions over (L, X_u, X_c), the
// SAFE predicate, and the variable partition. The unsafe `out` signal is
// modelled either by an existing latch or, on demand, by a virtual latch
// whose update is the output expression.
class GameEncoding {
 public:
  bdd::Store* store = nullptr;

  std::vector<bdd::Var> latch_vars;           // file order
  std::vector<bdd::Var> uncontrollable_vars;  // X_u, file order
  std::vector<bdd::Var> controllable_vars;    // X_c, file order
  std::map<bdd::Var, bdd::Func> update_fns;   // latch var -> f_l(L, X_u, X_c)

  // SAFE(L, X_u, X_c): negation of the expression the out signal assumes
  // in the next step (the update of the out latch, or the output function
  // itself when out is not a latch).
  bdd::Func safe_fn;
  bool out_is_latch = false;
  bdd::Var out_latch = 0;  // valid when out_is_latch

  // latches whose update is a plain variable (direct substitution)
  std::map<bdd::Var, bdd::Var> direct_sub;

  // circuit correspondence, used by extraction and CNF encoding
  std::map<uint32_t, bdd::Var> var_of_aiger;      // aiger var -> bdd var
  std::vector<uint32_t> latch_aiger_vars;         // aiger var per latch
  std::vector<uint32_t> unc_aiger_vars;           // aiger var per X_u input
  std::vector<uint32_t> ctrl_aiger_vars;          // aiger var per X_c input

  // --- helpers --------------------------------------------------------
  const bdd::Func& update_of(bdd::Var latch) const { return update_fns.at(latch); }
  bool has_virtual_out() const { return virtual_out_.has_value(); }
  // The latch variable carrying the out signal; allocates the virtual
  // latch (update = !safe_fn) on first use when out is not a latch.
  bdd::Var out_var();
  // Unsafe current states as a formula over L (including the virtual out
  // latch if one exists); false when out is combinational and no virtual
  // latch has been created.
  bdd::Func out_states();
  // Primed copy of a latch variable, allocated directly below its partner.
  bdd::Var primed(bdd::Var latch);
  bool has_primed(bdd::Var latch) const { return primed_.count(latch) != 0; }
  // All-zero initial valuation over the latches (and the virtual out
  // latch, if present).
  std::map<bdd::Var, bool> zero_state() const;

  // Monolithic transition relation over the given latch set, built once
  // and cached. Latches with direct substitution are renamed instead of
  // related, while the targets stay injective.
  struct MonoRelation {
    std::map<bdd::Var, bdd::Var> remap;  // latch -> primed var or direct target
    bdd::VarSet primed_cube;
    bdd::Func relation;
  };
  const MonoRelation& mono_relation(const std::vector<bdd::Var>& latches);

 private:
  std::optional<bdd::Var> virtual_out_;
  std::map<bdd::Var, bdd::Var> primed_;
  std::map<std::vector<bdd::Var>, MonoRelation> mono_cache_;
  friend GameEncoding encode(const aiger::Aig&, const aiger::InputPartition&,
                             bdd::Store&, bool);
};

// Builds the symbolic encoding. Update functions are built bottom-up over
// the AND gates with memoization; with eager_dealloc, a gate's diagram is
// dropped as soon as every dependent has been processed.
GameEncoding encode(const aiger::Aig& aig, const aiger::InputPartition& partition,
                    bdd::Store& store, bool eager_dealloc = false);

enum class UpreMode { Partitioned, Monolithic };
enum class Variant { Standard, NoOutLatch };

struct UpreOptions {
  // Restrict every f_l to the complement of the target before composing,
  // then join the target back in.
  bool restrict_neg_s = false;
  // Care sets (reachability over-approximations); the result is
  // restricted against each.
  std::vector<bdd::Func> care_sets;
  bool use_and_abstract = true;  // monolithic mode only
};

// Uncontrollable predecessors of s (a set over L): valuations from which
// the environment can force entry into s in one step.
bdd::Func upre(GameEncoding& enc, const bdd::Func& s, UpreMode mode,
               const UpreOptions& opts = {});

struct SolveOptions {
  Variant variant = Variant::Standard;
  UpreMode mode = UpreMode::Partitioned;
  bool restrict_neg_s = false;
  bool reach_care = false;
  size_t reach_block = 8;  // latches per over-approximation subset
  bool use_and_abstract = true;
  bool early_exit = true;  // stop once the initial state enters the attractor
};

struct WinningRegion {
  bdd::Func w;  // winning latch valuations, over the real latches
  bool realizable = false;
  uint64_t iterations = 0;
};

// Decides the game by the least fixpoint of the uncontrollable-predecessor
// operator from the unsafe states; the winning region is the complement.
WinningRegion solve(GameEncoding& enc, const SolveOptions& opts = {});

// For each latch subset P, a superset of the projection of the reachable
// states onto P, computed by forward images of the f_l for l in P while
// existentially abstracting everything else.
std::vector<bdd::Func> reach_overapprox(GameEncoding& enc,
                                        const std::vector<bdd::VarSet>& subsets);

// Explicit-state ground truth for small games (|L| + |X_u| + |X_c| <= 20).
struct ExplicitResult {
  bool realizable = false;
  size_t num_latches = 0;
  std::vector<bool> winning;  // indexed by latch valuation bits, file order
};

ExplicitResult solve_explicit(const aiger::Aig& aig,
                              const aiger::InputPartition& partition);

}  // namespace synth::game
