#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "synth/aiger.hpp"
#include "synth/bdd.hpp"

namespace synth::circuit {

// Append-only gate construction on an Aig under assembly. Fresh variables
// are numbered contiguously above the current maximum.
class Builder {
 public:
  Builder(aiger::Aig& aig, uint32_t first_free_var)
      : aig_(aig), next_var_(first_free_var) {}

  uint32_t next_var() const { return next_var_; }

  aiger::Lit and_gate(aiger::Lit a, aiger::Lit b);
  aiger::Lit or_gate(aiger::Lit a, aiger::Lit b);
  aiger::Lit xor_gate(aiger::Lit a, aiger::Lit b);
  // sel ? hi : lo
  aiger::Lit mux(aiger::Lit sel, aiger::Lit hi, aiger::Lit lo);
  // conjunction of a list (constant true for empty)
  aiger::Lit and_all(const std::vector<aiger::Lit>& lits);
  aiger::Lit or_all(const std::vector<aiger::Lit>& lits);
  // bits == value, bits[0] the least significant
  aiger::Lit equals_const(const std::vector<aiger::Lit>& bits, uint64_t value);

  // Shannon expansion of a diagram into gates: projections become plain
  // literals, every other node costs one 3-gate mux; nodes are cached so
  // shared subdiagrams are emitted once per Builder.
  aiger::Lit from_func(bdd::Store& store, const bdd::Func& f,
                       const std::map<bdd::Var, aiger::Lit>& leaf_lits);

 private:
  aiger::Aig& aig_;
  uint32_t next_var_;
  std::unordered_map<bdd::NodeId, aiger::Lit> node_cache_;
};

}  // namespace synth::circuit
