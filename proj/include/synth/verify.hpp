#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synth/aiger.hpp"

namespace synth::verify {

enum class Status { Safe, Unsafe, ResourceLimit };

struct Verdict {
  Status status = Status::Safe;
  // For Unsafe: one valuation of the circuit's inputs per step, leading to
  // out = 1 in the final step; minimal in step count.
  std::vector<std::vector<bool>> trace;
  uint64_t iterations = 0;
  uint64_t peak_nodes = 0;
  std::string to_text() const;
};

// Thrown by compose when the solution fails the syntactic check.
class SolutionSyntaxError : public std::runtime_error {
 public:
  explicit SolutionSyntaxError(aiger::CheckReport r)
      : std::runtime_error("solution failed the syntactic check:\n" + r.to_text()),
        report(std::move(r)) {}
  aiger::CheckReport report;
};

// Closes the loop: the checked solution drives the controllable inputs, so
// the returned circuit's only free inputs are the uncontrollable ones.
aiger::Aig compose(const aiger::Aig& spec, const aiger::Aig& solution);

// Symbolic forward reachability from the all-zero state. Safe iff no
// reachable state raises the output under any input valuation.
Verdict model_check(const aiger::Aig& closed, uint64_t node_budget = uint64_t(1) << 22);

// Cycle-accurate gate-level simulation from the all-zero state.
struct SimStep {
  std::vector<bool> latches;  // state at the start of the step
  std::vector<bool> outputs;  // empty for the final entry (no inputs left)
};

std::vector<SimStep> simulate(const aiger::Aig& aig,
                              const std::vector<std::vector<bool>>& inputs);

}  // namespace synth::verify
