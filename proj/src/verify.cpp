#include "synth/verify.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "synth/bdd.hpp"
#include "synth/game.hpp"

namespace synth::verify {

using aiger::Aig;
using aiger::Lit;
using bdd::Func;
using bdd::Var;
using bdd::VarSet;

std::string Verdict::to_text() const {
  std::ostringstream out;
  switch (status) {
    case Status::Safe:
      out << "SAFE\n";
      break;
    case Status::ResourceLimit:
      out << "RESOURCE_LIMIT\n";
      break;
    case Status::Unsafe:
      out << "UNSAFE\n";
      for (const std::vector<bool>& step : trace) {
        for (bool b : step) out << (b ? '1' : '0');
        out << '\n';
      }
      break;
  }
  return out.str();
}

Aig compose(const Aig& spec, const Aig& solution) {
  aiger::CheckReport report = aiger::check_solution_syntax(spec, solution);
  if (!report.ok()) throw SolutionSyntaxError(std::move(report));
  // The solution file is the closed circuit: it contains the monitor
  // verbatim, with every controllable input redefined from latches and
  // uncontrollable inputs.
  return solution;
}

Verdict model_check(const Aig& closed, uint64_t node_budget) {
  Verdict verdict;
  bdd::Store store;

  aiger::InputPartition all_env;
  all_env.uncontrollable = closed.inputs;
  game::GameEncoding enc = game::encode(closed, all_env, store);

  Func bad_now = !enc.safe_fn;  // out as a function of (L, X)
  if (enc.out_is_latch) bad_now = store.var(enc.out_latch);

  VarSet unprimed = enc.latch_vars;
  unprimed.insert(unprimed.end(), enc.uncontrollable_vars.begin(),
                  enc.uncontrollable_vars.end());

  Func relation = store.constant(true);
  std::map<Var, Var> back;
  for (Var l : enc.latch_vars) {
    Var p = enc.primed(l);
    back.emplace(p, l);
    relation = relation & !(store.var(p) ^ enc.update_of(l));
  }

  Func init = store.constant(true);
  for (Var l : enc.latch_vars) init = init & !store.var(l);

  std::vector<Func> frontiers{init};
  Func reached = init;

  auto over_budget = [&]() {
    verdict.peak_nodes = std::max(verdict.peak_nodes, store.live_node_count());
    return store.live_node_count() > node_budget;
  };

  size_t bad_depth = 0;
  bool found_bad = false;
  while (true) {
    ++verdict.iterations;
    Func hit = frontiers.back() & bad_now;
    if (!hit.is_false()) {
      found_bad = true;
      bad_depth = frontiers.size() - 1;
      break;
    }
    if (over_budget()) {
      verdict.status = Status::ResourceLimit;
      return verdict;
    }
    Func img_primed = store.and_abstract(unprimed, frontiers.back(), relation);
    Func img = store.remap_vars(img_primed, back);
    Func fresh = img & !reached;
    if (fresh.is_false()) {
      verdict.status = Status::Safe;
      return verdict;
    }
    reached = reached | fresh;
    frontiers.push_back(fresh);
    if (over_budget()) {
      verdict.status = Status::ResourceLimit;
      return verdict;
    }
  }

  // Trace reconstruction, backwards through the stored frontiers.
  verdict.status = Status::Unsafe;
  VarSet universe = enc.latch_vars;
  universe.insert(universe.end(), enc.uncontrollable_vars.begin(),
                  enc.uncontrollable_vars.end());
  Func hit = frontiers[bad_depth] & bad_now;
  std::map<Var, bool> point = store.pick_assignment(hit, universe);

  std::vector<std::map<Var, bool>> steps(bad_depth + 1);
  steps[bad_depth] = point;
  for (size_t d = bad_depth; d > 0; --d) {
    // predecessor in the previous frontier whose successor matches
    Func match = frontiers[d - 1];
    for (Var l : enc.latch_vars) {
      bool v = steps[d].at(l);
      match = match & (v ? enc.update_of(l) : !enc.update_of(l));
    }
    steps[d - 1] = store.pick_assignment(match, universe);
  }

  for (size_t d = 0; d <= bad_depth; ++d) {
    std::vector<bool> inputs(enc.uncontrollable_vars.size());
    for (size_t i = 0; i < enc.uncontrollable_vars.size(); ++i)
      inputs[i] = steps[d].at(enc.uncontrollable_vars[i]);
    verdict.trace.push_back(std::move(inputs));
  }
  verdict.peak_nodes = std::max(verdict.peak_nodes, store.live_node_count());
  return verdict;
}

std::vector<SimStep> simulate(const Aig& aig,
                              const std::vector<std::vector<bool>>& inputs) {
  std::unordered_map<uint32_t, size_t> gate_index, latch_index, input_index;
  for (size_t i = 0; i < aig.ands.size(); ++i)
    gate_index[aiger::lit_var(aig.ands[i].lhs)] = i;
  for (size_t i = 0; i < aig.latches.size(); ++i)
    latch_index[aiger::lit_var(aig.latches[i].lit)] = i;
  for (size_t i = 0; i < aig.inputs.size(); ++i)
    input_index[aiger::lit_var(aig.inputs[i])] = i;

  // topological gate order via repeated passes (cheap at this scale)
  std::vector<bool> gate_done(aig.ands.size(), false);
  std::vector<size_t> order;
  auto ready = [&](Lit l) {
    auto it = gate_index.find(aiger::lit_var(l));
    return it == gate_index.end() || gate_done[it->second];
  };
  while (order.size() < aig.ands.size()) {
    bool progress = false;
    for (size_t i = 0; i < aig.ands.size(); ++i) {
      if (gate_done[i] || !ready(aig.ands[i].rhs0) || !ready(aig.ands[i].rhs1))
        continue;
      gate_done[i] = true;
      order.push_back(i);
      progress = true;
    }
    if (!progress) throw std::runtime_error("combinational cycle in circuit");
  }

  std::vector<bool> latches(aig.latches.size(), false);
  std::vector<bool> gates(aig.ands.size(), false);
  std::vector<SimStep> result;

  for (size_t t = 0; t <= inputs.size(); ++t) {
    SimStep step;
    step.latches = latches;
    if (t == inputs.size()) {
      result.push_back(std::move(step));
      break;
    }
    const std::vector<bool>& in = inputs[t];
    if (in.size() != aig.inputs.size())
      throw std::invalid_argument("input valuation " + std::to_string(t) +
                                  " has wrong arity");
    auto value = [&](Lit l) {
      uint32_t v = aiger::lit_var(l);
      bool val;
      if (v == 0) {
        val = false;
      } else if (auto g = gate_index.find(v); g != gate_index.end()) {
        val = gates[g->second];
      } else if (auto li = latch_index.find(v); li != latch_index.end()) {
        val = latches[li->second];
      } else if (auto ii = input_index.find(v); ii != input_index.end()) {
        val = in[ii->second];
      } else {
        throw std::runtime_error("undefined variable " + std::to_string(v));
      }
      return aiger::lit_negated(l) ? !val : val;
    };
    for (size_t g : order)
      gates[g] = value(aig.ands[g].rhs0) && value(aig.ands[g].rhs1);
    for (Lit o : aig.outputs) step.outputs.push_back(value(o));
    std::vector<bool> next(latches.size());
    for (size_t i = 0; i < aig.latches.size(); ++i)
      next[i] = value(aig.latches[i].next);
    result.push_back(std::move(step));
    latches = next;
  }
  return result;
}

}  // namespace synth::verify
