#include "synth/game.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace synth::game {

using aiger::Aig;
using aiger::InputPartition;
using aiger::Lit;
using bdd::Func;
using bdd::Quant;
using bdd::Var;
using bdd::VarSet;

// ----------------------------------------------------------------------
// GameEncoding helpers

Var GameEncoding::out_var() {
  if (out_is_latch) return out_latch;
  if (!virtual_out_) {
    Var v = latch_vars.empty() ? store->new_var()
                               : store->new_var_after(latch_vars.back());
    virtual_out_ = v;
    update_fns.emplace(v, !safe_fn);
  }
  return *virtual_out_;
}

Func GameEncoding::out_states() {
  if (out_is_latch) return store->var(out_latch);
  if (virtual_out_) return store->var(*virtual_out_);
  return store->constant(false);
}

Var GameEncoding::primed(Var latch) {
  auto it = primed_.find(latch);
  if (it != primed_.end()) return it->second;
  Var p = store->new_var_after(latch);
  primed_.emplace(latch, p);
  return p;
}

std::map<Var, bool> GameEncoding::zero_state() const {
  std::map<Var, bool> zero;
  for (Var l : latch_vars) zero[l] = false;
  if (virtual_out_) zero[*virtual_out_] = false;
  return zero;
}

const GameEncoding::MonoRelation& GameEncoding::mono_relation(
    const std::vector<Var>& latches) {
  auto it = mono_cache_.find(latches);
  if (it != mono_cache_.end()) return it->second;

  MonoRelation mono;
  std::vector<Var> relation_latches;
  std::vector<Var> used_targets;
  for (Var l : latches) {
    auto d = direct_sub.find(l);
    if (d != direct_sub.end() &&
        std::find(used_targets.begin(), used_targets.end(), d->second) ==
            used_targets.end()) {
      mono.remap.emplace(l, d->second);
      used_targets.push_back(d->second);
    } else {
      relation_latches.push_back(l);
    }
  }
  mono.relation = store->constant(true);
  for (Var l : relation_latches) {
    Var p = primed(l);
    mono.primed_cube.push_back(p);
    mono.remap.emplace(l, p);
    mono.relation = mono.relation & !(store->var(p) ^ update_of(l));
  }
  return mono_cache_.emplace(latches, std::move(mono)).first->second;
}

// ----------------------------------------------------------------------
// encode

namespace {

// Topological order of AND gates; throws on a combinational cycle.
std::vector<size_t> topo_order(const Aig& aig) {
  std::unordered_map<uint32_t, size_t> gate_of_var;
  for (size_t i = 0; i < aig.ands.size(); ++i)
    gate_of_var[aiger::lit_var(aig.ands[i].lhs)] = i;

  std::vector<size_t> order;
  std::vector<int> state(aig.ands.size(), 0);  // 0 new, 1 visiting, 2 done
  std::vector<size_t> stack;
  for (size_t root = 0; root < aig.ands.size(); ++root) {
    if (state[root] == 2) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      size_t g = stack.back();
      if (state[g] == 2) {
        stack.pop_back();
        continue;
      }
      if (state[g] == 1) {
        state[g] = 2;
        order.push_back(g);
        stack.pop_back();
        continue;
      }
      state[g] = 1;
      for (Lit operand : {aig.ands[g].rhs0, aig.ands[g].rhs1}) {
        auto it = gate_of_var.find(aiger::lit_var(operand));
        if (it == gate_of_var.end()) continue;
        if (state[it->second] == 1)
          throw std::runtime_error("combinational cycle through AND gate " +
                                   std::to_string(aig.ands[it->second].lhs));
        if (state[it->second] == 0) stack.push_back(it->second);
      }
    }
  }
  return order;
}

}  // namespace

GameEncoding encode(const Aig& aig, const InputPartition& partition,
                    bdd::Store& store, bool eager_dealloc) {
  aiger::validate_spec(aig);
  GameEncoding enc;
  enc.store = &store;

  // Variable order: latches in file order, then X_u, then X_c.
  for (const aiger::Latch& l : aig.latches) {
    Var v = store.new_var();
    enc.latch_vars.push_back(v);
    enc.latch_aiger_vars.push_back(aiger::lit_var(l.lit));
    enc.var_of_aiger[aiger::lit_var(l.lit)] = v;
  }
  for (Lit in : partition.uncontrollable) {
    Var v = store.new_var();
    enc.uncontrollable_vars.push_back(v);
    enc.unc_aiger_vars.push_back(aiger::lit_var(in));
    enc.var_of_aiger[aiger::lit_var(in)] = v;
  }
  for (Lit in : partition.controllable) {
    Var v = store.new_var();
    enc.controllable_vars.push_back(v);
    enc.ctrl_aiger_vars.push_back(aiger::lit_var(in));
    enc.var_of_aiger[aiger::lit_var(in)] = v;
  }

  // Remaining uses per gate variable; a gate is dead once every dependent
  // has been processed.
  std::unordered_map<uint32_t, size_t> gate_index;
  for (size_t i = 0; i < aig.ands.size(); ++i)
    gate_index[aiger::lit_var(aig.ands[i].lhs)] = i;
  std::unordered_map<uint32_t, size_t> uses;
  auto count_use = [&](Lit l) {
    if (gate_index.count(aiger::lit_var(l))) ++uses[aiger::lit_var(l)];
  };
  for (const aiger::AndGate& g : aig.ands) {
    count_use(g.rhs0);
    count_use(g.rhs1);
  }
  for (const aiger::Latch& l : aig.latches) count_use(l.next);
  count_use(aig.outputs[0]);

  std::unordered_map<uint32_t, Func> gate_fn;
  auto leaf_fn = [&](uint32_t var) -> Func {
    auto it = enc.var_of_aiger.find(var);
    if (it == enc.var_of_aiger.end())
      throw std::runtime_error("undefined variable " + std::to_string(var));
    return store.var(it->second);
  };
  auto consume = [&](Lit l) -> Func {
    Func f;
    uint32_t var = aiger::lit_var(l);
    if (var == 0) {
      f = store.constant(false);
    } else if (gate_index.count(var)) {
      f = gate_fn.at(var);
      if (eager_dealloc && --uses[var] == 0) gate_fn.erase(var);
    } else {
      f = leaf_fn(var);
    }
    return aiger::lit_negated(l) ? !f : f;
  };

  for (size_t g : topo_order(aig)) {
    const aiger::AndGate& gate = aig.ands[g];
    Func a = consume(gate.rhs0);
    Func b = consume(gate.rhs1);
    gate_fn.emplace(aiger::lit_var(gate.lhs), a & b);
  }

  for (size_t i = 0; i < aig.latches.size(); ++i) {
    const aiger::Latch& l = aig.latches[i];
    Var lv = enc.latch_vars[i];
    enc.update_fns.emplace(lv, consume(l.next));
    if (!aiger::lit_negated(l.next)) {
      uint32_t nv = aiger::lit_var(l.next);
      auto it = enc.var_of_aiger.find(nv);
      if (it != enc.var_of_aiger.end() && !gate_index.count(nv))
        enc.direct_sub.emplace(lv, it->second);
    }
  }

  Lit out = aig.outputs[0];
  bool out_latch_lit = !aiger::lit_negated(out) &&
                       std::find(enc.latch_aiger_vars.begin(),
                                 enc.latch_aiger_vars.end(),
                                 aiger::lit_var(out)) != enc.latch_aiger_vars.end();
  if (out_latch_lit) {
    enc.out_is_latch = true;
    enc.out_latch = enc.var_of_aiger.at(aiger::lit_var(out));
    enc.safe_fn = !enc.update_of(enc.out_latch);
  } else {
    enc.out_is_latch = false;
    enc.safe_fn = !consume(out);
  }
  return enc;
}

// ----------------------------------------------------------------------
// upre and the fixpoint

namespace {

// One environment-forcing step over the given latch set:
//   exists X_u forall X_c. ( target[l <- f_l] \/ or_term )
// either by vector composition or through the monolithic relation.

Func step_partitioned(GameEncoding& enc, const std::vector<Var>& latches,
                      const Func& target, const UpreOptions& opts,
                      const Func& neg_care) {
  bdd::Store& store = *enc.store;
  std::map<Var, Func> subst;
  for (Var l : latches) {
    const Func& f = enc.update_of(l);
    if (opts.restrict_neg_s)
      subst.emplace(l, store.restrict_safe(f, neg_care));
    else
      subst.emplace(l, f);
  }
  return store.compose_vector(target, subst);
}

Func step_monolithic(GameEncoding& enc, const std::vector<Var>& latches,
                     const Func& target, const UpreOptions& opts,
                     const Func& neg_care) {
  bdd::Store& store = *enc.store;
  const GameEncoding::MonoRelation& mono = enc.mono_relation(latches);

  Func t = mono.relation;
  if (opts.restrict_neg_s) {
    // restricted relation is target-dependent, rebuild it
    t = store.constant(true);
    for (const auto& [l, p] : mono.remap) {
      if (std::find(mono.primed_cube.begin(), mono.primed_cube.end(), p) ==
          mono.primed_cube.end())
        continue;  // direct substitution, no conjunct
      Func f = store.restrict_safe(enc.update_of(l), neg_care);
      t = t & !(store.var(p) ^ f);
    }
  }

  Func target_primed = store.remap_vars(target, mono.remap);
  if (mono.primed_cube.empty()) return target_primed;
  if (opts.use_and_abstract)
    return store.and_abstract(mono.primed_cube, target_primed, t);
  return store.quantify(Quant::Exists, mono.primed_cube, target_primed & t);
}

Func env_step(GameEncoding& enc, const std::vector<Var>& latches,
              const Func& target, const Func& or_term, UpreMode mode,
              const UpreOptions& opts, const Func& neg_care) {
  bdd::Store& store = *enc.store;
  Func substituted = mode == UpreMode::Partitioned
                         ? step_partitioned(enc, latches, target, opts, neg_care)
                         : step_monolithic(enc, latches, target, opts, neg_care);
  Func inner = or_term.is_false() ? substituted : (substituted | or_term);
  Func after_ctrl = store.quantify(Quant::Forall, enc.controllable_vars, inner);
  return store.quantify(Quant::Exists, enc.uncontrollable_vars, after_ctrl);
}

void check_support_in_latches(const GameEncoding& enc, const Func& s) {
  VarSet sup = enc.store->support(s);
  for (Var v : sup)
    if (std::find(enc.latch_vars.begin(), enc.latch_vars.end(), v) ==
        enc.latch_vars.end())
      throw std::invalid_argument("target set depends on non-latch variable " +
                                  std::to_string(v));
}

}  // namespace

Func upre(GameEncoding& enc, const Func& s, UpreMode mode, const UpreOptions& opts) {
  check_support_in_latches(enc, s);
  bdd::Store& store = *enc.store;
  Func neg_care = opts.restrict_neg_s ? !s : store.constant(false);
  Func r = env_step(enc, enc.latch_vars, s, store.constant(false), mode, opts,
                    neg_care);
  if (opts.restrict_neg_s) r = s | r;
  for (const Func& care : opts.care_sets) r = store.restrict_safe(r, care);
  return r;
}

WinningRegion solve(GameEncoding& enc, const SolveOptions& opts) {
  bdd::Store& store = *enc.store;

  UpreOptions uopts;
  uopts.restrict_neg_s = opts.restrict_neg_s;
  uopts.use_and_abstract = opts.use_and_abstract;
  if (opts.reach_care) {
    std::vector<VarSet> subsets;
    size_t block = std::max<size_t>(1, opts.reach_block);
    for (size_t i = 0; i < enc.latch_vars.size(); i += block)
      subsets.push_back(VarSet(enc.latch_vars.begin() + i,
                               enc.latch_vars.begin() +
                                   std::min(enc.latch_vars.size(), i + block)));
    uopts.care_sets = reach_overapprox(enc, subsets);
  }

  std::vector<Var> latches = enc.latch_vars;
  Func out_states = store.constant(false);
  Func or_term = store.constant(false);

  if (opts.variant == Variant::Standard) {
    // The out latch participates in the substitution; for circuits whose
    // out signal is combinational this materializes the virtual latch.
    Var ov = enc.out_var();
    out_states = store.var(ov);
    if (enc.has_virtual_out()) latches.push_back(ov);
  } else {
    // Rearranged fixpoint: the safety condition stays outside the
    // innermost quantification and no out latch is ever created.
    or_term = !enc.safe_fn;
    out_states = enc.out_is_latch ? store.var(enc.out_latch) : store.constant(false);
  }

  std::map<Var, bool> zero = enc.zero_state();
  WinningRegion result;
  Func attractor =
      opts.variant == Variant::Standard ? out_states : store.constant(false);
  bool early = false;
  while (true) {
    ++result.iterations;
    if (opts.early_exit && store.evaluate(attractor, zero)) {
      early = true;
      break;
    }
    Func target = opts.variant == Variant::Standard ? (attractor | out_states)
                                                    : attractor;
    Func neg_care = uopts.restrict_neg_s ? !target : store.constant(false);
    Func pre = env_step(enc, latches, target, or_term, opts.mode, uopts, neg_care);
    for (const Func& care : uopts.care_sets) pre = store.restrict_safe(pre, care);
    Func next = attractor | pre;
    if (next == attractor) break;
    attractor = next;
  }

  Func losing = opts.variant == Variant::Standard
                    ? attractor
                    : (attractor | (enc.out_is_latch ? store.var(enc.out_latch)
                                                     : store.constant(false)));
  Func w = !losing;
  if (enc.has_virtual_out()) {
    std::map<Var, Func> drop{{enc.out_var(), store.constant(false)}};
    w = store.compose_vector(w, drop);
  }
  result.w = w;
  result.realizable = early ? false : store.evaluate(result.w, zero);
  return result;
}

std::vector<Func> reach_overapprox(GameEncoding& enc,
                                   const std::vector<VarSet>& subsets) {
  bdd::Store& store = *enc.store;
  std::vector<Func> out;
  for (const VarSet& subset : subsets) {
    if (subset.empty()) throw std::invalid_argument("empty latch subset");
    for (Var p : subset)
      if (!enc.update_fns.count(p))
        throw std::invalid_argument("subset contains non-latch variable");

    VarSet unprimed_cube = enc.latch_vars;
    unprimed_cube.insert(unprimed_cube.end(), enc.uncontrollable_vars.begin(),
                         enc.uncontrollable_vars.end());
    unprimed_cube.insert(unprimed_cube.end(), enc.controllable_vars.begin(),
                         enc.controllable_vars.end());

    Func rel = store.constant(true);
    std::map<Var, Var> back;
    for (Var p : subset) {
      Var pp = enc.primed(p);
      back.emplace(pp, p);
      rel = rel & !(store.var(pp) ^ enc.update_of(p));
    }

    Func reached = store.constant(true);
    for (Var p : subset) reached = reached & !store.var(p);  // initial projection
    while (true) {
      Func img_primed = store.and_abstract(unprimed_cube, reached, rel);
      Func img = store.remap_vars(img_primed, back);
      Func next = reached | img;
      if (next == reached) break;
      reached = next;
    }
    out.push_back(reached);
  }
  return out;
}

// ----------------------------------------------------------------------
// Explicit-state oracle

namespace {

// Flat circuit evaluator over bit-packed (latch, input) assignments.
struct CircuitEval {
  const Aig& aig;
  std::vector<size_t> order;                     // topological gate order
  std::unordered_map<uint32_t, int> kind_of;     // var -> index encoding
  // kinds: latch i -> i, input i -> 1000000+i, gate -> -1 (computed)
  std::vector<bool> gate_val;

  explicit CircuitEval(const Aig& a) : aig(a), order(topo_order(a)) {
    for (size_t i = 0; i < a.latches.size(); ++i)
      kind_of[aiger::lit_var(a.latches[i].lit)] = static_cast<int>(i);
    for (size_t i = 0; i < a.inputs.size(); ++i)
      kind_of[aiger::lit_var(a.inputs[i])] = static_cast<int>(1000000 + i);
    gate_val.resize(a.ands.size());
  }

  bool lit_value(Lit l, const std::vector<bool>& latches,
                 const std::vector<bool>& inputs,
                 const std::unordered_map<uint32_t, size_t>& gate_index) const {
    uint32_t v = aiger::lit_var(l);
    bool val;
    if (v == 0) {
      val = false;
    } else {
      auto g = gate_index.find(v);
      if (g != gate_index.end()) {
        val = gate_val[g->second];
      } else {
        int k = kind_of.at(v);
        val = k >= 1000000 ? inputs[k - 1000000] : latches[k];
      }
    }
    return aiger::lit_negated(l) ? !val : val;
  }
};

}  // namespace

ExplicitResult solve_explicit(const Aig& aig, const InputPartition& partition) {
  const size_t nl = aig.latches.size();
  const size_t nu = partition.uncontrollable.size();
  const size_t nc = partition.controllable.size();
  if (nl + nu + nc > 20)
    throw std::invalid_argument("explicit solver limited to 20 variables");

  std::unordered_map<uint32_t, size_t> gate_index;
  for (size_t i = 0; i < aig.ands.size(); ++i)
    gate_index[aiger::lit_var(aig.ands[i].lhs)] = i;
  CircuitEval eval(aig);

  // Positions of uncontrollable/controllable bits within the input vector.
  std::vector<size_t> unc_pos, ctrl_pos;
  for (size_t i = 0; i < aig.inputs.size(); ++i) {
    bool is_ctrl = std::find(partition.controllable.begin(),
                             partition.controllable.end(),
                             aig.inputs[i]) != partition.controllable.end();
    (is_ctrl ? ctrl_pos : unc_pos).push_back(i);
  }

  const size_t num_states = size_t(1) << nl;
  const size_t num_unc = size_t(1) << nu;
  const size_t num_ctrl = size_t(1) << nc;

  // out literal as a latch test, when it is one
  Lit out = aig.outputs[0];
  bool out_latch = false;
  size_t out_latch_pos = 0;
  if (!aiger::lit_negated(out)) {
    for (size_t i = 0; i < nl; ++i)
      if (aiger::lit_var(aig.latches[i].lit) == aiger::lit_var(out)) {
        out_latch = true;
        out_latch_pos = i;
      }
  }

  // successor state and immediate out-violation per (state, inputs)
  auto eval_step = [&](size_t state, size_t unc, size_t ctrl, bool& out_now) {
    std::vector<bool> latches(nl), inputs(aig.inputs.size());
    for (size_t i = 0; i < nl; ++i) latches[i] = (state >> i) & 1;
    for (size_t i = 0; i < nu; ++i) inputs[unc_pos[i]] = (unc >> i) & 1;
    for (size_t i = 0; i < nc; ++i) inputs[ctrl_pos[i]] = (ctrl >> i) & 1;
    for (size_t g : eval.order) {
      const aiger::AndGate& gate = aig.ands[g];
      eval.gate_val[g] = eval.lit_value(gate.rhs0, latches, inputs, gate_index) &&
                         eval.lit_value(gate.rhs1, latches, inputs, gate_index);
    }
    size_t succ = 0;
    for (size_t i = 0; i < nl; ++i)
      if (eval.lit_value(aig.latches[i].next, latches, inputs, gate_index))
        succ |= size_t(1) << i;
    // For a latched out signal the violation surfaces in the successor
    // state; combinational out counts as forcing the (virtual) out latch.
    out_now = out_latch ? false : eval.lit_value(out, latches, inputs, gate_index);
    return succ;
  };

  std::vector<bool> attractor(num_states, false);
  if (out_latch)
    for (size_t s = 0; s < num_states; ++s)
      attractor[s] = (s >> out_latch_pos) & 1;

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t s = 0; s < num_states; ++s) {
      if (attractor[s]) continue;
      bool env_wins = false;
      for (size_t u = 0; u < num_unc && !env_wins; ++u) {
        bool forced = true;
        for (size_t c = 0; c < num_ctrl && forced; ++c) {
          bool out_now = false;
          size_t succ = eval_step(s, u, c, out_now);
          if (!out_now && !attractor[succ]) forced = false;
        }
        env_wins = forced;
      }
      if (env_wins) {
        attractor[s] = true;
        changed = true;
      }
    }
  }

  ExplicitResult res;
  res.num_latches = nl;
  res.winning.resize(num_states);
  for (size_t s = 0; s < num_states; ++s) res.winning[s] = !attractor[s];
  res.realizable = res.winning[0];
  return res;
}

}  // namespace synth::game
