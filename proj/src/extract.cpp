#include "synth/extract.hpp"

#include <algorithm>
#include <stdexcept>

#include "synth/circuit_build.hpp"

namespace synth::extract {

using aiger::Aig;
using aiger::Lit;
using bdd::Func;
using bdd::Var;
using bdd::VarSet;

Func strategy_relation(game::GameEncoding& enc, const game::WinningRegion& w) {
  if (!w.realizable)
    throw std::logic_error("strategy extraction on an unrealizable region");
  bdd::Store& store = *enc.store;
  std::map<Var, Func> subst;
  for (Var l : enc.latch_vars) subst.emplace(l, enc.update_of(l));
  // successor in W, and the step itself keeps out low
  return enc.safe_fn & store.compose_vector(w.w, subst);
}

Strategy determinize_cofactor(game::GameEncoding& enc, const bdd::Func& lambda,
                              const std::vector<Var>& order) {
  bdd::Store& store = *enc.store;
  Strategy strat;
  strat.order = order;
  Func relation = lambda;
  for (size_t i = 0; i < order.size(); ++i) {
    Var c = order[i];
    VarSet rest(order.begin() + i + 1, order.end());
    std::map<Var, Func> set_true{{c, store.constant(true)}};
    std::map<Var, Func> set_false{{c, store.constant(false)}};
    Func pos = store.compose_vector(relation, set_true);
    Func neg = store.compose_vector(relation, set_false);
    if (!rest.empty()) {
      pos = store.quantify(bdd::Quant::Exists, rest, pos);
      neg = store.quantify(bdd::Quant::Exists, rest, neg);
    }
    // 1 everywhere the negative co-factor does not force 0
    Func fc = pos | !neg;
    relation = store.compose_vector(relation, {{c, fc}});
    strat.fns.emplace(c, std::move(fc));
  }
  return strat;
}

namespace {

// Reachable states of the closed loop: latch updates with every
// controllable input replaced by its strategy function.
Func strategy_reachable(game::GameEncoding& enc, const Strategy& strat) {
  bdd::Store& store = *enc.store;
  std::map<Var, Func> choice;
  for (const auto& [c, fc] : strat.fns) choice.emplace(c, fc);

  VarSet unprimed = enc.latch_vars;
  unprimed.insert(unprimed.end(), enc.uncontrollable_vars.begin(),
                  enc.uncontrollable_vars.end());

  Func relation = store.constant(true);
  std::map<Var, Var> back;
  for (Var l : enc.latch_vars) {
    Var p = enc.primed(l);
    back.emplace(p, l);
    Func closed = store.compose_vector(enc.update_of(l), choice);
    relation = relation & !(store.var(p) ^ closed);
  }

  Func reached = store.constant(true);
  for (Var l : enc.latch_vars) reached = reached & !store.var(l);
  while (true) {
    Func img_primed = store.and_abstract(unprimed, reached, relation);
    Func img = store.remap_vars(img_primed, back);
    Func next = reached | img;
    if (next == reached) break;
    reached = next;
  }
  return reached;
}

}  // namespace

Strategy minimize_by_reachability(game::GameEncoding& enc, const Strategy& strat) {
  bdd::Store& store = *enc.store;
  Func reached = strategy_reachable(enc, strat);
  Strategy out;
  out.order = strat.order;
  for (const auto& [c, fc] : strat.fns)
    out.fns.emplace(c, store.restrict_safe(fc, reached));
  return out;
}

Aig strategy_to_aig(const Aig& spec, game::GameEncoding& enc, const Strategy& strat) {
  bdd::Store& store = *enc.store;
  if (spec.max_var != spec.inputs.size() + spec.latches.size() + spec.ands.size())
    throw std::invalid_argument(
        "synthesis output requires contiguous variable numbering in the "
        "specification");

  // bug guard: strategy functions must not read controllable inputs
  for (const auto& [c, fc] : strat.fns)
    for (Var v : store.support(fc))
      if (std::find(enc.controllable_vars.begin(), enc.controllable_vars.end(),
                    v) != enc.controllable_vars.end())
        throw std::logic_error("strategy function depends on a controllable input");

  aiger::InputPartition part = aiger::partition_inputs(spec);

  Aig out;
  out.inputs = part.uncontrollable;
  out.latches = spec.latches;
  out.outputs = spec.outputs;
  out.ands = spec.ands;
  out.symbols = spec.symbols;
  out.has_comments = spec.has_comments;
  out.comments = spec.comments;

  // aiger literal per BDD variable (latches and uncontrollable inputs)
  std::map<Var, Lit> leaf_lit;
  for (size_t i = 0; i < enc.latch_vars.size(); ++i)
    leaf_lit[enc.latch_vars[i]] = aiger::make_lit(enc.latch_aiger_vars[i]);
  for (size_t i = 0; i < enc.uncontrollable_vars.size(); ++i)
    leaf_lit[enc.uncontrollable_vars[i]] = aiger::make_lit(enc.unc_aiger_vars[i]);

  // Shannon expansion with a node cache shared across all strategy
  // functions, so common subdiagrams become common subcircuits.
  circuit::Builder builder(out, spec.max_var);

  // Controllable inputs in file order; each is redefined as an AND gate
  // wiring it to the converted function.
  for (size_t i = 0; i < enc.controllable_vars.size(); ++i) {
    Var c = enc.controllable_vars[i];
    Lit c_lit = aiger::make_lit(enc.ctrl_aiger_vars[i]);
    Lit root = builder.from_func(store, strat.fns.at(c), leaf_lit);
    out.ands.push_back({c_lit, root, root});
  }

  out.max_var = static_cast<uint32_t>(out.inputs.size() + out.latches.size() +
                                      out.ands.size());
  return out;
}

}  // namespace synth::extract
