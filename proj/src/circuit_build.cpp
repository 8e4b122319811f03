#include "synth/circuit_build.hpp"

namespace synth::circuit {

using aiger::Lit;

Lit Builder::and_gate(Lit a, Lit b) {
  if (a == aiger::lit_false || b == aiger::lit_false) return aiger::lit_false;
  if (a == aiger::lit_true) return b;
  if (b == aiger::lit_true) return a;
  if (a == b) return a;
  if (a == aiger::lit_neg(b)) return aiger::lit_false;
  Lit lhs = aiger::make_lit(++next_var_);
  aig_.ands.push_back({lhs, a, b});
  return lhs;
}

Lit Builder::or_gate(Lit a, Lit b) {
  return aiger::lit_neg(and_gate(aiger::lit_neg(a), aiger::lit_neg(b)));
}

Lit Builder::xor_gate(Lit a, Lit b) {
  return or_gate(and_gate(a, aiger::lit_neg(b)), and_gate(aiger::lit_neg(a), b));
}

Lit Builder::mux(Lit sel, Lit hi, Lit lo) {
  return or_gate(and_gate(sel, hi), and_gate(aiger::lit_neg(sel), lo));
}

Lit Builder::and_all(const std::vector<Lit>& lits) {
  Lit acc = aiger::lit_true;
  for (Lit l : lits) acc = and_gate(acc, l);
  return acc;
}

Lit Builder::or_all(const std::vector<Lit>& lits) {
  Lit acc = aiger::lit_false;
  for (Lit l : lits) acc = or_gate(acc, l);
  return acc;
}

Lit Builder::equals_const(const std::vector<Lit>& bits, uint64_t value) {
  std::vector<Lit> terms;
  for (size_t i = 0; i < bits.size(); ++i)
    terms.push_back((value >> i) & 1 ? bits[i] : aiger::lit_neg(bits[i]));
  return and_all(terms);
}

Lit Builder::from_func(bdd::Store& store, const bdd::Func& f,
                       const std::map<bdd::Var, Lit>& leaf_lits) {
  if (f.is_false()) return aiger::lit_false;
  if (f.is_true()) return aiger::lit_true;
  auto hit = node_cache_.find(f.id());
  if (hit != node_cache_.end()) return hit->second;

  bdd::Var v = store.top_var(f);
  Lit lv = leaf_lits.at(v);
  bdd::Func lo = store.low_child(f);
  bdd::Func hi = store.high_child(f);
  Lit result;
  if (lo.is_false() && hi.is_true()) {
    result = lv;
  } else if (lo.is_true() && hi.is_false()) {
    result = aiger::lit_neg(lv);
  } else {
    Lit llo = from_func(store, lo, leaf_lits);
    Lit lhi = from_func(store, hi, leaf_lits);
    Lit g1 = and_gate(lv, lhi);
    Lit g2 = and_gate(aiger::lit_neg(lv), llo);
    result = aiger::lit_neg(and_gate(aiger::lit_neg(g1), aiger::lit_neg(g2)));
  }
  node_cache_.emplace(f.id(), result);
  return result;
}

}  // namespace synth::circuit
