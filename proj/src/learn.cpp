#include "synth/learn.hpp"

#include <sstream>
#include <unordered_map>

namespace synth::learn {

using bdd::Func;
using bdd::Var;

std::string Cnf::to_dimacs() const {
  std::ostringstream out;
  out << "p cnf " << num_vars << ' ' << clauses.size() << '\n';
  for (const auto& c : clauses) {
    for (int l : c) out << l << ' ';
    out << "0\n";
  }
  return out.str();
}

bool LearnedRegion::satisfied_by_zero() const {
  for (const RegionClause& c : clauses) {
    bool sat = false;
    for (const RegionLit& l : c.lits) sat |= !l.positive;
    if (!sat) return false;
  }
  return true;
}

// ----------------------------------------------------------------------
// tseitin

namespace {

// Shared context for encoding diagram nodes into CNF.
struct NodeEncoder {
  bdd::Store& store;
  Cnf& cnf;
  std::map<Var, int>& var_sat;              // bdd var -> dimacs var
  std::unordered_map<bdd::NodeId, int> node_lit;  // node -> dimacs literal
  int true_var;

  int fresh() { return ++cnf.num_vars; }

  // dimacs literal equivalent to the node's function
  int encode(const Func& f, auto&& self) {
    if (f.is_true()) return true_var;
    if (f.is_false()) return -true_var;
    auto hit = node_lit.find(f.id());
    if (hit != node_lit.end()) return hit->second;

    Var v = store.top_var(f);
    int lv = var_sat.at(v);
    Func lo = store.low_child(f);
    Func hi = store.high_child(f);
    int result;
    if (lo.is_false() && hi.is_true()) {
      result = lv;
    } else if (lo.is_true() && hi.is_false()) {
      result = -lv;
    } else {
      int llo = self(lo, self);
      int lhi = self(hi, self);
      int a = fresh();
      // a <-> (v ? hi : lo)
      cnf.clauses.push_back({-a, -lv, lhi});
      cnf.clauses.push_back({-a, lv, llo});
      cnf.clauses.push_back({a, -lv, -lhi});
      cnf.clauses.push_back({a, lv, -llo});
      result = a;
    }
    node_lit.emplace(f.id(), result);
    return result;
  }
};

}  // namespace

TransitionCnf tseitin(game::GameEncoding& enc) {
  TransitionCnf tc;
  std::map<Var, int> var_sat;

  auto alloc = [&](std::vector<int>& into, const std::vector<Var>& vars) {
    for (Var v : vars) {
      int sv = ++tc.cnf.num_vars;
      var_sat.emplace(v, sv);
      into.push_back(sv);
    }
  };
  alloc(tc.latch_now, enc.latch_vars);
  alloc(tc.unc_inputs, enc.uncontrollable_vars);
  alloc(tc.ctrl_inputs, enc.controllable_vars);

  int true_var = ++tc.cnf.num_vars;
  tc.cnf.clauses.push_back({true_var});

  NodeEncoder encoder{*enc.store, tc.cnf, var_sat, {}, true_var};

  for (Var l : enc.latch_vars) {
    int next = ++tc.cnf.num_vars;
    tc.latch_next.push_back(next);
    int root = encoder.encode(enc.update_of(l),
                              [&](const Func& f, auto&& self) -> int {
                                return encoder.encode(f, self);
                              });
    tc.cnf.clauses.push_back({-next, root});
    tc.cnf.clauses.push_back({next, -root});
  }

  if (enc.out_is_latch) {
    tc.has_virtual_out = false;
    for (size_t i = 0; i < enc.latch_vars.size(); ++i)
      if (enc.latch_vars[i] == enc.out_latch) tc.out_slot = i;
  } else {
    // virtual out latch: current-state var unconstrained, next state
    // follows the output expression
    tc.has_virtual_out = true;
    tc.out_slot = tc.latch_now.size();
    tc.latch_now.push_back(++tc.cnf.num_vars);
    int next = ++tc.cnf.num_vars;
    tc.latch_next.push_back(next);
    int safe_root = encoder.encode(enc.safe_fn,
                                   [&](const Func& f, auto&& self) -> int {
                                     return encoder.encode(f, self);
                                   });
    tc.cnf.clauses.push_back({-next, -safe_root});
    tc.cnf.clauses.push_back({next, safe_root});
  }
  return tc;
}

// ----------------------------------------------------------------------
// Learner

namespace {

void load_cnf(sat::Solver& solver, const Cnf& cnf) {
  while (solver.num_vars() < cnf.num_vars) solver.new_var();
  for (const auto& clause : cnf.clauses) {
    std::vector<sat::Lit> lits;
    for (int l : clause)
      lits.push_back(sat::mk_lit(std::abs(l) - 1, l < 0));
    solver.add_clause(std::move(lits));
  }
}

sat::Lit dimacs_assume(int var, bool value) {
  return sat::mk_lit(var - 1, !value);
}

}  // namespace

Learner::Learner(game::GameEncoding& enc) : enc_(enc), tc_(tseitin(enc)) {
  load_cnf(a_, tc_.cnf);
  load_cnf(b_, tc_.cnf);
  // Initial region: all safe states, i.e. not out.
  add_region_clause({{{tc_.out_slot, false}}});
}

void Learner::new_activation_epoch() {
  if (a_act_ >= 0) a_.add_clause({sat::mk_lit(a_act_, true)});  // retire
  a_act_ = a_.new_var();
  // big disjunction: under this epoch, some region clause is violated
  // in the successor state
  std::vector<sat::Lit> big{sat::mk_lit(a_act_, true)};
  for (sat::Var neg : a_clause_neg_) big.push_back(sat::mk_lit(neg, false));
  a_.add_clause(std::move(big));
}

void Learner::add_region_clause(const RegionClause& clause) {
  region_.clauses.push_back(clause);

  // current-state clause, in both solvers
  std::vector<sat::Lit> now;
  for (const RegionLit& l : clause.lits)
    now.push_back(sat::mk_lit(tc_.latch_now[l.slot] - 1, !l.positive));
  a_.add_clause(now);
  b_.add_clause(now);

  // successor-state clause in B
  std::vector<sat::Lit> next;
  for (const RegionLit& l : clause.lits)
    next.push_back(sat::mk_lit(tc_.latch_next[l.slot] - 1, !l.positive));
  b_.add_clause(next);

  // negation aux in A: neg <-> (all primed literals of the clause false)
  sat::Var neg = a_.new_var();
  std::vector<sat::Lit> back{sat::mk_lit(neg, false)};
  for (const RegionLit& l : clause.lits) {
    sat::Lit primed = sat::mk_lit(tc_.latch_next[l.slot] - 1, !l.positive);
    a_.add_clause({sat::mk_lit(neg, true), sat::lit_not(primed)});
    back.push_back(primed);
  }
  a_.add_clause(std::move(back));
  a_clause_neg_.push_back(neg);

  new_activation_epoch();
}

std::optional<ForcedState> Learner::find_forced_state() {
  while (true) {
    std::vector<sat::Lit> assume{sat::mk_lit(a_act_, false)};
    if (a_.solve(assume) == sat::Result::Unsat) return std::nullopt;

    ForcedState cand;
    for (int v : tc_.latch_now) cand.state.push_back(a_.value(v - 1));
    for (int v : tc_.unc_inputs) cand.unc.push_back(a_.value(v - 1));

    std::vector<sat::Lit> fixed;
    for (size_t i = 0; i < tc_.latch_now.size(); ++i)
      fixed.push_back(dimacs_assume(tc_.latch_now[i], cand.state[i]));
    for (size_t i = 0; i < tc_.unc_inputs.size(); ++i)
      fixed.push_back(dimacs_assume(tc_.unc_inputs[i], cand.unc[i]));

    if (b_.solve(fixed) == sat::Result::Unsat) return cand;  // certified

    // the system can answer: block this (state, sigma_u) pair in A
    std::vector<sat::Lit> block{sat::mk_lit(a_act_, true)};
    for (size_t i = 0; i < tc_.latch_now.size(); ++i)
      block.push_back(sat::mk_lit(tc_.latch_now[i] - 1, cand.state[i]));
    for (size_t i = 0; i < tc_.unc_inputs.size(); ++i)
      block.push_back(sat::mk_lit(tc_.unc_inputs[i] - 1, cand.unc[i]));
    a_.add_clause(std::move(block));
  }
}

RegionClause Learner::generalize_blocking_clause(const ForcedState& forced) {
  ++region_.iterations;
  std::vector<bool> keep(forced.state.size(), true);
  std::vector<sat::Lit> unc_fixed;
  for (size_t i = 0; i < tc_.unc_inputs.size(); ++i)
    unc_fixed.push_back(dimacs_assume(tc_.unc_inputs[i], forced.unc[i]));

  for (size_t drop = 0; drop < forced.state.size(); ++drop) {
    keep[drop] = false;
    std::vector<sat::Lit> assume = unc_fixed;
    for (size_t i = 0; i < forced.state.size(); ++i)
      if (keep[i]) assume.push_back(dimacs_assume(tc_.latch_now[i], forced.state[i]));
    // still no controllable answer for any W-state under the shrunk cube?
    if (b_.solve(assume) == sat::Result::Unsat) {
      ++region_.literals_dropped;
    } else {
      keep[drop] = true;
    }
  }

  RegionClause clause;
  for (size_t i = 0; i < forced.state.size(); ++i)
    if (keep[i]) clause.lits.push_back({i, !forced.state[i]});
  add_region_clause(clause);
  return clause;
}

bdd::Func Learner::region_to_bdd() const {
  bdd::Store& store = *enc_.store;
  Func region = store.constant(true);
  for (const RegionClause& c : region_.clauses) {
    Func clause = store.constant(false);
    bool satisfied = false;
    for (const RegionLit& l : c.lits) {
      if (tc_.has_virtual_out && l.slot == tc_.out_slot) {
        // virtual out is 0: positive literal drops out, negative
        // literal satisfies the clause
        if (!l.positive) satisfied = true;
        continue;
      }
      Func v = store.var(enc_.latch_vars[l.slot]);
      clause = clause | (l.positive ? v : !v);
    }
    if (!satisfied) region = region & clause;
  }
  return region;
}

LearnResult learn_winning_region(game::GameEncoding& enc) {
  Learner learner(enc);
  while (auto forced = learner.find_forced_state())
    learner.generalize_blocking_clause(*forced);
  LearnResult result;
  result.region = learner.region();
  result.realizable = result.region.satisfied_by_zero();
  return result;
}

}  // namespace synth::learn
