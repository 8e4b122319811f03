#include "synth/sat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace synth::sat {

Solver::Solver() = default;

Var Solver::new_var() {
  Var v = static_cast<Var>(assign_.size());
  assign_.push_back(l_undef);
  model_.push_back(l_undef);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0.0);
  polarity_.push_back(false);
  seen_.push_back(false);
  watches_.emplace_back();
  watches_.emplace_back();
  return v;
}

bool Solver::add_clause(std::vector<Lit> lits) {
  if (unsat_) return false;
  if (!trail_lim_.empty()) backtrack(0);

  // normalize: sort, drop duplicates, detect tautologies, drop root-false
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (size_t i = 0; i + 1 < lits.size(); ++i)
    if (lits[i] == lit_not(lits[i + 1])) return true;  // tautology
  std::vector<Lit> kept;
  for (Lit l : lits) {
    if (lit_var(l) >= num_vars()) throw std::invalid_argument("unknown variable");
    int8_t v = lit_value(l);
    if (v == l_true) return true;  // already satisfied at root
    if (v == l_undef) kept.push_back(l);
  }
  if (kept.empty()) {
    unsat_ = true;
    return false;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], -1);
    if (propagate() != -1) {
      unsat_ = true;
      return false;
    }
    return true;
  }
  int idx = static_cast<int>(clauses_.size());
  watches_[kept[0]].push_back(idx);
  watches_[kept[1]].push_back(idx);
  clauses_.push_back({std::move(kept), false});
  return true;
}

void Solver::enqueue(Lit l, int reason) {
  Var v = lit_var(l);
  assign_[v] = lit_neg(l) ? l_false : l_true;
  level_[v] = static_cast<int>(trail_lim_.size());
  reason_[v] = reason;
  trail_.push_back(l);
}

int Solver::propagate() {
  while (propagate_head_ < trail_.size()) {
    Lit l = trail_[propagate_head_++];
    Lit falsified = lit_not(l);
    std::vector<int>& watch = watches_[falsified];
    size_t keep = 0;
    for (size_t i = 0; i < watch.size(); ++i) {
      int ci = watch[i];
      Clause& c = clauses_[ci];
      // ensure the falsified literal sits at position 1
      if (c.lits[0] == falsified) std::swap(c.lits[0], c.lits[1]);
      if (lit_value(c.lits[0]) == l_true) {
        watch[keep++] = ci;  // satisfied, keep watching
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < c.lits.size(); ++k) {
        if (lit_value(c.lits[k]) != l_false) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[c.lits[1]].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      // unit or conflicting
      watch[keep++] = ci;
      if (lit_value(c.lits[0]) == l_false) {
        for (size_t k = i + 1; k < watch.size(); ++k) watch[keep++] = watch[k];
        watch.resize(keep);
        propagate_head_ = trail_.size();
        return ci;
      }
      enqueue(c.lits[0], ci);
    }
    watch.resize(keep);
  }
  return -1;
}

void Solver::analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level) {
  learnt.clear();
  learnt.push_back(0);  // slot for the asserting literal
  int counter = 0;
  Lit p = -1;
  size_t trail_index = trail_.size();
  int current_level = static_cast<int>(trail_lim_.size());

  int reason_idx = conflict;
  while (true) {
    const Clause& c = clauses_[reason_idx];
    for (size_t i = (p == -1 ? 0 : 1); i < c.lits.size(); ++i) {
      Lit q = c.lits[i];
      Var v = lit_var(q);
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = true;
      bump(v);
      if (level_[v] == current_level)
        ++counter;
      else
        learnt.push_back(q);
    }
    // find next literal on the trail to resolve on
    while (!seen_[lit_var(trail_[trail_index - 1])]) --trail_index;
    --trail_index;
    p = trail_[trail_index];
    seen_[lit_var(p)] = false;
    --counter;
    if (counter == 0) break;
    reason_idx = reason_[lit_var(p)];
  }
  learnt[0] = lit_not(p);

  // clause minimization: drop literals implied by the rest
  std::vector<Lit> minimized{learnt[0]};
  for (size_t i = 1; i < learnt.size(); ++i) {
    Var v = lit_var(learnt[i]);
    int r = reason_[v];
    bool redundant = false;
    if (r != -1) {
      redundant = true;
      for (Lit q : clauses_[r].lits) {
        Var qv = lit_var(q);
        if (qv == v || level_[qv] == 0) continue;
        if (!seen_[qv]) {
          redundant = false;
          break;
        }
      }
    }
    if (!redundant) minimized.push_back(learnt[i]);
  }
  for (size_t i = 1; i < learnt.size(); ++i) seen_[lit_var(learnt[i])] = false;
  learnt = std::move(minimized);

  backtrack_level = 0;
  if (learnt.size() > 1) {
    size_t max_i = 1;
    for (size_t i = 2; i < learnt.size(); ++i)
      if (level_[lit_var(learnt[i])] > level_[lit_var(learnt[max_i])]) max_i = i;
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level_[lit_var(learnt[1])];
  }
}

void Solver::backtrack(int target) {
  while (static_cast<int>(trail_lim_.size()) > target) {
    int boundary = trail_lim_.back();
    trail_lim_.pop_back();
    while (static_cast<int>(trail_.size()) > boundary) {
      Lit l = trail_.back();
      trail_.pop_back();
      Var v = lit_var(l);
      polarity_[v] = assign_[v] == l_true;
      assign_[v] = l_undef;
      reason_[v] = -1;
    }
  }
  if (propagate_head_ > trail_.size()) propagate_head_ = trail_.size();
}

Lit Solver::pick_branch() {
  Var best = -1;
  double best_act = -1.0;
  for (Var v = 0; v < num_vars(); ++v)
    if (assign_[v] == l_undef && activity_[v] > best_act) {
      best = v;
      best_act = activity_[v];
    }
  if (best == -1) return -1;
  return mk_lit(best, !polarity_[best]);
}

void Solver::bump(Var v) {
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
}

void Solver::decay() { var_inc_ /= 0.95; }

Result Solver::solve(const std::vector<Lit>& assumptions) {
  if (unsat_) return Result::Unsat;
  backtrack(0);
  if (propagate() != -1) {
    unsat_ = true;
    return Result::Unsat;
  }

  uint64_t restart_limit = 100;
  uint64_t conflicts_here = 0;

  while (true) {
    int conflict = propagate();
    if (conflict != -1) {
      ++conflicts_;
      ++conflicts_here;
      if (trail_lim_.empty()) {
        unsat_ = true;
        return Result::Unsat;
      }
      // all decisions so far are assumptions: the conflict is final
      if (trail_lim_.size() <= assumptions.size()) {
        backtrack(0);
        return Result::Unsat;
      }
      std::vector<Lit> learnt;
      int back_level;
      analyze(conflict, learnt, back_level);
      backtrack(back_level);
      if (learnt.size() == 1) {
        if (lit_value(learnt[0]) == l_false) {
          unsat_ = true;
          return Result::Unsat;
        }
        if (lit_value(learnt[0]) == l_undef) enqueue(learnt[0], -1);
      } else {
        int idx = static_cast<int>(clauses_.size());
        watches_[learnt[0]].push_back(idx);
        watches_[learnt[1]].push_back(idx);
        clauses_.push_back({learnt, true});
        enqueue(learnt[0], idx);
      }
      decay();
      if (conflicts_here >= restart_limit) {
        conflicts_here = 0;
        restart_limit = restart_limit + restart_limit / 2;
        backtrack(0);
      }
      continue;
    }

    // establish pending assumptions, one decision level each
    if (trail_lim_.size() < assumptions.size()) {
      Lit a = assumptions[trail_lim_.size()];
      if (lit_var(a) >= num_vars()) throw std::invalid_argument("unknown variable");
      int8_t v = lit_value(a);
      if (v == l_false) {
        backtrack(0);
        return Result::Unsat;  // conflicts with current forced assignment
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      if (v == l_undef) enqueue(a, -1);
      continue;
    }

    Lit decision = pick_branch();
    if (decision == -1) {
      for (Var v = 0; v < num_vars(); ++v) model_[v] = assign_[v];
      backtrack(0);
      return Result::Sat;
    }
    ++decisions_;
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    enqueue(decision, -1);
  }
}

}  // namespace synth::sat
