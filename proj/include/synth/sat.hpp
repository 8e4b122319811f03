#pragma once

#include <cstdint>
#include <vector>

namespace synth::sat {

// Variables are 0-based; literals are 2*v (positive) or 2*v+1 (negated).
using Var = int;
using Lit = int;

inline Lit mk_lit(Var v, bool neg = false) { return 2 * v + (neg ? 1 : 0); }
inline Var lit_var(Lit l) { return l >> 1; }
inline bool lit_neg(Lit l) { return (l & 1) != 0; }
inline Lit lit_not(Lit l) { return l ^ 1; }

enum class Result { Sat, Unsat };

// Conflict-driven clause-learning solver: watched-literal propagation,
// first-UIP learning, VSIDS-style activities, geometric restarts, and an
// incremental assumption interface.
class Solver {
 public:
  Solver();

  Var new_var();
  int num_vars() const { return static_cast<int>(assign_.size()); }

  // False is returned when the clause is already falsified at the root
  // level (the solver becomes permanently Unsat).
  bool add_clause(std::vector<Lit> lits);

  Result solve(const std::vector<Lit>& assumptions = {});

  // Model access after Sat.
  bool value(Var v) const { return model_[v] == 1; }

  uint64_t conflicts() const { return conflicts_; }
  uint64_t decisions() const { return decisions_; }

 private:
  enum : int8_t { l_undef = -1, l_false = 0, l_true = 1 };

  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
  };

  int8_t lit_value(Lit l) const {
    int8_t v = assign_[lit_var(l)];
    if (v == l_undef) return l_undef;
    return lit_neg(l) ? int8_t(1 - v) : v;
  }

  void enqueue(Lit l, int reason);
  int propagate();  // returns conflicting clause index or -1
  void analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level);
  void backtrack(int level);
  Lit pick_branch();
  void bump(Var v);
  void decay();

  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> watches_;  // literal -> clause indices
  std::vector<int8_t> assign_;             // var -> value
  std::vector<int8_t> model_;
  std::vector<int> level_;                 // var -> decision level
  std::vector<int> reason_;                // var -> clause index or -1
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;             // decision level boundaries
  size_t propagate_head_ = 0;
  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<bool> polarity_;             // phase saving
  std::vector<bool> seen_;
  bool unsat_ = false;
  uint64_t conflicts_ = 0;
  uint64_t decisions_ = 0;
};

}  // namespace synth::sat
