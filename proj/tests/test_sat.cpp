#include <doctest.h>

#include <random>

#include "synth/sat.hpp"

using namespace synth::sat;

namespace {

// 2^vars-assignment oracle for small CNFs.
bool brute_force_sat(int num_vars, const std::vector<std::vector<Lit>>& clauses,
                     const std::vector<Lit>& assumptions = {}) {
  for (unsigned bits = 0; bits < (1u << num_vars); ++bits) {
    auto value = [&](Lit l) {
      bool v = (bits >> lit_var(l)) & 1;
      return lit_neg(l) ? !v : v;
    };
    bool ok = true;
    for (Lit a : assumptions) ok &= value(a);
    for (const auto& c : clauses) {
      bool sat = false;
      for (Lit l : c) sat |= value(l);
      ok &= sat;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("basic contradictions and units") {
  Solver s;
  Var x = s.new_var();
  CHECK(s.add_clause({mk_lit(x)}));
  CHECK_FALSE(s.add_clause({mk_lit(x, true)}));
  CHECK(s.solve() == Result::Unsat);
}

TEST_CASE("assumptions") {
  Solver s;
  Var x = s.new_var(), y = s.new_var();
  s.add_clause({mk_lit(x), mk_lit(y)});
  REQUIRE(s.solve({mk_lit(x, true)}) == Result::Sat);
  CHECK_FALSE(s.value(x));
  CHECK(s.value(y));
  // assumptions do not stick
  REQUIRE(s.solve({mk_lit(y, true)}) == Result::Sat);
  CHECK(s.value(x));
  // contradictory assumptions
  CHECK(s.solve({mk_lit(x, true), mk_lit(y, true)}) == Result::Unsat);
  // solver remains usable
  CHECK(s.solve() == Result::Sat);
}

TEST_CASE("pigeonhole 4 into 3 is unsatisfiable") {
  Solver s;
  Var p[4][3];
  for (auto& row : p)
    for (Var& v : row) v = s.new_var();
  for (int i = 0; i < 4; ++i)
    s.add_clause({mk_lit(p[i][0]), mk_lit(p[i][1]), mk_lit(p[i][2])});
  for (int h = 0; h < 3; ++h)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        s.add_clause({mk_lit(p[i][h], true), mk_lit(p[j][h], true)});
  CHECK(s.solve() == Result::Unsat);
}

TEST_CASE("random 3-CNF agrees with enumeration") {
  std::mt19937 rng(97);
  for (int round = 0; round < 300; ++round) {
    const int nv = 8;
    std::uniform_int_distribution<int> d_clauses(1, 40), d_var(0, nv - 1),
        d_bit(0, 1);
    int nc = d_clauses(rng);
    std::vector<std::vector<Lit>> clauses;
    for (int i = 0; i < nc; ++i) {
      std::vector<Lit> c;
      for (int k = 0; k < 3; ++k) c.push_back(mk_lit(d_var(rng), d_bit(rng)));
      clauses.push_back(c);
    }
    Solver s;
    for (int v = 0; v < nv; ++v) s.new_var();
    bool root_ok = true;
    for (const auto& c : clauses) root_ok &= s.add_clause(c);

    std::vector<Lit> assumptions;
    if (d_bit(rng)) {
      assumptions.push_back(mk_lit(d_var(rng), d_bit(rng)));
      assumptions.push_back(mk_lit(d_var(rng), d_bit(rng)));
    }

    bool expect = brute_force_sat(nv, clauses, assumptions);
    if (!root_ok) {
      CHECK_FALSE(brute_force_sat(nv, clauses));
      CHECK(s.solve(assumptions) == Result::Unsat);
      continue;
    }
    Result got = s.solve(assumptions);
    CAPTURE(round);
    REQUIRE((got == Result::Sat) == expect);
    if (got == Result::Sat) {
      // model satisfies every clause and every assumption
      auto value = [&](Lit l) {
        return lit_neg(l) ? !s.value(lit_var(l)) : s.value(lit_var(l));
      };
      for (const auto& c : clauses) {
        bool sat = false;
        for (Lit l : c) sat |= value(l);
        CHECK(sat);
      }
      for (Lit a : assumptions) CHECK(value(a));
    }
  }
}

TEST_CASE("incremental clause addition") {
  std::mt19937 rng(101);
  const int nv = 10;
  Solver s;
  for (int v = 0; v < nv; ++v) s.new_var();
  std::vector<std::vector<Lit>> so_far;
  std::uniform_int_distribution<int> d_var(0, nv - 1), d_bit(0, 1), d_len(1, 4);
  for (int step = 0; step < 120; ++step) {
    std::vector<Lit> c;
    int len = d_len(rng);
    for (int k = 0; k < len; ++k) c.push_back(mk_lit(d_var(rng), d_bit(rng)));
    so_far.push_back(c);
    s.add_clause(c);
    bool expect = brute_force_sat(nv, so_far);
    REQUIRE((s.solve() == Result::Sat) == expect);
    if (!expect) break;
  }
}
