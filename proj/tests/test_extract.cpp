#include <doctest.h>

#include <random>

#include "synth/extract.hpp"
#include "synth/verify.hpp"

using namespace synth;
using aiger::Aig;
using bdd::Func;
using bdd::Var;

namespace {

// l' = l | (x_u & !x_c), out = l
Aig blockable_game() {
  return aiger::parse_ascii(
      "aag 5 2 1 1 2\n2\n4\n6 11\n6\n8 2 5\n10 7 9\n"
      "i0 u\ni1 controllable_c\n");
}

struct Scene {
  bdd::Store store;
  Aig aig;
  aiger::InputPartition part;
  game::GameEncoding enc;
  explicit Scene(const Aig& a)
      : aig(a), part(aiger::partition_inputs(aig)),
        enc(game::encode(aig, part, store)) {}
};

}  // namespace

TEST_CASE("strategy relation") {
  Scene sc(blockable_game());
  game::WinningRegion wr = game::solve(sc.enc);
  REQUIRE(wr.realizable);
  Func lambda = extract::strategy_relation(sc.enc, wr);

  Var l = sc.enc.latch_vars[0];
  Var u = sc.enc.uncontrollable_vars[0];
  Var c = sc.enc.controllable_vars[0];

  // from l=0 under x_u=1 only x_c=1 keeps the region
  CHECK(sc.store.evaluate(lambda, {{l, false}, {u, true}, {c, true}}));
  CHECK_FALSE(sc.store.evaluate(lambda, {{l, false}, {u, true}, {c, false}}));
  // under x_u=0 both choices are safe
  CHECK(sc.store.evaluate(lambda, {{l, false}, {u, false}, {c, true}}));
  CHECK(sc.store.evaluate(lambda, {{l, false}, {u, false}, {c, false}}));

  // winning-region closure: on W some choice always exists
  Func some_choice = sc.store.quantify(bdd::Quant::Exists, {c}, lambda);
  Func closure = !wr.w | some_choice;  // W implies exists c in lambda
  CHECK(sc.store.quantify(bdd::Quant::Forall, {l, u}, closure).is_true());

  SUBCASE("unrealizable region is rejected") {
    game::WinningRegion bad;
    bad.w = sc.store.constant(false);
    bad.realizable = false;
    CHECK_THROWS_AS(extract::strategy_relation(sc.enc, bad), std::logic_error);
  }
}

TEST_CASE("cofactor determinization") {
  bdd::Store store;
  Aig a = blockable_game();
  auto part = aiger::partition_inputs(a);
  game::GameEncoding enc = game::encode(a, part, store);
  Var u = enc.uncontrollable_vars[0];
  Var c = enc.controllable_vars[0];

  SUBCASE("forced choice: lambda = (c <-> u) gives f_c = u") {
    Func lambda = !(store.var(c) ^ store.var(u));
    extract::Strategy s = extract::determinize_cofactor(enc, lambda, {c});
    CHECK(s.fns.at(c) == store.var(u));
  }

  SUBCASE("free relation resolves to constant 1") {
    extract::Strategy s =
        extract::determinize_cofactor(enc, store.constant(true), {c});
    CHECK(s.fns.at(c).is_true());
  }
}

TEST_CASE("two outputs with a cross constraint") {
  // spec with two controllable inputs: lambda = c1 | c2
  Aig a = aiger::parse_ascii(
      "aag 4 3 1 1 0\n2\n4\n6\n8 8\n8\ni1 controllable_c1\ni2 controllable_c2\n");
  bdd::Store store;
  auto part = aiger::partition_inputs(a);
  game::GameEncoding enc = game::encode(a, part, store);
  Var c1 = enc.controllable_vars[0], c2 = enc.controllable_vars[1];
  Var u = enc.uncontrollable_vars[0];

  Func lambda = store.var(c1) | store.var(c2);
  extract::Strategy s = extract::determinize_cofactor(enc, lambda, {c1, c2});

  // substituting the choices into lambda covers all (state, input) points
  Func substituted = store.compose_vector(
      lambda, {{c1, s.fns.at(c1)}, {c2, s.fns.at(c2)}});
  CHECK(substituted.is_true());
  // choices depend only on L and X_u
  for (Var v : store.support(s.fns.at(c1))) CHECK(v != c1);
  for (Var v : store.support(s.fns.at(c2))) {
    CHECK(v != c1);
    CHECK(v != c2);
  }
  (void)u;
}

TEST_CASE("end-to-end: solve, extract, emit, check, model check") {
  Scene sc(blockable_game());
  game::WinningRegion wr = game::solve(sc.enc);
  REQUIRE(wr.realizable);
  Func lambda = extract::strategy_relation(sc.enc, wr);
  extract::Strategy strat =
      extract::determinize_cofactor(sc.enc, lambda, sc.enc.controllable_vars);

  SUBCASE("plain strategy") {
    Aig sol = extract::strategy_to_aig(sc.aig, sc.enc, strat);
    aiger::CheckReport rep = aiger::check_solution_syntax(sc.aig, sol);
    INFO(rep.to_text());
    REQUIRE(rep.ok());
    Aig closed = verify::compose(sc.aig, sol);
    CHECK(verify::model_check(closed).status == verify::Status::Safe);
  }

  SUBCASE("minimized strategy stays correct and no larger") {
    extract::Strategy mini = extract::minimize_by_reachability(sc.enc, strat);
    for (const auto& [c, fc] : strat.fns)
      CHECK(sc.store.node_count(mini.fns.at(c)) <= sc.store.node_count(fc));
    Aig sol = extract::strategy_to_aig(sc.aig, sc.enc, mini);
    REQUIRE(aiger::check_solution_syntax(sc.aig, sol).ok());
    Aig closed = verify::compose(sc.aig, sol);
    CHECK(verify::model_check(closed).status == verify::Status::Safe);

    // behavior identical from the initial state on every input sequence
    Aig plain = extract::strategy_to_aig(sc.aig, sc.enc, strat);
    Aig closed_plain = verify::compose(sc.aig, plain);
    for (unsigned bits = 0; bits < 64; ++bits) {
      std::vector<std::vector<bool>> inputs;
      for (int t = 0; t < 6; ++t) inputs.push_back({((bits >> t) & 1) != 0});
      auto s1 = verify::simulate(closed, inputs);
      auto s2 = verify::simulate(closed_plain, inputs);
      REQUIRE(s1.size() == s2.size());
      for (size_t t = 0; t + 1 < s1.size(); ++t)
        CHECK(s1[t].outputs == s2[t].outputs);
    }
  }
}

TEST_CASE("strategy_to_aig constant and wiring cases") {
  // spec: out = latch, latch just holds x_u; c unused by the dynamics
  Aig a = aiger::parse_ascii(
      "aag 3 2 1 1 0\n2\n4\n6 2\n6\ni0 u\ni1 controllable_c\n");
  bdd::Store store;
  auto part = aiger::partition_inputs(a);
  game::GameEncoding enc = game::encode(a, part, store);
  Var c = enc.controllable_vars[0];

  SUBCASE("constant-1 strategy wires the literal to true") {
    extract::Strategy s;
    s.order = {c};
    s.fns.emplace(c, store.constant(true));
    Aig sol = extract::strategy_to_aig(a, enc, s);
    REQUIRE(aiger::check_solution_syntax(a, sol).ok());
    // exactly one new gate: the redefinition, wired to constant true
    REQUIRE(sol.ands.size() == 1);
    CHECK(sol.ands[0] == aiger::AndGate{4, 1, 1});
  }

  SUBCASE("projection strategy wires the input through") {
    extract::Strategy s;
    s.order = {c};
    s.fns.emplace(c, store.var(enc.uncontrollable_vars[0]));
    Aig sol = extract::strategy_to_aig(a, enc, s);
    REQUIRE(aiger::check_solution_syntax(a, sol).ok());
    REQUIRE(sol.ands.size() == 1);
    CHECK(sol.ands[0] == aiger::AndGate{4, 2, 2});
  }

  SUBCASE("controllable support is rejected") {
    extract::Strategy s;
    s.order = {c};
    s.fns.emplace(c, store.var(c));
    CHECK_THROWS_AS(extract::strategy_to_aig(a, enc, s), std::logic_error);
  }
}

TEST_CASE("shared subdiagrams are emitted once") {
  // two controllable outputs, both using the same function of u1, u2
  Aig a = aiger::parse_ascii(
      "aag 5 4 1 1 0\n2\n4\n6\n8\n10 2\n10\n"
      "i2 controllable_c1\ni3 controllable_c2\n");
  bdd::Store store;
  auto part = aiger::partition_inputs(a);
  game::GameEncoding enc = game::encode(a, part, store);
  Var u1 = enc.uncontrollable_vars[0], u2 = enc.uncontrollable_vars[1];
  Var c1 = enc.controllable_vars[0], c2 = enc.controllable_vars[1];

  Func shared = store.var(u1) ^ store.var(u2);
  extract::Strategy both;
  both.order = {c1, c2};
  both.fns.emplace(c1, shared);
  both.fns.emplace(c2, shared);
  Aig sol2 = extract::strategy_to_aig(a, enc, both);

  extract::Strategy single;
  single.order = {c1};
  single.fns.emplace(c1, shared);
  // one-output spec for the single conversion
  Aig a1 = aiger::parse_ascii(
      "aag 4 3 1 1 0\n2\n4\n6\n8 2\n8\ni2 controllable_c1\n");
  bdd::Store store1;
  auto part1 = aiger::partition_inputs(a1);
  game::GameEncoding enc1 = game::encode(a1, part1, store1);
  extract::Strategy s1;
  s1.order = {enc1.controllable_vars[0]};
  s1.fns.emplace(enc1.controllable_vars[0],
                 store1.var(enc1.uncontrollable_vars[0]) ^
                     store1.var(enc1.uncontrollable_vars[1]));
  Aig sol1 = extract::strategy_to_aig(a1, enc1, s1);

  size_t new2 = sol2.ands.size() - a.ands.size();
  size_t new1 = sol1.ands.size() - a1.ands.size();
  CHECK(new2 < 2 * new1);  // sharing: less than twice the single cost
  CHECK(aiger::check_solution_syntax(a, sol2).ok());
}
