#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synth/aiger.hpp"
#include "synth/bdd.hpp"
#include "synth/game.hpp"

namespace synth::bench {

// --- generators -------------------------------------------------------

// n-bit counter game. The environment increments, the system owns a reset
// that is only legal in the pre-overflow state; out is raised at the top
// value or on an illegal reset. The unrealizable variant outlaws the
// reset everywhere.
aiger::Aig gen_cnt(unsigned bits, bool realizable);

enum class CountingMode { C, B, F };

// Safety monitor bounding the ratio of assumption progress to guarantee
// progress over the given core machine. Mode C counts with modular
// counters i and j plus the ratio counter r; mode B replaces the counters
// with one seen-bit per property; mode F resets r only when the full
// guarantee set has been collected. Indicator functions are diagrams over
// the core's latch variables in core_enc.
aiger::Aig gen_counting_safety(const aiger::Aig& core,
                               game::GameEncoding& core_enc,
                               const std::vector<bdd::Func>& assumptions,
                               const std::vector<bdd::Func>& guarantees,
                               unsigned k, CountingMode mode);

// --- suite runner -----------------------------------------------------

struct Benchmark {
  std::string id;
  std::string path;
  std::optional<bool> expected_realizable;
};

struct SolverConfig {
  std::string id;
  std::vector<std::string> extra_args;  // appended to the base invocation
};

enum class RunStatus { SolvedReal, SolvedUnreal, Timeout, Error, McFail };

std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct RunRecord {
  std::string benchmark;
  std::string config;
  RunStatus status = RunStatus::Error;
  double time_seconds = 0.0;
  std::optional<uint64_t> solution_size;  // AND gates, synthesis runs only
};

struct SuiteOptions {
  double timeout_seconds = 60.0;
  bool synthesize = false;  // run the synthesis track and verify solutions
  size_t workers = 1;
  std::string work_dir = "/tmp";
};

// Runs every (benchmark, config) pair in an isolated child process of the
// given solver executable, measuring CPU time and enforcing the timeout.
// Synthesis outputs only count as solved after passing the syntactic check
// and the model checker.
std::vector<RunRecord> run_suite(const std::vector<Benchmark>& benchmarks,
                                 const std::vector<SolverConfig>& configs,
                                 const std::string& solver_exe,
                                 const SuiteOptions& options);

std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& csv);

// --- scoring ----------------------------------------------------------

using Score = std::map<std::string, double>;  // config id -> points

enum class Metric { Time, Size };

// Per benchmark, p = 1000/k points are split between the solving tools:
// with n solvers the rank-m tool receives (n-m+1)/f * p where f is the
// n-th triangular number; ties share the average of their ranks' points.
Score relative_ranking(const std::vector<RunRecord>& records, Metric metric);

// Per solved benchmark, 2 - log10(size/size_ref) points, clamped below at
// zero; without an explicit reference the smallest size among the given
// records is used. Solutions of zero gates count as one gate.
Score quality_ranking(const std::vector<RunRecord>& records,
                      const std::map<std::string, uint64_t>& reference_sizes = {});

std::string score_table(const Score& score);
std::string score_csv(const Score& score);

}  // namespace synth::bench
