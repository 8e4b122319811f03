#include "synth/bench.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "synth/circuit_build.hpp"
#include "synth/verify.hpp"

namespace synth::bench {

using aiger::Aig;
using aiger::Lit;
using bdd::Func;

// ----------------------------------------------------------------------
// gen_cnt

Aig gen_cnt(unsigned bits, bool realizable) {
  if (bits < 1 || bits > 30)
    throw std::invalid_argument("counter width must be between 1 and 30");

  Aig aig;
  uint32_t var = 0;
  Lit increment = aiger::make_lit(++var);
  Lit reset = aiger::make_lit(++var);
  aig.inputs = {increment, reset};
  std::vector<Lit> counter;
  for (unsigned i = 0; i < bits; ++i) {
    counter.push_back(aiger::make_lit(++var));
    aig.latches.push_back({counter.back(), 0});
  }

  circuit::Builder build(aig, var);

  // increment carry chain, gated by reset
  Lit carry = increment;
  for (unsigned i = 0; i < bits; ++i) {
    Lit sum = build.xor_gate(counter[i], carry);
    carry = build.and_gate(counter[i], carry);
    aig.latches[i].next = build.and_gate(aiger::lit_neg(reset), sum);
  }

  Lit at_top = build.equals_const(counter, (uint64_t(1) << bits) - 1);
  Lit at_pre_top = build.equals_const(counter, (uint64_t(1) << bits) - 2);
  Lit illegal_reset = realizable
                          ? build.and_gate(reset, aiger::lit_neg(at_pre_top))
                          : reset;
  aig.outputs.push_back(build.or_gate(at_top, illegal_reset));

  aig.max_var = build.next_var();
  aig.symbols = {{'i', 0, "increment"},
                 {'i', 1, "controllable_reset"},
                 {'o', 0, "overflow_or_illegal_reset"}};
  for (unsigned i = 0; i < bits; ++i)
    aig.symbols.push_back({'l', i, "cnt" + std::to_string(i)});
  return aig;
}

// ----------------------------------------------------------------------
// gen_counting_safety

namespace {

unsigned width_for(uint64_t max_value) {
  unsigned w = 0;
  while ((uint64_t(1) << w) <= max_value) ++w;
  return w;
}

}  // namespace

Aig gen_counting_safety(const Aig& core, game::GameEncoding& core_enc,
                        const std::vector<Func>& assumptions,
                        const std::vector<Func>& guarantees, unsigned k,
                        CountingMode mode) {
  const size_t m = assumptions.size(), n = guarantees.size();
  if (m == 0 && n == 0)
    throw std::invalid_argument("need at least one assumption or guarantee");
  if (k < 1) throw std::invalid_argument("ratio bound k must be at least 1");

  Aig aig;
  aig.inputs = core.inputs;
  aig.latches = core.latches;
  aig.ands = core.ands;
  for (const aiger::Symbol& s : core.symbols)
    if (s.kind != 'o') aig.symbols.push_back(s);

  // leaf literals for the indicator diagrams
  std::map<bdd::Var, Lit> leaf;
  for (size_t i = 0; i < core_enc.latch_vars.size(); ++i)
    leaf[core_enc.latch_vars[i]] = aiger::make_lit(core_enc.latch_aiger_vars[i]);

  uint32_t base = core.max_var;
  // new latch variables first (their updates reference gates built below)
  auto new_latch = [&](void) {
    Lit l = aiger::make_lit(++base);
    aig.latches.push_back({l, 0});
    return l;
  };

  std::vector<Lit> i_bits, j_bits, r_bits, a_bits, g_bits;
  const unsigned wr = width_for(uint64_t(k) + 1);
  if (mode == CountingMode::C) {
    for (unsigned b = 0; b < width_for(m); ++b) i_bits.push_back(new_latch());
    for (unsigned b = 0; b < width_for(n); ++b) j_bits.push_back(new_latch());
  } else {
    for (size_t i = 0; i < m; ++i) a_bits.push_back(new_latch());
    for (size_t j = 0; j < n; ++j) g_bits.push_back(new_latch());
  }
  for (unsigned b = 0; b < wr; ++b) r_bits.push_back(new_latch());

  circuit::Builder build(aig, base);
  bdd::Store& store = *core_enc.store;

  std::vector<Lit> assumed, guaranteed;
  for (const Func& f : assumptions) assumed.push_back(build.from_func(store, f, leaf));
  for (const Func& f : guarantees) guaranteed.push_back(build.from_func(store, f, leaf));

  auto latch_index = [&](Lit l) -> size_t {
    for (size_t i = 0; i < aig.latches.size(); ++i)
      if (aig.latches[i].lit == l) return i;
    throw std::logic_error("unknown latch");
  };
  auto set_next = [&](Lit latch, Lit next) { aig.latches[latch_index(latch)].next = next; };

  // modular counter step: visited(current index) or index 0 advances
  auto counting_step = [&](std::vector<Lit>& reg_bits, const std::vector<Lit>& seen,
                           size_t count) -> Lit {
    // advance condition
    Lit at0 = build.equals_const(reg_bits, 0);
    Lit visited = aiger::lit_false;
    for (size_t idx = 1; idx <= count; ++idx)
      visited = build.or_gate(
          visited, build.and_gate(build.equals_const(reg_bits, idx), seen[idx - 1]));
    Lit advance = build.or_gate(at0, visited);
    // incremented value modulo count+1
    Lit carry = aiger::lit_true;
    std::vector<Lit> plus1;
    for (Lit b : reg_bits) {
      plus1.push_back(build.xor_gate(b, carry));
      carry = build.and_gate(b, carry);
    }
    Lit wrap = build.equals_const(reg_bits, count);
    for (size_t b = 0; b < reg_bits.size(); ++b) {
      Lit inc_val = build.and_gate(aiger::lit_neg(wrap), plus1[b]);
      set_next(reg_bits[b], build.mux(advance, inc_val, reg_bits[b]));
    }
    return advance;
  };

  // seen-bit step: returns (new_bits_all_set, some_pending_newly_seen)
  auto bitwise_step = [&](std::vector<Lit>& bits, const std::vector<Lit>& seen,
                          Lit& all_set, Lit& newly_seen) {
    std::vector<Lit> fresh;
    newly_seen = aiger::lit_false;
    for (size_t idx = 0; idx < bits.size(); ++idx) {
      newly_seen = build.or_gate(
          newly_seen, build.and_gate(aiger::lit_neg(bits[idx]), seen[idx]));
      fresh.push_back(build.or_gate(bits[idx], seen[idx]));
    }
    all_set = build.and_all(fresh);
    for (size_t idx = 0; idx < bits.size(); ++idx)
      set_next(bits[idx], build.and_gate(aiger::lit_neg(all_set), fresh[idx]));
  };

  Lit assumption_event, guarantee_event;
  if (mode == CountingMode::C) {
    Lit j_advanced = n == 0 ? aiger::lit_true : aiger::lit_false;
    if (n > 0) j_advanced = counting_step(j_bits, guaranteed, n);
    Lit i_at0 = build.equals_const(i_bits, 0);
    if (m > 0) counting_step(i_bits, assumed, m);
    assumption_event = i_at0;  // current i = 0
    guarantee_event = j_advanced;
  } else {
    Lit a_all = aiger::lit_true, a_new = aiger::lit_false;
    if (m > 0) bitwise_step(a_bits, assumed, a_all, a_new);
    assumption_event = a_all;
    Lit g_all = aiger::lit_true, g_new = aiger::lit_false;
    if (n > 0) bitwise_step(g_bits, guaranteed, g_all, g_new);
    guarantee_event = n == 0                   ? aiger::lit_true
                      : mode == CountingMode::F ? g_all
                                                : g_new;
  }

  // ratio counter: reset on guarantee progress, advance on assumption
  // progress, saturate at k+1
  Lit carry = aiger::lit_true;
  std::vector<Lit> r_plus1;
  for (Lit b : r_bits) {
    r_plus1.push_back(build.xor_gate(b, carry));
    carry = build.and_gate(b, carry);
  }
  Lit saturated = build.equals_const(r_bits, uint64_t(k) + 1);
  for (size_t b = 0; b < r_bits.size(); ++b) {
    Lit held = build.mux(saturated, r_bits[b], r_plus1[b]);
    Lit advanced = build.mux(assumption_event, held, r_bits[b]);
    set_next(r_bits[b], build.and_gate(aiger::lit_neg(guarantee_event), advanced));
  }
  aig.outputs.push_back(build.equals_const(r_bits, uint64_t(k) + 1));

  aig.max_var = build.next_var();
  return aig;
}

// ----------------------------------------------------------------------
// suite runner

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::SolvedReal: return "SOLVED_REAL";
    case RunStatus::SolvedUnreal: return "SOLVED_UNREAL";
    case RunStatus::Timeout: return "TIMEOUT";
    case RunStatus::Error: return "ERROR";
    case RunStatus::McFail: return "MC_FAIL";
  }
  return "ERROR";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "SOLVED_REAL") return RunStatus::SolvedReal;
  if (s == "SOLVED_UNREAL") return RunStatus::SolvedUnreal;
  if (s == "TIMEOUT") return RunStatus::Timeout;
  if (s == "MC_FAIL") return RunStatus::McFail;
  if (s == "ERROR") return RunStatus::Error;
  throw std::invalid_argument("unknown run status: " + s);
}

namespace {

struct ChildResult {
  int exit_code = -1;
  bool timed_out = false;
  double cpu_seconds = 0.0;
  std::string stdout_text;
};

ChildResult run_child(const std::vector<std::string>& argv, double timeout_seconds) {
  int pipe_fd[2];
  if (pipe(pipe_fd) != 0) throw std::runtime_error("pipe failed");

  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    close(pipe_fd[0]);
    dup2(pipe_fd[1], STDOUT_FILENO);
    close(pipe_fd[1]);
    rlimit cpu_limit;
    cpu_limit.rlim_cur = static_cast<rlim_t>(timeout_seconds) + 1;
    cpu_limit.rlim_max = cpu_limit.rlim_cur + 1;
    setrlimit(RLIMIT_CPU, &cpu_limit);
    std::vector<char*> args;
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execv(args[0], args.data());
    _exit(127);
  }

  close(pipe_fd[1]);
  ChildResult result;
  // wall-clock guard on top of the CPU limit in the child
  const int wall_ms = static_cast<int>(timeout_seconds * 2000) + 5000;
  int waited_ms = 0;
  char buf[4096];
  while (true) {
    pollfd pfd{pipe_fd[0], POLLIN, 0};
    int ready = poll(&pfd, 1, 100);
    if (ready > 0) {
      ssize_t got = read(pipe_fd[0], buf, sizeof buf);
      if (got <= 0) break;
      result.stdout_text.append(buf, static_cast<size_t>(got));
      continue;
    }
    waited_ms += 100;
    if (waited_ms >= wall_ms) {
      kill(pid, SIGKILL);
      result.timed_out = true;
      break;
    }
  }
  close(pipe_fd[0]);

  int status = 0;
  rusage usage{};
  wait4(pid, &status, 0, &usage);
  result.cpu_seconds = usage.ru_utime.tv_sec + usage.ru_utime.tv_usec * 1e-6 +
                       usage.ru_stime.tv_sec + usage.ru_stime.tv_usec * 1e-6;
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.timed_out = WTERMSIG(status) == SIGXCPU || WTERMSIG(status) == SIGKILL;
    result.exit_code = -WTERMSIG(status);
  }
  if (result.cpu_seconds > timeout_seconds) result.timed_out = true;
  return result;
}

bool first_line_is(const std::string& text, const std::string& want) {
  size_t eol = text.find('\n');
  return text.substr(0, eol) == want;
}

}  // namespace

std::vector<RunRecord> run_suite(const std::vector<Benchmark>& benchmarks,
                                 const std::vector<SolverConfig>& configs,
                                 const std::string& solver_exe,
                                 const SuiteOptions& options) {
  std::vector<RunRecord> records;
  for (const Benchmark& bench : benchmarks) {
    for (const SolverConfig& config : configs) {
      RunRecord rec;
      rec.benchmark = bench.id;
      rec.config = config.id;

      Aig spec;
      bool spec_ok = true;
      try {
        spec = aiger::read_file(bench.path);
        aiger::validate_spec(spec);
      } catch (const std::exception&) {
        spec_ok = false;
      }
      if (!spec_ok) {
        rec.status = RunStatus::Error;
        records.push_back(rec);
        continue;
      }

      std::string out_path = options.work_dir + "/solution_" +
                             std::to_string(getpid()) + "_" +
                             std::to_string(records.size()) + ".aag";
      std::vector<std::string> argv{solver_exe,
                                    options.synthesize ? "synthesize" : "realizability",
                                    bench.path, "--quiet"};
      if (options.synthesize) {
        argv.push_back("-o");
        argv.push_back(out_path);
      }
      argv.insert(argv.end(), config.extra_args.begin(), config.extra_args.end());

      ChildResult child = run_child(argv, options.timeout_seconds);
      rec.time_seconds = child.cpu_seconds;

      if (child.timed_out) {
        rec.status = RunStatus::Timeout;
      } else if (child.exit_code != 0) {
        rec.status = RunStatus::Error;
      } else if (first_line_is(child.stdout_text, "UNREALIZABLE")) {
        bool wrong = bench.expected_realizable.value_or(false);
        rec.status = wrong ? RunStatus::Error : RunStatus::SolvedUnreal;
      } else if (first_line_is(child.stdout_text, "REALIZABLE")) {
        if (bench.expected_realizable.has_value() && !*bench.expected_realizable) {
          rec.status = RunStatus::Error;  // wrong answer
        } else if (!options.synthesize) {
          rec.status = RunStatus::SolvedReal;
        } else {
          // solved only if the solution passes both checkers
          try {
            Aig solution = aiger::read_file(out_path);
            Aig closed = verify::compose(spec, solution);
            verify::Verdict v = verify::model_check(closed);
            if (v.status == verify::Status::Safe) {
              rec.status = RunStatus::SolvedReal;
              rec.solution_size = solution.ands.size();
            } else {
              rec.status = RunStatus::McFail;
            }
          } catch (const std::exception&) {
            rec.status = RunStatus::McFail;
          }
          unlink(out_path.c_str());
        }
      } else {
        rec.status = RunStatus::Error;
      }
      records.push_back(rec);
    }
  }
  return records;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "benchmark,config,status,time_s,size\n";
  for (const RunRecord& r : records) {
    out << r.benchmark << ',' << r.config << ',' << to_string(r.status) << ','
        << std::fixed << std::setprecision(4) << r.time_seconds << ',';
    if (r.solution_size) out << *r.solution_size;
    out << '\n';
  }
  return out.str();
}

std::vector<RunRecord> records_from_csv(const std::string& csv) {
  std::vector<RunRecord> records;
  std::istringstream in(csv);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (line.rfind("benchmark,", 0) == 0) continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    while (fields.size() < 5) fields.push_back("");
    RunRecord r;
    r.benchmark = fields[0];
    r.config = fields[1];
    r.status = run_status_from_string(fields[2]);
    r.time_seconds = std::stod(fields[3]);
    if (!fields[4].empty()) r.solution_size = std::stoull(fields[4]);
    records.push_back(r);
  }
  return records;
}

// ----------------------------------------------------------------------
// rankings

namespace {

bool solved(const RunRecord& r) {
  return r.status == RunStatus::SolvedReal || r.status == RunStatus::SolvedUnreal;
}

}  // namespace

Score relative_ranking(const std::vector<RunRecord>& records, Metric metric) {
  std::vector<std::string> benchmarks;
  Score score;
  for (const RunRecord& r : records) {
    if (std::find(benchmarks.begin(), benchmarks.end(), r.benchmark) ==
        benchmarks.end())
      benchmarks.push_back(r.benchmark);
    score.emplace(r.config, 0.0);
  }
  if (benchmarks.empty()) return score;
  const double p = 1000.0 / double(benchmarks.size());

  for (const std::string& bench : benchmarks) {
    struct Entry {
      std::string config;
      double value;
    };
    std::vector<Entry> entries;
    for (const RunRecord& r : records) {
      if (r.benchmark != bench || !solved(r)) continue;
      if (metric == Metric::Size && !r.solution_size) continue;
      double value = metric == Metric::Time ? r.time_seconds
                                            : double(*r.solution_size);
      entries.push_back({r.config, value});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });
    const size_t n = entries.size();
    if (n == 0) continue;
    const double f = double(n * (n + 1)) / 2.0;
    // ties share the average of the tied ranks' points
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j < n && entries[j].value == entries[i].value) ++j;
      double sum = 0.0;
      for (size_t rank = i + 1; rank <= j; ++rank)
        sum += double(n - rank + 1) / f * p;
      double each = sum / double(j - i);
      for (size_t idx = i; idx < j; ++idx) score[entries[idx].config] += each;
      i = j;
    }
  }
  return score;
}

Score quality_ranking(const std::vector<RunRecord>& records,
                      const std::map<std::string, uint64_t>& reference_sizes) {
  Score score;
  std::map<std::string, uint64_t> reference = reference_sizes;
  for (const RunRecord& r : records) {
    score.emplace(r.config, 0.0);
    if (r.status != RunStatus::SolvedReal || !r.solution_size) continue;
    if (!reference_sizes.count(r.benchmark)) {
      uint64_t size = std::max<uint64_t>(1, *r.solution_size);
      auto it = reference.find(r.benchmark);
      if (it == reference.end() || size < it->second) reference[r.benchmark] = size;
    }
  }
  for (const RunRecord& r : records) {
    if (r.status != RunStatus::SolvedReal || !r.solution_size) continue;
    double size = double(std::max<uint64_t>(1, *r.solution_size));
    double ref = double(reference.at(r.benchmark));
    double points = 2.0 - std::log10(size / ref);
    if (points < 0.0) points = 0.0;
    score[r.config] += points;
  }
  return score;
}

std::string score_table(const Score& score) {
  std::vector<std::pair<std::string, double>> rows(score.begin(), score.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  size_t width = 6;
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  out << std::left << std::setw(int(width) + 2) << "config" << "points\n";
  for (const auto& [name, points] : rows)
    out << std::left << std::setw(int(width) + 2) << name << std::fixed
        << std::setprecision(2) << points << '\n';
  return out.str();
}

std::string score_csv(const Score& score) {
  std::ostringstream out;
  out << "config,points\n";
  for (const auto& [name, points] : score)
    out << name << ',' << std::fixed << std::setprecision(4) << points << '\n';
  return out.str();
}

}  // namespace synth::bench
