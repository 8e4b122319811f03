#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace synth::aiger {

// AIGER literal: even = variable, odd = negated variable.
// 0 is constant false, 1 is constant true.
using Lit = uint32_t;

inline constexpr Lit lit_false = 0;
inline constexpr Lit lit_true = 1;

inline constexpr uint32_t lit_var(Lit l) { return l >> 1; }
inline constexpr bool lit_negated(Lit l) { return (l & 1u) != 0; }
inline constexpr Lit lit_neg(Lit l) { return l ^ 1u; }
inline constexpr Lit make_lit(uint32_t var, bool neg = false) {
  return (var << 1) | (neg ? 1u : 0u);
}

struct Latch {
  Lit lit = 0;   // current-state literal, always even
  Lit next = 0;  // update literal, any polarity
  bool operator==(const Latch&) const = default;
};

struct AndGate {
  Lit lhs = 0;  // always even
  Lit rhs0 = 0;
  Lit rhs1 = 0;
  bool operator==(const AndGate&) const = default;
};

// One symbol-table line. `index` is the positional index within the
// input/latch/output section, not a variable index. Entries whose index
// exceeds the section length are preserved verbatim: solution files keep
// the specification's symbol table even after controllable inputs are
// removed, so dangling entries are legal there.
struct Symbol {
  char kind = 'i';  // 'i', 'l' or 'o'
  uint32_t index = 0;
  std::string name;
  bool operator==(const Symbol&) const = default;
};

struct Aig {
  uint32_t max_var = 0;  // M from the header, preserved on round-trip
  std::vector<Lit> inputs;
  std::vector<Latch> latches;
  std::vector<Lit> outputs;
  std::vector<AndGate> ands;
  std::vector<Symbol> symbols;
  bool has_comments = false;
  std::vector<std::string> comments;

  bool operator==(const Aig&) const = default;

  // Name of the n-th input/latch/output, empty if not in the symbol table.
  std::string input_name(size_t pos) const;
  std::string latch_name(size_t pos) const;
  std::string output_name(size_t pos) const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Reads the ASCII AIGER dialect. Section order: header, inputs, latches,
// outputs, AND gates, symbol table, comments. The binary variant is
// rejected. Trailing whitespace and a missing final newline are accepted.
Aig parse_ascii(const std::string& text);

// Inverse of parse_ascii, byte-stable. parse_ascii(write_ascii(a)) == a.
std::string write_ascii(const Aig& aig);

Aig read_file(const std::string& path);
void write_file(const Aig& aig, const std::string& path);

// Partition of the inputs into environment-controlled and
// system-controlled, by the exact name prefix "controllable_".
struct InputPartition {
  std::vector<Lit> uncontrollable;  // X_u, file order
  std::vector<Lit> controllable;    // X_c, file order
};

InputPartition partition_inputs(const Aig& aig);

// Validity of `aig` as a synthesis specification: exactly one output,
// every referenced variable defined. Throws std::runtime_error otherwise.
void validate_spec(const Aig& aig);

struct CheckIssue {
  std::string clause;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckIssue> issues;
  bool ok() const { return issues.empty(); }
  // "OK" or one "FAIL <clause>: <detail>" line per violation.
  std::string to_text() const;
};

// Syntactic solution check: the solution must contain every line of the
// specification unmodified and in order, except that controllable input
// definitions are removed and redefined exactly once as a new latch or a
// new AND gate; header arithmetic must match; new definitions must not
// reference original AND gates; the symbol table must be unchanged.
// Reports every violated clause, not just the first.
CheckReport check_solution_syntax(const Aig& spec, const Aig& solution);

}  // namespace synth::aiger
