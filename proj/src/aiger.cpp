#include "synth/aiger.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace synth::aiger {

namespace {

// Splits into lines on '\n'; a missing final newline is accepted.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string strip_trailing_ws(const std::string& s) {
  size_t end = s.size();
  while (end > 0 && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r'))
    --end;
  return s.substr(0, end);
}

// Parses space-separated unsigned numbers; `want` of them exactly.
std::vector<uint32_t> parse_numbers(const std::string& line, size_t want,
                                    size_t lineno, const char* what) {
  std::vector<uint32_t> out;
  std::istringstream iss(strip_trailing_ws(line));
  std::string tok;
  while (iss >> tok) {
    if (tok.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError(lineno, std::string("malformed ") + what + ": '" + tok + "'");
    try {
      unsigned long v = std::stoul(tok);
      if (v > 0xffffffffUL) throw std::out_of_range("overflow");
      out.push_back(static_cast<uint32_t>(v));
    } catch (const std::exception&) {
      throw ParseError(lineno, std::string("number out of range in ") + what);
    }
  }
  if (out.size() != want)
    throw ParseError(lineno, std::string("expected ") + std::to_string(want) +
                                 " numbers in " + what + ", got " +
                                 std::to_string(out.size()));
  return out;
}

}  // namespace

std::string Aig::input_name(size_t pos) const {
  for (const Symbol& s : symbols)
    if (s.kind == 'i' && s.index == pos) return s.name;
  return {};
}

std::string Aig::latch_name(size_t pos) const {
  for (const Symbol& s : symbols)
    if (s.kind == 'l' && s.index == pos) return s.name;
  return {};
}

std::string Aig::output_name(size_t pos) const {
  for (const Symbol& s : symbols)
    if (s.kind == 'o' && s.index == pos) return s.name;
  return {};
}

Aig parse_ascii(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError(1, "empty file");

  // Header: "aag M I L O A".
  {
    std::istringstream iss(lines[0]);
    std::string magic;
    iss >> magic;
    if (magic == "aig")
      throw ParseError(1, "binary AIGER is not supported, use the ASCII variant (aag)");
    if (magic != "aag") throw ParseError(1, "malformed header: expected 'aag'");
  }
  std::string counts = strip_trailing_ws(lines[0]).substr(3);
  std::vector<uint32_t> hdr = parse_numbers(counts, 5, 1, "header");

  Aig aig;
  aig.max_var = hdr[0];
  const uint32_t num_in = hdr[1], num_latch = hdr[2], num_out = hdr[3],
                 num_and = hdr[4];
  const Lit max_lit = 2 * aig.max_var + 1;

  size_t ln = 1;  // current 0-based index into lines; reported 1-based
  auto next_line = [&](const char* section) -> const std::string& {
    if (ln >= lines.size())
      throw ParseError(lines.size(),
                       std::string("section count mismatch: missing ") + section +
                           " definition");
    return lines[ln++];
  };

  auto check_lit = [&](Lit l, size_t lineno, const char* what, bool must_be_even) {
    if (l > max_lit)
      throw ParseError(lineno, std::string(what) + " literal " + std::to_string(l) +
                                   " exceeds 2*M+1 = " + std::to_string(max_lit));
    if (must_be_even && lit_negated(l))
      throw ParseError(lineno, std::string(what) + " literal " + std::to_string(l) +
                                   " must be even");
  };

  std::unordered_set<uint32_t> defined;
  auto define_var = [&](Lit l, size_t lineno, const char* what) {
    if (l < 2)
      throw ParseError(lineno, std::string(what) + " cannot define constant literal " +
                                   std::to_string(l));
    if (!defined.insert(lit_var(l)).second)
      throw ParseError(lineno,
                       "duplicate definition of variable " + std::to_string(lit_var(l)));
  };

  for (uint32_t i = 0; i < num_in; ++i) {
    const std::string& line = next_line("input");
    std::vector<uint32_t> v = parse_numbers(line, 1, ln, "input definition");
    check_lit(v[0], ln, "input", true);
    define_var(v[0], ln, "input");
    aig.inputs.push_back(v[0]);
  }
  for (uint32_t i = 0; i < num_latch; ++i) {
    const std::string& line = next_line("latch");
    std::vector<uint32_t> v = parse_numbers(line, 2, ln, "latch definition");
    check_lit(v[0], ln, "latch", true);
    check_lit(v[1], ln, "latch next-state", false);
    define_var(v[0], ln, "latch");
    aig.latches.push_back({v[0], v[1]});
  }
  for (uint32_t i = 0; i < num_out; ++i) {
    const std::string& line = next_line("output");
    std::vector<uint32_t> v = parse_numbers(line, 1, ln, "output definition");
    check_lit(v[0], ln, "output", false);
    aig.outputs.push_back(v[0]);
  }
  for (uint32_t i = 0; i < num_and; ++i) {
    const std::string& line = next_line("AND gate");
    std::vector<uint32_t> v = parse_numbers(line, 3, ln, "AND-gate definition");
    check_lit(v[0], ln, "AND-gate output", true);
    check_lit(v[1], ln, "AND-gate operand", false);
    check_lit(v[2], ln, "AND-gate operand", false);
    define_var(v[0], ln, "AND gate");
    aig.ands.push_back({v[0], v[1], v[2]});
  }

  // Symbol table until a lone "c" or end of file.
  while (ln < lines.size()) {
    std::string line = strip_trailing_ws(lines[ln]);
    if (line == "c") {
      aig.has_comments = true;
      ++ln;
      while (ln < lines.size()) aig.comments.push_back(lines[ln++]);
      break;
    }
    ++ln;
    if (line.empty() && ln == lines.size()) break;  // trailing blank line
    if (line.size() < 2 || (line[0] != 'i' && line[0] != 'l' && line[0] != 'o'))
      throw ParseError(ln, "malformed symbol-table entry: '" + line + "'");
    size_t sp = line.find(' ');
    if (sp == std::string::npos || sp < 2)
      throw ParseError(ln, "malformed symbol-table entry: '" + line + "'");
    std::string idx = line.substr(1, sp - 1);
    if (idx.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError(ln, "malformed symbol-table index: '" + idx + "'");
    aig.symbols.push_back({line[0], static_cast<uint32_t>(std::stoul(idx)),
                           line.substr(sp + 1)});
  }
  return aig;
}

std::string write_ascii(const Aig& aig) {
  std::ostringstream out;
  out << "aag " << aig.max_var << ' ' << aig.inputs.size() << ' '
      << aig.latches.size() << ' ' << aig.outputs.size() << ' ' << aig.ands.size()
      << '\n';
  for (Lit in : aig.inputs) out << in << '\n';
  for (const Latch& l : aig.latches) out << l.lit << ' ' << l.next << '\n';
  for (Lit o : aig.outputs) out << o << '\n';
  for (const AndGate& g : aig.ands)
    out << g.lhs << ' ' << g.rhs0 << ' ' << g.rhs1 << '\n';
  for (const Symbol& s : aig.symbols)
    out << s.kind << s.index << ' ' << s.name << '\n';
  if (aig.has_comments) {
    out << "c\n";
    for (const std::string& line : aig.comments) out << line << '\n';
  }
  return out.str();
}

Aig read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ascii(buf.str());
}

void write_file(const Aig& aig, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << write_ascii(aig);
}

InputPartition partition_inputs(const Aig& aig) {
  static const std::string prefix = "controllable_";
  InputPartition part;
  for (size_t i = 0; i < aig.inputs.size(); ++i) {
    std::string name = aig.input_name(i);
    if (name.compare(0, prefix.size(), prefix) == 0)
      part.controllable.push_back(aig.inputs[i]);
    else
      part.uncontrollable.push_back(aig.inputs[i]);
  }
  return part;
}

void validate_spec(const Aig& aig) {
  if (aig.outputs.size() != 1)
    throw std::runtime_error("specification must have exactly one output, has " +
                             std::to_string(aig.outputs.size()));
  std::unordered_set<uint32_t> defined;
  defined.insert(0);
  for (Lit in : aig.inputs) defined.insert(lit_var(in));
  for (const Latch& l : aig.latches) defined.insert(lit_var(l.lit));
  for (const AndGate& g : aig.ands) defined.insert(lit_var(g.lhs));
  auto check = [&](Lit l, const char* where) {
    if (!defined.count(lit_var(l)))
      throw std::runtime_error(std::string("undefined variable ") +
                               std::to_string(lit_var(l)) + " referenced in " + where);
  };
  for (const Latch& l : aig.latches) check(l.next, "latch update");
  for (Lit o : aig.outputs) check(o, "output");
  for (const AndGate& g : aig.ands) {
    check(g.rhs0, "AND gate");
    check(g.rhs1, "AND gate");
  }
}

std::string CheckReport::to_text() const {
  if (issues.empty()) return "OK\n";
  std::string out;
  for (const CheckIssue& i : issues) out += "FAIL " + i.clause + ": " + i.detail + "\n";
  return out;
}

CheckReport check_solution_syntax(const Aig& spec, const Aig& solution) {
  CheckReport report;
  auto fail = [&](const std::string& clause, const std::string& detail) {
    report.issues.push_back({clause, detail});
  };

  InputPartition part = partition_inputs(spec);
  const size_t c = part.controllable.size();

  // Header arithmetic: I' = I - c, L' = L + l, A' = A + a, M' = I' + L' + A'.
  if (solution.inputs.size() + c != spec.inputs.size())
    fail("header", "expected I' = I - c = " +
                       std::to_string(spec.inputs.size() - c) + ", got " +
                       std::to_string(solution.inputs.size()));
  if (solution.latches.size() < spec.latches.size())
    fail("header", "solution has fewer latches than the specification");
  if (solution.ands.size() < spec.ands.size())
    fail("header", "solution has fewer AND gates than the specification");
  uint64_t expect_m = static_cast<uint64_t>(solution.inputs.size()) +
                      solution.latches.size() + solution.ands.size();
  if (solution.max_var != expect_m)
    fail("header", "expected M' = I' + L' + A' = " + std::to_string(expect_m) +
                       ", got " + std::to_string(solution.max_var));

  // Inputs: exactly the uncontrollable inputs, unmodified and in order.
  if (solution.inputs != part.uncontrollable)
    fail("inputs",
         "input definitions must be the specification's uncontrollable inputs, "
         "unmodified and in order");

  // Latches: original definitions are an unmodified prefix.
  for (size_t i = 0; i < spec.latches.size() && i < solution.latches.size(); ++i) {
    if (!(solution.latches[i] == spec.latches[i])) {
      fail("latches", "original latch definition " + std::to_string(i) +
                          " modified or out of order");
      break;
    }
  }

  // Outputs: unchanged, none added or removed.
  if (solution.outputs != spec.outputs)
    fail("outputs", "output definitions must be unchanged");

  // AND gates: original definitions are an unmodified prefix.
  for (size_t i = 0; i < spec.ands.size() && i < solution.ands.size(); ++i) {
    if (!(solution.ands[i] == spec.ands[i])) {
      fail("and-gates", "original AND-gate definition " + std::to_string(i) +
                            " modified or out of order");
      break;
    }
  }

  // Every controllable variable index redefined exactly once, as a new
  // latch or a new AND gate.
  std::unordered_map<uint32_t, int> redef_count;
  for (Lit cl : part.controllable) redef_count[lit_var(cl)] = 0;
  std::unordered_set<uint32_t> new_def_vars;
  for (size_t i = spec.latches.size(); i < solution.latches.size(); ++i) {
    uint32_t v = lit_var(solution.latches[i].lit);
    new_def_vars.insert(v);
    auto it = redef_count.find(v);
    if (it != redef_count.end()) ++it->second;
  }
  for (size_t i = spec.ands.size(); i < solution.ands.size(); ++i) {
    uint32_t v = lit_var(solution.ands[i].lhs);
    new_def_vars.insert(v);
    auto it = redef_count.find(v);
    if (it != redef_count.end()) ++it->second;
  }
  for (Lit cl : part.controllable) {
    int n = redef_count[lit_var(cl)];
    if (n != 1)
      fail("redefinition", "controllable input literal " + std::to_string(cl) +
                               " redefined " + std::to_string(n) +
                               " times, expected exactly once");
  }

  // New definitions may use inputs, latches and new AND gates, but not
  // original AND gates.
  std::unordered_set<uint32_t> original_ands;
  for (const AndGate& g : spec.ands) original_ands.insert(lit_var(g.lhs));
  std::unordered_set<uint32_t> allowed;
  allowed.insert(0);
  for (Lit in : part.uncontrollable) allowed.insert(lit_var(in));
  for (const Latch& l : solution.latches) allowed.insert(lit_var(l.lit));
  allowed.insert(new_def_vars.begin(), new_def_vars.end());
  auto check_ref = [&](Lit l, const std::string& where) {
    uint32_t v = lit_var(l);
    if (original_ands.count(v))
      fail("reference", where + " references original AND-gate variable " +
                            std::to_string(v));
    else if (!allowed.count(v))
      fail("reference", where + " references undefined variable " + std::to_string(v));
  };
  for (size_t i = spec.latches.size(); i < solution.latches.size(); ++i)
    check_ref(solution.latches[i].next, "new latch " + std::to_string(i));
  for (size_t i = spec.ands.size(); i < solution.ands.size(); ++i) {
    check_ref(solution.ands[i].rhs0, "new AND gate " + std::to_string(i));
    check_ref(solution.ands[i].rhs1, "new AND gate " + std::to_string(i));
  }

  // Symbol table unchanged. Comments may be removed or modified at will.
  if (solution.symbols != spec.symbols)
    fail("symbol-table", "symbol table must be unchanged");

  return report;
}

}  // namespace synth::aiger
