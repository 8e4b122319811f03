#include "synth/bdd.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace synth::bdd {

namespace {
enum CacheOp : uint32_t {
  op_and = 1,
  op_or,
  op_xor,
  op_not,
  op_ite,
  op_exists,
  op_forall,
  op_and_abstract,
};
constexpr size_t k_cache_size = 1 << 16;
}  // namespace

// ----------------------------------------------------------------------
// Func

Func::Func(const Func& other) : store_(other.store_), id_(other.id_) {
  if (store_) store_->claim(id_);
}

Func::Func(Func&& other) noexcept : store_(other.store_), id_(other.id_) {
  other.store_ = nullptr;
  other.id_ = 0;
}

Func& Func::operator=(const Func& other) {
  if (this == &other) return *this;
  if (other.store_) other.store_->claim(other.id_);
  if (store_) store_->unclaim(id_);
  store_ = other.store_;
  id_ = other.id_;
  return *this;
}

Func& Func::operator=(Func&& other) noexcept {
  if (this == &other) return *this;
  if (store_) store_->unclaim(id_);
  store_ = other.store_;
  id_ = other.id_;
  other.store_ = nullptr;
  other.id_ = 0;
  return *this;
}

Func::~Func() {
  if (store_) store_->unclaim(id_);
}

NodeId Func::id() const {
  if (!store_) throw std::logic_error("empty Func handle");
  return id_;
}

void Func::release() {
  if (!store_) throw std::logic_error("double release of Func handle");
  store_->unclaim(id_);
  store_ = nullptr;
  id_ = 0;
}

bool Func::is_true() const { return store_ && id_ == 1; }
bool Func::is_false() const { return store_ && id_ == 0; }

bool Func::operator==(const Func& other) const {
  return store_ == other.store_ && id_ == other.id_;
}

Func Func::operator&(const Func& g) const { return store_->apply(BinOp::And, *this, g); }
Func Func::operator|(const Func& g) const { return store_->apply(BinOp::Or, *this, g); }
Func Func::operator^(const Func& g) const { return store_->apply(BinOp::Xor, *this, g); }
Func Func::operator!() const { return store_->negate(*this); }

// ----------------------------------------------------------------------
// Store: lifecycle and reference counting

Store::Store(uint64_t reorder_threshold)
    : cache_(k_cache_size), reorder_threshold_(reorder_threshold) {
  nodes_.push_back({k_term_var, 0, 0, 0});  // constant false
  nodes_.push_back({k_term_var, 0, 0, 0});  // constant true
}

Store::~Store() = default;

Var Store::new_var() {
  Var v = static_cast<Var>(var_level_.size());
  var_level_.push_back(static_cast<uint32_t>(var_order_.size()));
  var_order_.push_back(v);
  var_node_count_.push_back(0);
  return v;
}

Var Store::new_var_after(Var anchor) {
  if (anchor >= var_level_.size()) throw std::invalid_argument("unknown variable");
  Var v = static_cast<Var>(var_level_.size());
  var_level_.push_back(0);
  var_node_count_.push_back(0);
  var_order_.insert(var_order_.begin() + var_level_[anchor] + 1, v);
  for (size_t lvl = 0; lvl < var_order_.size(); ++lvl)
    var_level_[var_order_[lvl]] = static_cast<uint32_t>(lvl);
  return v;
}

NodeId Store::mk(Var v, NodeId lo, NodeId hi) {
  if (lo == hi) return lo;
  assert(nodes_[lo].var != k_poison && nodes_[hi].var != k_poison);
  assert(level_of(lo) > level_of_var(v) && level_of(hi) > level_of_var(v));
  Key key{v, lo, hi};
  auto it = unique_.find(key);
  if (it != unique_.end()) return it->second;
  NodeId id;
  if (!free_slots_.empty()) {
    id = free_slots_.back();
    free_slots_.pop_back();
    nodes_[id] = {v, lo, hi, 0};
  } else {
    id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({v, lo, hi, 0});
  }
  unique_.emplace(key, id);
  ++dead_count_;  // fresh nodes start unclaimed
  if (reorder_stats_) var_nodes_session_[v].push_back(id);
  return id;
}

void Store::claim(NodeId n) {
  if (is_term(n)) return;
  Node& node = nodes_[n];
  assert(node.var != k_poison);
  if (node.ref++ == 0) {
    --dead_count_;
    ++live_count_;
    ++var_node_count_[node.var];
    claim(node.lo);
    claim(node.hi);
  }
}

void Store::unclaim(NodeId n) {
  if (is_term(n)) return;
  Node& node = nodes_[n];
  assert(node.var != k_poison && node.ref > 0);
  if (--node.ref == 0) {
    ++dead_count_;
    --live_count_;
    --var_node_count_[node.var];
    unclaim(node.lo);
    unclaim(node.hi);
  }
}

Func Store::wrap(NodeId n) {
  claim(n);
  return Func(this, n);
}

void Store::collect_garbage() {
  for (NodeId id = 2; id < nodes_.size(); ++id) {
    Node& node = nodes_[id];
    if (node.var == k_poison || node.ref > 0) continue;
    unique_.erase(Key{node.var, node.lo, node.hi});
    node.var = k_poison;
    free_slots_.push_back(id);
  }
  dead_count_ = 0;
  cache_clear();
  ++stats_.gc_runs;
}

void Store::after_operation() {
  if (dead_count_ > 4096 && dead_count_ > live_count_) collect_garbage();
  if (reorder_enabled_ && live_count_ >= reorder_threshold_) {
    collect_garbage();
    if (live_count_ >= reorder_threshold_) {
      reorder_sift();
      reorder_threshold_ = std::max(reorder_threshold_, live_count_ * 2);
    }
  }
}

// ----------------------------------------------------------------------
// Operation cache

NodeId Store::cache_get(uint32_t op, NodeId a, NodeId b, NodeId c) {
  ++stats_.cache_lookups;
  uint64_t h = (uint64_t(op) * 0x2545f4914f6cdd1dull) ^
               (uint64_t(a) * 0x9e3779b97f4a7c15ull) ^
               (uint64_t(b) * 0xd6e8feb86659fd93ull) ^ (uint64_t(c) << 17);
  const CacheEntry& e = cache_[h % k_cache_size];
  if (e.gen == cache_gen_ && e.op == op && e.a == a && e.b == b && e.c == c) {
    ++stats_.cache_hits;
    return e.result;
  }
  return 0xffffffffu;
}

void Store::cache_put(uint32_t op, NodeId a, NodeId b, NodeId c, NodeId r) {
  uint64_t h = (uint64_t(op) * 0x2545f4914f6cdd1dull) ^
               (uint64_t(a) * 0x9e3779b97f4a7c15ull) ^
               (uint64_t(b) * 0xd6e8feb86659fd93ull) ^ (uint64_t(c) << 17);
  cache_[h % k_cache_size] = {op, a, b, c, r, cache_gen_};
}

void Store::cache_clear() { ++cache_gen_; }

// ----------------------------------------------------------------------
// Core recursions

Func Store::constant(bool value) { return wrap(value ? k_true : k_false); }

Func Store::var(Var v) {
  if (v >= var_level_.size()) throw std::invalid_argument("unknown variable");
  Func r = wrap(mk(v, k_false, k_true));
  after_operation();
  return r;
}

NodeId Store::apply_rec(BinOp op, NodeId f, NodeId g) {
  switch (op) {
    case BinOp::And:
      if (f == k_false || g == k_false) return k_false;
      if (f == k_true) return g;
      if (g == k_true) return f;
      if (f == g) return f;
      break;
    case BinOp::Or:
      if (f == k_true || g == k_true) return k_true;
      if (f == k_false) return g;
      if (g == k_false) return f;
      if (f == g) return f;
      break;
    case BinOp::Xor:
      if (f == g) return k_false;
      if (f == k_false) return g;
      if (g == k_false) return f;
      if (f == k_true) return not_rec(g);
      if (g == k_true) return not_rec(f);
      break;
  }
  if (f > g) std::swap(f, g);  // all three ops are commutative
  uint32_t cop = op == BinOp::And ? op_and : op == BinOp::Or ? op_or : op_xor;
  NodeId cached = cache_get(cop, f, g, 0);
  if (cached != 0xffffffffu) return cached;

  uint32_t lf = level_of(f), lg = level_of(g);
  Var v = lf <= lg ? nodes_[f].var : nodes_[g].var;
  NodeId f0 = cofactor(f, v, false), f1 = cofactor(f, v, true);
  NodeId g0 = cofactor(g, v, false), g1 = cofactor(g, v, true);
  NodeId r = mk(v, apply_rec(op, f0, g0), apply_rec(op, f1, g1));
  cache_put(cop, f, g, 0, r);
  return r;
}

NodeId Store::not_rec(NodeId f) {
  if (f == k_false) return k_true;
  if (f == k_true) return k_false;
  NodeId cached = cache_get(op_not, f, 0, 0);
  if (cached != 0xffffffffu) return cached;
  NodeId r = mk(nodes_[f].var, not_rec(nodes_[f].lo), not_rec(nodes_[f].hi));
  cache_put(op_not, f, 0, 0, r);
  return r;
}

NodeId Store::ite_rec(NodeId f, NodeId g, NodeId h) {
  if (f == k_true) return g;
  if (f == k_false) return h;
  if (g == h) return g;
  if (g == k_true && h == k_false) return f;
  if (g == k_false && h == k_true) return not_rec(f);
  NodeId cached = cache_get(op_ite, f, g, h);
  if (cached != 0xffffffffu) return cached;

  uint32_t lvl = std::min({level_of(f), level_of(g), level_of(h)});
  Var v = var_order_[lvl];
  NodeId r = mk(v,
                ite_rec(cofactor(f, v, false), cofactor(g, v, false),
                        cofactor(h, v, false)),
                ite_rec(cofactor(f, v, true), cofactor(g, v, true),
                        cofactor(h, v, true)));
  cache_put(op_ite, f, g, h, r);
  return r;
}

NodeId Store::cube_of(const VarSet& vars) {
  VarSet sorted = vars;
  std::sort(sorted.begin(), sorted.end(),
            [&](Var a, Var b) { return level_of_var(a) > level_of_var(b); });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  NodeId cube = k_true;
  for (Var v : sorted) {
    if (v >= var_level_.size()) throw std::invalid_argument("unknown variable");
    cube = mk(v, k_false, cube);
  }
  return cube;
}

NodeId Store::quant_rec(Quant q, NodeId f, NodeId cube) {
  if (is_term(f) || cube == k_true) return f;
  // Skip cube variables above f's top; they do not occur in f.
  while (cube != k_true && level_of(cube) < level_of(f)) cube = nodes_[cube].hi;
  if (cube == k_true) return f;

  uint32_t cop = q == Quant::Exists ? op_exists : op_forall;
  NodeId cached = cache_get(cop, f, cube, 0);
  if (cached != 0xffffffffu) return cached;

  Var v = nodes_[f].var;
  NodeId r;
  if (nodes_[cube].var == v) {
    NodeId rest = nodes_[cube].hi;
    NodeId r0 = quant_rec(q, nodes_[f].lo, rest);
    if (q == Quant::Exists && r0 == k_true) {
      r = k_true;
    } else if (q == Quant::Forall && r0 == k_false) {
      r = k_false;
    } else {
      NodeId r1 = quant_rec(q, nodes_[f].hi, rest);
      r = apply_rec(q == Quant::Exists ? BinOp::Or : BinOp::And, r0, r1);
    }
  } else {
    r = mk(v, quant_rec(q, nodes_[f].lo, cube), quant_rec(q, nodes_[f].hi, cube));
  }
  cache_put(cop, f, cube, 0, r);
  return r;
}

NodeId Store::and_abstract_rec(NodeId f, NodeId g, NodeId cube) {
  if (f == k_false || g == k_false) return k_false;
  uint32_t top = std::min(level_of(f), level_of(g));
  while (cube != k_true && level_of(cube) < top) cube = nodes_[cube].hi;
  if (cube == k_true) return apply_rec(BinOp::And, f, g);
  if (f == k_true && g == k_true) return k_true;
  if (f == g) return quant_rec(Quant::Exists, f, cube);
  if (f > g) std::swap(f, g);

  NodeId cached = cache_get(op_and_abstract, f, g, cube);
  if (cached != 0xffffffffu) return cached;

  Var v = var_order_[top];
  NodeId f0 = cofactor(f, v, false), f1 = cofactor(f, v, true);
  NodeId g0 = cofactor(g, v, false), g1 = cofactor(g, v, true);
  NodeId r;
  if (nodes_[cube].var == v) {
    NodeId rest = nodes_[cube].hi;
    NodeId r0 = and_abstract_rec(f0, g0, rest);
    if (r0 == k_true)
      r = k_true;
    else
      r = apply_rec(BinOp::Or, r0, and_abstract_rec(f1, g1, rest));
  } else {
    r = mk(v, and_abstract_rec(f0, g0, cube), and_abstract_rec(f1, g1, cube));
  }
  cache_put(op_and_abstract, f, g, cube, r);
  return r;
}

NodeId Store::compose_rec(NodeId f, const std::map<Var, NodeId>& subst,
                          uint32_t max_subst_level,
                          std::unordered_map<NodeId, NodeId>& memo) {
  if (is_term(f)) return f;
  if (level_of(f) > max_subst_level) return f;
  auto it = memo.find(f);
  if (it != memo.end()) return it->second;

  Var v = nodes_[f].var;
  NodeId r0 = compose_rec(nodes_[f].lo, subst, max_subst_level, memo);
  NodeId r1 = compose_rec(nodes_[f].hi, subst, max_subst_level, memo);
  NodeId r;
  auto sub = subst.find(v);
  if (sub != subst.end()) {
    r = ite_rec(sub->second, r1, r0);
  } else if (level_of_var(v) < std::min(level_of(r0), level_of(r1))) {
    r = mk(v, r0, r1);
  } else {
    r = ite_rec(mk(v, k_false, k_true), r1, r0);
  }
  memo.emplace(f, r);
  return r;
}

NodeId Store::restrict_rec(NodeId f, NodeId care,
                           std::unordered_map<uint64_t, NodeId>& memo) {
  if (care == k_true || is_term(f)) return f;
  uint64_t key = (uint64_t(f) << 32) | care;
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;

  NodeId r;
  if (level_of(care) < level_of(f)) {
    // The care set constrains a variable f does not depend on: drop it.
    NodeId shrunk = apply_rec(BinOp::Or, nodes_[care].lo, nodes_[care].hi);
    r = restrict_rec(f, shrunk, memo);
  } else {
    Var v = nodes_[f].var;
    NodeId c0 = cofactor(care, v, false), c1 = cofactor(care, v, true);
    if (c0 == k_false)
      r = restrict_rec(nodes_[f].hi, c1, memo);
    else if (c1 == k_false)
      r = restrict_rec(nodes_[f].lo, c0, memo);
    else
      r = mk(v, restrict_rec(nodes_[f].lo, c0, memo),
             restrict_rec(nodes_[f].hi, c1, memo));
  }
  memo.emplace(key, r);
  return r;
}

// ----------------------------------------------------------------------
// Public operations

namespace {
void require_same_store(const Store* s, const Func& f) {
  if (f.store() != s) throw std::invalid_argument("Func belongs to a different store");
}
}  // namespace

Func Store::apply(BinOp op, const Func& f, const Func& g) {
  require_same_store(this, f);
  require_same_store(this, g);
  Func r = wrap(apply_rec(op, f.id(), g.id()));
  after_operation();
  return r;
}

Func Store::negate(const Func& f) {
  require_same_store(this, f);
  Func r = wrap(not_rec(f.id()));
  after_operation();
  return r;
}

Func Store::ite(const Func& f, const Func& g, const Func& h) {
  require_same_store(this, f);
  require_same_store(this, g);
  require_same_store(this, h);
  Func r = wrap(ite_rec(f.id(), g.id(), h.id()));
  after_operation();
  return r;
}

Func Store::quantify(Quant q, const VarSet& vars, const Func& f) {
  require_same_store(this, f);
  Func r = wrap(quant_rec(q, f.id(), cube_of(vars)));
  after_operation();
  return r;
}

Func Store::and_abstract(const VarSet& vars, const Func& f, const Func& g) {
  require_same_store(this, f);
  require_same_store(this, g);
  Func r = wrap(and_abstract_rec(f.id(), g.id(), cube_of(vars)));
  after_operation();
  return r;
}

Func Store::compose_vector(const Func& f, const std::map<Var, Func>& subst) {
  require_same_store(this, f);
  std::map<Var, NodeId> ids;
  uint32_t max_level = 0;
  for (const auto& [v, g] : subst) {
    require_same_store(this, g);
    if (v >= var_level_.size()) throw std::invalid_argument("unknown variable");
    ids.emplace(v, g.id());
    max_level = std::max(max_level, level_of_var(v));
  }
  if (ids.empty()) return f;
  std::unordered_map<NodeId, NodeId> memo;
  Func r = wrap(compose_rec(f.id(), ids, max_level, memo));
  after_operation();
  return r;
}

Func Store::remap_vars(const Func& f, const std::map<Var, Var>& pairs) {
  require_same_store(this, f);
  std::map<Var, Func> subst;
  std::vector<Var> targets;
  for (const auto& [from, to] : pairs) {
    if (from >= var_level_.size() || to >= var_level_.size())
      throw std::invalid_argument("unknown variable");
    targets.push_back(to);
    subst.emplace(from, var(to));
  }
  std::sort(targets.begin(), targets.end());
  if (std::adjacent_find(targets.begin(), targets.end()) != targets.end())
    throw std::invalid_argument("remap targets must be distinct");
  return compose_vector(f, subst);
}

Func Store::restrict_safe(const Func& f, const Func& care) {
  require_same_store(this, f);
  require_same_store(this, care);
  if (care.id() == k_false) return f;
  std::unordered_map<uint64_t, NodeId> memo;
  NodeId r = restrict_rec(f.id(), care.id(), memo);
  // Guarded: keep the original when minimization grew the diagram.
  std::vector<bool> seen(nodes_.size(), false);
  uint64_t size_r = count_rec(r, seen);
  std::fill(seen.begin(), seen.end(), false);
  uint64_t size_f = count_rec(f.id(), seen);
  Func result = size_r <= size_f ? wrap(r) : f;
  after_operation();
  return result;
}

// ----------------------------------------------------------------------
// Inspection

Var Store::top_var(const Func& f) const {
  require_same_store(this, f);
  if (is_term(f.id())) throw std::invalid_argument("constant has no top variable");
  return nodes_[f.id()].var;
}

Func Store::low_child(const Func& f) {
  require_same_store(this, f);
  if (is_term(f.id())) throw std::invalid_argument("constant has no children");
  return wrap(nodes_[f.id()].lo);
}

Func Store::high_child(const Func& f) {
  require_same_store(this, f);
  if (is_term(f.id())) throw std::invalid_argument("constant has no children");
  return wrap(nodes_[f.id()].hi);
}

bool Store::evaluate(const Func& f, const std::map<Var, bool>& assignment) const {
  require_same_store(this, f);
  NodeId n = f.id();
  while (!is_term(n)) {
    auto it = assignment.find(nodes_[n].var);
    if (it == assignment.end())
      throw std::invalid_argument("assignment misses variable " +
                                  std::to_string(nodes_[n].var));
    n = it->second ? nodes_[n].hi : nodes_[n].lo;
  }
  return n == k_true;
}

std::map<Var, bool> Store::pick_assignment(const Func& f,
                                           const VarSet& universe) const {
  require_same_store(this, f);
  if (f.id() == k_false)
    throw std::invalid_argument("cannot pick assignment from constant false");
  std::map<Var, bool> out;
  for (Var v : universe) out[v] = false;
  NodeId n = f.id();
  while (!is_term(n)) {
    const Node& node = nodes_[n];
    if (node.lo != k_false) {
      out[node.var] = false;
      n = node.lo;
    } else {
      out[node.var] = true;
      n = node.hi;
    }
  }
  return out;
}

VarSet Store::support(const Func& f) const {
  require_same_store(this, f);
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<bool> vars(var_level_.size(), false);
  std::vector<NodeId> stack{f.id()};
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (is_term(n) || seen[n]) continue;
    seen[n] = true;
    vars[nodes_[n].var] = true;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  VarSet out;
  for (Var v = 0; v < vars.size(); ++v)
    if (vars[v]) out.push_back(v);
  return out;
}

uint64_t Store::count_rec(NodeId n, std::vector<bool>& seen) const {
  if (is_term(n) || seen[n]) return 0;
  seen[n] = true;
  return 1 + count_rec(nodes_[n].lo, seen) + count_rec(nodes_[n].hi, seen);
}

uint64_t Store::node_count(const Func& f) const {
  require_same_store(this, f);
  std::vector<bool> seen(nodes_.size(), false);
  return count_rec(f.id(), seen);
}

std::string Store::to_dot(const Func& f, const std::string& name) const {
  require_same_store(this, f);
  std::ostringstream out;
  out << "digraph \"" << name << "\" {\n";
  out << "  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n";
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{f.id()};
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (is_term(n) || seen[n]) continue;
    seen[n] = true;
    out << "  n" << n << " [label=\"x" << nodes_[n].var << "\"];\n";
    out << "  n" << n << " -> n" << nodes_[n].lo << " [style=dashed];\n";
    out << "  n" << n << " -> n" << nodes_[n].hi << ";\n";
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  out << "}\n";
  return out.str();
}

StoreStats Store::stats() const {
  StoreStats s = stats_;
  s.allocated = nodes_.size() - 2;
  s.table_nodes = nodes_.size() - 2 - free_slots_.size();
  s.live_nodes = live_count_;
  s.dead_nodes = dead_count_;
  return s;
}

std::string StoreStats::to_text() const {
  std::ostringstream out;
  out << "allocated=" << allocated << "\n"
      << "table_nodes=" << table_nodes << "\n"
      << "live_nodes=" << live_nodes << "\n"
      << "dead_nodes=" << dead_nodes << "\n"
      << "gc_runs=" << gc_runs << "\n"
      << "reorders=" << reorders << "\n"
      << "cache_lookups=" << cache_lookups << "\n"
      << "cache_hits=" << cache_hits << "\n";
  return out.str();
}

// ----------------------------------------------------------------------
// Reordering by adjacent-level sifting

void Store::swap_adjacent(uint32_t level) {
  Var x = var_order_[level];
  Var y = var_order_[level + 1];
  if (reorder_stats_) ++reorder_stats_->swaps;

  // Snapshot: nodes currently at var x. Entries may be stale (rewritten
  // earlier or reclaimed); they are filtered on the fly.
  std::vector<NodeId> snapshot = var_nodes_session_[x];
  for (NodeId n : snapshot) {
    // No Node& here: mk below may reallocate the node pool.
    if (nodes_[n].var != x) continue;
    if (reorder_stats_) ++reorder_stats_->nodes_visited;
    NodeId a = nodes_[n].lo, b = nodes_[n].hi;
    bool a_at_y = !is_term(a) && nodes_[a].var == y;
    bool b_at_y = !is_term(b) && nodes_[b].var == y;
    if (!a_at_y && !b_at_y) continue;  // unaffected, moves with x

    NodeId f00 = a_at_y ? nodes_[a].lo : a;
    NodeId f01 = a_at_y ? nodes_[a].hi : a;
    NodeId f10 = b_at_y ? nodes_[b].lo : b;
    NodeId f11 = b_at_y ? nodes_[b].hi : b;

    bool alive = nodes_[n].ref > 0;
    NodeId lo2 = mk(x, f00, f10);
    if (alive) claim(lo2);
    NodeId hi2 = mk(x, f01, f11);
    if (alive) claim(hi2);

    unique_.erase(Key{x, a, b});
    nodes_[n].var = y;
    nodes_[n].lo = lo2;
    nodes_[n].hi = hi2;
    assert(unique_.find(Key{y, lo2, hi2}) == unique_.end());
    unique_.emplace(Key{y, lo2, hi2}, n);
    if (alive) {
      --var_node_count_[x];
      ++var_node_count_[y];
      unclaim(a);
      unclaim(b);
    }
    var_nodes_session_[y].push_back(n);
  }
  std::swap(var_order_[level], var_order_[level + 1]);
  var_level_[x] = level + 1;
  var_level_[y] = level;
}

ReorderStats Store::reorder_sift() {
  ReorderStats rs;
  if (var_order_.size() < 2) {
    rs.size_before = rs.size_after = live_count_;
    return rs;
  }
  collect_garbage();
  rs.size_before = live_count_;
  reorder_stats_ = &rs;

  // Session lists of nodes per variable, kept up to date by mk and the
  // swap loop, filtered lazily.
  var_nodes_session_.assign(var_level_.size(), {});
  for (NodeId id = 2; id < nodes_.size(); ++id)
    if (nodes_[id].var != k_poison) var_nodes_session_[nodes_[id].var].push_back(id);

  std::vector<Var> by_size;
  for (Var v = 0; v < var_level_.size(); ++v) by_size.push_back(v);
  std::sort(by_size.begin(), by_size.end(), [&](Var a, Var b) {
    if (var_node_count_[a] != var_node_count_[b])
      return var_node_count_[a] > var_node_count_[b];
    return a < b;
  });

  const uint32_t levels = static_cast<uint32_t>(var_order_.size());
  for (Var v : by_size) {
    if (var_node_count_[v] == 0) continue;
    const uint64_t start_size = live_count_;
    const uint64_t growth_limit = start_size + start_size / 5;  // factor 1.2
    uint64_t best_size = live_count_;
    uint32_t lvl = var_level_[v];
    uint32_t best_lvl = lvl;

    while (lvl + 1 < levels) {  // sift down
      swap_adjacent(lvl);
      ++lvl;
      if (live_count_ <= best_size) {
        best_size = live_count_;
        best_lvl = lvl;
      }
      if (live_count_ > growth_limit) break;
    }
    while (lvl > 0) {  // sift up, passing through the start position
      swap_adjacent(lvl - 1);
      --lvl;
      if (live_count_ <= best_size) {
        best_size = live_count_;
        best_lvl = lvl;
      }
      if (live_count_ > growth_limit && lvl < best_lvl) break;
    }
    while (lvl < best_lvl) {  // settle at the best position seen
      swap_adjacent(lvl);
      ++lvl;
    }
  }

  reorder_stats_ = nullptr;
  var_nodes_session_.clear();
  collect_garbage();
  rs.size_after = live_count_;
  ++stats_.reorders;
  return rs;
}

// ----------------------------------------------------------------------
// Invariant checking (test support)

void Store::check_invariants() const {
  auto fail = [](const std::string& msg) { throw std::logic_error("store invariant: " + msg); };
  uint64_t live = 0, dead = 0;
  std::vector<uint64_t> internal_refs(nodes_.size(), 0);
  std::vector<uint64_t> per_var(var_level_.size(), 0);
  for (NodeId id = 2; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.var == k_poison) continue;
    if (n.var >= var_level_.size()) fail("node with unknown variable");
    if (n.lo == n.hi) fail("node with equal children");
    if (nodes_[n.lo].var == k_poison || nodes_[n.hi].var == k_poison)
      fail("node references reclaimed child");
    if (level_of(n.lo) <= level_of_var(n.var) || level_of(n.hi) <= level_of_var(n.var))
      fail("ordering violated");
    auto it = unique_.find(Key{n.var, n.lo, n.hi});
    if (it == unique_.end() || it->second != id) fail("unique table out of sync");
    if (n.ref > 0) {
      ++live;
      ++per_var[n.var];
      ++internal_refs[n.lo];
      ++internal_refs[n.hi];
    } else {
      ++dead;
    }
  }
  if (live != live_count_) fail("live count out of sync");
  if (dead != dead_count_) fail("dead count out of sync");
  for (Var v = 0; v < per_var.size(); ++v)
    if (per_var[v] != var_node_count_[v]) fail("per-variable count out of sync");
  for (NodeId id = 2; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.var == k_poison) continue;
    if (n.ref > 0 && n.ref < internal_refs[id])
      fail("reference count below internal parent count");
    if (n.ref == 0 && internal_refs[id] > 0)
      fail("dead node referenced by live parent");
  }
}

}  // namespace synth::bdd
