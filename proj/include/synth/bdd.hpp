#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace synth::bdd {

using Var = uint32_t;
using NodeId = uint32_t;

class Store;

// Reference-counted handle to a node in a Store. Copying increments the
// count, destruction decrements it. A default-constructed Func is empty.
class Func {
 public:
  Func() = default;
  Func(const Func& other);
  Func(Func&& other) noexcept;
  Func& operator=(const Func& other);
  Func& operator=(Func&& other) noexcept;
  ~Func();

  bool valid() const { return store_ != nullptr; }
  Store* store() const { return store_; }
  NodeId id() const;  // throws on empty handle

  // Explicit release; releasing an already-empty handle is an error.
  void release();

  bool is_true() const;
  bool is_false() const;
  bool is_const() const { return is_true() || is_false(); }

  bool operator==(const Func& other) const;
  bool operator!=(const Func& other) const { return !(*this == other); }

  Func operator&(const Func& g) const;
  Func operator|(const Func& g) const;
  Func operator^(const Func& g) const;
  Func operator!() const;

 private:
  friend class Store;
  Func(Store* store, NodeId id) : store_(store), id_(id) {}
  Store* store_ = nullptr;
  NodeId id_ = 0;
};

// Set of variables, used as a quantification cube. May be empty, in which
// case quantifiers are the identity.
using VarSet = std::vector<Var>;

enum class BinOp { And, Or, Xor };
enum class Quant { Exists, Forall };

struct ReorderStats {
  uint64_t nodes_visited = 0;  // table-resident nodes touched by swaps
  uint64_t swaps = 0;
  uint64_t size_before = 0;
  uint64_t size_after = 0;
};

struct StoreStats {
  uint64_t allocated = 0;   // node slots ever allocated (incl. free list)
  uint64_t table_nodes = 0; // nodes currently in the unique table
  uint64_t live_nodes = 0;  // table nodes with a positive reference count
  uint64_t dead_nodes = 0;  // table nodes awaiting garbage collection
  uint64_t gc_runs = 0;
  uint64_t reorders = 0;
  uint64_t cache_lookups = 0;
  uint64_t cache_hits = 0;
  std::string to_text() const;  // key=value lines
};

// Canonical reduced ordered BDD node table. No complement edges; negation
// is a cached recursive operation. Not thread-safe: a Store and all its
// Funcs belong to one thread of control at a time.
class Store {
 public:
  explicit Store(uint64_t reorder_threshold = 4096);
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // --- variables -----------------------------------------------------
  Var new_var();                 // appended at the bottom of the order
  Var new_var_after(Var v);      // inserted directly below v
  size_t var_count() const { return var_order_.size(); }
  std::vector<Var> current_order() const { return var_order_; }

  // --- construction ---------------------------------------------------
  Func constant(bool value);
  Func var(Var v);  // projection function; throws on unknown variable

  // --- operations -----------------------------------------------------
  Func apply(BinOp op, const Func& f, const Func& g);
  Func negate(const Func& f);
  Func ite(const Func& f, const Func& g, const Func& h);
  Func quantify(Quant q, const VarSet& vars, const Func& f);
  // exists vars. f & g, fused into one recursion.
  Func and_abstract(const VarSet& vars, const Func& f, const Func& g);
  // Simultaneous substitution of variables by functions.
  Func compose_vector(const Func& f, const std::map<Var, Func>& subst);
  // Simultaneous variable renaming; target variables must be distinct.
  Func remap_vars(const Func& f, const std::map<Var, Var>& pairs);
  // Coudert/Madre restrict against a care set, guarded: if the minimized
  // diagram is larger than f, f itself is returned.
  Func restrict_safe(const Func& f, const Func& care);

  // --- inspection -----------------------------------------------------
  Var top_var(const Func& f) const;  // throws on constants
  Func low_child(const Func& f);     // cofactor by the top variable
  Func high_child(const Func& f);
  bool evaluate(const Func& f, const std::map<Var, bool>& assignment) const;
  // Some satisfying assignment over `universe` (false outside the
  // satisfying path); f must not be constant false.
  std::map<Var, bool> pick_assignment(const Func& f, const VarSet& universe) const;
  VarSet support(const Func& f) const;
  uint64_t node_count(const Func& f) const;  // excluding terminals
  std::string to_dot(const Func& f, const std::string& name = "f") const;

  // --- maintenance ----------------------------------------------------
  void collect_garbage();
  ReorderStats reorder_sift();
  void set_reorder_enabled(bool on) { reorder_enabled_ = on; }
  void set_reorder_threshold(uint64_t n) { reorder_threshold_ = n; }
  uint64_t live_node_count() const { return live_count_; }
  StoreStats stats() const;

  // Semantic sanity check used by tests: canonicity, ordering and
  // reference-count bookkeeping. Throws std::logic_error on violation.
  void check_invariants() const;

 private:
  friend class Func;

  struct Node {
    Var var;
    NodeId lo;
    NodeId hi;
    uint32_t ref;
  };

  static constexpr NodeId k_false = 0;
  static constexpr NodeId k_true = 1;
  static constexpr Var k_term_var = 0xffffffffu;
  static constexpr Var k_poison = 0xfffffffeu;

  struct Key {
    Var var;
    NodeId lo, hi;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      uint64_t h = k.var * 0x9e3779b97f4a7c15ull;
      h ^= (uint64_t(k.lo) << 32 | k.hi) * 0xbf58476d1ce4e5b9ull;
      return size_t(h ^ (h >> 29));
    }
  };

  struct CacheEntry {
    uint32_t op = 0;
    NodeId a = 0, b = 0, c = 0;
    NodeId result = 0;
    uint64_t gen = 0;
  };

  bool is_term(NodeId n) const { return n <= k_true; }
  uint32_t level_of_var(Var v) const { return var_level_[v]; }
  uint32_t level_of(NodeId n) const {
    return is_term(n) ? 0x7fffffffu : var_level_[nodes_[n].var];
  }

  NodeId mk(Var v, NodeId lo, NodeId hi);
  void claim(NodeId n);           // +1 ref, resurrecting the subgraph if dead
  void unclaim(NodeId n);         // -1 ref, cascading when it reaches zero
  Func wrap(NodeId n);            // claim + handle
  void after_operation();         // GC/reorder triggers at op boundaries

  NodeId cache_get(uint32_t op, NodeId a, NodeId b, NodeId c);
  void cache_put(uint32_t op, NodeId a, NodeId b, NodeId c, NodeId r);
  void cache_clear();

  NodeId cofactor(NodeId n, Var v, bool value) const {
    if (is_term(n) || nodes_[n].var != v) return n;
    return value ? nodes_[n].hi : nodes_[n].lo;
  }

  NodeId apply_rec(BinOp op, NodeId f, NodeId g);
  NodeId not_rec(NodeId f);
  NodeId ite_rec(NodeId f, NodeId g, NodeId h);
  NodeId quant_rec(Quant q, NodeId f, NodeId cube);
  NodeId and_abstract_rec(NodeId f, NodeId g, NodeId cube);
  NodeId compose_rec(NodeId f, const std::map<Var, NodeId>& subst,
                     uint32_t min_subst_level,
                     std::unordered_map<NodeId, NodeId>& memo);
  NodeId restrict_rec(NodeId f, NodeId care,
                      std::unordered_map<uint64_t, NodeId>& memo);
  NodeId cube_of(const VarSet& vars);  // conjunction of positive literals
  uint64_t count_rec(NodeId n, std::vector<bool>& seen) const;

  void swap_adjacent(uint32_t level);  // swap variables at level, level+1

  std::vector<Node> nodes_;
  std::vector<NodeId> free_slots_;
  std::unordered_map<Key, NodeId, KeyHash> unique_;
  std::vector<Var> var_order_;        // level -> var
  std::vector<uint32_t> var_level_;   // var -> level
  std::vector<uint64_t> var_node_count_;
  std::vector<CacheEntry> cache_;
  uint64_t cache_gen_ = 1;
  uint64_t live_count_ = 0;
  uint64_t dead_count_ = 0;
  uint64_t reorder_threshold_;
  bool reorder_enabled_ = true;
  ReorderStats* reorder_stats_ = nullptr;
  std::vector<std::vector<NodeId>> var_nodes_session_;  // live only during sifting
  mutable StoreStats stats_;
};

}  // namespace synth::bdd
