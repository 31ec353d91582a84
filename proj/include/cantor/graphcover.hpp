#pragma once
// Graph covers: finite directed graphs, bidirectional covering maps, and
// towers of "bouquet" levels (cycles glued at one base vertex) presented
// by cycle expressions. The inverse limit of such a tower is a
// zero-dimensional system; the certificates here are the finite-level
// conditions that imply minimality, transitivity and weak mixing.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cantor {

struct Graph {
  std::size_t vertex_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  bool has_edge(std::size_t u, std::size_t v) const;
  std::vector<std::vector<std::size_t>> out_neighbors() const;
  std::vector<std::vector<std::size_t>> in_neighbors() const;
};

/// A vertex map V_source -> V_target given as a dense table.
using VertexMap = std::vector<std::size_t>;

bool check_edge_surjective(const Graph& g);
bool is_homomorphism(const VertexMap& hom, const Graph& source, const Graph& target);
/// Throws PreconditionError when hom is not a homomorphism.
bool check_bidirectional(const VertexMap& hom, const Graph& source, const Graph& target);

/// Length of the shortest closed path in g (1 for a self-loop); nullopt if acyclic.
std::optional<std::size_t> min_cycle_length(const Graph& g);

/// Position of a vertex inside its level: cycle 0 is the base vertex.
struct VertexLabel {
  std::size_t cycle = 0;  // 0 = base, otherwise 1-based cycle id
  std::size_t pos = 0;    // 0 for base, 1..len-1 along the cycle
  friend bool operator==(const VertexLabel&, const VertexLabel&) = default;
};

/// Cycles c_1, ..., c_m sharing only the base vertex. Vertex numbering:
/// base = 0, then the interiors of c_1 in traversal order, then c_2, ...
class CycleLevel {
 public:
  CycleLevel(std::size_t n, std::vector<std::size_t> cycle_lengths);

  std::size_t level() const { return n_; }
  std::size_t cycle_count() const { return lengths_.size(); }
  /// |c_id| for 1-based id.
  std::size_t cycle_length(std::size_t id) const;
  const std::vector<std::size_t>& cycle_lengths() const { return lengths_; }
  std::size_t vertex_count() const { return count_; }

  std::size_t vertex(std::size_t cycle, std::size_t pos) const;
  VertexLabel label(std::size_t v) const;
  /// eta: +pos on cycle 1, -pos on cycle 2, 0 at the base.
  long signed_index(std::size_t v) const;
  std::size_t vertex_from_signed(long eta) const;
  bool has_signed(long eta) const;
  std::string name(std::size_t v) const;

  const Graph& graph() const { return graph_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> lengths_;
  std::vector<std::size_t> offsets_;
  std::size_t count_ = 0;
  Graph graph_;
};

struct CycleTerm {
  std::size_t multiplicity = 1;
  std::size_t cycle = 1;  // 1-based
};

/// a_1 c_1 + ... + a_k c_k: traverse c_1 a_1 times, then c_2 a_2 times, ...
using CycleExpr = std::vector<CycleTerm>;

std::size_t expr_length(const CycleLevel& level, const CycleExpr& expr);

/// Closed vertex path at the base (first == last == base); edge count
/// is path.size() - 1 == sum a_i |c_i|.
std::vector<std::size_t> expand_cycle_expr(const CycleLevel& level, const CycleExpr& expr);

enum class TowerVariant { WeaklyMixing, Transitive, Restricted, Custom };

std::string variant_name(TowerVariant v);
TowerVariant parse_variant(const std::string& s);

/// Levels 0..N with covering maps phi_n : V_{n+1} -> V_n.
struct CoverSequence {
  TowerVariant variant = TowerVariant::Custom;
  std::vector<CycleLevel> levels;
  /// rules[n][i-1] is phi_n(c_{n+1,i}) as an expression over level n.
  std::vector<std::vector<CycleExpr>> rules;
  std::vector<VertexMap> homs;

  std::size_t top() const { return levels.size() - 1; }
};

/// Builds a tower from level-0 cycle lengths and a fixed per-level rule.
CoverSequence build_tower(std::vector<std::size_t> base_lengths, std::vector<CycleExpr> rule,
                          std::size_t levels, TowerVariant variant = TowerVariant::Custom);

/// phi_n(c_{n+1,i}) = 2c_{n,1} + c_{n,i} + c_{n,2}, starting from |c_{0,1}|=2, |c_{0,2}|=3.
CoverSequence build_weakly_mixing_sequence(std::size_t levels);
/// phi_n(c_{n+1,1}) = 3c_{n,1}, phi_n(c_{n+1,2}) = 2c_{n,1} + 2c_{n,2} + c_{n,1}.
CoverSequence build_transitive_sequence(std::size_t levels);
CoverSequence build_sequence(TowerVariant variant, std::size_t levels);

/// Cycle lengths (|c_{n,1}|, |c_{n,2}|) for n = 0..levels from the length
/// recursion alone (no graphs built).
std::vector<std::vector<std::size_t>> cycle_length_recursion(TowerVariant variant,
                                                             std::size_t levels);

struct Certificate {
  bool pass = false;
  std::string witness;  // human-readable, empty on pass unless informative
};

/// Every cycle of level n+1 maps onto all of V_n.
Certificate check_minimality_certificate(const CoverSequence& seq, std::size_t n);
/// Some cycle of level n+1 maps onto all of V_n.
Certificate check_transitivity_certificate(const CoverSequence& seq, std::size_t n);
/// Return lengths to the base at level n contain two consecutive integers.
Certificate check_weak_mixing_certificate(const CoverSequence& seq, std::size_t n);

/// Audit of the structural requirements on every cover in the tower.
struct CoverAudit {
  bool homomorphisms = true;
  bool edge_surjective = true;
  bool bidirectional = true;
  bool base_to_base = true;
};
CoverAudit audit_covers(const CoverSequence& seq);

/// Restriction to the first cycle at every level; requires each rule for
/// c_{n+1,1} to use only c_{n,1}.
CoverSequence invariant_subsystem(const CoverSequence& seq);

/// (w_0, ..., w_d) with phi_i(w_{i+1}) = w_i.
using VertexThread = std::vector<std::size_t>;

bool is_valid_thread(const CoverSequence& seq, const VertexThread& t);
VertexThread thread_from_top(const CoverSequence& seq, std::size_t depth, std::size_t top_vertex);
/// All threads u with (t_i, u_i) an edge at every level, sorted.
std::vector<VertexThread> successor_threads(const CoverSequence& seq, const VertexThread& t);

struct PeriodCertificate {
  std::size_t min_closed_path = 0;
  bool pass = false;  // min_closed_path > 1
};
PeriodCertificate periodic_point_free_certificate(const CoverSequence& seq, std::size_t n);

/// max_v |phi_n^{-1}(v)| and an argmax.
std::pair<std::size_t, std::size_t> max_preimage_count(const CoverSequence& seq, std::size_t n);

/// Vertex set of an edge path.
std::vector<bool> visited_vertices(std::size_t vertex_count, const std::vector<std::size_t>& path);

}  // namespace cantor
