#pragma once
// Nested-interval embeddings of odometers and graph-cover towers into R.
//
// Each level n carries one cell per label: an outer interval A and, for
// labels that name a point of the system, a centred inner interval D.
// The embedded Cantor set is the intersection over n of the union of the
// D's. All certificates below are exact comparisons of rationals.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cantor/exact.hpp"
#include "cantor/graphcover.hpp"
#include "cantor/odometer.hpp"

namespace cantor {

enum class SchemeKind { Odometer, Graph };

struct GraphSource {
  TowerVariant variant = TowerVariant::WeaklyMixing;
  std::size_t levels = 1;
  friend bool operator==(const GraphSource&, const GraphSource&) = default;
};

using SchemeSource = std::variant<GraphSource, OdometerSpec>;

struct SchemeCell {
  long label = 0;
  Interval A;
  std::optional<Interval> D;
  std::optional<long> parent;
};

struct SchemeLevel {
  std::size_t n = 0;
  Scalar a;
  Scalar b;
  std::vector<SchemeCell> cells;
  /// Labels whose image D is longer than their own D (excluded from the
  /// asymptotic ratio and LRS assertions).
  std::vector<long> exceptional;

  const SchemeCell& cell(long label) const;
  bool has_label(long label) const { return index_.count(label) != 0; }
  void reindex();
  bool is_exceptional(long label) const;

 private:
  std::map<long, std::size_t> index_;
};

class EmbeddingScheme {
 public:
  SchemeKind kind() const { return kind_; }
  const SchemeSource& source() const { return source_; }
  const OdometerSpec& odometer_spec() const;
  const CoverSequence& cover() const;

  /// Shallowest level (1 for odometers, 0 for graph towers).
  std::size_t first_level() const { return first_; }
  std::size_t depth() const { return first_ + levels_.size() - 1; }
  const SchemeLevel& level(std::size_t n) const;
  SchemeLevel& mutable_level(std::size_t n);

  /// Labels reached in one step from label at level n (singleton except
  /// at branch vertices of a graph level).
  std::vector<long> successors(std::size_t n, long label) const;
  /// Labels of level n+1 whose A sits in the D of label at level n.
  const std::vector<long>& children(std::size_t n, long label) const;
  /// More than one successor at level n (the base vertex of a bouquet).
  bool is_branch(std::size_t n, long label) const { return successors(n, label).size() > 1; }
  /// Closed-form bound on the derivative ratio at depth j.
  Scalar closed_form_bound(std::size_t j) const;

  friend EmbeddingScheme build_odometer_scheme(const OdometerSpec& spec, std::size_t depth);
  friend EmbeddingScheme build_graph_scheme(const CoverSequence& seq, std::size_t depth);
  friend EmbeddingScheme assemble_scheme(SchemeKind, SchemeSource, std::vector<SchemeLevel>);

 private:
  void link();

  SchemeKind kind_ = SchemeKind::Odometer;
  SchemeSource source_;
  std::shared_ptr<const CoverSequence> cover_;
  std::size_t first_ = 1;
  std::vector<SchemeLevel> levels_;
  std::vector<std::map<long, std::vector<long>>> children_;
};

EmbeddingScheme build_odometer_scheme(const OdometerSpec& spec, std::size_t depth);
EmbeddingScheme build_graph_scheme(const CoverSequence& seq, std::size_t depth);
/// Rebuilds the scheme described by source (graph sources use their level count).
EmbeddingScheme build_scheme(const SchemeSource& source, std::size_t depth);
/// Re-assembles a scheme from stored levels (deserialization).
EmbeddingScheme assemble_scheme(SchemeKind kind, SchemeSource source,
                                std::vector<SchemeLevel> levels);

/// l_n(i) of the odometer scheme: 2^{-n k_{n+1} ((i - s_{n-1} - 1) mod s_n)} a_n / 3.
Scalar odometer_length(const OdometerSpec& spec, std::size_t n, std::uint64_t i, const Scalar& a_n);

/// psi_n(w) of the graph scheme (level 0 uses a_{-1} = a_0 and |c_{-1,1}| = 1).
Scalar graph_length(const CoverSequence& seq, std::size_t n, std::size_t vertex,
                    const Scalar& a_prev);

/// D interval of the point's label at the given depth.
Interval cylinder(const EmbeddingScheme& scheme, const ResiduePoint& p, std::size_t depth);
Interval cylinder(const EmbeddingScheme& scheme, const VertexThread& t, std::size_t depth);

/// Successor labels at one depth (odometer: +1 mod s_n; graph: via edges).
std::vector<long> induced_map_label(const EmbeddingScheme& scheme, long label, std::size_t depth);

struct AuditItem {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct SchemeAudit {
  std::vector<AuditItem> items;
  bool pass() const;
  const AuditItem& item(const std::string& name) const;
};

/// Disjointness, centring, nesting, diameter decay and the kind-specific
/// length inequalities, level by level.
SchemeAudit audit_scheme(const EmbeddingScheme& scheme);

struct PairRecord {
  long parent = 0;
  long first = 0, second = 0;              // distinct children at depth j+1
  long first_image = 0, second_image = 0;  // successors at depth j+1
  Scalar source_gap;                       // gap(D_first, D_second)
  Scalar image_spread;                     // supdist(A_first_image, A_second_image)
};

struct RatioReport {
  std::size_t depth = 0;
  Scalar max_ratio;  // over non-exceptional parents
  std::optional<PairRecord> argmax;
  Scalar closed_form_bound;
  /// (parent label, its own max ratio) for excluded parents.
  std::vector<std::pair<long, Scalar>> exceptional;
  /// Same maximum with branch parents (more than one successor) left out.
  Scalar max_ratio_off_branch;
  /// (parent label, its own max ratio) for branch parents; they are also
  /// counted in max_ratio.
  std::vector<std::pair<long, Scalar>> branch;
  bool within_bound() const { return max_ratio <= closed_form_bound; }
  bool within_bound_off_branch() const { return max_ratio_off_branch <= closed_form_bound; }
};

RatioReport derivative_ratio_bound(const EmbeddingScheme& scheme, std::size_t j,
                                   std::size_t jobs = 1);

struct LrsPairReport {
  std::size_t depth = 0;
  bool pass = true;
  std::size_t pairs_checked = 0;
  Scalar min_margin;
  std::vector<PairRecord> failures;
  std::vector<long> excluded_parents;
  /// Verdict with pairs under branch parents ignored.
  bool pass_off_branch = true;
  std::vector<long> branch_parents;
  std::vector<PairRecord> pairs;  // every checked pair, in deterministic order
};

/// For each pair of distinct depth-(d+1) labels under a common
/// non-exceptional depth-d parent, certifies that the A-hull spread of
/// their images is strictly below the gap between their D's.
LrsPairReport verify_lrs_pairs(const EmbeddingScheme& scheme, std::size_t d, std::size_t jobs = 1);

/// Lower bound on |f(Tx) - f(Ty)| / |f(x) - f(y)| for x the all-base
/// thread of a graph scheme and y agreeing with x through level j but not
/// j+1: gap of the image D's over the sup-distance of the source D's,
/// maximised over the choice of y's level-(j+1) vertex.
struct BranchWitness {
  std::size_t depth = 0;
  long child = 0;      // y's label at level j+1
  long image = 0;      // T(y)'s label at level j+1
  Scalar lower_bound;  // of the difference quotient
};
BranchWitness all_base_expansion(const EmbeddingScheme& scheme, std::size_t j);

/// Diameter ratio diam D_{z+1}/diam D_z for every odometer label at depth n;
/// returns labels where it differs from 2^{-n k_{n+1}}.
std::vector<long> odometer_ratio_identity_violations(const EmbeddingScheme& scheme, std::size_t n);

}  // namespace cantor
