#pragma once
// Finite dynamical systems with exact rational metrics, and the systems
// derived from embedded odometers: cylinder-midpoint truncations, products,
// the attractor-repellor extension and the fixed-point system with a
// deformed metric.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cantor/exact.hpp"
#include "cantor/interval_embed.hpp"

namespace cantor {

class FinitePointSystem {
 public:
  FinitePointSystem() = default;
  /// Explicit distance matrix.
  static FinitePointSystem from_matrix(std::vector<std::vector<Scalar>> dist,
                                       std::vector<std::size_t> map);
  /// Points in R^k with the l1 metric.
  static FinitePointSystem from_coordinates(std::vector<std::vector<Scalar>> coords,
                                            std::vector<std::size_t> map);

  std::size_t size() const { return map_.size(); }
  const Scalar& dist(std::size_t x, std::size_t y) const { return dist_[x][y]; }
  std::size_t image(std::size_t x) const { return map_[x]; }
  const std::vector<std::size_t>& map() const { return map_; }
  bool embedded() const { return !coords_.empty() || map_.empty(); }
  const std::vector<std::vector<Scalar>>& coordinates() const { return coords_; }
  const std::vector<std::vector<Scalar>>& matrix() const { return dist_; }

  const std::optional<std::vector<Scalar>>& eps() const { return eps_; }
  void set_eps(std::vector<Scalar> eps);

  const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names);
  std::string name(std::size_t x) const;

  /// (|first factor|, |second factor|) for product systems.
  const std::optional<std::pair<std::size_t, std::size_t>>& product_shape() const { return shape_; }
  void set_product_shape(std::size_t first, std::size_t second);

  friend bool operator==(const FinitePointSystem&, const FinitePointSystem&) = default;

 private:
  void audit() const;

  std::vector<std::vector<Scalar>> dist_;
  std::vector<std::vector<Scalar>> coords_;
  std::vector<std::size_t> map_;
  std::optional<std::vector<Scalar>> eps_;
  std::vector<std::string> names_;
  std::optional<std::pair<std::size_t, std::size_t>> shape_;
};

/// A triple (i, j, k) with d(i,k) > d(i,j) + d(j,k), by exhaustive search.
std::optional<std::array<std::size_t, 3>> find_triangle_violation(const FinitePointSystem& sys);

/// Largest eps_x for which the LRS condition at x holds: the distance to
/// the nearest y whose image pair is not strictly closer (nullopt if none).
std::vector<std::optional<Scalar>> max_feasible_eps(const FinitePointSystem& sys);

struct LrsPair {
  std::size_t x = 0, y = 0;
  Scalar distance;        // d(x, y)
  Scalar image_distance;  // d(f x, f y)
};

struct LrsResult {
  bool pass = true;
  std::optional<LrsPair> witness;  // first failing pair in index order
  std::size_t pairs_checked = 0;
  std::optional<Scalar> min_margin;  // min of d(x,y) - d(fx,fy) over checked pairs
};

/// Every y != x with d(x,y) < eps_x must satisfy d(fx,fy) < d(x,y). Uses the
/// stored eps, or the maximal feasible one when none is stored.
LrsResult check_lrs(const FinitePointSystem& sys, std::size_t jobs = 1);
/// Strict contraction of every pair.
bool check_shrinking(const FinitePointSystem& sys);

std::vector<std::size_t> fixed_points(const FinitePointSystem& sys);
/// Points of f^{|X|}(X), the eventual image.
std::vector<std::size_t> eventual_image(const FinitePointSystem& sys);
/// Smallest n >= 1 with f^{-n}({x}) empty, or nullopt if preimages never die out.
std::optional<std::size_t> empty_preimage_depth(const FinitePointSystem& sys, std::size_t x);
/// Cycles of the map, each listed from its smallest point, sorted.
std::vector<std::vector<std::size_t>> cycles(const FinitePointSystem& sys);

struct OracleReport {
  std::size_t trials = 0;
  std::size_t shrinking = 0;
  std::size_t surjective_shrinking = 0;
  std::size_t counterexamples = 0;
  std::vector<std::string> witnesses;
  /// Histogram of empty_preimage_depth over non-fixed points of shrinking systems.
  std::map<std::size_t, std::size_t> preimage_depths;
};

/// Random finite systems of 1..max_size points; checks that surjective
/// shrinking systems are singletons, that shrinking systems have a single
/// fixed point which is the eventual image, and that preimages of
/// non-fixed points die out.
OracleReport shrinking_propositions_oracle(std::size_t trials, std::size_t max_size,
                                           std::uint64_t seed, std::size_t jobs = 1);

/// Maximum size of a set whose orbits pairwise move more than eps apart
/// at some step j < n.
std::size_t separated_count(const FinitePointSystem& sys, std::size_t n, const Scalar& eps);

struct EntropyRow {
  Scalar eps;
  std::size_t n = 0;
  std::size_t count = 0;
  double estimate = 0;  // log(count) / n
};
std::vector<EntropyRow> entropy_estimate(const FinitePointSystem& sys,
                                         const std::vector<Scalar>& eps_list,
                                         const std::vector<std::size_t>& n_list);

/// Sum metric, componentwise map, eps = min of factor eps when both are set.
/// Point (i, j) has index i * |second| + j.
FinitePointSystem product_system(const FinitePointSystem& first, const FinitePointSystem& second);

/// (y_n - x_n) mod s_n; constant along orbits of the product map.
std::uint64_t minimal_set_label(const OdometerSpec& spec, const ResiduePoint& x,
                                const ResiduePoint& y, std::size_t n);
/// Same, for a point of the product of two midpoint systems of depth >= n.
std::uint64_t minimal_set_label(const FinitePointSystem& product, const OdometerSpec& spec,
                                std::size_t point, std::size_t n);

/// Depth at which eps_x is cut for the odometer point with this top label:
/// one past its deepest exceptional level below depth, or 1.
std::size_t lrs_cylinder_depth(const EmbeddingScheme& scheme, std::size_t depth, long label);

/// Midpoints of the depth-m D cells with the +1 map and eps_x equal to the
/// distance from x to the nearest midpoint outside x's lrs_cylinder_depth cylinder.
FinitePointSystem midpoint_system(const EmbeddingScheme& scheme, std::size_t depth);

/// The 2^L words of length L placed at ternary Cantor-set midpoints with
/// the left shift (a zero enters on the right).
FinitePointSystem full_shift_system(std::size_t word_length);

// ---------------------------------------------------------------------------
// Attractor-repellor extension

struct ExtensionOptions {
  std::size_t levels = 3;    // N
  long tail = 16;            // L
  std::size_t refine = 5;    // m
  unsigned tail_base = 2;    // heights 1 - base^{-(l + k_1)} on the forward tail
  bool normalize = false;    // map the level-1 D hull affinely onto [0, 1]
};

struct ZPoint {
  enum class Kind { Attractor, Repellor, Isolated };
  Kind kind = Kind::Isolated;
  long label = 0;  // depth-m residue of the X coordinate
  long j = 0;      // index of y_j for isolated points
  Scalar x;        // first coordinate
  Scalar height;   // second coordinate in [-1, 1]
};

struct ExtensionSystem {
  EmbeddingScheme base;
  ResiduePoint anchor;  // depth m
  ExtensionOptions options;
  std::size_t anchor_depth = 1;  // U_n is the anchor's cylinder at depth anchor_depth + n - 1
  Scalar offset;                 // x = (midpoint - offset) * scale
  Scalar scale = 1;
  std::vector<std::uint64_t> k;  // k_1 .. k_N
  std::vector<Scalar> slack;     // certified half-slack for n = 1 .. N+1
  std::vector<Scalar> a;         // a_1 .. a_{N+1}
  std::map<long, Scalar> height;  // pi_2(y_j) for j in [-k_N, L]
  std::vector<ZPoint> points;
  FinitePointSystem system;

  std::size_t isolated_index(long j) const;
  std::size_t layer_index(ZPoint::Kind kind, long label) const;
};

/// Half of a certified lower bound on min over U_n \ U_{n+1} of
/// d(z, y) - d(Tz, Ty), from depth-m D cells. Throws if m is too shallow
/// or the bound is not positive.
Scalar certify_slack(const EmbeddingScheme& scheme, const ResiduePoint& z, std::size_t n,
                     std::size_t m);

/// a_1 .. a_count: certify_slack capped so that a_1 <= 1/4 and a_{n+1} <= a_n / 4.
std::vector<Scalar> contraction_slack(const EmbeddingScheme& scheme, const ResiduePoint& z,
                                      std::size_t count, std::size_t m, const Scalar& scale = 1);

ExtensionSystem build_attractor_repellor(const EmbeddingScheme& scheme, const ResiduePoint& z,
                                         const ExtensionOptions& options);

struct CheckItem {
  std::string name;
  bool pass = true;
  std::optional<Scalar> margin;
  std::vector<std::string> witnesses;
};

struct CheckReport {
  std::string check;
  std::vector<CheckItem> items;
  bool pass() const;
  const CheckItem& item(const std::string& name) const;
};

/// Isolation of the y_j, LRS within the per-point eps (with the critical
/// pairs ((z,-1), y_{-k_n}) checked regardless of eps), and monotone
/// approach of the backward orbit to the repellor.
CheckReport verify_extension_lrs(const ExtensionSystem& ext, std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Fixed-point system

struct WPoint {
  bool collapsed = false;
  std::size_t z = 0;   // index into the extension points
  long label2 = 0;     // depth-m2 residue in X2
  Scalar x, y, w;      // coordinates before the deformation
};

struct DeformedTripleSystem {
  ExtensionSystem ext;  // normalised, heights shifted into [-2, 0] through h - 1
  EmbeddingScheme second;
  std::size_t second_depth = 0;
  Scalar second_offset, second_scale = 1;
  std::vector<WPoint> points;
  std::size_t collapsed = 0;
  FinitePointSystem system;
  /// Periods at or above this come from truncating the odometers.
  std::uint64_t artifact_period = 0;
};

/// The deformation x -> (x lambda(y), y, w lambda(y)) with lambda = |y| on
/// [-1, 0] and 1 on [-2, -1]; the l1 distance of images is the metric.
std::vector<Scalar> deform(const Scalar& x, const Scalar& y, const Scalar& w);

/// Builds W from an extension of X1 (built here from the given options,
/// normalised) and the depth-m2 midpoints of X2. Throws if some tail height
/// y in [-1, 0) fails |y| > |pi_2 F(y)|.
DeformedTripleSystem build_fixed_point_system(const EmbeddingScheme& first, const ResiduePoint& z,
                                              ExtensionOptions options,
                                              const EmbeddingScheme& second,
                                              std::size_t second_depth);

/// Points on cycles shorter than artifact_period.
std::vector<std::size_t> periodic_points(const DeformedTripleSystem& sys);

/// LRS within the per-point eps, the strict inequality against the
/// collapsed point, |y| > 3 |pi_2 F(y)| on the tail in [-1, 0), and the
/// agreement of the two metrics on the seam y = -1.
CheckReport verify_deformed_lrs(const DeformedTripleSystem& sys, std::size_t jobs = 1);

}  // namespace cantor
