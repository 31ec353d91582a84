#pragma once
// Odometers (adding machines) as finite truncations of the inverse limit
// of Z_{s_1} <- Z_{s_2} <- ... with the +1 map.

#include <cstdint>
#include <string>
#include <vector>

namespace cantor {

class OdometerSpec {
 public:
  enum class Rule { Explicit, Geometric, Factorial };

  /// Explicit list s_1, s_2, ...; terms past the end repeat the last ratio.
  static OdometerSpec explicit_list(std::vector<std::uint64_t> s);
  /// s_n = base * ratio^(n-1).
  static OdometerSpec geometric(std::uint64_t base, std::uint64_t ratio, std::size_t depth);
  /// s_n = (n+1)!.
  static OdometerSpec factorial(std::size_t depth);

  Rule rule() const { return rule_; }
  std::size_t max_depth() const { return max_depth_; }
  const std::vector<std::uint64_t>& listed() const { return listed_; }
  std::uint64_t base() const { return base_; }
  std::uint64_t ratio() const { return ratio_; }

  /// s_n for n >= 0, with s_0 = 1. Throws on 64-bit overflow.
  std::uint64_t term(std::size_t n) const;
  /// k_n = s_n / s_{n-1} for n >= 1.
  std::uint64_t k(std::size_t n) const { return term(n) / term(n - 1); }

  /// Requirements of the real-line embedding: strictly increasing, s_1 > 1.
  void require_embeddable(std::size_t through_depth) const;

  friend bool operator==(const OdometerSpec&, const OdometerSpec&) = default;

 private:
  OdometerSpec() = default;
  void validate_divisibility() const;

  Rule rule_ = Rule::Explicit;
  std::vector<std::uint64_t> listed_;
  std::uint64_t base_ = 0;
  std::uint64_t ratio_ = 0;
  std::size_t max_depth_ = 0;
};

/// Compatible residue chain (x_1, ..., x_d), x_i in Z_{s_i}, x_i = x_{i+1} mod s_i.
struct ResiduePoint {
  std::vector<std::uint64_t> digits;

  std::size_t depth() const { return digits.size(); }
  std::uint64_t top() const { return digits.back(); }
  friend bool operator==(const ResiduePoint&, const ResiduePoint&) = default;
};

/// The depth-d point whose top residue is r (all lower digits forced).
ResiduePoint point_from_top(const OdometerSpec& spec, std::size_t depth, std::uint64_t r);

/// Checks the compatibility relation and digit ranges.
bool is_valid(const OdometerSpec& spec, const ResiduePoint& p);

ResiduePoint successor(const OdometerSpec& spec, const ResiduePoint& p);
ResiduePoint predecessor(const OdometerSpec& spec, const ResiduePoint& p);
/// T^t for any signed t.
ResiduePoint advance(const OdometerSpec& spec, const ResiduePoint& p, std::int64_t t);
ResiduePoint project(const ResiduePoint& p, std::size_t m);

/// Smallest t > 0 with project(T^t p, n) == project(p, n), by iteration.
std::uint64_t first_return_time(const OdometerSpec& spec, const ResiduePoint& p, std::size_t n);

/// Smallest t > 0 with project(T^{-t} p, n) == project(p, n), by iteration.
std::uint64_t first_backward_return_time(const OdometerSpec& spec, const ResiduePoint& p,
                                         std::size_t n);

/// All s_d points of depth d, ordered by top residue.
std::vector<ResiduePoint> all_points(const OdometerSpec& spec, std::size_t depth);

}  // namespace cantor
