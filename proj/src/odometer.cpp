#include "cantor/odometer.hpp"

#include <limits>

#include "cantor/exact.hpp"

namespace cantor {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    throw PreconditionError("odometer term overflows 64 bits");
  return a * b;
}

}  // namespace

OdometerSpec OdometerSpec::explicit_list(std::vector<std::uint64_t> s) {
  if (s.empty()) throw PreconditionError("odometer spec needs at least one term");
  OdometerSpec spec;
  spec.rule_ = Rule::Explicit;
  spec.listed_ = std::move(s);
  spec.max_depth_ = spec.listed_.size();
  spec.validate_divisibility();
  return spec;
}

OdometerSpec OdometerSpec::geometric(std::uint64_t base, std::uint64_t ratio, std::size_t depth) {
  if (base == 0 || ratio == 0 || depth == 0)
    throw PreconditionError("geometric odometer needs positive base, ratio and depth");
  OdometerSpec spec;
  spec.rule_ = Rule::Geometric;
  spec.base_ = base;
  spec.ratio_ = ratio;
  spec.max_depth_ = depth;
  spec.validate_divisibility();
  return spec;
}

OdometerSpec OdometerSpec::factorial(std::size_t depth) {
  if (depth == 0) throw PreconditionError("factorial odometer needs positive depth");
  OdometerSpec spec;
  spec.rule_ = Rule::Factorial;
  spec.max_depth_ = depth;
  spec.validate_divisibility();
  return spec;
}

std::uint64_t OdometerSpec::term(std::size_t n) const {
  if (n == 0) return 1;
  switch (rule_) {
    case Rule::Explicit: {
      if (n <= listed_.size()) return listed_[n - 1];
      if (listed_.size() < 2)
        throw PreconditionError("explicit odometer list too short to extend past s_" +
                                std::to_string(listed_.size()));
      std::uint64_t r = listed_.back() / listed_[listed_.size() - 2];
      std::uint64_t s = listed_.back();
      for (std::size_t i = listed_.size(); i < n; ++i) s = checked_mul(s, r);
      return s;
    }
    case Rule::Geometric: {
      std::uint64_t s = base_;
      for (std::size_t i = 1; i < n; ++i) s = checked_mul(s, ratio_);
      return s;
    }
    case Rule::Factorial: {
      std::uint64_t s = 1;
      for (std::uint64_t i = 2; i <= n + 1; ++i) s = checked_mul(s, i);
      return s;
    }
  }
  return 0;
}

void OdometerSpec::validate_divisibility() const {
  for (std::size_t n = 1; n <= max_depth_; ++n) {
    std::uint64_t prev = term(n - 1), cur = term(n);
    if (cur == 0 || cur % prev != 0)
      throw PreconditionError("s_" + std::to_string(n - 1) + " = " + std::to_string(prev) +
                              " does not divide s_" + std::to_string(n) + " = " +
                              std::to_string(cur));
  }
}

void OdometerSpec::require_embeddable(std::size_t through_depth) const {
  if (term(1) <= 1) throw PreconditionError("embedding needs s_1 > 1");
  for (std::size_t n = 1; n <= through_depth; ++n) {
    std::uint64_t prev = term(n), next = term(n + 1);
    if (next <= prev)
      throw PreconditionError("embedding needs a strictly increasing sequence (s_" +
                              std::to_string(n + 1) + " <= s_" + std::to_string(n) + ")");
    if (next % prev != 0)
      throw PreconditionError("s_" + std::to_string(n) + " does not divide s_" +
                              std::to_string(n + 1));
  }
}

ResiduePoint point_from_top(const OdometerSpec& spec, std::size_t depth, std::uint64_t r) {
  if (depth == 0) throw PreconditionError("point depth must be positive");
  if (r >= spec.term(depth)) throw PreconditionError("residue out of range");
  ResiduePoint p;
  p.digits.resize(depth);
  for (std::size_t i = 1; i <= depth; ++i) p.digits[i - 1] = r % spec.term(i);
  return p;
}

bool is_valid(const OdometerSpec& spec, const ResiduePoint& p) {
  for (std::size_t i = 1; i <= p.depth(); ++i) {
    if (p.digits[i - 1] >= spec.term(i)) return false;
    if (i < p.depth() && p.digits[i] % spec.term(i) != p.digits[i - 1]) return false;
  }
  return true;
}

ResiduePoint successor(const OdometerSpec& spec, const ResiduePoint& p) {
  ResiduePoint q = p;
  for (std::size_t i = 1; i <= q.depth(); ++i) {
    auto& x = q.digits[i - 1];
    x = (x + 1 == spec.term(i)) ? 0 : x + 1;
  }
  return q;
}

ResiduePoint predecessor(const OdometerSpec& spec, const ResiduePoint& p) {
  ResiduePoint q = p;
  for (std::size_t i = 1; i <= q.depth(); ++i) {
    auto& x = q.digits[i - 1];
    x = (x == 0) ? spec.term(i) - 1 : x - 1;
  }
  return q;
}

ResiduePoint advance(const OdometerSpec& spec, const ResiduePoint& p, std::int64_t t) {
  if (p.depth() == 0) return p;
  // Everything is determined by the top residue.
  auto s = static_cast<std::int64_t>(spec.term(p.depth()));
  std::int64_t r = (static_cast<std::int64_t>(p.top()) + t % s + s) % s;
  return point_from_top(spec, p.depth(), static_cast<std::uint64_t>(r));
}

ResiduePoint project(const ResiduePoint& p, std::size_t m) {
  if (m > p.depth()) throw PreconditionError("project: depth exceeds point depth");
  return ResiduePoint{{p.digits.begin(), p.digits.begin() + static_cast<std::ptrdiff_t>(m)}};
}

std::uint64_t first_return_time(const OdometerSpec& spec, const ResiduePoint& p, std::size_t n) {
  ResiduePoint target = project(p, n);
  ResiduePoint q = successor(spec, p);
  std::uint64_t t = 1;
  while (!(project(q, n) == target)) {
    q = successor(spec, q);
    ++t;
  }
  return t;
}

std::uint64_t first_backward_return_time(const OdometerSpec& spec, const ResiduePoint& p,
                                         std::size_t n) {
  ResiduePoint target = project(p, n);
  ResiduePoint q = predecessor(spec, p);
  std::uint64_t t = 1;
  while (!(project(q, n) == target)) {
    q = predecessor(spec, q);
    ++t;
  }
  return t;
}

std::vector<ResiduePoint> all_points(const OdometerSpec& spec, std::size_t depth) {
  std::vector<ResiduePoint> pts;
  std::uint64_t s = spec.term(depth);
  pts.reserve(s);
  for (std::uint64_t r = 0; r < s; ++r) pts.push_back(point_from_top(spec, depth, r));
  return pts;
}

}  // namespace cantor
