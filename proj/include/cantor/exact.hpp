#pragma once
// Exact rational scalars and closed intervals.
//
// Every coordinate, length and distance in the library is a reduced GMP
// rational. Nothing on a certified path touches floating point; the only
// lossy conversion is to_approx(), used by export and report code.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cantor {

using Scalar = mpq_class;
using Integer = mpz_class;

/// Raised when an operation's precondition is violated by its arguments.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "p", "p/q" or "-p/q" into a canonical rational.
Scalar parse_scalar(const std::string& text);

/// Canonical "p/q" text ("p" when q == 1).
std::string to_string(const Scalar& x);

/// Approximate double; labelled approximate wherever it is printed.
double to_approx(const Scalar& x);

/// natural log of a positive rational, approximate (entropy tables only).
double log_approx(const Scalar& x);

/// Scientific notation with 6 significant digits, valid for any exponent
/// (values far outside double range included).
std::string approx_string(const Scalar& x);

/// scale * 2^e, exact for any integer e.
Scalar pow2(std::int64_t e, const Scalar& scale = Scalar(1));

Scalar abs(const Scalar& x);

/// Number of bits in the larger of |numerator| and denominator.
std::size_t bit_size(const Scalar& x);

struct Interval {
  Scalar lo;
  Scalar hi;

  Scalar diam() const { return hi - lo; }
  Scalar mid() const { return (lo + hi) / 2; }
  bool contains(const Scalar& x) const { return lo <= x && x <= hi; }
  /// this ⊆ outer
  bool inside(const Interval& outer) const { return outer.lo <= lo && hi <= outer.hi; }
  /// this ⊆ interior of outer
  bool strictly_inside(const Interval& outer) const { return outer.lo < lo && hi < outer.hi; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

/// Checked constructor: requires lo <= hi.
Interval make_interval(Scalar lo, Scalar hi);

/// Subinterval of length len centred in I (equal margins on both sides).
Interval middle_subinterval(const Interval& I, const Scalar& len);

/// k closed pieces of equal length tiling I from left to right.
std::vector<Interval> split_equal(const Interval& I, std::size_t k);

/// min |p - q| over p in I, q in J. Overlapping interiors are an error;
/// touching intervals have gap 0.
Scalar gap(const Interval& I, const Interval& J);

/// max |p - q| over p in I, q in J (diameter of the hull when they overlap).
Scalar supdist(const Interval& I, const Interval& J);

/// Interiors disjoint (closed intervals may share an endpoint).
bool interiors_disjoint(const Interval& I, const Interval& J);

/// Closed intervals disjoint (strictly separated).
bool disjoint(const Interval& I, const Interval& J);

}  // namespace cantor
