#include "cantor/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cantor {

Scalar parse_scalar(const std::string& text) {
  if (text.empty()) throw PreconditionError("empty rational literal");
  Scalar x;
  if (x.set_str(text, 10) != 0) throw PreconditionError("malformed rational literal: " + text);
  if (x.get_den() == 0) throw PreconditionError("zero denominator: " + text);
  x.canonicalize();
  return x;
}

std::string to_string(const Scalar& x) { return x.get_str(10); }

double to_approx(const Scalar& x) { return x.get_d(); }

double log_approx(const Scalar& x) {
  if (sgn(x) <= 0) throw PreconditionError("log of non-positive rational");
  // mpz_get_d_2exp keeps the exponent out of double range issues.
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, x.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, x.get_den_mpz_t());
  return std::log(mn / md) + static_cast<double>(en - ed) * std::log(2.0);
}

std::string approx_string(const Scalar& x) {
  if (sgn(x) == 0) return "0";
  double l10 = log_approx(abs(x)) / std::log(10.0);
  double e = std::floor(l10);
  double mant = std::pow(10.0, l10 - e);
  if (mant >= 9.9999995) {
    mant /= 10;
    e += 1;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.5fe%+.0f", sgn(x) < 0 ? "-" : "", mant, e);
  return buf;
}

Scalar pow2(std::int64_t e, const Scalar& scale) {
  Scalar r;
  if (e >= 0)
    mpq_mul_2exp(r.get_mpq_t(), scale.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpq_div_2exp(r.get_mpq_t(), scale.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  return r;
}

Scalar abs(const Scalar& x) { return sgn(x) < 0 ? Scalar(-x) : x; }

std::size_t bit_size(const Scalar& x) {
  return std::max(mpz_sizeinbase(x.get_num_mpz_t(), 2), mpz_sizeinbase(x.get_den_mpz_t(), 2));
}

Interval make_interval(Scalar lo, Scalar hi) {
  if (hi < lo) throw PreconditionError("interval with hi < lo");
  return Interval{std::move(lo), std::move(hi)};
}

Interval middle_subinterval(const Interval& I, const Scalar& len) {
  if (sgn(len) <= 0 || len > I.diam())
    throw PreconditionError("middle_subinterval: length must lie in (0, diam I]");
  Scalar margin = (I.diam() - len) / 2;
  Scalar lo = I.lo + margin;
  return Interval{lo, lo + len};
}

std::vector<Interval> split_equal(const Interval& I, std::size_t k) {
  if (k == 0) throw PreconditionError("split_equal: k must be positive");
  std::vector<Interval> pieces;
  pieces.reserve(k);
  Scalar step = I.diam() / Scalar(static_cast<unsigned long>(k));
  for (std::size_t i = 0; i < k; ++i) {
    // Last endpoint pinned to I.hi so the tiling is exact by construction.
    Scalar lo = I.lo + step * Scalar(static_cast<unsigned long>(i));
    Scalar hi = (i + 1 == k) ? I.hi : Scalar(lo + step);
    pieces.push_back(Interval{std::move(lo), std::move(hi)});
  }
  return pieces;
}

Scalar gap(const Interval& I, const Interval& J) {
  if (I.hi <= J.lo) return J.lo - I.hi;
  if (J.hi <= I.lo) return I.lo - J.hi;
  throw PreconditionError("gap: intervals overlap");
}

Scalar supdist(const Interval& I, const Interval& J) {
  return std::max(Scalar(J.hi - I.lo), Scalar(I.hi - J.lo));
}

bool interiors_disjoint(const Interval& I, const Interval& J) {
  return I.hi <= J.lo || J.hi <= I.lo;
}

bool disjoint(const Interval& I, const Interval& J) { return I.hi < J.lo || J.hi < I.lo; }

}  // namespace cantor
