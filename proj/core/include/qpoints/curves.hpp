#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qpoints/mordell.hpp"

namespace qp {

// all (x, +-y) on the curve with x_lo <= x <= x_hi, sorted by x then y;
// perfect-square tests are exact, no floating point
std::vector<IntegralPoint> search_integral_points(const WeierstrassCurve& curve,
                                                  const mpz_class& x_lo,
                                                  const mpz_class& x_hi);

// true iff no prime p has p^4 | A and p^6 | B; a zero coordinate is divisible
// by every prime power, so the test degenerates to the other one
bool is_minimal(const mpz_class& A, const mpz_class& B);

// approximate filter: p | Delta implies p does not divide A, checked at
// primes p >= 5 only; says nothing about reduction at 2 and 3
bool is_semistable_approx(const mpz_class& A, const mpz_class& B);

enum class MarkedVariant {
  marked_point,        // y^2 + d3 y = x^3 + d2 x^2 + d4 x with marked (0,0)
  marked_two_torsion,  // d3 = 0, so the marked point is 2-torsion
};

// marked-point model with exact discriminant and height
// max(|d2|^6, |d3|^4, |d4|^3)
class MarkedCurve {
 public:
  MarkedCurve(mpz_class d2, mpz_class d3, mpz_class d4, MarkedVariant variant);

  const mpz_class& d2() const { return _d2; }
  const mpz_class& d3() const { return _d3; }
  const mpz_class& d4() const { return _d4; }
  MarkedVariant variant() const { return _variant; }
  const mpz_class& disc() const { return _disc; }
  const mpz_class& height() const { return _height; }

 private:
  mpz_class _d2, _d3, _d4;
  MarkedVariant _variant;
  mpz_class _disc;
  mpz_class _height;
};

// discriminant of y^2 + d3 y = x^3 + d2 x^2 + d4 x
mpz_class marked_disc(const mpz_class& d2, const mpz_class& d3, const mpz_class& d4);

// all integer (x, y) on the marked model with x in range, sorted by x then y;
// tests 4*RHS + d3^2 for a square u^2 with u = d3 (mod 2), roots (+-u - d3)/2
std::vector<IntegralPoint> search_marked_points(const MarkedCurve& curve,
                                                const mpz_class& x_lo,
                                                const mpz_class& x_hi);

struct RankRecord {
  mpz_class A, B;
  unsigned rank = 0;
  std::string provenance;
};

using RankTable = std::map<std::pair<mpz_class, mpz_class>, RankRecord>;

// parses "A,B,rank[,provenance]" records, one per line; '#' comments and blank
// lines are skipped; duplicates and singular (A,B) are rejected with the
// 1-based line number in the message
RankTable load_rank_table(std::istream& source);
RankTable load_rank_table_file(const std::string& path);

// partition of the points where P, Q share a class iff a flattening transform
// within the box carries one quartic to the other; classes only merge, never
// split, as the box grows; input is deduplicated, output sorted
std::vector<std::vector<IntegralPoint>> psi_classes(const WeierstrassCurve& curve,
                                                    const std::vector<IntegralPoint>& points,
                                                    const mpz_class& box);

}  // namespace qp
