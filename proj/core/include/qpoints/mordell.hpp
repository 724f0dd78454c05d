#pragma once

#include <gmpxx.h>

#include "qpoints/binary_quartic.hpp"

namespace qp {

// y^2 = x^3 + A x + B, nonsingular
struct WeierstrassCurve {
  WeierstrassCurve(const mpz_class& A, const mpz_class& B);

  mpz_class A, B;
  mpz_class disc;    // -16(4A^3 + 27B^2), nonzero
  mpz_class height;  // max(4|A|^3, 27B^2)

  friend bool operator==(const WeierstrassCurve& x, const WeierstrassCurve& y) {
    return x.A == y.A && x.B == y.B;
  }
};

struct IntegralPoint {
  mpz_class x, y;
  friend bool operator==(const IntegralPoint&, const IntegralPoint&) = default;
  friend bool operator<(const IntegralPoint& p, const IntegralPoint& q) {
    int c = cmp(p.x, q.x);
    if (c != 0) return c < 0;
    return cmp(p.y, q.y) < 0;
  }
};

// curve discriminant and height without constructing the curve; throws on
// disc = 0
std::pair<mpz_class, mpz_class> curve_invariants(const mpz_class& A, const mpz_class& B);

// X^4 - 6x0 X^2Y^2 + 8y0 XY^3 + (-4A - 3x0^2) Y^4; flattened, derived
// invariants (-4A, -4B)
BinaryQuartic point_to_quartic(const WeierstrassCurve& curve, const IntegralPoint& p);

// inverse direction: reads a flattened X^4 + 6c X^2Y^2 + 4d XY^3 + e Y^4 and
// reconstructs the curve and point; both 4-divisibility conditions must hold
std::pair<WeierstrassCurve, IntegralPoint> quartic_to_point(const BinaryQuartic& f);

// curve with A = -4 I', B = -16 J' attached to an integer-matrix form
WeierstrassCurve jacobian_of(const BinaryQuartic& f);

// the unique flattened SL2(Z)-transform of an integer-matrix f with f(p,q)=1;
// euclid_offset picks among unimodular completions, the result is unaffected
BinaryQuartic flatten_triple(const BinaryQuartic& f, const mpz_class& p, const mpz_class& q,
                             long euclid_offset = 0);

}  // namespace qp
