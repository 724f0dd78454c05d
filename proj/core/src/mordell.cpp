#include "qpoints/mordell.hpp"

#include "qpoints/error.hpp"
#include "qpoints/numeric.hpp"

namespace qp {

std::pair<mpz_class, mpz_class> curve_invariants(const mpz_class& A, const mpz_class& B) {
  mpz_class disc = -16 * (4 * A * A * A + 27 * B * B);
  if (disc == 0)
    fail(errc::singular_curve, "4A^3 + 27B^2 = 0 for A=" + A.get_str() + " B=" + B.get_str());
  mpz_class ha = 4 * abs(A) * abs(A) * abs(A);
  mpz_class hb = 27 * B * B;
  return {disc, ha > hb ? ha : hb};
}

WeierstrassCurve::WeierstrassCurve(const mpz_class& A_, const mpz_class& B_) : A(A_), B(B_) {
  auto [d, h] = curve_invariants(A, B);
  disc = d;
  height = h;
}

BinaryQuartic point_to_quartic(const WeierstrassCurve& curve, const IntegralPoint& p) {
  if (p.y * p.y != p.x * p.x * p.x + curve.A * p.x + curve.B)
    fail(errc::point_not_on_curve,
         "(" + p.x.get_str() + "," + p.y.get_str() + ") not on the curve");
  BinaryQuartic f;
  f.a = 1;
  f.b = 0;
  f.c = mpq_class(-6 * p.x);
  f.d = mpq_class(8 * p.y);
  f.e = mpq_class(-4 * curve.A - 3 * p.x * p.x);
  return f;
}

std::pair<WeierstrassCurve, IntegralPoint> quartic_to_point(const BinaryQuartic& f) {
  FlatCDE v = quartic_cde(f, 4);
  const mpz_class &c = v.c, &d = v.d, &e = v.e;
  mpz_class i4 = 3 * c * c + e;          // = I'(f)
  mpz_class j4 = c * c * c + d * d - c * e;  // = -J'(f)
  if (!mpz_divisible_ui_p(i4.get_mpz_t(), 4))
    fail(errc::divisibility_failure, "4 does not divide 3c^2 + e = " + i4.get_str());
  if (!mpz_divisible_ui_p(j4.get_mpz_t(), 4))
    fail(errc::divisibility_failure, "4 does not divide c^3 + d^2 - ce = " + j4.get_str());
  mpz_class A = -i4 / 4;
  mpz_class B = j4 / 4;
  // both conditions force d even
  WeierstrassCurve curve(A, B);  // throws SingularCurve when degenerate
  IntegralPoint p{-c, d / 2};
  return {curve, p};
}

WeierstrassCurve jacobian_of(const BinaryQuartic& f) {
  if (!is_integer_matrix(f))
    fail(errc::not_integer_matrix, "jacobian_of needs an integer-matrix form");
  auto [i12, j432] = derived_invariants(f);
  return WeierstrassCurve(-4 * i12, -16 * j432);
}

BinaryQuartic flatten_triple(const BinaryQuartic& f, const mpz_class& p, const mpz_class& q,
                             long euclid_offset) {
  if (!is_integer_matrix(f))
    fail(errc::not_integer_matrix, "flatten_triple needs an integer-matrix form");
  if (eval(f, mpq_class(p), mpq_class(q)) != 1)
    fail(errc::not_a_representation_of_one,
         "f(" + p.get_str() + "," + q.get_str() + ") != 1");
  auto [alpha, beta] = euclid_completion(p, q, euclid_offset);
  // top row (p,q) sends the representation to (1,0), making the image monic
  ProjectiveTransform g(p, q, -beta, alpha);
  BinaryQuartic monic = act_unimodular(g, f);
  return complete_quartic(monic).form;
}

}  // namespace qp
