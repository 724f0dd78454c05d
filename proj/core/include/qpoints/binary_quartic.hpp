#pragma once

#include <string>

#include <gmpxx.h>

#include "qpoints/transform.hpp"

namespace qp {

// f(X,Y) = a X^4 + b X^3 Y + c X^2 Y^2 + d X Y^3 + e Y^4 with exact rational
// coefficients.
struct BinaryQuartic {
  mpq_class a, b, c, d, e;

  friend bool operator==(const BinaryQuartic&, const BinaryQuartic&) = default;
  friend bool operator<(const BinaryQuartic& x, const BinaryQuartic& y);

  std::string str() const;  // "a,b,c,d,e", rationals as p/q
  static BinaryQuartic parse(const std::string& text);
};

struct QuarticInvariants {
  mpq_class I, J, disc;  // 27*disc = 4*I^3 - J^2 identically
};

QuarticInvariants invariants(const BinaryQuartic& f);

// all coefficients integers
bool is_integral(const BinaryQuartic& f);
// integral with 4 | b, 6 | c, 4 | d
bool is_integer_matrix(const BinaryQuartic& f);
// integral, a = 1, b = 0
bool is_flattened(const BinaryQuartic& f);

// (I/12, J/432); requires both divisions exact over the integers
std::pair<mpz_class, mpz_class> derived_invariants(const BinaryQuartic& f);

mpq_class eval(const BinaryQuartic& f, const mpq_class& x, const mpq_class& y);

// f((X,Y)g) for |det g| = 1
BinaryQuartic act_unimodular(const ProjectiveTransform& g, const BinaryQuartic& f);
// det(g)^-2 * f((X,Y)g); well defined on the transform class
BinaryQuartic act_twisted(const ProjectiveTransform& g, const BinaryQuartic& f);

struct CompletedQuartic {
  BinaryQuartic form;  // monic, zero cubic coefficient
  mpq_class shift;     // the applied substitution X -> X + shift*Y
};

// kills the X^3 Y term of a monic integral quartic; the shift -b/4 must be
// integral (4 | b)
CompletedQuartic complete_quartic(const BinaryQuartic& f);

// c,d,e of a flattened form read against X^4 + 6c X^2Y^2 + scale*d XY^3 + e Y^4
struct FlatCDE {
  mpz_class c, d, e;
};
FlatCDE quartic_cde(const BinaryQuartic& f, int d_scale /* 4 or 8 */);

}  // namespace qp
