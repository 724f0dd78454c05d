#pragma once

#include <utility>
#include <vector>

#include <gmpxx.h>

#include "qpoints/binary_quartic.hpp"
#include "qpoints/factor.hpp"
#include "qpoints/numeric.hpp"
#include "qpoints/transform.hpp"

namespace qp {

// Primes whose square divides a discriminant, with the bookkeeping the
// counting bound needs. `s_primes` collects primes whose per-prime factor
// would reach the cap; `big_square_free` is the product p^v over the rest.
struct SquareDivisorProfile {
  mpz_class disc;                                   // nonzero
  std::vector<std::pair<mpz_class, unsigned>> factors;  // v_p >= 2 only, p ascending
  std::vector<mpz_class> s_primes;
  mpz_class big_square_free = 1;  // D = prod_{p not in S} p^{v_p}
};

inline constexpr unsigned long kFibreCap = 20000000;  // 2*10^7 per-prime cap

SquareDivisorProfile make_profile(const mpz_class& disc);
SquareDivisorProfile make_profile(const mpz_class& disc, const Factorization& fac);

// delta = nu * mu with nu = gcd(delta, D)
std::pair<mpz_class, mpz_class> split_delta(const SquareDivisorProfile& profile,
                                            const mpz_class& delta);

// all delta >= 1 with delta^2 | disc, ascending
std::vector<mpz_class> square_divisors(const mpz_class& disc);
std::vector<mpz_class> square_divisors(const Factorization& fac);

// all coprime (a,b) with |a|,|b| <= box and f(a,b) = m, lexicographic
std::vector<std::pair<i64, i64>> coprime_representations(const BinaryQuartic& f,
                                                         const mpz_class& m, i64 box);

struct FlatteningTransform {
  ProjectiveTransform gamma;
  i64 a = 0, b = 0;     // det-signed label; f(a,b) = det^2, gcd(a,b) = 1
  mpz_class det;        // determinant of the canonical representative
  mpz_class det_sq;     // f(a,b)
  BinaryQuartic image;  // act_twisted(gamma, f), flattened
};

// every transform class (top row within the box) whose twisted image of f is
// again flattened; labels are pairwise distinct
std::vector<FlatteningTransform> flattening_transforms(const BinaryQuartic& f, i64 box);

enum class BoxVerdict { equivalent_within_box, not_found_within_box };

// searches the transforms of f1 for an image equal to f2; equal invariants
// are a precondition, not a result
BoxVerdict pgl2_flattened_equivalent(const BinaryQuartic& f1, const BinaryQuartic& f2, i64 box);

// prod over profile primes of min(4*floor(v/2)+1, cap); with `refined`,
// v in {2,3} contributes 4. Reference value only, never a hard ceiling on
// found counts.
mpz_class fibre_bound(const SquareDivisorProfile& profile, bool refined = false);

}  // namespace qp
