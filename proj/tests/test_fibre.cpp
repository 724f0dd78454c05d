#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "qpoints/error.hpp"
#include "qpoints/fibre.hpp"
#include "qpoints/mordell.hpp"

using namespace qp;

TEST_CASE("square divisors of reference discriminants") {
  std::vector<mpz_class> expect{1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 384};
  CHECK(square_divisors(mpz_class(-442368)) == expect);
  CHECK(square_divisors(mpz_class(1)) == std::vector<mpz_class>{1});
  CHECK(square_divisors(mpz_class(37)) == std::vector<mpz_class>{1});
  CHECK(square_divisors(mpz_class(-37)) == std::vector<mpz_class>{1});
  CHECK(square_divisors(mpz_class(144)) == std::vector<mpz_class>{1, 2, 3, 4, 6, 12});
  CHECK_THROWS_AS(square_divisors(mpz_class(0)), error);
}

TEST_CASE("profile collects the square part") {
  SquareDivisorProfile p = make_profile(-442368);
  CHECK(p.disc == -442368);
  REQUIRE(p.factors.size() == 2);
  CHECK(p.factors[0].first == 2);
  CHECK(p.factors[0].second == 14);
  CHECK(p.factors[1].first == 3);
  CHECK(p.factors[1].second == 3);
  CHECK(p.s_primes.empty());
  CHECK(p.big_square_free == 442368);
  SquareDivisorProfile q = make_profile(37);
  CHECK(q.factors.empty());
  CHECK(q.big_square_free == 1);
  // 600 = 2^3 * 3 * 5^2 keeps only the primes with squared contribution
  SquareDivisorProfile r = make_profile(600);
  REQUIRE(r.factors.size() == 2);
  CHECK(r.factors[0] == std::pair<mpz_class, unsigned>{2, 3});
  CHECK(r.factors[1] == std::pair<mpz_class, unsigned>{5, 2});
  CHECK(r.big_square_free == 200);
}

TEST_CASE("delta splits against the profile") {
  SquareDivisorProfile p = make_profile(-442368);
  auto [nu, mu] = split_delta(p, 32);
  CHECK(nu * mu == 32);
  CHECK(nu == gcd(mpz_class(32), p.big_square_free));
  auto [nu1, mu1] = split_delta(p, 1);
  CHECK(nu1 == 1);
  CHECK(mu1 == 1);
  CHECK_THROWS_AS(split_delta(p, 5), error);  // 25 does not divide the discriminant
}

TEST_CASE("counting bound reference values") {
  CHECK(fibre_bound(make_profile(37)) == 1);
  CHECK(fibre_bound(make_profile(16)) == 9);
  CHECK(fibre_bound(make_profile(9)) == 5);
  CHECK(fibre_bound(make_profile(9), true) == 4);
  CHECK(fibre_bound(make_profile(-1728)) == 65);
  CHECK(fibre_bound(make_profile(-1728), true) == 52);
  // a huge exponent saturates at the per-prime cap
  SquareDivisorProfile big;
  big.disc = 2;
  big.factors.push_back({2, 10000002u});
  CHECK(fibre_bound(big) == kFibreCap);
}

TEST_CASE("coprime representations inside a box") {
  BinaryQuartic f{1, 4, 6, 4, 1};  // (X + Y)^4
  auto reps = coprime_representations(f, 16, 3);
  std::vector<std::pair<i64, i64>> expect{{-3, 1}, {-1, -1}, {-1, 3}, {1, -3}, {1, 1}, {3, -1}};
  CHECK(reps == expect);
  BinaryQuartic m{1, 0, -18, 40, -27};
  auto ones = coprime_representations(m, 1, 5);
  for (auto [a, b] : ones) {
    CHECK(eval(m, a, b) == 1);
    CHECK(gcd(mpz_class(a), mpz_class(b)) == 1);
  }
  CHECK(std::find(ones.begin(), ones.end(), std::pair<i64, i64>{1, 0}) != ones.end());
  CHECK(std::find(ones.begin(), ones.end(), std::pair<i64, i64>{-1, 0}) != ones.end());
}

TEST_CASE("flattening transforms of a point form") {
  WeierstrassCurve c(0, -2);
  BinaryQuartic f = point_to_quartic(c, {3, 5});
  auto fibre = flattening_transforms(f, 40);
  REQUIRE(fibre.size() == 2);
  CHECK(fibre[0].a == -1);
  CHECK(fibre[0].b == 0);
  CHECK(fibre[0].det == -1);
  CHECK(fibre[0].image == BinaryQuartic{1, 0, -18, -40, -27});
  CHECK(fibre[1].a == 1);
  CHECK(fibre[1].b == 0);
  CHECK(fibre[1].det == 1);
  CHECK(fibre[1].image == f);
  QuarticInvariants base = invariants(f);
  for (const auto& t : fibre) {
    CHECK(is_flattened(t.image));
    CHECK(t.det_sq == t.det * t.det);
    CHECK(eval(f, t.a, t.b) == t.det_sq);
    CHECK(gcd(mpz_class(t.a), mpz_class(t.b)) == 1);
    QuarticInvariants v = invariants(t.image);
    CHECK(v.I == base.I);
    CHECK(v.J == base.J);
    CHECK(act_twisted(t.gamma, f) == t.image);
  }
  CHECK_THROWS_AS(flattening_transforms(BinaryQuartic{1, 1, 0, 0, 0}, 10), error);
  CHECK_THROWS_AS(flattening_transforms(BinaryQuartic{1, 0, 0, 0, 0}, 10), error);
}

TEST_CASE("labels stay pairwise distinct as the box grows") {
  WeierstrassCurve c(0, 17);
  for (const IntegralPoint& p : std::vector<IntegralPoint>{{-2, 3}, {-1, 4}, {8, 23}}) {
    BinaryQuartic f = point_to_quartic(c, p);
    auto fibre = flattening_transforms(f, 60);
    std::set<std::pair<i64, i64>> labels;
    for (const auto& t : fibre) labels.insert({t.a, t.b});
    CHECK(labels.size() == fibre.size());
  }
}

TEST_CASE("box equivalence separates the classes of a rank two curve") {
  WeierstrassCurve c(0, 17);
  BinaryQuartic f1 = point_to_quartic(c, {-2, 3});
  BinaryQuartic f2 = point_to_quartic(c, {-1, 4});
  BinaryQuartic f3 = point_to_quartic(c, {43, 282});
  BinaryQuartic f4 = point_to_quartic(c, {2, 5});
  CHECK(pgl2_flattened_equivalent(f1, f2, 50) == BoxVerdict::not_found_within_box);
  CHECK(pgl2_flattened_equivalent(f1, f3, 10) == BoxVerdict::equivalent_within_box);
  CHECK(pgl2_flattened_equivalent(f2, f4, 10) == BoxVerdict::equivalent_within_box);
  // opposite points of one rational point always match
  WeierstrassCurve d(0, -2);
  BinaryQuartic g1 = point_to_quartic(d, {3, 5});
  BinaryQuartic g2 = point_to_quartic(d, {3, -5});
  CHECK(pgl2_flattened_equivalent(g1, g2, 50) == BoxVerdict::equivalent_within_box);
  // forms with different invariants are refused outright
  CHECK_THROWS_AS(pgl2_flattened_equivalent(g1, f1, 10), error);
  try {
    pgl2_flattened_equivalent(g1, f1, 10);
  } catch (const error& err) {
    CHECK(err.code() == errc::invariant_mismatch);
  }
}
