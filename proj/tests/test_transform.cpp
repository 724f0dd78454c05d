#include <random>

#include "doctest.h"
#include "qpoints/error.hpp"
#include "qpoints/transform.hpp"

using namespace qp;
using PT = ProjectiveTransform;

TEST_CASE("canonical representative divides by gcd and fixes sign") {
  CHECK(PT(2, 4, 6, 8) == PT(1, 2, 3, 4));
  PT t(-1, 0, 0, 1);
  CHECK(t.a() == 1);
  CHECK(t.b() == 0);
  CHECK(t.c() == 0);
  CHECK(t.d() == -1);
  CHECK(t.det() == -1);
  PT u(0, -3, 3, 0);
  CHECK(u.a() == 0);
  CHECK(u.b() == 1);
  CHECK(u.c() == -1);
  CHECK(u.d() == 0);
}

TEST_CASE("rational entries scale to the coprime integer matrix") {
  CHECK(PT(mpq_class(1, 2), mpq_class(0), mpq_class(0), mpq_class(1, 3)) == PT(3, 0, 0, 2));
  CHECK(PT(mpq_class(-1, 2), mpq_class(0), mpq_class(0), mpq_class(-1, 2)) == PT::identity());
}

TEST_CASE("singular matrices are rejected") {
  CHECK_THROWS_AS(PT(1, 2, 2, 4), error);
  CHECK_THROWS_AS(PT(0, 0, 0, 0), error);
  try {
    PT(1, 2, 2, 4);
  } catch (const error& e) {
    CHECK(e.code() == errc::singular_transform);
  }
}

TEST_CASE("identity and unimodularity") {
  PT id = PT::identity();
  CHECK(id == PT(1, 0, 0, 1));
  CHECK(id.is_unimodular());
  CHECK(PT(0, 1, 1, 0).is_unimodular());
  CHECK_FALSE(PT(1, 0, 0, 2).is_unimodular());
  // scalar matrices collapse to the identity
  CHECK(PT(7, 0, 0, 7) == id);
}

TEST_CASE("product is the canonical matrix product") {
  PT s(1, 1, 0, 1);
  PT t(1, 0, 1, 1);
  PT st = s * t;
  CHECK(st == PT(2, 1, 1, 1));
  CHECK(st.det() == 1);
  std::mt19937_64 rng(31);
  auto rand_pt = [&]() {
    while (true) {
      long a = long(rng() % 21) - 10, b = long(rng() % 21) - 10;
      long c = long(rng() % 21) - 10, d = long(rng() % 21) - 10;
      if (a * d != b * c) return PT(a, b, c, d);
    }
  };
  for (int i = 0; i < 300; ++i) {
    PT x = rand_pt(), y = rand_pt(), z = rand_pt();
    CHECK((x * y) * z == x * (y * z));
    CHECK(x * PT::identity() == x);
    CHECK(PT::identity() * x == x);
  }
}

TEST_CASE("string round trip and ordering") {
  PT t(1, -2, 3, 4);
  CHECK(t.str() == "1,-2,3,4");
  CHECK(PT::parse("1,-2,3,4") == t);
  CHECK(PT::parse("2,-4,6,8") == t);
  CHECK_THROWS_AS(PT::parse("1,2,3"), error);
  CHECK_THROWS_AS(PT::parse("1,2,3,x"), error);
  CHECK(PT(1, 0, 0, 1) < PT(1, 0, 0, 2));
  CHECK_FALSE(PT(1, 0, 0, 2) < PT(1, 0, 0, 1));
}
