#include <sstream>
#include <vector>

#include "doctest.h"
#include "qpoints/curves.hpp"
#include "qpoints/error.hpp"

using namespace qp;

namespace {
const char* kDataDir =
#ifdef QPOINTS_DATA_DIR
    QPOINTS_DATA_DIR;
#else
    "data";
#endif
}  // namespace

TEST_CASE("integral point search reference values") {
  WeierstrassCurve c(0, -2);
  auto pts = search_integral_points(c, -10000, 10000);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == IntegralPoint{3, -5});
  CHECK(pts[1] == IntegralPoint{3, 5});

  WeierstrassCurve d(-1, 0);
  auto zero = search_integral_points(d, -100, 100);
  REQUIRE(zero.size() == 3);
  CHECK(zero[0] == IntegralPoint{-1, 0});
  CHECK(zero[1] == IntegralPoint{0, 0});
  CHECK(zero[2] == IntegralPoint{1, 0});

  WeierstrassCurve e(0, 1);
  auto five = search_integral_points(e, -100, 100);
  REQUIRE(five.size() == 5);
  CHECK(five[0] == IntegralPoint{-1, 0});
  CHECK(five[1] == IntegralPoint{0, -1});
  CHECK(five[2] == IntegralPoint{0, 1});
  CHECK(five[3] == IntegralPoint{2, -3});
  CHECK(five[4] == IntegralPoint{2, 3});

  WeierstrassCurve big(0, 17);
  auto many = search_integral_points(big, -100, 100);
  CHECK(many.size() == 14);
  std::vector<mpz_class> xs;
  for (const auto& p : many)
    if (xs.empty() || xs.back() != p.x) xs.push_back(p.x);
  CHECK(xs == std::vector<mpz_class>{-2, -1, 2, 4, 8, 43, 52});

  CHECK_THROWS_AS(search_integral_points(c, 5, 4), error);
}

TEST_CASE("point search beyond 64-bit coordinates") {
  mpz_class x0 = mpz_class(1) << 50;
  mpz_class y0 = (mpz_class(1) << 75) + 1;
  mpz_class B = y0 * y0 - x0 * x0 * x0;  // makes (x0, y0) a point by construction
  WeierstrassCurve c(0, B);
  auto pts = search_integral_points(c, x0 - 2, x0 + 2);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == IntegralPoint{x0, -y0});
  CHECK(pts[1] == IntegralPoint{x0, y0});
}

TEST_CASE("minimality filter") {
  CHECK(is_minimal(1, 1));
  CHECK(is_minimal(8, 64));   // 2^4 does not divide 8
  CHECK(is_minimal(0, 1));
  CHECK(is_minimal(1, 0));
  CHECK_FALSE(is_minimal(16, 64));
  CHECK_FALSE(is_minimal(0, 64));   // zero A leaves only the 2^6 | B test
  CHECK_FALSE(is_minimal(16, 0));
  CHECK_FALSE(is_minimal(mpz_class(3) * 81, mpz_class(729)));  // p = 3
  CHECK(is_minimal(mpz_class(81), mpz_class(728)));
}

TEST_CASE("approximate semistability filter") {
  CHECK(is_semistable_approx(0, -2));    // discriminant is -2^6 3^3, no prime >= 5
  CHECK(is_semistable_approx(1, 1));     // disc -496 = -2^4 31, and 31 does not divide 1
  CHECK_FALSE(is_semistable_approx(-5, 0));  // disc 8000 = 2^6 5^3 with 5 | A
}

TEST_CASE("marked model discriminant and height") {
  CHECK(marked_disc(0, 1, -1) == 37);
  CHECK(marked_disc(1, 2, 3) == -1216);
  CHECK(marked_disc(-2, 3, -4) == 9269);
  CHECK(marked_disc(0, 0, 0) == 0);
  MarkedCurve m(0, 1, -1, MarkedVariant::marked_point);
  CHECK(m.disc() == 37);
  CHECK(m.height() == 1);
  MarkedCurve n(1, 2, 3, MarkedVariant::marked_point);
  CHECK(n.disc() == -1216);
  CHECK(n.height() == 27);  // max(1, 16, 27)
  MarkedCurve t(1, 0, 1, MarkedVariant::marked_two_torsion);
  CHECK(t.disc() == -48);
  CHECK_THROWS_AS(MarkedCurve(1, 1, 1, MarkedVariant::marked_two_torsion), error);
  try {
    MarkedCurve(1, 1, 1, MarkedVariant::marked_two_torsion);
  } catch (const error& e) {
    CHECK(e.code() == errc::precondition_violated);
  }
  CHECK_THROWS_AS(MarkedCurve(0, 0, 0, MarkedVariant::marked_point), error);
}

TEST_CASE("marked point search reference list") {
  MarkedCurve m(0, 1, -1, MarkedVariant::marked_point);
  auto pts = search_marked_points(m, -6, 6);
  std::vector<IntegralPoint> expect{{-1, -1}, {-1, 0}, {0, -1}, {0, 0}, {1, -1},
                                    {1, 0},  {2, -3}, {2, 2}, {6, -15}, {6, 14}};
  CHECK(pts == expect);
}

TEST_CASE("rank table parsing") {
  std::istringstream good(
      "# comment\n"
      "\n"
      "0,-2,1,classical\n"
      "0,17,2,descent\n"
      "1,0,0\n");
  RankTable t = load_rank_table(good);
  REQUIRE(t.size() == 3);
  auto it = t.find({0, 17});
  REQUIRE(it != t.end());
  CHECK(it->second.rank == 2);
  CHECK(it->second.provenance == "descent");
  CHECK(t.find({1, 0})->second.provenance.empty());

  std::istringstream dup("0,-2,1\n0,-2,2\n");
  CHECK_THROWS_AS(load_rank_table(dup), error);
  try {
    std::istringstream again("0,-2,1\n0,-2,2\n");
    load_rank_table(again);
  } catch (const error& e) {
    CHECK(e.code() == errc::duplicate_curve);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream singular("0,0,1\n");
  CHECK_THROWS_AS(load_rank_table(singular), error);
  std::istringstream short_row("0,-2\n");
  CHECK_THROWS_AS(load_rank_table(short_row), error);
  std::istringstream junk("0,x,1\n");
  CHECK_THROWS_AS(load_rank_table(junk), error);
  std::istringstream negative("0,-2,-1\n");
  CHECK_THROWS_AS(load_rank_table(negative), error);
}

TEST_CASE("rank fixture file loads") {
  RankTable t = load_rank_table_file(std::string(kDataDir) + "/sample_ranks.csv");
  CHECK(t.size() == 8);
  CHECK(t.find({0, 17})->second.rank == 2);
  CHECK(t.find({0, 17})->second.provenance == "descent-tables");
  CHECK(t.find({-1, 0})->second.rank == 0);
  CHECK_THROWS_AS(load_rank_table_file("/nonexistent/ranks.csv"), error);
}

TEST_CASE("class partition of a rank two curve is box stable") {
  WeierstrassCurve c(0, 17);
  auto pts = search_integral_points(c, -100, 100);
  REQUIRE(pts.size() == 14);
  auto classes = psi_classes(c, pts, 10);
  REQUIRE(classes.size() == 4);
  // frozen class structure: opposite points always join, and two pairs merge
  // across very different x
  CHECK(classes[0] == std::vector<IntegralPoint>{{-2, -3}, {-2, 3}, {43, -282}, {43, 282}});
  CHECK(classes[1] == std::vector<IntegralPoint>{{-1, -4}, {-1, 4}, {2, -5}, {2, 5}});
  CHECK(classes[2] == std::vector<IntegralPoint>{{4, -9}, {4, 9}, {52, -375}, {52, 375}});
  CHECK(classes[3] == std::vector<IntegralPoint>{{8, -23}, {8, 23}});
  CHECK(psi_classes(c, pts, 200) == classes);
}

TEST_CASE("class partition deduplicates and verifies membership") {
  WeierstrassCurve c(0, -2);
  std::vector<IntegralPoint> pts{{3, 5}, {3, 5}, {3, -5}};
  auto classes = psi_classes(c, pts, 10);
  REQUIRE(classes.size() == 1);
  CHECK(classes[0] == std::vector<IntegralPoint>{{3, -5}, {3, 5}});
  CHECK_THROWS_AS(psi_classes(c, {{1, 1}}, 10), error);
  CHECK_THROWS_AS(psi_classes(c, {{3, 5}}, 0), error);
}
