#include "qpoints/curves.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "qpoints/error.hpp"
#include "qpoints/factor.hpp"
#include "qpoints/fibre.hpp"
#include "qpoints/numeric.hpp"

namespace qp {

namespace {

// i128 loop is safe when |x|^3 + |A||x| + |B| stays below 2^126
bool range_fits_fast(const mpz_class& A, const mpz_class& B, const mpz_class& x_lo,
                     const mpz_class& x_hi) {
  if (!fits_i64(A) || !fits_i64(B) || !fits_i64(x_lo) || !fits_i64(x_hi)) return false;
  mpz_class m = std::max(abs(x_lo), abs(x_hi));
  mpz_class worst = m * m * m + abs(A) * m + abs(B);
  return mpz_sizeinbase(worst.get_mpz_t(), 2) <= 126;
}

void push_pair(std::vector<IntegralPoint>& out, const mpz_class& x, const mpz_class& y) {
  if (y == 0) {
    out.push_back({x, y});
  } else {
    out.push_back({x, -y});
    out.push_back({x, y});
  }
}

}  // namespace

std::vector<IntegralPoint> search_integral_points(const WeierstrassCurve& curve,
                                                  const mpz_class& x_lo,
                                                  const mpz_class& x_hi) {
  if (x_lo > x_hi) fail(errc::precondition_violated, "empty x-range");
  std::vector<IntegralPoint> out;
  if (range_fits_fast(curve.A, curve.B, x_lo, x_hi)) {
    const i64 A = to_i64(curve.A), B = to_i64(curve.B);
    const i64 lo = to_i64(x_lo), hi = to_i64(x_hi);
    for (i64 x = lo; x <= hi; ++x) {
      i128 rhs = i128(x) * x * x + i128(A) * x + B;
      if (rhs < 0) continue;
      u128 r = u128(rhs);
      u128 y = isqrt_u128(r);
      if (y * y == r) push_pair(out, mpz_class(x), mpz_class(static_cast<unsigned long>(y)));
    }
    return out;
  }
  mpz_class rhs, y;
  for (mpz_class x = x_lo; x <= x_hi; ++x) {
    rhs = x * x * x + curve.A * x + curve.B;
    if (rhs < 0) continue;
    if (mpz_perfect_square_p(rhs.get_mpz_t())) {
      mpz_sqrt(y.get_mpz_t(), rhs.get_mpz_t());
      push_pair(out, x, y);
    }
  }
  return out;
}

bool is_minimal(const mpz_class& A, const mpz_class& B) {
  curve_invariants(A, B);  // throws on the singular locus
  mpz_class g = gcd(A, B);
  if (g <= 1) return true;
  for (const auto& [p, e] : factor(g)) {
    unsigned vA = A == 0 ? 6 : valuation(A, p);
    unsigned vB = B == 0 ? 6 : valuation(B, p);
    if (vA >= 4 && vB >= 6) return false;
  }
  return true;
}

bool is_semistable_approx(const mpz_class& A, const mpz_class& B) {
  auto [disc, height] = curve_invariants(A, B);
  for (const auto& [p, e] : factor(disc)) {
    if (p < 5) continue;
    if (A % p == 0) return false;
  }
  return true;
}

mpz_class marked_disc(const mpz_class& d2, const mpz_class& d3, const mpz_class& d4) {
  // b2 = 4 d2, b4 = 2 d4, b6 = d3^2, b8 = d2 d3^2 - d4^2
  return -16 * d2 * d2 * d2 * d3 * d3 + 16 * d2 * d2 * d4 * d4 - 64 * d4 * d4 * d4 -
         27 * d3 * d3 * d3 * d3 + 72 * d2 * d3 * d3 * d4;
}

MarkedCurve::MarkedCurve(mpz_class d2, mpz_class d3, mpz_class d4, MarkedVariant variant)
    : _d2(std::move(d2)), _d3(std::move(d3)), _d4(std::move(d4)), _variant(variant) {
  if (_variant == MarkedVariant::marked_two_torsion && _d3 != 0)
    fail(errc::precondition_violated, "two-torsion model requires d3 = 0");
  _disc = marked_disc(_d2, _d3, _d4);
  if (_disc == 0) fail(errc::singular_curve, "marked model has discriminant zero");
  mpz_class h2 = _d2 * _d2, h3 = _d3 * _d3, h4 = abs(_d4);
  _height = std::max(std::max(mpz_class(h2 * h2 * h2), mpz_class(h3 * h3)),
                     mpz_class(h4 * h4 * h4));
}

std::vector<IntegralPoint> search_marked_points(const MarkedCurve& curve, const mpz_class& x_lo,
                                                const mpz_class& x_hi) {
  if (x_lo > x_hi) fail(errc::precondition_violated, "empty x-range");
  std::vector<IntegralPoint> out;
  const mpz_class &d2 = curve.d2(), &d3 = curve.d3(), &d4 = curve.d4();
  mpz_class rhs, s, u;
  for (mpz_class x = x_lo; x <= x_hi; ++x) {
    rhs = ((x + d2) * x + d4) * x;
    s = 4 * rhs + d3 * d3;
    if (s < 0) continue;
    if (!mpz_perfect_square_p(s.get_mpz_t())) continue;
    mpz_sqrt(u.get_mpz_t(), s.get_mpz_t());
    if ((u - d3) % 2 != 0) continue;
    mpz_class y_hi = (u - d3) / 2, y_lo = (-u - d3) / 2;
    out.push_back({x, y_lo});
    if (y_hi != y_lo) out.push_back({x, y_hi});
  }
  return out;
}

namespace {

std::string trimmed(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

mpz_class parse_int_field(const std::string& field, unsigned long line) {
  std::string t = trimmed(field);
  mpz_class v;
  if (t.empty() || mpz_set_str(v.get_mpz_t(), t.c_str(), 10) != 0)
    fail(errc::parse_error, "line " + std::to_string(line) + ": bad integer '" + field + "'");
  return v;
}

}  // namespace

RankTable load_rank_table(std::istream& source) {
  RankTable table;
  std::string line;
  unsigned long lineno = 0;
  while (std::getline(source, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string t = trimmed(line);
    if (t.empty()) continue;
    size_t c1 = t.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos : t.find(',', c1 + 1);
    if (c2 == std::string::npos)
      fail(errc::parse_error, "line " + std::to_string(lineno) + ": expected A,B,rank");
    size_t c3 = t.find(',', c2 + 1);
    RankRecord rec;
    rec.A = parse_int_field(t.substr(0, c1), lineno);
    rec.B = parse_int_field(t.substr(c1 + 1, c2 - c1 - 1), lineno);
    std::string rank_field =
        c3 == std::string::npos ? t.substr(c2 + 1) : t.substr(c2 + 1, c3 - c2 - 1);
    mpz_class rank = parse_int_field(rank_field, lineno);
    if (rank < 0 || !rank.fits_uint_p())
      fail(errc::parse_error, "line " + std::to_string(lineno) + ": rank out of range");
    rec.rank = static_cast<unsigned>(rank.get_ui());
    if (c3 != std::string::npos) rec.provenance = trimmed(t.substr(c3 + 1));
    if (4 * rec.A * rec.A * rec.A + 27 * rec.B * rec.B == 0)
      fail(errc::parse_error, "line " + std::to_string(lineno) + ": singular curve");
    auto key = std::make_pair(rec.A, rec.B);
    if (!table.emplace(key, std::move(rec)).second)
      fail(errc::duplicate_curve, "line " + std::to_string(lineno) + ": repeated (A,B)");
  }
  return table;
}

RankTable load_rank_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open rank table '" + path + "'");
  return load_rank_table(in);
}

std::vector<std::vector<IntegralPoint>> psi_classes(const WeierstrassCurve& curve,
                                                    const std::vector<IntegralPoint>& points,
                                                    const mpz_class& box) {
  if (!fits_i64(box) || box < 1) fail(errc::precondition_violated, "box must be a positive i64");
  std::vector<IntegralPoint> pts = points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (const auto& p : pts)
    if (p.y * p.y != p.x * p.x * p.x + curve.A * p.x + curve.B)
      fail(errc::point_not_on_curve, "psi_classes input off the curve");

  const size_t n = pts.size();
  std::vector<BinaryQuartic> forms;
  std::vector<std::set<BinaryQuartic>> images(n);
  forms.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    forms.push_back(point_to_quartic(curve, pts[i]));
    for (const auto& t : flattening_transforms(forms[i], to_i64(box))) images[i].insert(t.image);
  }

  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      if (find(i) == find(j)) continue;
      if (images[i].count(forms[j]) || images[j].count(forms[i]))
        parent[find(j)] = find(i);
    }

  std::vector<std::vector<IntegralPoint>> classes;
  std::map<size_t, size_t> slot;
  for (size_t i = 0; i < n; ++i) {
    size_t r = find(i);
    auto [it, fresh] = slot.emplace(r, classes.size());
    if (fresh) classes.emplace_back();
    classes[it->second].push_back(pts[i]);
  }
  return classes;
}

}  // namespace qp
