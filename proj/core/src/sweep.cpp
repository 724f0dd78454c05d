#include "qpoints/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "qpoints/error.hpp"
#include "qpoints/numeric.hpp"

namespace qp {

const char* family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::univ: return "univ";
    case FamilyKind::min: return "min";
    case FamilyKind::congruence: return "congruence";
    case FamilyKind::marked_point: return "marked-point";
    case FamilyKind::marked_two_torsion: return "marked-2-torsion";
  }
  return "?";
}

FamilyKind parse_family_kind(const std::string& name) {
  for (FamilyKind k : {FamilyKind::univ, FamilyKind::min, FamilyKind::congruence,
                       FamilyKind::marked_point, FamilyKind::marked_two_torsion})
    if (name == family_kind_name(k)) return k;
  fail(errc::config_error, "unknown family kind '" + name + "'");
}

const char* disc_sign_name(DiscSign s) {
  switch (s) {
    case DiscSign::any: return "any";
    case DiscSign::positive: return "positive";
    case DiscSign::negative: return "negative";
  }
  return "?";
}

DiscSign parse_disc_sign(const std::string& name) {
  for (DiscSign s : {DiscSign::any, DiscSign::positive, DiscSign::negative})
    if (name == disc_sign_name(s)) return s;
  fail(errc::config_error, "unknown discriminant sign '" + name + "'");
}

namespace {

bool is_marked_kind(FamilyKind k) {
  return k == FamilyKind::marked_point || k == FamilyKind::marked_two_torsion;
}

mpz_class nonneg_mod(const mpz_class& v, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
  return r;
}

// residues reduced mod m, sorted, deduplicated
std::vector<std::pair<mpz_class, mpz_class>> normalized_residues(const CongruenceCondition& c) {
  std::vector<std::pair<mpz_class, mpz_class>> out;
  out.reserve(c.residues.size());
  for (const auto& [ra, rb] : c.residues)
    out.emplace_back(nonneg_mod(ra, c.modulus), nonneg_mod(rb, c.modulus));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void FamilySpec::validate() const {
  if (kind == FamilyKind::congruence) {
    if (congruences.empty())
      fail(errc::config_error, "congruence family needs at least one condition");
  } else if (!congruences.empty()) {
    fail(errc::config_error, "congruence conditions only apply to the congruence kind");
  }
  for (const auto& c : congruences) {
    if (c.modulus < 2) fail(errc::config_error, "congruence modulus must be >= 2");
    if (c.residues.empty()) fail(errc::config_error, "empty residue set");
  }
}

std::string FamilySpec::canonical() const {
  std::ostringstream os;
  os << "kind=" << family_kind_name(kind) << ";sign=" << disc_sign_name(disc_sign);
  if (!congruences.empty()) {
    std::vector<std::string> conds;
    for (const auto& c : congruences) {
      std::ostringstream cs;
      cs << c.modulus.get_str() << ':';
      bool first = true;
      for (const auto& [ra, rb] : normalized_residues(c)) {
        if (!first) cs << '|';
        first = false;
        cs << ra.get_str() << '.' << rb.get_str();
      }
      conds.push_back(cs.str());
    }
    std::sort(conds.begin(), conds.end());
    os << ";congr=";
    for (size_t i = 0; i < conds.size(); ++i) os << (i ? "+" : "") << conds[i];
  }
  return os.str();
}

namespace {

// engine-side view of one family member, everything inside i64
struct CurveLite {
  bool marked = false;
  i64 A = 0, B = 0;
  i64 d2 = 0, d3 = 0, d4 = 0;
  i64 disc = 0;
  i64 height = 0;
};

struct ResiduePrep {
  i64 modulus;
  std::vector<std::pair<i64, i64>> residues;  // sorted
};

std::vector<ResiduePrep> prep_congruences(const FamilySpec& spec) {
  std::vector<ResiduePrep> out;
  for (const auto& c : spec.congruences) {
    if (!fits_i64(c.modulus)) fail(errc::config_error, "congruence modulus beyond engine range");
    ResiduePrep rp;
    rp.modulus = to_i64(c.modulus);
    for (const auto& [ra, rb] : normalized_residues(c))
      rp.residues.emplace_back(to_i64(ra), to_i64(rb));
    out.push_back(std::move(rp));
  }
  return out;
}

bool passes_congruences(const std::vector<ResiduePrep>& conds, i64 A, i64 B) {
  for (const auto& c : conds) {
    i64 ra = (A % c.modulus + c.modulus) % c.modulus;
    i64 rb = (B % c.modulus + c.modulus) % c.modulus;
    if (!std::binary_search(c.residues.begin(), c.residues.end(), std::make_pair(ra, rb)))
      return false;
  }
  return true;
}

bool passes_sign(DiscSign s, bool disc_positive) {
  return s == DiscSign::any || (s == DiscSign::positive) == disc_positive;
}

bool has_exponent_at_least(u64 n, unsigned bound) {
  for (const auto& pp : factor_u64(n))
    if (pp.e >= bound) return true;
  return false;
}

unsigned valuation_u64(u64 n, u64 p) {
  unsigned v = 0;
  while (n % p == 0) { n /= p; ++v; }
  return v;
}

bool minimal_i64(i64 A, i64 B) {
  u64 ua = A < 0 ? u64(-A) : u64(A);
  u64 ub = B < 0 ? u64(-B) : u64(B);
  if (A == 0) return !has_exponent_at_least(ub, 6);
  if (B == 0) return !has_exponent_at_least(ua, 4);
  u64 g = std::gcd(ua, ub);
  if (g == 1) return true;
  for (const auto& pp : factor_u64(g)) {
    u64 p = pp.p.get_ui();
    if (valuation_u64(ua, p) >= 4 && valuation_u64(ub, p) >= 6) return false;
  }
  return true;
}

struct ScanBounds {
  bool marked = false;
  i64 outer_max = 0;  // |A| or |d2| limit
  i64 b_max = 0;      // weierstrass B
  i64 d3_max = 0, d4_max = 0;
};

ScanBounds scan_bounds(const FamilySpec& spec, i64 T) {
  ScanBounds sb;
  sb.marked = is_marked_kind(spec.kind);
  mpz_class Tz(static_cast<long>(T));
  if (sb.marked) {
    sb.outer_max = to_i64(floor_root(Tz, 6));
    sb.d3_max = spec.kind == FamilyKind::marked_two_torsion ? 0 : to_i64(floor_root(Tz, 4));
    sb.d4_max = to_i64(floor_root(Tz, 3));
  } else {
    sb.outer_max = to_i64(floor_root(Tz / 4, 3));
    sb.b_max = to_i64(floor_root(Tz / 27, 2));
  }
  return sb;
}

// all family members with outer coordinate in [lo, hi], in enumeration order
void scan_slice(const FamilySpec& spec, i64 T, i64 lo, i64 hi,
                const std::function<void(const CurveLite&)>& yield) {
  ScanBounds sb = scan_bounds(spec, T);
  auto conds = prep_congruences(spec);
  if (!sb.marked) {
    i64 a_lo = std::max(lo, -sb.outer_max), a_hi = std::min(hi, sb.outer_max);
    for (i64 A = a_lo; A <= a_hi; ++A) {
      i64 fourA3 = 4 * A * A * A;
      i64 absA3 = fourA3 < 0 ? -fourA3 : fourA3;
      for (i64 B = -sb.b_max; B <= sb.b_max; ++B) {
        i64 s = fourA3 + 27 * B * B;
        if (s == 0) continue;
        if (!passes_sign(spec.disc_sign, s < 0)) continue;
        if (!conds.empty() && !passes_congruences(conds, A, B)) continue;
        if (spec.kind == FamilyKind::min && !minimal_i64(A, B)) continue;
        CurveLite c;
        c.A = A;
        c.B = B;
        c.disc = -16 * s;
        c.height = std::max(absA3, 27 * B * B);
        yield(c);
      }
    }
    return;
  }
  i64 d2_lo = std::max(lo, -sb.outer_max), d2_hi = std::min(hi, sb.outer_max);
  for (i64 d2 = d2_lo; d2 <= d2_hi; ++d2) {
    i64 h2 = d2 * d2;
    h2 = h2 * h2 * (d2 < 0 ? -d2 : d2) * (d2 < 0 ? -d2 : d2);  // d2^6
    for (i64 d3 = -sb.d3_max; d3 <= sb.d3_max; ++d3) {
      i64 h3 = d3 * d3;
      h3 = h3 * h3;  // d3^4
      for (i64 d4 = -sb.d4_max; d4 <= sb.d4_max; ++d4) {
        i128 disc = i128(-16) * d2 * d2 * d2 * d3 * d3 + i128(16) * d2 * d2 * d4 * d4 -
                    i128(64) * d4 * d4 * d4 - i128(27) * d3 * d3 * d3 * d3 +
                    i128(72) * d2 * d3 * d3 * d4;
        if (disc == 0) continue;
        if (!passes_sign(spec.disc_sign, disc > 0)) continue;
        i64 h4 = d4 < 0 ? -d4 : d4;
        h4 = h4 * h4 * h4;  // |d4|^3
        CurveLite c;
        c.marked = true;
        c.d2 = d2;
        c.d3 = d3;
        c.d4 = d4;
        c.disc = static_cast<i64>(disc);
        c.height = std::max(h2, std::max(h3, h4));
        yield(c);
      }
    }
  }
}

FamilyCurve to_family_curve(const CurveLite& c) {
  FamilyCurve f;
  f.marked = c.marked;
  if (c.marked) {
    f.d2 = c.d2;
    f.d3 = c.d3;
    f.d4 = c.d4;
  } else {
    f.A = c.A;
    f.B = c.B;
  }
  f.disc = c.disc;
  f.height = c.height;
  return f;
}

bool fits_engine(const mpz_class& T) { return fits_i64(T) && to_i64(T) <= kEngineHeightCap; }

// arbitrary-precision fallback for heights beyond the i64 engine range
void enumerate_family_mpz(const FamilySpec& spec, const mpz_class& T,
                          const std::function<void(const FamilyCurve&)>& yield) {
  if (is_marked_kind(spec.kind)) {
    mpz_class m2 = floor_root(T, 6);
    mpz_class m3 = spec.kind == FamilyKind::marked_two_torsion ? 0 : floor_root(T, 4);
    mpz_class m4 = floor_root(T, 3);
    for (mpz_class d2 = -m2; d2 <= m2; ++d2)
      for (mpz_class d3 = -m3; d3 <= m3; ++d3)
        for (mpz_class d4 = -m4; d4 <= m4; ++d4) {
          mpz_class disc = marked_disc(d2, d3, d4);
          if (disc == 0) continue;
          if (!passes_sign(spec.disc_sign, disc > 0)) continue;
          FamilyCurve f;
          f.marked = true;
          f.d2 = d2;
          f.d3 = d3;
          f.d4 = d4;
          f.disc = disc;
          mpz_class h2 = d2 * d2, h3 = d3 * d3, h4 = abs(d4);
          f.height = std::max(std::max(mpz_class(h2 * h2 * h2), mpz_class(h3 * h3)),
                              mpz_class(h4 * h4 * h4));
          yield(f);
        }
    return;
  }
  mpz_class a_max = floor_root(T / 4, 3), b_max = floor_root(T / 27, 2);
  for (mpz_class A = -a_max; A <= a_max; ++A)
    for (mpz_class B = -b_max; B <= b_max; ++B) {
      mpz_class s = 4 * A * A * A + 27 * B * B;
      if (s == 0) continue;
      if (!passes_sign(spec.disc_sign, s < 0)) continue;
      if (!spec.congruences.empty()) {
        bool ok = true;
        for (const auto& c : spec.congruences) {
          auto rs = normalized_residues(c);
          if (!std::binary_search(rs.begin(), rs.end(),
                                  std::make_pair(nonneg_mod(A, c.modulus), nonneg_mod(B, c.modulus)))) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
      }
      if (spec.kind == FamilyKind::min && !is_minimal(A, B)) continue;
      FamilyCurve f;
      f.A = A;
      f.B = B;
      f.disc = -16 * s;
      mpz_class absA = abs(A);
      f.height = std::max(mpz_class(4 * absA * absA * absA), mpz_class(27 * B * B));
      yield(f);
    }
}

}  // namespace

void enumerate_family(const FamilySpec& spec, const mpz_class& T,
                      const std::function<void(const FamilyCurve&)>& yield) {
  spec.validate();
  if (T < 1) fail(errc::precondition_violated, "height bound must be positive");
  bool engine_ok = fits_engine(T);
  for (const auto& c : spec.congruences)
    if (!fits_i64(c.modulus)) engine_ok = false;
  if (engine_ok) {
    i64 t = to_i64(T);
    ScanBounds sb = scan_bounds(spec, t);
    scan_slice(spec, t, -sb.outer_max, sb.outer_max,
               [&](const CurveLite& c) { yield(to_family_curve(c)); });
  } else {
    enumerate_family_mpz(spec, T, yield);
  }
}

std::vector<FamilyCurve> family_list(const FamilySpec& spec, const mpz_class& T) {
  std::vector<FamilyCurve> out;
  enumerate_family(spec, T, [&](const FamilyCurve& f) { out.push_back(f); });
  return out;
}

u64 family_count(const FamilySpec& spec, const mpz_class& T) {
  u64 n = 0;
  enumerate_family(spec, T, [&](const FamilyCurve&) { ++n; });
  return n;
}

std::pair<SquareDivisorProfile, mpz_class> square_part_profile(const mpz_class& disc,
                                                               const mpz_class& smooth_cutoff) {
  if (disc == 0) fail(errc::zero_discriminant, "square part of a zero discriminant");
  Factorization fac = factor(disc);
  SquareDivisorProfile profile = make_profile(disc, fac);
  mpz_class n = 1, pe;
  for (const auto& pp : fac) {
    if (pp.e < 2) continue;
    if (smooth_cutoff > 0 && pp.p > smooth_cutoff) continue;
    mpz_pow_ui(pe.get_mpz_t(), pp.p.get_mpz_t(), pp.e / 2);
    n *= pe;
  }
  return {std::move(profile), std::move(n)};
}

mpz_class greedy_divisor(const mpz_class& m, const mpz_class& x, const mpz_class& y) {
  if (m < 1 || x < 1 || y < 1) fail(errc::precondition_violated, "greedy divisor needs positive inputs");
  if (y > m) fail(errc::precondition_violated, "greedy divisor target below 1: y > m");
  Factorization fac = factor(m);
  for (const auto& pp : fac)
    if (pp.p > x) fail(errc::precondition_violated, "prime factor above the ratio bound");
  mpz_class d = m, cap = x * y;
  for (size_t i = fac.size(); i-- > 0 && d > cap;)
    for (unsigned k = 0; k < fac[i].e && d > cap; ++k) d /= fac[i].p;
  return d;
}

SmoothWindow make_window(const mpz_class& T, const mpq_class& delta) {
  if (T < 1) fail(errc::precondition_violated, "window needs T >= 1");
  mpq_class dl = delta;
  dl.canonicalize();
  // the cutoff must stay below the window top or no four-factor split under
  // T^(1/6) can exist, so the admissible range is (0, 1/6]
  if (dl <= 0 || dl > mpq_class(1, 6))
    fail(errc::precondition_violated, "delta must lie in (0, 1/6]");
  if (!dl.get_num().fits_ulong_p() || !dl.get_den().fits_ulong_p())
    fail(errc::config_error, "delta numerator or denominator too large");
  unsigned long p = dl.get_num().get_ui(), q = dl.get_den().get_ui();
  if (q > 64) fail(errc::config_error, "delta denominator too large for exact window tests");
  SmoothWindow w;
  w.T = T;
  w.delta = dl;
  w.hi = floor_root(T, 6);
  mpz_class Tp;
  mpz_pow_ui(Tp.get_mpz_t(), T.get_mpz_t(), p);
  w.cutoff = floor_root(Tp, q);
  if (q > 6 * p) {
    mpz_class Te;
    mpz_pow_ui(Te.get_mpz_t(), T.get_mpz_t(), q - 6 * p);
    w.lo = ceil_root(Te, 6 * q);
    if (w.lo < 1) w.lo = 1;
  } else {
    w.lo = 1;
  }
  return w;
}

namespace {

// divisors of the factored value paired with their own divisor counts, ascending
std::vector<std::pair<mpz_class, u64>> divisors_with_tau(const Factorization& fac) {
  std::vector<std::pair<mpz_class, u64>> out{{1, 1}};
  for (const auto& pp : fac) {
    size_t base = out.size();
    mpz_class pe = 1;
    for (unsigned k = 1; k <= pp.e; ++k) {
      pe *= pp.p;
      for (size_t j = 0; j < base; ++j) out.emplace_back(out[j].first * pe, out[j].second * (k + 1));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// first (a,b,c) with a*b*c = m and every part <= cap, scanning divisors ascending
bool exhaustive_split(const mpz_class& m, const mpz_class& cap, mpz_class parts[3]) {
  std::vector<mpz_class> divs = divisors(factor(m));
  for (const mpz_class& a : divs) {
    if (a > cap) break;
    mpz_class m2 = m / a;
    for (const mpz_class& b : divs) {
      if (b > cap) break;
      if (m2 % b != 0) continue;
      mpz_class c = m2 / b;
      if (c <= cap) {
        parts[0] = a;
        parts[1] = b;
        parts[2] = c;
        return true;
      }
    }
  }
  return false;
}

// a <= b <= c with a*b*c = m minimizing c, ties by smallest b; total because
// (1,1,m) is always available
void minimax_split(const mpz_class& m, mpz_class parts[3]) {
  std::vector<mpz_class> divs = divisors(factor(m));
  parts[0] = 1;
  parts[1] = 1;
  parts[2] = m;
  for (const mpz_class& a : divs) {
    if (a * a * a > m) break;
    mpz_class m2 = m / a;
    for (const mpz_class& b : divs) {
      if (b < a) continue;
      if (b * b > m2) break;
      if (m2 % b != 0) continue;
      mpz_class c = m2 / b;
      if (c < parts[2] || (c == parts[2] && b < parts[1])) {
        parts[0] = a;
        parts[1] = b;
        parts[2] = c;
      }
    }
  }
}

}  // namespace

SmoothPart smooth_decomposition(const mpz_class& n, const Factorization& fac,
                                const SmoothWindow& win) {
  if (n < 1) fail(errc::precondition_violated, "smooth part must be positive");
  if (!fac.empty() && fac.back().p > win.cutoff)
    fail(errc::not_smooth, "prime factor above the smoothness cutoff");
  SmoothPart sp;
  sp.n = n;
  sp.window_lo = win.lo;
  sp.window_hi = win.hi;
  sp.tau_n = tau(fac);
  if (n <= win.hi) {
    sp.d = n;
    sp.tau_d = sp.tau_n;
    return sp;
  }
  // candidate divisors: inside the window ordered by tau descending then
  // value ascending, or, when the window holds none, every divisor <= hi
  // largest first
  auto divs = divisors_with_tau(fac);
  std::vector<std::pair<mpz_class, u64>> cands;
  for (const auto& [v, t] : divs)
    if (v >= win.lo && v <= win.hi) cands.push_back({v, t});
  if (cands.empty()) {
    sp.window_empty = true;
    for (const auto& [v, t] : divs) {
      if (v > win.hi) break;
      cands.push_back({v, t});
    }
    std::reverse(cands.begin(), cands.end());
  } else {
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
  }

  // the front candidate is the canonical pick; when its cofactor admits no
  // three-way split under the cap the next candidate is tried, and settling
  // for a later one counts as a fallback
  const mpz_class x_eff = fac.back().p;
  bool done = false;
  for (size_t ci = 0; ci < cands.size() && !done; ++ci) {
    mpz_class m = n / cands[ci].first;
    mpz_class parts[3] = {1, 1, 1};
    bool ok = x_eff <= win.hi;
    if (ok) {
      mpz_class y = win.hi / x_eff;
      if (y < 1) y = 1;
      mpz_class rem = m;
      int slot = 0;
      while (rem > win.hi) {
        if (slot >= 2) {
          ok = false;
          break;
        }
        parts[slot] = greedy_divisor(rem, x_eff, y);
        rem /= parts[slot];
        ++slot;
      }
      if (ok) parts[slot] = rem;
    }
    bool exhaustive = false;
    if (!ok) {
      if (!exhaustive_split(m, win.hi, parts)) continue;
      exhaustive = true;
    }
    sp.d = cands[ci].first;
    sp.tau_d = cands[ci].second;
    sp.d1 = parts[0];
    sp.d2 = parts[1];
    sp.d3 = parts[2];
    sp.split_fallback = exhaustive || ci != 0;
    done = true;
  }
  if (!done) {
    // no candidate admits a split under the cap at all; keep the canonical
    // divisor, let the cofactors stretch as little as possible, and tally
    mpz_class parts[3];
    minimax_split(n / cands.front().first, parts);
    sp.d = cands.front().first;
    sp.tau_d = cands.front().second;
    sp.d1 = parts[0];
    sp.d2 = parts[1];
    sp.d3 = parts[2];
    sp.split_fallback = true;
  }

  if (!sp.window_empty) {
    mpz_class t4(static_cast<unsigned long>(sp.tau_d));
    t4 = t4 * t4;
    t4 = t4 * t4;
    if (mpz_class(static_cast<unsigned long>(sp.tau_n)) > t4)
      fail(errc::invariant_violation, "divisor count bound tau(n) <= tau(d)^4 failed");
  }
  return sp;
}

SmoothPart smooth_decomposition(const mpz_class& n, const mpz_class& T, const mpq_class& delta) {
  if (n < 1) fail(errc::precondition_violated, "smooth part must be positive");
  return smooth_decomposition(n, factor(n), make_window(T, delta));
}

void SweepOptions::validate() const {
  family.validate();
  if (height_max < 1) fail(errc::config_error, "height-max must be >= 1");
  if (!fits_engine(height_max)) fail(errc::config_error, "height-max beyond the engine range");
  if (point_window < 0 || point_window > 1000000000)
    fail(errc::config_error, "point window out of range");
  if (class_box < 0 || class_box > 1000000000) fail(errc::config_error, "class box out of range");
  if (class_box > 0 && is_marked_kind(family.kind))
    fail(errc::config_error, "class partition applies to weierstrass families only");
  if (class_box > 0 && point_window == 0)
    fail(errc::config_error, "class partition needs a point window");
  if (!s_list.empty() && point_window == 0)
    fail(errc::config_error, "point moments need a point window");
  for (unsigned s : s_list)
    if (s > 64) fail(errc::config_error, "moment exponent too large");
  for (unsigned t : t_list)
    if (t > 64) fail(errc::config_error, "moment exponent too large");
  for (const auto& m : census_moduli)
    if (m < 2) fail(errc::config_error, "census modulus must be >= 2");
  if (shards < 1 || shards > 65536) fail(errc::config_error, "shard count out of range");
  mpq_class dl = delta;
  dl.canonicalize();
  if (dl <= 0 || dl > mpq_class(1, 6)) fail(errc::config_error, "delta must lie in (0, 1/6]");
  if (!dl.get_num().fits_ulong_p() || !dl.get_den().fits_ulong_p() || dl.get_den().get_ui() > 64)
    fail(errc::config_error, "delta too fine for exact window tests");
}

std::string SweepOptions::canonical() const {
  std::ostringstream os;
  mpq_class dl = delta;
  dl.canonicalize();
  os << "v1;" << family.canonical() << ";T=" << height_max.get_str()
     << ";window=" << point_window.get_str() << ";classbox=" << class_box.get_str()
     << ";delta=" << dl.get_num().get_str() << "/" << dl.get_den().get_str() << ";s=";
  for (size_t i = 0; i < s_list.size(); ++i) os << (i ? "," : "") << s_list[i];
  os << ";t=";
  for (size_t i = 0; i < t_list.size(); ++i) os << (i ? "," : "") << t_list[i];
  os << ";census=";
  for (size_t i = 0; i < census_moduli.size(); ++i)
    os << (i ? "," : "") << census_moduli[i].get_str();
  os << ";shards=" << shards << ";records=" << (want_records ? 1 : 0);
  return os.str();
}

std::string record_header(bool marked) {
  return marked ? "d2,d3,d4,Delta,H,points,window,classcount,n_smooth,d_selected,tau_n,tau_d"
                : "A,B,Delta,H,points,window,classcount,n_smooth,d_selected,tau_n,tau_d";
}

std::string record_line(const SweepRecord& r) {
  std::ostringstream os;
  if (r.marked)
    os << r.d2 << ',' << r.d3 << ',' << r.d4;
  else
    os << r.A << ',' << r.B;
  os << ',' << r.disc << ',' << r.height << ',' << r.points << ',' << r.window << ','
     << r.class_count << ',' << r.n_smooth << ',' << r.d_selected << ',' << r.tau_n << ','
     << r.tau_d;
  return os.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t c = line.find(sep, start);
    if (c == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, c - start));
    start = c + 1;
  }
  return out;
}

i64 parse_i64(const std::string& s) {
  if (s.empty()) fail(errc::parse_error, "empty integer field");
  size_t pos = 0;
  i64 v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    fail(errc::parse_error, "bad integer '" + s + "'");
  }
  if (pos != s.size()) fail(errc::parse_error, "trailing junk in integer '" + s + "'");
  return v;
}

u64 parse_u64(const std::string& s) {
  i64 v = parse_i64(s);
  if (v < 0) fail(errc::parse_error, "negative value '" + s + "'");
  return static_cast<u64>(v);
}

}  // namespace

SweepRecord parse_record_line(const std::string& line, bool marked) {
  auto f = split_fields(line, ',');
  size_t expect = marked ? 12 : 11;
  if (f.size() != expect) fail(errc::parse_error, "record has wrong field count");
  SweepRecord r;
  r.marked = marked;
  size_t i = 0;
  if (marked) {
    r.d2 = parse_i64(f[i++]);
    r.d3 = parse_i64(f[i++]);
    r.d4 = parse_i64(f[i++]);
  } else {
    r.A = parse_i64(f[i++]);
    r.B = parse_i64(f[i++]);
  }
  r.disc = parse_i64(f[i++]);
  r.height = parse_i64(f[i++]);
  r.points = static_cast<long>(parse_i64(f[i++]));
  r.window = parse_i64(f[i++]);
  r.class_count = static_cast<long>(parse_i64(f[i++]));
  r.n_smooth = parse_u64(f[i++]);
  r.d_selected = parse_u64(f[i++]);
  r.tau_n = parse_u64(f[i++]);
  r.tau_d = parse_u64(f[i++]);
  return r;
}

void ShardAggregate::init(const SweepOptions& opt) {
  curves = window_empty = split_fallback = rank_covered = 0;
  point_pow_sum.assign(opt.s_list.size(), mpz_class(0));
  disc_pow_sum.assign(opt.t_list.size(), mpz_class(0));
  rank_pow_sum.assign(opt.s_list.size(), mpz_class(0));
  census.assign(opt.census_moduli.size(), 0);
}

void ShardAggregate::merge(const ShardAggregate& other) {
  curves += other.curves;
  window_empty += other.window_empty;
  split_fallback += other.split_fallback;
  rank_covered += other.rank_covered;
  for (size_t i = 0; i < point_pow_sum.size(); ++i) point_pow_sum[i] += other.point_pow_sum[i];
  for (size_t i = 0; i < disc_pow_sum.size(); ++i) disc_pow_sum[i] += other.disc_pow_sum[i];
  for (size_t i = 0; i < rank_pow_sum.size(); ++i) rank_pow_sum[i] += other.rank_pow_sum[i];
  for (size_t i = 0; i < census.size(); ++i) census[i] += other.census[i];
}

namespace {

void join_mpz(std::ostringstream& os, const std::vector<mpz_class>& v) {
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i].get_str();
}

std::vector<mpz_class> parse_mpz_list(const std::string& s, size_t expect) {
  std::vector<mpz_class> out;
  if (!s.empty())
    for (const auto& f : split_fields(s, ',')) {
      mpz_class v;
      if (mpz_set_str(v.get_mpz_t(), f.c_str(), 10) != 0)
        fail(errc::parse_error, "bad integer '" + f + "'");
      out.push_back(std::move(v));
    }
  if (out.size() != expect) fail(errc::parse_error, "aggregate list has wrong length");
  return out;
}

}  // namespace

std::string ShardAggregate::serialize() const {
  std::ostringstream os;
  os << "curves=" << curves << " we=" << window_empty << " sf=" << split_fallback
     << " rankcov=" << rank_covered << " ppow=";
  join_mpz(os, point_pow_sum);
  os << " dpow=";
  join_mpz(os, disc_pow_sum);
  os << " rpow=";
  join_mpz(os, rank_pow_sum);
  os << " census=";
  for (size_t i = 0; i < census.size(); ++i) os << (i ? "," : "") << census[i];
  return os.str();
}

ShardAggregate ShardAggregate::parse(const std::string& line, const SweepOptions& opt) {
  ShardAggregate agg;
  agg.init(opt);
  std::map<std::string, std::string> kv;
  for (const auto& tok : split_fields(line, ' ')) {
    size_t eq = tok.find('=');
    if (eq == std::string::npos) fail(errc::parse_error, "bad aggregate token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"curves", "we", "sf", "rankcov", "ppow", "dpow", "rpow", "census"})
    if (!kv.count(key)) fail(errc::parse_error, std::string("aggregate misses '") + key + "'");
  agg.curves = parse_u64(kv["curves"]);
  agg.window_empty = parse_u64(kv["we"]);
  agg.split_fallback = parse_u64(kv["sf"]);
  agg.rank_covered = parse_u64(kv["rankcov"]);
  agg.point_pow_sum = parse_mpz_list(kv["ppow"], opt.s_list.size());
  agg.disc_pow_sum = parse_mpz_list(kv["dpow"], opt.t_list.size());
  agg.rank_pow_sum = parse_mpz_list(kv["rpow"], opt.s_list.size());
  agg.census.clear();
  if (!kv["census"].empty())
    for (const auto& f : split_fields(kv["census"], ',')) agg.census.push_back(parse_u64(f));
  if (agg.census.size() != opt.census_moduli.size())
    fail(errc::parse_error, "census list has wrong length");
  return agg;
}

std::vector<ShardPlan> plan_shards(const SweepOptions& opt) {
  opt.validate();
  ScanBounds sb = scan_bounds(opt.family, to_i64(opt.height_max));
  i64 lo = -sb.outer_max, hi = sb.outer_max;
  u64 span = static_cast<u64>(hi - lo + 1);
  u64 k = std::min<u64>(opt.shards, span);
  if (k == 0) k = 1;
  std::vector<ShardPlan> plans;
  plans.reserve(k);
  i64 cursor = lo;
  for (u64 i = 0; i < k; ++i) {
    u64 size = span / k + (i < span % k ? 1 : 0);
    ShardPlan p;
    p.index = static_cast<unsigned>(i);
    p.lo = cursor;
    p.hi = cursor + static_cast<i64>(size) - 1;
    cursor = p.hi + 1;
    plans.push_back(p);
  }
  return plans;
}

namespace {

struct EnginePrep {
  i64 T = 1;
  SmoothWindow win;
  u64 win_hi = 1;
  u64 cutoff = 1;
  i64 window = 0;
  i64 class_box = 0;
  bool need_factor = false;
  std::vector<std::pair<u64, bool>> census;  // value, fits-u64
};

EnginePrep make_prep(const SweepOptions& opt) {
  EnginePrep p;
  p.T = to_i64(opt.height_max);
  p.win = make_window(opt.height_max, opt.delta);
  p.win_hi = fits_i64(p.win.hi) ? static_cast<u64>(to_i64(p.win.hi)) : ~u64{0};
  p.cutoff = fits_i64(p.win.cutoff) ? static_cast<u64>(to_i64(p.win.cutoff)) : ~u64{0};
  p.window = to_i64(opt.point_window);
  p.class_box = to_i64(opt.class_box);
  p.need_factor = opt.want_records || !opt.t_list.empty();
  for (const auto& m : opt.census_moduli) {
    bool fits = m.fits_ulong_p();
    p.census.emplace_back(fits ? m.get_ui() : 0, fits);
  }
  return p;
}

u64 pow_u64(u64 b, unsigned e) {
  u64 r = 1;
  while (e--) r *= b;
  return r;
}

long count_points_w(i64 A, i64 B, i64 W) {
  long c = 0;
  for (i64 x = -W; x <= W; ++x) {
    i128 rhs = i128(x) * x * x + i128(A) * x + B;
    if (rhs < 0) continue;
    u128 r = u128(rhs);
    u128 s = isqrt_u128(r);
    if (s * s == r) c += (r == 0) ? 1 : 2;
  }
  return c;
}

long count_points_m(i64 d2, i64 d3, i64 d4, i64 W) {
  long c = 0;
  for (i64 x = -W; x <= W; ++x) {
    i128 rhs = ((i128(x) + d2) * x + d4) * x;
    i128 s = 4 * rhs + i128(d3) * d3;
    if (s < 0) continue;
    u128 r = u128(s);
    u128 u = isqrt_u128(r);
    if (u * u != r) continue;
    if ((i128(u) - d3) % 2 != 0) continue;
    c += (u == 0) ? 1 : 2;
  }
  return c;
}

void process_curve(const CurveLite& c, const EnginePrep& prep, const SweepOptions& opt,
                   const RankTable* ranks, ShardOutput& out) {
  ShardAggregate& agg = out.agg;
  ++agg.curves;
  u64 absdisc = c.disc < 0 ? u64(-c.disc) : u64(c.disc);

  u64 n = 1, F = 1, d_sel = 1, tau_n = 1, tau_d = 1;
  if (prep.need_factor) {
    Factorization fac = factor_u64(absdisc);
    Factorization fac_n;
    for (const auto& pp : fac) {
      if (pp.e < 2) continue;
      F *= pp.e / 2 + 1;
      u64 p = pp.p.get_ui();
      if (p <= prep.cutoff) {
        n *= pow_u64(p, pp.e / 2);
        fac_n.push_back({pp.p, pp.e / 2});
      }
    }
    if (n <= prep.win_hi) {
      d_sel = n;
      tau_n = tau_d = tau(fac_n);
    } else {
      SmoothPart sp = smooth_decomposition(mpz_class(static_cast<unsigned long>(n)), fac_n, prep.win);
      d_sel = sp.d.get_ui();
      tau_n = sp.tau_n;
      tau_d = sp.tau_d;
      agg.window_empty += sp.window_empty ? 1 : 0;
      agg.split_fallback += sp.split_fallback ? 1 : 0;
    }
    for (size_t ti = 0; ti < opt.t_list.size(); ++ti) {
      mpz_class term;
      mpz_ui_pow_ui(term.get_mpz_t(), F, opt.t_list[ti]);
      agg.disc_pow_sum[ti] += term;
    }
  }

  for (size_t mi = 0; mi < prep.census.size(); ++mi) {
    const auto& [m, fits] = prep.census[mi];
    if (fits && absdisc % m == 0) ++agg.census[mi];
  }

  long pts = -1;
  if (prep.window > 0) {
    pts = c.marked ? count_points_m(c.d2, c.d3, c.d4, prep.window)
                   : count_points_w(c.A, c.B, prep.window);
    for (size_t si = 0; si < opt.s_list.size(); ++si) {
      mpz_class term;
      mpz_ui_pow_ui(term.get_mpz_t(), static_cast<unsigned long>(pts), opt.s_list[si]);
      agg.point_pow_sum[si] += term;
    }
  }

  long classes = -1;
  if (prep.class_box > 0 && !c.marked) {
    WeierstrassCurve E((mpz_class(static_cast<long>(c.A))), mpz_class(static_cast<long>(c.B)));
    auto pv = search_integral_points(E, mpz_class(static_cast<long>(-prep.window)),
                                     mpz_class(static_cast<long>(prep.window)));
    classes = static_cast<long>(psi_classes(E, pv, opt.class_box).size());
  }

  if (ranks && !c.marked) {
    auto it = ranks->find(std::make_pair(mpz_class(static_cast<long>(c.A)),
                                         mpz_class(static_cast<long>(c.B))));
    if (it != ranks->end()) {
      ++agg.rank_covered;
      for (size_t si = 0; si < opt.s_list.size(); ++si) {
        mpz_class term = 1;
        term <<= static_cast<unsigned long>(opt.s_list[si]) * it->second.rank;
        agg.rank_pow_sum[si] += term;
      }
    }
  }

  if (opt.want_records) {
    SweepRecord r;
    r.marked = c.marked;
    r.A = c.A;
    r.B = c.B;
    r.d2 = c.d2;
    r.d3 = c.d3;
    r.d4 = c.d4;
    r.disc = c.disc;
    r.height = c.height;
    r.points = pts;
    r.window = prep.window;
    r.class_count = classes;
    r.n_smooth = n;
    r.d_selected = d_sel;
    r.tau_n = tau_n;
    r.tau_d = tau_d;
    out.records.push_back(r);
  }
}

}  // namespace

ShardOutput run_shard(const SweepOptions& opt, const ShardPlan& plan, const RankTable* ranks) {
  ShardOutput out;
  out.index = plan.index;
  out.agg.init(opt);
  if (plan.lo > plan.hi) return out;
  EnginePrep prep = make_prep(opt);
  scan_slice(opt.family, prep.T, plan.lo, plan.hi,
             [&](const CurveLite& c) { process_curve(c, prep, opt, ranks, out); });
  return out;
}

SweepResult run_sweep(const SweepOptions& opt, const RankTable* ranks) {
  opt.validate();
  auto plans = plan_shards(opt);
  std::vector<size_t> order(plans.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (opt.permute_shards) {
    std::mt19937_64 rng(opt.permute_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<ShardOutput> outs(plans.size());
  unsigned hw = std::thread::hardware_concurrency();
  unsigned workers = opt.workers ? opt.workers : (hw ? hw : 1);
  workers = std::min<unsigned>(workers, static_cast<unsigned>(plans.size()));
  if (workers <= 1) {
    for (size_t k : order) outs[k] = run_shard(opt, plans[k], ranks);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        while (true) {
          size_t k = next.fetch_add(1);
          if (k >= order.size()) break;
          outs[order[k]] = run_shard(opt, plans[order[k]], ranks);
        }
      });
    for (auto& t : pool) t.join();
  }

  SweepResult res;
  res.totals.init(opt);
  for (size_t k : order) res.totals.merge(outs[k].agg);  // exact sums, order-free
  res.shard_aggs.resize(plans.size());
  for (auto& o : outs) res.shard_aggs[o.index] = o.agg;
  if (opt.want_records)
    for (auto& o : outs)
      res.records.insert(res.records.end(), o.records.begin(), o.records.end());
  return res;
}

namespace {

mpq_class exact_ratio(const mpz_class& num, u64 den) {
  if (den == 0) return mpq_class(0);
  mpq_class r(num, mpz_class(static_cast<unsigned long>(den)));
  r.canonicalize();
  return r;
}

}  // namespace

std::vector<MomentRow> moment_report(const FamilySpec& spec, const std::vector<mpz_class>& T_grid,
                                     const std::vector<unsigned>& s_list,
                                     const std::vector<unsigned>& t_list, const mpz_class& x_window,
                                     const mpq_class& delta, unsigned shards,
                                     const RankTable* ranks) {
  if (T_grid.empty()) fail(errc::precondition_violated, "empty height grid");
  std::vector<MomentRow> rows;
  for (const auto& T : T_grid) {
    SweepOptions opt;
    opt.family = spec;
    opt.height_max = T;
    opt.point_window = x_window;
    opt.delta = delta;
    opt.s_list = s_list;
    opt.t_list = t_list;
    opt.shards = shards;
    opt.want_records = false;
    SweepResult res = run_sweep(opt, ranks);
    MomentRow row;
    row.T = T;
    row.family_size = res.totals.curves;
    for (const auto& sum : res.totals.point_pow_sum)
      row.avg_points_pow.push_back(exact_ratio(sum, res.totals.curves));
    for (const auto& sum : res.totals.disc_pow_sum)
      row.avg_disc_pow.push_back(exact_ratio(sum, res.totals.curves));
    for (const auto& sum : res.totals.rank_pow_sum)
      row.avg_rank_pow.push_back(exact_ratio(sum, res.totals.rank_covered));
    row.rank_covered = res.totals.rank_covered;
    row.window_empty = res.totals.window_empty;
    row.split_fallback = res.totals.split_fallback;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CensusRow> divisibility_census(const FamilySpec& spec, const mpz_class& T,
                                           const std::vector<mpz_class>& moduli, unsigned shards) {
  if (moduli.empty()) fail(errc::precondition_violated, "empty modulus list");
  SweepOptions opt;
  opt.family = spec;
  opt.height_max = T;
  opt.census_moduli = moduli;
  opt.shards = shards;
  opt.want_records = false;
  SweepResult res = run_sweep(opt);
  std::vector<CensusRow> rows;
  for (size_t i = 0; i < moduli.size(); ++i) {
    CensusRow row;
    row.T = T;
    row.modulus = moduli[i];
    row.count = res.totals.census[i];
    row.family_size = res.totals.curves;
    row.ratio = exact_ratio(mpz_class(static_cast<unsigned long>(row.count)), row.family_size);
    row.reference = mpq_class(1, moduli[i]);
    row.reference.canonicalize();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qp
