#include "qpoints/fibre.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "qpoints/error.hpp"

namespace qp {

SquareDivisorProfile make_profile(const mpz_class& disc) {
  if (disc == 0) fail(errc::zero_discriminant, "profile of zero discriminant");
  return make_profile(disc, factor(disc));
}

SquareDivisorProfile make_profile(const mpz_class& disc, const Factorization& fac) {
  if (disc == 0) fail(errc::zero_discriminant, "profile of zero discriminant");
  SquareDivisorProfile out;
  out.disc = disc;
  for (const auto& [p, v] : fac) {
    if (v < 2) continue;
    out.factors.emplace_back(p, v);
    // per-prime factor 4*floor(v/2)+1 saturating the cap
    if (4ul * (v / 2) + 1 >= kFibreCap) {
      out.s_primes.push_back(p);
    } else {
      mpz_class pv;
      mpz_pow_ui(pv.get_mpz_t(), p.get_mpz_t(), v);
      out.big_square_free *= pv;
    }
  }
  return out;
}

std::pair<mpz_class, mpz_class> split_delta(const SquareDivisorProfile& profile,
                                            const mpz_class& delta) {
  if (delta < 1 || !mpz_divisible_p(profile.disc.get_mpz_t(), mpz_class(delta * delta).get_mpz_t()))
    fail(errc::precondition_violated, "delta^2 must divide the discriminant");
  mpz_class nu = gcd(delta, profile.big_square_free);
  return {nu, delta / nu};
}

std::vector<mpz_class> square_divisors(const Factorization& fac) {
  Factorization half;
  for (const auto& [p, v] : fac)
    if (v >= 2) half.push_back({p, v / 2});
  return divisors(half);
}

std::vector<mpz_class> square_divisors(const mpz_class& disc) {
  if (disc == 0) fail(errc::zero_discriminant, "square divisors of zero");
  return square_divisors(factor(disc));
}

mpz_class fibre_bound(const SquareDivisorProfile& profile, bool refined) {
  mpz_class out = 1;
  for (const auto& [p, v] : profile.factors) {
    unsigned long factor_p = 4ul * (v / 2) + 1;
    if (refined && (v == 2 || v == 3)) factor_p = 4;
    out *= std::min(factor_p, kFibreCap);
  }
  return out;
}

namespace {

// exact i128 evaluation is safe when every |coeff| * (2 box)^4 stays well
// inside 128 bits
bool fast_scan_ok(const BinaryQuartic& f, i64 box, std::array<i64, 5>& coeff, mpz_class& peak) {
  if (!is_integral(f)) return false;
  const mpq_class* qs[5] = {&f.a, &f.b, &f.c, &f.d, &f.e};
  mpz_class sum = 0;
  for (int i = 0; i < 5; ++i) {
    mpz_class n = qs[i]->get_num();
    if (!n.fits_slong_p()) return false;
    coeff[static_cast<size_t>(i)] = n.get_si();
    sum += abs(n);
  }
  mpz_class b4 = mpz_class(box);
  b4 = b4 * b4;
  b4 = b4 * b4;
  peak = sum * b4;
  mpz_class lim = 1;
  lim <<= 120;
  return peak < lim;
}

i128 eval_i128(const std::array<i64, 5>& c, i64 a, i64 b) {
  i128 b1 = b, b2 = b1 * b, b3 = b2 * b, b4 = b3 * b;
  return (((static_cast<i128>(c[0]) * a + static_cast<i128>(c[1]) * b1) * a +
           static_cast<i128>(c[2]) * b2) *
              a +
          static_cast<i128>(c[3]) * b3) *
             a +
         static_cast<i128>(c[4]) * b4;
}

bool to_i128(const mpz_class& v, i128& out) {
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > 120) return false;
  mpz_class a = abs(v);
  u128 acc = 0;
  for (size_t limb = mpz_size(a.get_mpz_t()); limb-- > 0;)
    acc = (acc << 64) | mpz_getlimbn(a.get_mpz_t(), static_cast<mp_size_t>(limb));
  out = v < 0 ? -static_cast<i128>(acc) : static_cast<i128>(acc);
  return true;
}

}  // namespace

std::vector<std::pair<i64, i64>> coprime_representations(const BinaryQuartic& f,
                                                         const mpz_class& m, i64 box) {
  if (box < 0) fail(errc::precondition_violated, "negative box");
  std::vector<std::pair<i64, i64>> out;
  std::array<i64, 5> c{};
  mpz_class peak;
  if (fast_scan_ok(f, box, c, peak)) {
    i128 target;
    if (!to_i128(m, target)) return out;  // |f| <= peak < 2^120 < |m|
    for (i64 a = -box; a <= box; ++a)
      for (i64 b = -box; b <= box; ++b) {
        if (eval_i128(c, a, b) != target) continue;
        if (std::gcd(a < 0 ? -a : a, b < 0 ? -b : b) != 1) continue;
        out.emplace_back(a, b);
      }
    return out;
  }
  for (i64 a = -box; a <= box; ++a)
    for (i64 b = -box; b <= box; ++b) {
      if (std::gcd(a < 0 ? -a : a, b < 0 ? -b : b) != 1) continue;
      if (eval(f, mpq_class(static_cast<long>(a)), mpq_class(static_cast<long>(b))) == m)
        out.emplace_back(a, b);
    }
  return out;
}

namespace {

struct Candidate {
  i64 a, b;
  mpz_class delta;
};

// scan of all normalized coprime pairs whose value is a square divisor squared
std::vector<Candidate> scan_square_values(const BinaryQuartic& f,
                                          const std::vector<mpz_class>& deltas, i64 box) {
  std::vector<Candidate> out;
  std::array<i64, 5> c{};
  mpz_class peak;
  auto normalized = [](i64 a, i64 b) { return a > 0 || (a == 0 && b > 0); };
  if (fast_scan_ok(f, box, c, peak)) {
    std::vector<std::pair<i128, size_t>> squares;  // value -> delta index
    for (size_t i = 0; i < deltas.size(); ++i) {
      i128 d2;
      if (to_i128(mpz_class(deltas[i] * deltas[i]), d2)) squares.emplace_back(d2, i);
    }
    std::sort(squares.begin(), squares.end());
    if (squares.empty()) return out;
    i128 max_sq = squares.back().first;
    for (i64 a = 0; a <= box; ++a)
      for (i64 b = -box; b <= box; ++b) {
        if (!normalized(a, b)) continue;
        i128 v = eval_i128(c, a, b);
        if (v < 1 || v > max_sq) continue;
        auto it = std::lower_bound(squares.begin(), squares.end(), std::make_pair(v, size_t{0}));
        if (it == squares.end() || it->first != v) continue;
        if (std::gcd(a, b < 0 ? -b : b) != 1) continue;
        out.push_back({a, b, deltas[it->second]});
      }
    return out;
  }
  std::set<mpz_class> squares;
  for (const auto& d : deltas) squares.insert(d * d);
  for (i64 a = 0; a <= box; ++a)
    for (i64 b = -box; b <= box; ++b) {
      if (!normalized(a, b)) continue;
      if (std::gcd(a, b < 0 ? -b : b) != 1) continue;
      mpq_class v = eval(f, mpq_class(static_cast<long>(a)), mpq_class(static_cast<long>(b)));
      if (v.get_den() != 1 || v < 1) continue;
      auto it = squares.find(v.get_num());
      if (it == squares.end()) continue;
      mpz_class delta = sqrt(*it);
      out.push_back({a, b, delta});
    }
  return out;
}

}  // namespace

std::vector<FlatteningTransform> flattening_transforms(const BinaryQuartic& f, i64 box) {
  if (!is_flattened(f)) fail(errc::not_integral, "flattening_transforms needs a flattened form");
  QuarticInvariants inv = invariants(f);
  if (inv.disc == 0) fail(errc::zero_discriminant, "fibre of a degenerate form");
  mpz_class disc = inv.disc.get_num();

  std::vector<mpz_class> deltas = square_divisors(disc);
  std::vector<FlatteningTransform> kept;
  std::set<ProjectiveTransform> seen;

  for (const Candidate& cand : scan_square_values(f, deltas, box)) {
    mpz_class a(cand.a), b(cand.b);
    auto [alpha, beta] = euclid_completion(a, b);
    ProjectiveTransform base(a, b, -beta, alpha);
    BinaryQuartic lifted = act_unimodular(base, f);  // leading coefficient delta^2
    mpq_class a0 = lifted.a, a1 = lifted.b;
    for (int sign : {1, -1}) {
      mpz_class mu = sign * cand.delta;
      mpq_class lambda = -mpq_class(mu) * a1 / (4 * a0);
      // [[1,0],[lambda,mu]] * base, as an exact rational matrix
      ProjectiveTransform gamma(mpq_class(a), mpq_class(b),
                                lambda * a - mpq_class(mu) * beta,
                                lambda * b + mpq_class(mu) * alpha);
      BinaryQuartic image = act_twisted(gamma, f);
      if (!is_flattened(image)) continue;
      if (!seen.insert(gamma).second) continue;
      if (gamma.det() != mu)
        fail(errc::invariant_violation, "canonical determinant drifted from the sign choice");
      kept.push_back({gamma, sign > 0 ? cand.a : -cand.a, sign > 0 ? cand.b : -cand.b, mu,
                      cand.delta * cand.delta, image});
    }
  }

  std::sort(kept.begin(), kept.end(), [](const FlatteningTransform& x, const FlatteningTransform& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  for (size_t i = 1; i < kept.size(); ++i)
    if (kept[i - 1].a == kept[i].a && kept[i - 1].b == kept[i].b)
      fail(errc::invariant_violation, "two transforms share one labeled representation");
  return kept;
}

BoxVerdict pgl2_flattened_equivalent(const BinaryQuartic& f1, const BinaryQuartic& f2, i64 box) {
  QuarticInvariants i1 = invariants(f1), i2 = invariants(f2);
  if (i1.I != i2.I || i1.J != i2.J)
    fail(errc::invariant_mismatch, "forms have different invariants and cannot be equivalent");
  for (const auto& t : flattening_transforms(f1, box))
    if (t.image == f2) return BoxVerdict::equivalent_within_box;
  return BoxVerdict::not_found_within_box;
}

}  // namespace qp
