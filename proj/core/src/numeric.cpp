#include "qpoints/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "qpoints/error.hpp"

namespace qp {

const char* errc_name(errc c) {
  switch (c) {
    case errc::not_divisible: return "NotDivisible";
    case errc::not_monic: return "NotMonic";
    case errc::shift_not_integral: return "ShiftNotIntegral";
    case errc::not_integral: return "NotIntegral";
    case errc::singular_transform: return "SingularTransform";
    case errc::point_not_on_curve: return "PointNotOnCurve";
    case errc::singular_curve: return "SingularCurve";
    case errc::divisibility_failure: return "DivisibilityFailure";
    case errc::not_a_representation_of_one: return "NotARepresentationOfOne";
    case errc::not_integer_matrix: return "NotIntegerMatrix";
    case errc::zero_discriminant: return "ZeroDiscriminant";
    case errc::invariant_mismatch: return "InvariantMismatch";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::not_smooth: return "NotSmooth";
    case errc::parse_error: return "ParseError";
    case errc::duplicate_curve: return "DuplicateCurve";
    case errc::config_error: return "ConfigError";
    case errc::config_mismatch: return "ConfigMismatch";
    case errc::corrupt_cache: return "CorruptCache";
    case errc::io_error: return "IoError";
    case errc::invariant_violation: return "InvariantViolation";
  }
  return "UnknownError";
}

u64 isqrt_u64(u64 n) {
  if (n == 0) return 0;
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

u128 isqrt_u128(u128 n) {
  if (n == 0) return 0;
  u128 r = static_cast<u128>(std::sqrt(static_cast<long double>(n)));
  if (r > 0) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_square_u64(u64 n, u64* root) {
  u64 r = isqrt_u64(n);
  if (root) *root = r;
  return r * r == n;
}

bool is_square_u128(u128 n, u128* root) {
  u128 r = isqrt_u128(n);
  if (root) *root = r;
  return r * r == n;
}

u64 mulmod_u64(u64 a, u64 b, u64 m) {
  return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

u64 powmod_u64(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

mpz_class floor_root(const mpz_class& n, unsigned long k) {
  if (n < 0) fail(errc::precondition_violated, "floor_root of negative value");
  mpz_class r;
  mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
  return r;
}

mpz_class ceil_root(const mpz_class& n, unsigned long k) {
  mpz_class r = floor_root(n, k);
  mpz_class rk;
  mpz_pow_ui(rk.get_mpz_t(), r.get_mpz_t(), k);
  if (rk < n) r += 1;
  return r;
}

bool fits_i64(const mpz_class& v) { return v.fits_slong_p(); }

i64 to_i64(const mpz_class& v) {
  if (!v.fits_slong_p()) fail(errc::precondition_violated, "value does not fit in 64 bits");
  return static_cast<i64>(v.get_si());
}

std::pair<mpz_class, mpz_class> euclid_completion(const mpz_class& p, const mpz_class& q,
                                                  long offset) {
  mpz_class g, alpha, beta;
  mpz_gcdext(g.get_mpz_t(), alpha.get_mpz_t(), beta.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
  if (g != 1) fail(errc::precondition_violated, "euclid_completion needs coprime inputs");
  // all solutions: (alpha + t*q, beta - t*p); center beta into (-|p|/2, |p|/2]
  if (p != 0) {
    mpz_class ap = abs(p);
    mpz_class t;
    mpz_fdiv_q(t.get_mpz_t(), beta.get_mpz_t(), ap.get_mpz_t());
    beta -= t * ap;                      // beta in [0, |p|)
    if (2 * beta > ap) beta -= ap;       // beta in (-|p|/2, |p|/2]
    // re-derive alpha so that alpha*p + beta*q = 1 stays exact
    mpz_class num = 1 - beta * q;
    mpz_class rem;
    mpz_fdiv_qr(alpha.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), p.get_mpz_t());
    if (rem != 0) fail(errc::precondition_violated, "euclid_completion internal");
  }
  if (offset != 0) {
    alpha += mpz_class(offset) * q;
    beta -= mpz_class(offset) * p;
  }
  return {alpha, beta};
}

u64 fnv1a64(std::string_view bytes) {
  u64 h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(u64 v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::string i128_to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace qp
