#include "qpoints/factor.hpp"

#include <algorithm>
#include <numeric>

#include "qpoints/error.hpp"

namespace qp {

const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = [] {
    constexpr std::uint32_t bound = 1u << 16;
    std::vector<bool> composite(bound + 1, false);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i <= bound; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= bound; j += i)
        composite[static_cast<size_t>(j)] = true;
    }
    return out;
  }();
  return primes;
}

namespace {

bool miller_rabin(u64 n, u64 base) {
  if (base % n == 0) return true;
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  u64 x = powmod_u64(base, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = mulmod_u64(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

u64 brent_rho(u64 n) {
  // n composite; increasing c keeps the walk deterministic across retries
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    auto f = [&](u64 v) { return (mulmod_u64(v, v, n) + c) % n; };
    u64 x = 2, y = 2, ys = 2, g = 1, q = 1, r = 1;
    constexpr u64 block = 128;
    while (g == 1) {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      for (u64 k = 0; k < r && g == 1; k += block) {
        ys = y;
        u64 lim = std::min(block, r - k);
        for (u64 i = 0; i < lim; ++i) {
          y = f(y);
          u64 diff = x > y ? x - y : y - x;
          q = mulmod_u64(q, diff, n);
        }
        g = std::gcd(q, n);
      }
      r <<= 1;
    }
    if (g == n) {
      g = 1;
      while (g == 1) {
        ys = f(ys);
        u64 diff = x > ys ? x - ys : ys - x;
        g = std::gcd(diff ? diff : n, n);
      }
    }
    if (g != n) return g;
    // walk collapsed for this c; retry
  }
}

void factor_u64_into(u64 n, std::vector<std::pair<u64, unsigned>>& out, unsigned trial_bound) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out.emplace_back(n, 1);
    return;
  }
  // perfect powers keep rho away from prime squares/cubes
  u64 r;
  if (is_square_u64(n, &r)) {
    std::vector<std::pair<u64, unsigned>> sub;
    factor_u64_into(r, sub, trial_bound);
    for (auto& [p, e] : sub) out.emplace_back(p, 2 * e);
    return;
  }
  u64 d = brent_rho(n);
  factor_u64_into(d, out, trial_bound);
  factor_u64_into(n / d, out, trial_bound);
}

void merge_sorted(std::vector<std::pair<u64, unsigned>>& v) {
  std::sort(v.begin(), v.end());
  size_t w = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (w > 0 && v[w - 1].first == v[i].first)
      v[w - 1].second += v[i].second;
    else
      v[w++] = v[i];
  }
  v.resize(w);
}

}  // namespace

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  if (n < 41 * 41) return true;
  auto test = [&](std::initializer_list<u64> bases) {
    for (u64 b : bases)
      if (!miller_rabin(n, b)) return false;
    return true;
  };
  if (n < 1373653ull) return test({2, 3});
  if (n < 25326001ull) return test({2, 3, 5});
  if (n < 3215031751ull) return test({2, 3, 5, 7});
  if (n < 3474749660383ull) return test({2, 3, 5, 7, 11, 13});
  return test({2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37});
}

Factorization factor_u64(u64 n, unsigned trial_bound) {
  if (n == 0) fail(errc::precondition_violated, "factor_u64(0)");
  std::vector<std::pair<u64, unsigned>> flat;
  for (std::uint32_t p : small_primes()) {
    if (p > trial_bound) break;
    if (static_cast<u64>(p) * p > n) break;
    if (n % p == 0) {
      unsigned e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      flat.emplace_back(p, e);
    }
  }
  if (n > 1) factor_u64_into(n, flat, trial_bound);
  merge_sorted(flat);
  Factorization out;
  out.reserve(flat.size());
  for (auto& [p, e] : flat) out.push_back({mpz_class(static_cast<unsigned long>(p)), e});
  return out;
}

namespace {

// Brent rho over mpz for cofactors beyond 64 bits.
mpz_class rho_mpz(const mpz_class& n) {
  gmp_randclass rng(gmp_randinit_default);
  rng.seed(0xC0FFEEul);
  while (true) {
    mpz_class x = rng.get_z_range(n - 3) + 2;
    mpz_class c = rng.get_z_range(n - 2) + 1;
    mpz_class y = x, d = 1;
    while (d == 1) {
      x = (x * x + c) % n;
      y = (y * y + c) % n;
      y = (y * y + c) % n;
      mpz_class diff = abs(x - y);
      if (diff == 0) break;
      d = gcd(diff, n);
    }
    if (d > 1 && d < n) return d;
  }
}

void factor_mpz_into(const mpz_class& n, Factorization& out) {
  if (n == 1) return;
  if (mpz_probab_prime_p(n.get_mpz_t(), 40) > 0) {
    out.push_back({n, 1});
    return;
  }
  if (mpz_perfect_square_p(n.get_mpz_t())) {
    mpz_class r = sqrt(n);
    Factorization sub;
    factor_mpz_into(r, sub);
    for (auto& pp : sub) out.push_back({pp.p, 2 * pp.e});
    return;
  }
  mpz_class d = rho_mpz(n);
  factor_mpz_into(d, out);
  factor_mpz_into(n / d, out);
}

}  // namespace

Factorization factor(const mpz_class& n, unsigned trial_bound) {
  if (n == 0) fail(errc::precondition_violated, "factor(0)");
  mpz_class m = abs(n);
  if (m.fits_ulong_p()) return factor_u64(m.get_ui(), trial_bound);

  Factorization out;
  for (std::uint32_t p : small_primes()) {
    if (p > trial_bound) break;
    if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
      unsigned e = 0;
      while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
        mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
        ++e;
      }
      out.push_back({mpz_class(static_cast<unsigned long>(p)), e});
    }
    if (m == 1) break;
  }
  if (m > 1) {
    if (m.fits_ulong_p()) {
      for (auto& pp : factor_u64(m.get_ui(), trial_bound)) out.push_back(pp);
    } else {
      factor_mpz_into(m, out);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PrimePower& a, const PrimePower& b) { return a.p < b.p; });
  Factorization merged;
  for (auto& pp : out) {
    if (!merged.empty() && merged.back().p == pp.p)
      merged.back().e += pp.e;
    else
      merged.push_back(pp);
  }
  return merged;
}

std::vector<mpz_class> divisors(const Factorization& f) {
  std::vector<mpz_class> out{1};
  for (const auto& [p, e] : f) {
    size_t n = out.size();
    mpz_class pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (size_t i = 0; i < n; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

u64 tau(const Factorization& f) {
  u64 t = 1;
  for (const auto& pp : f) t *= pp.e + 1;
  return t;
}

u64 tau_u64(u64 n) { return tau(factor_u64(n)); }

unsigned valuation(mpz_class n, const mpz_class& p) {
  if (n == 0) fail(errc::precondition_violated, "valuation of 0");
  unsigned v = 0;
  while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
    mpz_divexact(n.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
    ++v;
  }
  return v;
}

}  // namespace qp
