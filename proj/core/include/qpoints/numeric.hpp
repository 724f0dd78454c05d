#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include <gmpxx.h>

namespace qp {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

// floor(sqrt(n)), exact.
u64 isqrt_u64(u64 n);
u128 isqrt_u128(u128 n);
bool is_square_u64(u64 n, u64* root = nullptr);
bool is_square_u128(u128 n, u128* root = nullptr);

u64 mulmod_u64(u64 a, u64 b, u64 m);
u64 powmod_u64(u64 a, u64 e, u64 m);

// floor(n^(1/k)) for n >= 0.
mpz_class floor_root(const mpz_class& n, unsigned long k);
// smallest integer r with r^k >= n (n >= 0).
mpz_class ceil_root(const mpz_class& n, unsigned long k);

bool fits_i64(const mpz_class& v);
i64 to_i64(const mpz_class& v);

// alpha*p + beta*q = 1 for coprime (p,q), beta of minimal absolute value;
// `offset` slides along the solution line (alpha + t*q, beta - t*p) for tests
// that need several distinct completions.
std::pair<mpz_class, mpz_class> euclid_completion(const mpz_class& p, const mpz_class& q,
                                                  long offset = 0);

u64 fnv1a64(std::string_view bytes);
std::string to_hex(u64 v);

std::string i128_to_string(i128 v);

}  // namespace qp
