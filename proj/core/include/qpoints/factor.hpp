#pragma once

#include <vector>

#include <gmpxx.h>

#include "qpoints/numeric.hpp"

namespace qp {

struct PrimePower {
  mpz_class p;
  unsigned e = 0;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// prime factors ascending, exponents >= 1
using Factorization = std::vector<PrimePower>;

// Odd-composite witnesses chosen so the test is deterministic below 2^64.
bool is_prime_u64(u64 n);

// Trial division by sieved primes up to `trial_bound`, then Brent-cycle rho on
// the remaining cofactor with deterministic reseeding. n >= 1.
Factorization factor_u64(u64 n, unsigned trial_bound = 1024);

// Factors |n| (n != 0). Values beyond 64 bits keep trial division and rho but
// certify primality with GMP's probabilistic test.
Factorization factor(const mpz_class& n, unsigned trial_bound = 1024);

std::vector<mpz_class> divisors(const Factorization& f);  // sorted ascending
u64 tau(const Factorization& f);                          // number of divisors
u64 tau_u64(u64 n);

unsigned valuation(mpz_class n, const mpz_class& p);

// primes <= 2^16, built once
const std::vector<std::uint32_t>& small_primes();

}  // namespace qp
