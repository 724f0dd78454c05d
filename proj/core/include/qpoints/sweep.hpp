#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "qpoints/curves.hpp"
#include "qpoints/factor.hpp"
#include "qpoints/fibre.hpp"

namespace qp {

enum class FamilyKind { univ, min, congruence, marked_point, marked_two_torsion };
enum class DiscSign { any, positive, negative };

const char* family_kind_name(FamilyKind k);
FamilyKind parse_family_kind(const std::string& name);
const char* disc_sign_name(DiscSign s);
DiscSign parse_disc_sign(const std::string& name);

// allowed residues of (A mod m, B mod m); modulus >= 2, residues nonempty
struct CongruenceCondition {
  mpz_class modulus;
  std::vector<std::pair<mpz_class, mpz_class>> residues;
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::univ;
  std::vector<CongruenceCondition> congruences;  // congruence kind only
  DiscSign disc_sign = DiscSign::any;

  void validate() const;
  std::string canonical() const;  // stable one-line encoding
};

// one member of an enumerated family; weierstrass kinds fill A, B, marked
// kinds fill d2, d3, d4
struct FamilyCurve {
  bool marked = false;
  mpz_class A, B;
  mpz_class d2, d3, d4;
  mpz_class disc;
  mpz_class height;
};

// curves with disc != 0, height <= T, passing the family's filters, in
// deterministic order: A ascending then B (or d2, d3, d4 ascending)
void enumerate_family(const FamilySpec& spec, const mpz_class& T,
                      const std::function<void(const FamilyCurve&)>& yield);
std::vector<FamilyCurve> family_list(const FamilySpec& spec, const mpz_class& T);
u64 family_count(const FamilySpec& spec, const mpz_class& T);

// profile of disc plus n = prod over p <= cutoff with v_p(disc) >= 2 of
// p^floor(v_p/2); cutoff 0 means unbounded
std::pair<SquareDivisorProfile, mpz_class> square_part_profile(const mpz_class& disc,
                                                               const mpz_class& smooth_cutoff);

// divisor of m in [y, x*y], removing the largest prime factor while the value
// still exceeds x*y; requires 1 <= y <= m and all prime factors of m <= x
mpz_class greedy_divisor(const mpz_class& m, const mpz_class& x, const mpz_class& y);

// integer admissible window [lo, hi] = [ceil(T^(1/6-delta)), floor(T^(1/6))]
// plus the smoothness bound cutoff = floor(T^delta); all endpoints exact
struct SmoothWindow {
  mpz_class T;
  mpq_class delta;
  mpz_class lo = 1;
  mpz_class hi = 1;
  mpz_class cutoff = 1;
};
SmoothWindow make_window(const mpz_class& T, const mpq_class& delta);

struct SmoothPart {
  mpz_class n = 1;
  mpz_class d = 1;          // selected divisor; n itself when n <= window hi
  mpz_class window_lo = 1;  // integer window endpoints used for selection
  mpz_class window_hi = 1;
  mpz_class d1 = 1, d2 = 1, d3 = 1;  // n = d*d1*d2*d3, cofactors <= window hi
                                     // except in tallied fallback cases
  u64 tau_n = 1, tau_d = 1;
  bool window_empty = false;    // no divisor in window; largest <= hi was taken
  bool split_fallback = false;  // greedy split failed, or a later candidate
                                // divisor was needed, or the cofactors had to
                                // stretch past the cap
};

// d = n when n <= hi, else the tau-maximal divisor of n inside the window
// (ties to the smallest); cofactors split off greedily so each stays <= hi;
// when no three-way split of n/d fits under hi the next candidate divisor
// (tau descending, value ascending) is tried, and when no candidate admits
// one the canonical divisor is kept with a minimax split whose parts may
// exceed hi; every departure is tallied as a fallback; enforces
// tau(n) <= tau(d)^4 unless the window was empty
SmoothPart smooth_decomposition(const mpz_class& n, const mpz_class& T, const mpq_class& delta);
SmoothPart smooth_decomposition(const mpz_class& n, const Factorization& fac,
                                const SmoothWindow& win);

// engine ceiling keeping every derived quantity inside i64
inline constexpr i64 kEngineHeightCap = 4000000000000000;

struct SweepOptions {
  FamilySpec family;
  mpz_class height_max = 1;
  mpz_class point_window = 0;  // 0 skips point search, else counts |x| <= window
  mpz_class class_box = 0;     // 0 skips the class partition (weierstrass only)
  mpq_class delta = mpq_class(1, 12);
  std::vector<unsigned> s_list;  // moment exponents on point counts
  std::vector<unsigned> t_list;  // moment exponents on prod (floor(v_p/2)+1)
  std::vector<mpz_class> census_moduli;
  unsigned shards = 1;
  unsigned workers = 0;         // 0 = hardware concurrency
  bool permute_shards = false;  // scrambled processing order; results unchanged
  u64 permute_seed = 1;
  bool want_records = true;

  void validate() const;
  std::string canonical() const;  // identity for caching; order-only knobs excluded
};

struct SweepRecord {
  bool marked = false;
  i64 A = 0, B = 0;
  i64 d2 = 0, d3 = 0, d4 = 0;
  i64 disc = 0;
  i64 height = 0;
  long points = -1;       // -1 = not searched
  i64 window = 0;
  long class_count = -1;  // -1 = not computed
  u64 n_smooth = 1;
  u64 d_selected = 1;
  u64 tau_n = 1, tau_d = 1;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

std::string record_header(bool marked);
std::string record_line(const SweepRecord& r);
SweepRecord parse_record_line(const std::string& line, bool marked);

// exact per-shard sums; merging in any order yields identical totals
struct ShardAggregate {
  u64 curves = 0;
  u64 window_empty = 0;
  u64 split_fallback = 0;
  u64 rank_covered = 0;
  std::vector<mpz_class> point_pow_sum;  // parallel to s_list
  std::vector<mpz_class> disc_pow_sum;   // parallel to t_list
  std::vector<mpz_class> rank_pow_sum;   // parallel to s_list, terms 2^(s*rank)
  std::vector<u64> census;               // parallel to census_moduli

  void init(const SweepOptions& opt);
  void merge(const ShardAggregate& other);
  std::string serialize() const;
  static ShardAggregate parse(const std::string& line, const SweepOptions& opt);

  friend bool operator==(const ShardAggregate&, const ShardAggregate&) = default;
};

// contiguous slice of the outer coordinate (A, or d2 for marked kinds)
struct ShardPlan {
  unsigned index = 0;
  i64 lo = 0, hi = -1;  // inclusive; lo > hi means an empty slice
};
std::vector<ShardPlan> plan_shards(const SweepOptions& opt);

struct ShardOutput {
  unsigned index = 0;
  std::vector<SweepRecord> records;
  ShardAggregate agg;
};
ShardOutput run_shard(const SweepOptions& opt, const ShardPlan& plan,
                      const RankTable* ranks = nullptr);

struct SweepResult {
  std::vector<SweepRecord> records;        // deterministic order, empty if unwanted
  ShardAggregate totals;
  std::vector<ShardAggregate> shard_aggs;  // by shard index
};
SweepResult run_sweep(const SweepOptions& opt, const RankTable* ranks = nullptr);

struct MomentRow {
  mpz_class T;
  u64 family_size = 0;
  std::vector<mpq_class> avg_points_pow;  // parallel to s_list; empty without window
  std::vector<mpq_class> avg_disc_pow;    // parallel to t_list
  std::vector<mpq_class> avg_rank_pow;    // parallel to s_list over covered curves
  u64 rank_covered = 0;
  u64 window_empty = 0;
  u64 split_fallback = 0;
};

// one row per T; exact rational averages, 0^0 = 1, empty family averages 0
std::vector<MomentRow> moment_report(const FamilySpec& spec, const std::vector<mpz_class>& T_grid,
                                     const std::vector<unsigned>& s_list,
                                     const std::vector<unsigned>& t_list,
                                     const mpz_class& x_window,
                                     const mpq_class& delta = mpq_class(1, 12),
                                     unsigned shards = 1, const RankTable* ranks = nullptr);

struct CensusRow {
  mpz_class T;
  mpz_class modulus;
  u64 count = 0;
  u64 family_size = 0;
  mpq_class ratio;      // count / family_size, 0 for an empty family
  mpq_class reference;  // 1 / modulus, display-only comparison value
};

std::vector<CensusRow> divisibility_census(const FamilySpec& spec, const mpz_class& T,
                                           const std::vector<mpz_class>& moduli,
                                           unsigned shards = 1);

}  // namespace qp
