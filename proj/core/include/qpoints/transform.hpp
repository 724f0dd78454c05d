#pragma once

#include <array>
#include <string>

#include <gmpxx.h>

namespace qp {

// Nonsingular plane transform up to scalars. The stored representative is the
// unique integer matrix with coprime entries whose first nonzero entry (row
// major) is positive, so equality is structural.
class ProjectiveTransform {
public:
  // entries row major: [[a, b], [c, d]]
  ProjectiveTransform(const mpz_class& a, const mpz_class& b, const mpz_class& c,
                      const mpz_class& d);
  ProjectiveTransform(const mpq_class& a, const mpq_class& b, const mpq_class& c,
                      const mpq_class& d);
  // disambiguates integer literals, which otherwise match both overloads above
  ProjectiveTransform(long a, long b, long c, long d);

  static ProjectiveTransform identity();

  const mpz_class& a() const { return _m[0]; }
  const mpz_class& b() const { return _m[1]; }
  const mpz_class& c() const { return _m[2]; }
  const mpz_class& d() const { return _m[3]; }

  // determinant of the canonical representative; nonzero by construction
  mpz_class det() const { return _m[0] * _m[3] - _m[1] * _m[2]; }
  bool is_unimodular() const;

  ProjectiveTransform operator*(const ProjectiveTransform& rhs) const;

  friend bool operator==(const ProjectiveTransform&, const ProjectiveTransform&) = default;
  // lexicographic on entries, for ordered containers
  friend bool operator<(const ProjectiveTransform& x, const ProjectiveTransform& y);

  std::string str() const;  // "a,b,c,d"
  static ProjectiveTransform parse(const std::string& text);

private:
  void canonicalize();
  std::array<mpz_class, 4> _m;
};

}  // namespace qp
