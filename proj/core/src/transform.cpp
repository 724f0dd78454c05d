#include "qpoints/transform.hpp"

#include <sstream>

#include "qpoints/error.hpp"

namespace qp {

ProjectiveTransform::ProjectiveTransform(const mpz_class& a, const mpz_class& b,
                                         const mpz_class& c, const mpz_class& d)
    : _m{a, b, c, d} {
  canonicalize();
}

ProjectiveTransform::ProjectiveTransform(const mpq_class& a, const mpq_class& b,
                                         const mpq_class& c, const mpq_class& d) {
  mpz_class l = 1;
  for (const mpq_class* q : {&a, &b, &c, &d})
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q->get_den().get_mpz_t());
  const mpq_class* qs[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i) {
    mpq_class scaled = *qs[i] * l;
    scaled.canonicalize();
    _m[static_cast<size_t>(i)] = scaled.get_num();
  }
  canonicalize();
}

ProjectiveTransform::ProjectiveTransform(long a, long b, long c, long d)
    : ProjectiveTransform(mpz_class(a), mpz_class(b), mpz_class(c), mpz_class(d)) {}

void ProjectiveTransform::canonicalize() {
  mpz_class g = 0;
  for (const auto& v : _m) g = gcd(g, v);
  if (g == 0) fail(errc::singular_transform, "zero matrix");
  for (auto& v : _m) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
  for (const auto& v : _m) {
    if (v == 0) continue;
    if (v < 0)
      for (auto& w : _m) w = -w;
    break;
  }
  if (_m[0] * _m[3] == _m[1] * _m[2]) fail(errc::singular_transform, "determinant zero");
}

ProjectiveTransform ProjectiveTransform::identity() {
  return ProjectiveTransform(mpz_class(1), mpz_class(0), mpz_class(0), mpz_class(1));
}

bool ProjectiveTransform::is_unimodular() const {
  mpz_class d = det();
  return d == 1 || d == -1;
}

ProjectiveTransform ProjectiveTransform::operator*(const ProjectiveTransform& rhs) const {
  return ProjectiveTransform(mpz_class(_m[0] * rhs._m[0] + _m[1] * rhs._m[2]),
                             mpz_class(_m[0] * rhs._m[1] + _m[1] * rhs._m[3]),
                             mpz_class(_m[2] * rhs._m[0] + _m[3] * rhs._m[2]),
                             mpz_class(_m[2] * rhs._m[1] + _m[3] * rhs._m[3]));
}

bool operator<(const ProjectiveTransform& x, const ProjectiveTransform& y) {
  for (int i = 0; i < 4; ++i) {
    int c = cmp(x._m[static_cast<size_t>(i)], y._m[static_cast<size_t>(i)]);
    if (c != 0) return c < 0;
  }
  return false;
}

std::string ProjectiveTransform::str() const {
  std::ostringstream os;
  os << _m[0] << "," << _m[1] << "," << _m[2] << "," << _m[3];
  return os.str();
}

ProjectiveTransform ProjectiveTransform::parse(const std::string& text) {
  std::array<mpz_class, 4> v;
  size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    size_t comma = text.find(',', pos);
    std::string tok = comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
    if (tok.empty() || (comma == std::string::npos) != (i == 3))
      fail(errc::parse_error, "transform needs four comma separated integers: " + text);
    if (mpz_set_str(v[static_cast<size_t>(i)].get_mpz_t(), tok.c_str(), 10) != 0)
      fail(errc::parse_error, "bad integer '" + tok + "'");
    pos = comma + 1;
  }
  return ProjectiveTransform(v[0], v[1], v[2], v[3]);
}

}  // namespace qp
