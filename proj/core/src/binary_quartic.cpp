#include "qpoints/binary_quartic.hpp"

#include <sstream>
#include <vector>

#include "qpoints/error.hpp"

namespace qp {

bool operator<(const BinaryQuartic& x, const BinaryQuartic& y) {
  const mpq_class* xs[5] = {&x.a, &x.b, &x.c, &x.d, &x.e};
  const mpq_class* ys[5] = {&y.a, &y.b, &y.c, &y.d, &y.e};
  for (int i = 0; i < 5; ++i) {
    int c = cmp(*xs[i], *ys[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

namespace {

std::string rat_str(const mpq_class& q) {
  std::ostringstream os;
  if (q.get_den() == 1)
    os << q.get_num();
  else
    os << q.get_num() << "/" << q.get_den();
  return os.str();
}

mpq_class parse_rat(const std::string& tok) {
  mpq_class q;
  if (tok.empty() || mpq_set_str(q.get_mpq_t(), tok.c_str(), 10) != 0 || q.get_den() == 0)
    fail(errc::parse_error, "bad rational '" + tok + "'");
  q.canonicalize();
  return q;
}

}  // namespace

std::string BinaryQuartic::str() const {
  return rat_str(a) + "," + rat_str(b) + "," + rat_str(c) + "," + rat_str(d) + "," + rat_str(e);
}

BinaryQuartic BinaryQuartic::parse(const std::string& text) {
  std::vector<std::string> toks;
  size_t pos = 0;
  while (true) {
    size_t comma = text.find(',', pos);
    toks.push_back(comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (toks.size() != 5)
    fail(errc::parse_error, "quartic needs five comma separated coefficients: " + text);
  return {parse_rat(toks[0]), parse_rat(toks[1]), parse_rat(toks[2]), parse_rat(toks[3]),
          parse_rat(toks[4])};
}

QuarticInvariants invariants(const BinaryQuartic& f) {
  const mpq_class &a = f.a, &b = f.b, &c = f.c, &d = f.d, &e = f.e;
  QuarticInvariants out;
  out.I = 12 * a * e - 3 * b * d + c * c;
  out.J = 72 * a * c * e - 27 * a * d * d - 27 * b * b * e + 9 * b * c * d - 2 * c * c * c;
  out.disc = (4 * out.I * out.I * out.I - out.J * out.J) / 27;
  return out;
}

bool is_integral(const BinaryQuartic& f) {
  for (const mpq_class* q : {&f.a, &f.b, &f.c, &f.d, &f.e})
    if (q->get_den() != 1) return false;
  return true;
}

bool is_integer_matrix(const BinaryQuartic& f) {
  if (!is_integral(f)) return false;
  return mpz_divisible_ui_p(f.b.get_num().get_mpz_t(), 4) &&
         mpz_divisible_ui_p(f.c.get_num().get_mpz_t(), 6) &&
         mpz_divisible_ui_p(f.d.get_num().get_mpz_t(), 4);
}

bool is_flattened(const BinaryQuartic& f) { return is_integral(f) && f.a == 1 && f.b == 0; }

std::pair<mpz_class, mpz_class> derived_invariants(const BinaryQuartic& f) {
  QuarticInvariants inv = invariants(f);
  if (inv.I.get_den() != 1 || inv.J.get_den() != 1)
    fail(errc::not_divisible, "invariants are not integers");
  mpz_class In = inv.I.get_num(), Jn = inv.J.get_num();
  if (!mpz_divisible_ui_p(In.get_mpz_t(), 12))
    fail(errc::not_divisible, "12 does not divide I = " + In.get_str());
  if (!mpz_divisible_ui_p(Jn.get_mpz_t(), 432))
    fail(errc::not_divisible, "432 does not divide J = " + Jn.get_str());
  return {In / 12, Jn / 432};
}

mpq_class eval(const BinaryQuartic& f, const mpq_class& x, const mpq_class& y) {
  return (((f.a * x + f.b * y) * x + f.c * y * y) * x + f.d * y * y * y) * x +
         f.e * y * y * y * y;
}

namespace {

// coefficients of (s X + t Y)^n, index = power of X
std::vector<mpq_class> pow_linear(const mpq_class& s, const mpq_class& t, int n) {
  std::vector<mpq_class> out(static_cast<size_t>(n) + 1);
  mpz_class binom;
  for (int j = 0; j <= n; ++j) {
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(j));
    mpq_class term = mpq_class(binom);
    for (int k = 0; k < j; ++k) term *= s;
    for (int k = 0; k < n - j; ++k) term *= t;
    out[static_cast<size_t>(j)] = term;
  }
  return out;
}

BinaryQuartic substitute(const ProjectiveTransform& g, const BinaryQuartic& f) {
  // (X,Y)g = (g.a X + g.c Y, g.b X + g.d Y)
  std::vector<mpq_class> acc(5, mpq_class(0));
  const mpq_class* coeff[5] = {&f.a, &f.b, &f.c, &f.d, &f.e};
  for (int i = 0; i < 5; ++i) {  // term coeff * U^(4-i) * V^i
    if (*coeff[i] == 0) continue;
    auto u = pow_linear(mpq_class(g.a()), mpq_class(g.c()), 4 - i);
    auto v = pow_linear(mpq_class(g.b()), mpq_class(g.d()), i);
    for (size_t ju = 0; ju < u.size(); ++ju)
      for (size_t jv = 0; jv < v.size(); ++jv) acc[ju + jv] += *coeff[i] * u[ju] * v[jv];
  }
  return {acc[4], acc[3], acc[2], acc[1], acc[0]};
}

}  // namespace

BinaryQuartic act_unimodular(const ProjectiveTransform& g, const BinaryQuartic& f) {
  if (!g.is_unimodular())
    fail(errc::precondition_violated, "act_unimodular needs |det| = 1, got det = " + g.det().get_str());
  return substitute(g, f);
}

BinaryQuartic act_twisted(const ProjectiveTransform& g, const BinaryQuartic& f) {
  BinaryQuartic out = substitute(g, f);
  mpq_class scale = mpq_class(g.det());
  scale = 1 / (scale * scale);
  out.a *= scale;
  out.b *= scale;
  out.c *= scale;
  out.d *= scale;
  out.e *= scale;
  return out;
}

CompletedQuartic complete_quartic(const BinaryQuartic& f) {
  if (!is_integral(f)) fail(errc::not_integral, "complete_quartic needs integral coefficients");
  if (f.a != 1) fail(errc::not_monic, "leading coefficient is " + rat_str(f.a));
  mpz_class b = f.b.get_num();
  if (!mpz_divisible_ui_p(b.get_mpz_t(), 4))
    fail(errc::shift_not_integral, "4 does not divide the cubic coefficient " + b.get_str());
  mpz_class shift = -b / 4;
  ProjectiveTransform g(mpz_class(1), mpz_class(0), shift, mpz_class(1));
  CompletedQuartic out{act_unimodular(g, f), mpq_class(shift)};
  return out;
}

FlatCDE quartic_cde(const BinaryQuartic& f, int d_scale) {
  if (d_scale != 4 && d_scale != 8)
    fail(errc::precondition_violated, "d_scale must be 4 or 8");
  if (!is_flattened(f)) fail(errc::divisibility_failure, "form is not flattened");
  mpz_class cn = f.c.get_num(), dn = f.d.get_num();
  if (!mpz_divisible_ui_p(cn.get_mpz_t(), 6))
    fail(errc::divisibility_failure, "6 does not divide " + cn.get_str());
  if (!mpz_divisible_ui_p(dn.get_mpz_t(), static_cast<unsigned long>(d_scale)))
    fail(errc::divisibility_failure,
         std::to_string(d_scale) + " does not divide " + dn.get_str());
  return {cn / 6, dn / d_scale, f.e.get_num()};
}

}  // namespace qp
