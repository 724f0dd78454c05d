#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qpoints/binary_quartic.hpp"
#include "qpoints/curves.hpp"
#include "qpoints/error.hpp"
#include "qpoints/fibre.hpp"
#include "qpoints/mordell.hpp"
#include "qpoints/store.hpp"
#include "qpoints/sweep.hpp"
#include "qpoints/transform.hpp"

namespace qp::cli {

namespace {

int exit_code_for(errc c) {
  switch (c) {
    case errc::io_error:
    case errc::corrupt_cache:
      return 2;
    case errc::invariant_violation:
      return 3;
    default:
      return 1;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t c = s.find(sep, start);
    if (c == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, c - start));
    start = c + 1;
  }
  return out;
}

mpz_class parse_mpz(const std::string& s) {
  mpz_class v;
  if (s.empty() || mpz_set_str(v.get_mpz_t(), s.c_str(), 10) != 0)
    fail(errc::parse_error, "bad integer '" + s + "'");
  return v;
}

mpq_class parse_mpq(const std::string& s) {
  mpq_class v;
  if (s.empty() || mpq_set_str(v.get_mpq_t(), s.c_str(), 10) != 0)
    fail(errc::parse_error, "bad rational '" + s + "'");
  if (v.get_den() == 0) fail(errc::parse_error, "zero denominator in '" + s + "'");
  v.canonicalize();
  return v;
}

std::pair<mpz_class, mpz_class> parse_mpz_pair(const std::string& s) {
  auto f = split(s, ',');
  if (f.size() != 2) fail(errc::parse_error, "expected two comma-separated integers, got '" + s + "'");
  return {parse_mpz(f[0]), parse_mpz(f[1])};
}

std::vector<mpz_class> parse_mpz_list(const std::string& s) {
  std::vector<mpz_class> out;
  for (const auto& f : split(s, ',')) out.push_back(parse_mpz(f));
  return out;
}

std::vector<unsigned> parse_unsigned_list(const std::string& s) {
  std::vector<unsigned> out;
  for (const auto& f : split(s, ',')) {
    mpz_class v = parse_mpz(f);
    if (v < 0 || !v.fits_uint_p()) fail(errc::parse_error, "exponent out of range '" + f + "'");
    out.push_back(static_cast<unsigned>(v.get_ui()));
  }
  return out;
}

// "m:rA.rB|rA.rB" per flag occurrence
FamilySpec build_family(const std::string& kind, const std::string& sign,
                        const std::vector<std::string>& congruence_flags) {
  FamilySpec spec;
  spec.kind = parse_family_kind(kind);
  spec.disc_sign = parse_disc_sign(sign);
  for (const auto& c : congruence_flags) {
    size_t colon = c.find(':');
    if (colon == std::string::npos)
      fail(errc::config_error, "congruence condition needs the form m:rA.rB|rA.rB");
    CongruenceCondition cond;
    cond.modulus = parse_mpz(c.substr(0, colon));
    for (const auto& pr : split(c.substr(colon + 1), '|')) {
      size_t dot = pr.find('.');
      if (dot == std::string::npos)
        fail(errc::config_error, "residue pair needs the form rA.rB, got '" + pr + "'");
      cond.residues.emplace_back(parse_mpz(pr.substr(0, dot)), parse_mpz(pr.substr(dot + 1)));
    }
    spec.congruences.push_back(std::move(cond));
  }
  return spec;
}

unsigned default_shards() {
  const char* env = std::getenv("QPOINTS_SHARDS");
  if (!env || !*env) return 1;
  mpz_class v;
  if (mpz_set_str(v.get_mpz_t(), env, 10) != 0 || v < 1 || !v.fits_uint_p())
    fail(errc::config_error, std::string("bad QPOINTS_SHARDS value '") + env + "'");
  return static_cast<unsigned>(v.get_ui());
}

void write_artifact(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(errc::io_error, "cannot open output file: " + path);
  f << text;
  f.flush();
  if (!f) fail(errc::io_error, "write failed: " + path);
}

struct SweepArgs {
  std::string family = "univ";
  std::string sign = "any";
  std::vector<std::string> congruences;
  std::string height_max;
  std::string window = "0";
  std::string class_box = "0";
  std::string delta = "1/12";
  std::string s_list, t_list, census;
  unsigned shards = 1;
  unsigned workers = 0;
  bool permute = false;
  u64 seed = 1;
  bool stats_only = false;
  std::string cache, out_path, ranks_path;
};

SweepOptions to_options(const SweepArgs& a) {
  SweepOptions opt;
  opt.family = build_family(a.family, a.sign, a.congruences);
  opt.height_max = parse_mpz(a.height_max);
  opt.point_window = parse_mpz(a.window);
  opt.class_box = parse_mpz(a.class_box);
  opt.delta = parse_mpq(a.delta);
  if (!a.s_list.empty()) opt.s_list = parse_unsigned_list(a.s_list);
  if (!a.t_list.empty()) opt.t_list = parse_unsigned_list(a.t_list);
  if (!a.census.empty()) opt.census_moduli = parse_mpz_list(a.census);
  opt.shards = a.shards;
  opt.workers = a.workers;
  opt.permute_shards = a.permute;
  opt.permute_seed = a.seed;
  opt.want_records = !a.stats_only;
  return opt;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact arithmetic on binary quartic forms, integral points, and family sweeps"};
  app.name("qpoints");
  app.require_subcommand(1);

  // invariants
  auto* inv_cmd = app.add_subcommand("invariants", "invariants I, J, Delta of a binary quartic");
  std::string inv_quartic, inv_act, inv_twisted;
  bool inv_derived = false;
  inv_cmd->add_option("--quartic", inv_quartic, "coefficients a,b,c,d,e")->required();
  inv_cmd->add_flag("--derived", inv_derived, "also print the scaled invariants I/12 and J/432");
  inv_cmd->add_option("--act", inv_act, "apply the unimodular action of a,b,c,d first");
  inv_cmd->add_option("--twisted", inv_twisted, "apply the determinant-twisted action of a,b,c,d first");
  inv_cmd->get_option("--act")->excludes(inv_cmd->get_option("--twisted"));

  // bijection
  auto* bij_cmd = app.add_subcommand("bijection", "integral point <-> flattened quartic");
  std::string bij_curve, bij_point, bij_quartic;
  bij_cmd->add_option("--curve", bij_curve, "curve coefficients A,B");
  bij_cmd->add_option("--point", bij_point, "integral point x,y");
  bij_cmd->add_option("--quartic", bij_quartic, "flattened quartic to invert");
  bij_cmd->get_option("--curve")->needs(bij_cmd->get_option("--point"));
  bij_cmd->get_option("--quartic")->excludes(bij_cmd->get_option("--curve"));

  // fibre
  auto* fib_cmd = app.add_subcommand("fibre", "flattening transforms and the fibre size bound");
  std::string fib_quartic;
  i64 fib_box = 0;
  bool fib_refined = false;
  fib_cmd->add_option("--quartic", fib_quartic, "flattened quartic a,b,c,d,e")->required();
  fib_cmd->add_option("--box", fib_box, "label search box |a|,|b| <= N")->required();
  fib_cmd->add_flag("--refined", fib_refined, "use the refined small-valuation factor");

  // points
  auto* pts_cmd = app.add_subcommand("points", "integral points in an x-range");
  std::string pts_curve, pts_marked, pts_window, pts_lo, pts_hi;
  bool pts_two_torsion = false;
  pts_cmd->add_option("--curve", pts_curve, "curve coefficients A,B");
  pts_cmd->add_option("--marked", pts_marked, "marked model coefficients d2,d3,d4");
  pts_cmd->add_flag("--two-torsion", pts_two_torsion, "treat the marked model as the 2-torsion variant");
  pts_cmd->add_option("--window", pts_window, "search |x| <= W");
  pts_cmd->add_option("--lo", pts_lo, "lower x bound");
  pts_cmd->add_option("--hi", pts_hi, "upper x bound");
  pts_cmd->get_option("--curve")->excludes(pts_cmd->get_option("--marked"));
  pts_cmd->get_option("--window")->excludes(pts_cmd->get_option("--lo"));
  pts_cmd->get_option("--window")->excludes(pts_cmd->get_option("--hi"));
  pts_cmd->get_option("--lo")->needs(pts_cmd->get_option("--hi"));

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "family sweep with records and exact statistics");
  SweepArgs sa;
  try {
    sa.shards = default_shards();
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  sweep_cmd->add_option("--family", sa.family,
                        "univ, min, congruence, marked-point, or marked-2-torsion");
  sweep_cmd->add_option("--height-max", sa.height_max, "height bound T")->required();
  sweep_cmd->add_option("--window", sa.window, "point search |x| <= W (0 disables)");
  sweep_cmd->add_option("--class-box", sa.class_box, "class partition label box (0 disables)");
  sweep_cmd->add_option("--delta", sa.delta, "smoothness exponent as p/q");
  sweep_cmd->add_option("--s", sa.s_list, "point moment exponents, comma separated");
  sweep_cmd->add_option("--t", sa.t_list, "square divisor moment exponents, comma separated");
  sweep_cmd->add_option("--census", sa.census, "divisibility census moduli, comma separated");
  sweep_cmd->add_option("--disc-sign", sa.sign, "any, positive, or negative");
  sweep_cmd->add_option("--congruence", sa.congruences, "condition m:rA.rB|rA.rB, repeatable");
  sweep_cmd->add_option("--shards", sa.shards, "shard count (default from QPOINTS_SHARDS)");
  sweep_cmd->add_option("--workers", sa.workers, "worker threads (0 = all cores)");
  sweep_cmd->add_flag("--permute", sa.permute, "process shards in a seeded random order");
  sweep_cmd->add_option("--seed", sa.seed, "permutation seed");
  sweep_cmd->add_flag("--stats-only", sa.stats_only, "keep aggregates, drop per-curve records");
  sweep_cmd->add_option("--cache", sa.cache, "resumable shard cache file");
  sweep_cmd->add_option("--out", sa.out_path, "write the report here instead of stdout");
  sweep_cmd->add_option("--ranks", sa.ranks_path, "rank table csv for coverage columns");

  // moments
  auto* mom_cmd = app.add_subcommand("moments", "exact moment table over a height grid");
  std::string mom_family = "univ", mom_sign = "any", mom_heights, mom_s, mom_t;
  std::string mom_window = "0", mom_delta = "1/12", mom_out, mom_ranks;
  std::vector<std::string> mom_congruences;
  unsigned mom_shards = sa.shards;
  mom_cmd->add_option("--family", mom_family, "family kind");
  mom_cmd->add_option("--heights", mom_heights, "height grid T1,T2,...")->required();
  mom_cmd->add_option("--s", mom_s, "point moment exponents");
  mom_cmd->add_option("--t", mom_t, "square divisor moment exponents");
  mom_cmd->add_option("--window", mom_window, "point search |x| <= W");
  mom_cmd->add_option("--delta", mom_delta, "smoothness exponent as p/q");
  mom_cmd->add_option("--disc-sign", mom_sign, "any, positive, or negative");
  mom_cmd->add_option("--congruence", mom_congruences, "condition m:rA.rB|rA.rB, repeatable");
  mom_cmd->add_option("--shards", mom_shards, "shard count");
  mom_cmd->add_option("--ranks", mom_ranks, "rank table csv");
  mom_cmd->add_option("--out", mom_out, "write the table here instead of stdout");

  // census
  auto* cen_cmd = app.add_subcommand("census", "discriminant divisibility census");
  std::string cen_family = "univ", cen_sign = "any", cen_height, cen_moduli, cen_out;
  std::vector<std::string> cen_congruences;
  unsigned cen_shards = sa.shards;
  cen_cmd->add_option("--family", cen_family, "family kind");
  cen_cmd->add_option("--height-max", cen_height, "height bound T")->required();
  cen_cmd->add_option("--moduli", cen_moduli, "moduli m1,m2,...")->required();
  cen_cmd->add_option("--disc-sign", cen_sign, "any, positive, or negative");
  cen_cmd->add_option("--congruence", cen_congruences, "condition m:rA.rB|rA.rB, repeatable");
  cen_cmd->add_option("--shards", cen_shards, "shard count");
  cen_cmd->add_option("--out", cen_out, "write the table here instead of stdout");

  // ranks
  auto* rnk_cmd = app.add_subcommand("ranks", "validate and query a rank table");
  std::string rnk_file, rnk_lookup;
  rnk_cmd->add_option("--file", rnk_file, "rank table csv")->required();
  rnk_cmd->add_option("--lookup", rnk_lookup, "curve A,B to look up");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (inv_cmd->parsed()) {
      BinaryQuartic f = BinaryQuartic::parse(inv_quartic);
      if (!inv_act.empty()) f = act_unimodular(ProjectiveTransform::parse(inv_act), f);
      if (!inv_twisted.empty()) f = act_twisted(ProjectiveTransform::parse(inv_twisted), f);
      QuarticInvariants v = invariants(f);
      out << "I=" << v.I.get_str() << " J=" << v.J.get_str() << " Delta=" << v.disc.get_str()
          << "\n";
      if (inv_derived) {
        auto [ip, jp] = derived_invariants(f);
        out << "Iprime=" << ip.get_str() << " Jprime=" << jp.get_str() << "\n";
      }
      return 0;
    }

    if (bij_cmd->parsed()) {
      if (!bij_quartic.empty()) {
        BinaryQuartic f = BinaryQuartic::parse(bij_quartic);
        auto [curve, point] = quartic_to_point(f);
        out << "curve=" << curve.A.get_str() << "," << curve.B.get_str() << "\n";
        out << "point=" << point.x.get_str() << "," << point.y.get_str() << "\n";
        return 0;
      }
      if (bij_curve.empty() || bij_point.empty())
        fail(errc::config_error, "bijection needs --curve with --point, or --quartic");
      auto [A, B] = parse_mpz_pair(bij_curve);
      auto [x, y] = parse_mpz_pair(bij_point);
      WeierstrassCurve curve(A, B);
      IntegralPoint point{x, y};
      BinaryQuartic f = point_to_quartic(curve, point);
      out << "quartic=" << f.str() << "\n";
      auto [curve2, point2] = quartic_to_point(f);
      if (!(curve2 == curve) || !(point2 == point))
        fail(errc::invariant_violation, "bijection failed to round-trip");
      out << "roundtrip=ok\n";
      return 0;
    }

    if (fib_cmd->parsed()) {
      BinaryQuartic f = BinaryQuartic::parse(fib_quartic);
      for (const auto& t : flattening_transforms(f, fib_box))
        out << t.a << "," << t.b << ";" << t.det.get_str() << ";" << t.image.str() << "\n";
      // the bound lives on the discriminant of the curve this form belongs to
      WeierstrassCurve curve = quartic_to_point(f).first;
      out << "bound=" << fibre_bound(make_profile(curve.disc), fib_refined).get_str() << "\n";
      return 0;
    }

    if (pts_cmd->parsed()) {
      if (pts_curve.empty() == pts_marked.empty())
        fail(errc::config_error, "points needs exactly one of --curve or --marked");
      mpz_class lo, hi;
      if (!pts_window.empty()) {
        mpz_class w = parse_mpz(pts_window);
        if (w < 0) fail(errc::config_error, "window must be nonnegative");
        lo = -w;
        hi = w;
      } else if (!pts_lo.empty()) {
        lo = parse_mpz(pts_lo);
        hi = parse_mpz(pts_hi);
      } else {
        fail(errc::config_error, "points needs --window or --lo/--hi");
      }
      std::vector<IntegralPoint> found;
      if (!pts_curve.empty()) {
        auto [A, B] = parse_mpz_pair(pts_curve);
        found = search_integral_points(WeierstrassCurve(A, B), lo, hi);
      } else {
        auto f = split(pts_marked, ',');
        if (f.size() != 3) fail(errc::parse_error, "marked model needs d2,d3,d4");
        MarkedVariant variant =
            pts_two_torsion ? MarkedVariant::marked_two_torsion : MarkedVariant::marked_point;
        MarkedCurve mc(parse_mpz(f[0]), parse_mpz(f[1]), parse_mpz(f[2]), variant);
        found = search_marked_points(mc, lo, hi);
      }
      for (const auto& p : found) out << p.x.get_str() << "," << p.y.get_str() << "\n";
      out << "count=" << found.size() << "\n";
      return 0;
    }

    if (sweep_cmd->parsed()) {
      SweepOptions opt = to_options(sa);
      RankTable table;
      const RankTable* ranks = nullptr;
      if (!sa.ranks_path.empty()) {
        table = load_rank_table_file(sa.ranks_path);
        ranks = &table;
      }
      SweepResult res =
          sa.cache.empty() ? run_sweep(opt, ranks) : run_sweep_cached(opt, sa.cache, ranks);
      write_artifact(emit_report(opt, res), sa.out_path, out);
      return 0;
    }

    if (mom_cmd->parsed()) {
      FamilySpec spec = build_family(mom_family, mom_sign, mom_congruences);
      std::vector<unsigned> s_list, t_list;
      if (!mom_s.empty()) s_list = parse_unsigned_list(mom_s);
      if (!mom_t.empty()) t_list = parse_unsigned_list(mom_t);
      RankTable table;
      const RankTable* ranks = nullptr;
      if (!mom_ranks.empty()) {
        table = load_rank_table_file(mom_ranks);
        ranks = &table;
      }
      auto rows = moment_report(spec, parse_mpz_list(mom_heights), s_list, t_list,
                                parse_mpz(mom_window), parse_mpq(mom_delta), mom_shards, ranks);
      write_artifact(emit_table(moment_table(rows, s_list, t_list)), mom_out, out);
      return 0;
    }

    if (cen_cmd->parsed()) {
      FamilySpec spec = build_family(cen_family, cen_sign, cen_congruences);
      auto rows =
          divisibility_census(spec, parse_mpz(cen_height), parse_mpz_list(cen_moduli), cen_shards);
      write_artifact(emit_table(census_table(rows)), cen_out, out);
      return 0;
    }

    if (rnk_cmd->parsed()) {
      RankTable table = load_rank_table_file(rnk_file);
      out << "entries=" << table.size() << "\n";
      if (!rnk_lookup.empty()) {
        auto key = parse_mpz_pair(rnk_lookup);
        auto it = table.find(key);
        if (it == table.end()) fail(errc::config_error, "curve not covered by the rank table");
        out << "rank=" << it->second.rank << " provenance=" << it->second.provenance << "\n";
      }
      return 0;
    }

    fail(errc::config_error, "no subcommand selected");
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qp::cli
