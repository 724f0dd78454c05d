#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kDataDir =
#ifdef QPOINTS_DATA_DIR
    QPOINTS_DATA_DIR;
#else
    "data";
#endif

struct RunResult {
  int rc;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int rc = qp::cli::run(std::move(args), out, err);
  return {rc, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qp_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("invariants command with optional action and derived values") {
  auto r = run_cli({"invariants", "--quartic", "1,0,-18,40,-27"});
  CHECK(r.rc == 0);
  CHECK(r.out == "I=0 J=3456 Delta=-442368\n");
  r = run_cli({"invariants", "--quartic", "1,0,-18,40,-27", "--derived"});
  CHECK(r.rc == 0);
  CHECK(r.out == "I=0 J=3456 Delta=-442368\nIprime=0 Jprime=8\n");
  // both actions leave the invariants alone, by design
  r = run_cli({"invariants", "--quartic", "1,0,-18,40,-27", "--act", "0,1,1,0"});
  CHECK(r.rc == 0);
  CHECK(r.out == "I=0 J=3456 Delta=-442368\n");
  r = run_cli({"invariants", "--quartic", "1,0,-18,40,-27", "--twisted", "1,0,0,2"});
  CHECK(r.rc == 0);
  CHECK(r.out == "I=0 J=3456 Delta=-442368\n");
  r = run_cli({"invariants", "--quartic", "1,0,0,1,0", "--derived"});
  CHECK(r.rc == 1);
  CHECK(r.out == "I=0 J=-27 Delta=-27\n");
  CHECK(r.err.find("NotDivisible") != std::string::npos);
  r = run_cli({"invariants"});
  CHECK(r.rc == 1);
}

TEST_CASE("bijection command in both directions") {
  auto r = run_cli({"bijection", "--curve", "0,-2", "--point", "3,5"});
  CHECK(r.rc == 0);
  CHECK(r.out == "quartic=1,0,-18,40,-27\nroundtrip=ok\n");
  r = run_cli({"bijection", "--quartic", "1,0,-18,40,-27"});
  CHECK(r.rc == 0);
  CHECK(r.out == "curve=0,-2\npoint=3,5\n");
  r = run_cli({"bijection", "--curve", "0,-2", "--point", "1,1"});
  CHECK(r.rc == 1);
  CHECK(r.err.find("PointNotOnCurve") != std::string::npos);
}

TEST_CASE("fibre command lists transforms and the counting bound") {
  auto r = run_cli({"fibre", "--quartic", "1,0,-18,40,-27", "--box", "40"});
  CHECK(r.rc == 0);
  CHECK(r.out ==
        "-1,0;-1;1,0,-18,-40,-27\n"
        "1,0;1;1,0,-18,40,-27\n"
        "bound=65\n");
  r = run_cli({"fibre", "--quartic", "1,0,-18,40,-27", "--box", "40", "--refined"});
  CHECK(r.rc == 0);
  CHECK(r.out.find("bound=52\n") != std::string::npos);
}

TEST_CASE("points command on plain and marked models") {
  auto r = run_cli({"points", "--curve", "0,-2", "--window", "10000"});
  CHECK(r.rc == 0);
  CHECK(r.out == "3,-5\n3,5\ncount=2\n");
  r = run_cli({"points", "--curve", "0,17", "--lo", "-2", "--hi", "8"});
  CHECK(r.rc == 0);
  CHECK(r.out == "-2,-3\n-2,3\n-1,-4\n-1,4\n2,-5\n2,5\n4,-9\n4,9\n8,-23\n8,23\ncount=10\n");
  r = run_cli({"points", "--marked", "0,1,-1", "--window", "6"});
  CHECK(r.rc == 0);
  CHECK(r.out ==
        "-1,-1\n-1,0\n0,-1\n0,0\n1,-1\n1,0\n2,-3\n2,2\n6,-15\n6,14\ncount=10\n");
  r = run_cli({"points", "--marked", "1,0,1", "--two-torsion", "--window", "3"});
  CHECK(r.rc == 0);
  CHECK(r.out == "0,0\ncount=1\n");
  r = run_cli({"points", "--curve", "0,0", "--window", "5"});
  CHECK(r.rc == 1);
  CHECK(r.err.find("SingularCurve") != std::string::npos);
  r = run_cli({"points", "--curve", "0,-2", "--marked", "0,1,-1", "--window", "5"});
  CHECK(r.rc == 1);
}

TEST_CASE("ranks command reports entries and lookups") {
  std::string file = std::string(kDataDir) + "/sample_ranks.csv";
  auto r = run_cli({"ranks", "--file", file, "--lookup", "0,17"});
  CHECK(r.rc == 0);
  CHECK(r.out == "entries=8\nrank=2 provenance=descent-tables\n");
  r = run_cli({"ranks", "--file", file});
  CHECK(r.rc == 0);
  CHECK(r.out == "entries=8\n");
  r = run_cli({"ranks", "--file", "/nonexistent/path.csv"});
  CHECK(r.rc == 2);
  CHECK(r.err.find("IoError") != std::string::npos);
}

TEST_CASE("sweep report is stable and self describing") {
  auto r = run_cli({"sweep", "--family", "univ", "--height-max", "108", "--window", "100"});
  CHECK(r.rc == 0);
  CHECK(r.out.rfind("#QPREPORT v1 confighash=", 0) == 0);
  CHECK(r.out.find("#CONFIG v1;kind=univ;sign=any;T=108;window=100;classbox=0;delta=1/12;"
                   "s=;t=;census=;shards=1;records=1\n") != std::string::npos);
  CHECK(r.out.find("#COLUMNS A,B,Delta,H,points,window,classcount,n_smooth,d_selected,tau_n,tau_d\n") !=
        std::string::npos);
  CHECK(r.out.find("\n-3,-1,1296,108,4,100,-1,1,1,1,1\n") != std::string::npos);
  CHECK(r.out.find("\n#TOTALS curves=32 we=0 sf=0 rankcov=0 ppow= dpow= rpow= census=\n") !=
        std::string::npos);
  // unknown family names are configuration errors
  r = run_cli({"sweep", "--family", "nonsense", "--height-max", "10"});
  CHECK(r.rc == 1);
  CHECK(r.err.find("ConfigError") != std::string::npos);
  r = run_cli({"sweep", "--family", "univ", "--height-max", "10", "--delta", "1/5"});
  CHECK(r.rc == 1);
}

TEST_CASE("sweep writes reports and caches to files") {
  TempDir tmp;
  std::string out_path = (tmp.path / "report.txt").string();
  std::string cache_path = (tmp.path / "sweep.cache").string();
  auto direct = run_cli({"sweep", "--family", "univ", "--height-max", "2000", "--window", "40",
                         "--shards", "3"});
  CHECK(direct.rc == 0);
  auto filed = run_cli({"sweep", "--family", "univ", "--height-max", "2000", "--window", "40",
                        "--shards", "3", "--out", out_path, "--cache", cache_path});
  CHECK(filed.rc == 0);
  std::ifstream in(out_path, std::ios::binary);
  std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(written == direct.out);
  // warm cache reproduces the identical report
  auto warm = run_cli({"sweep", "--family", "univ", "--height-max", "2000", "--window", "40",
                       "--shards", "3", "--cache", cache_path});
  CHECK(warm.rc == 0);
  CHECK(warm.out == direct.out);
  // a corrupted cache is an i/o class failure
  std::fstream f(cache_path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(0, std::ios::end);
  auto size = static_cast<long>(f.tellg());
  f.seekp(size / 2);
  f.put('~');
  f.close();
  auto bad = run_cli({"sweep", "--family", "univ", "--height-max", "2000", "--window", "40",
                      "--shards", "3", "--cache", cache_path});
  CHECK(bad.rc == 2);
  CHECK(bad.err.find("CorruptCache") != std::string::npos);
  // the same cache path refuses a different configuration
  fs::remove(cache_path);
  run_cli({"sweep", "--family", "univ", "--height-max", "2000", "--window", "40", "--shards", "3",
           "--cache", cache_path});
  auto mismatch = run_cli({"sweep", "--family", "univ", "--height-max", "2000", "--window", "41",
                           "--shards", "3", "--cache", cache_path});
  CHECK(mismatch.rc == 1);
  CHECK(mismatch.err.find("ConfigMismatch") != std::string::npos);
}

TEST_CASE("shard count defaults from the environment") {
  setenv("QPOINTS_SHARDS", "4", 1);
  auto from_env = run_cli({"sweep", "--family", "univ", "--height-max", "500"});
  unsetenv("QPOINTS_SHARDS");
  auto explicit_flag = run_cli({"sweep", "--family", "univ", "--height-max", "500", "--shards", "4"});
  CHECK(from_env.rc == 0);
  CHECK(from_env.out == explicit_flag.out);
  CHECK(from_env.out.find("shards=4") != std::string::npos);
  setenv("QPOINTS_SHARDS", "zzz", 1);
  auto bad = run_cli({"sweep", "--family", "univ", "--height-max", "500"});
  unsetenv("QPOINTS_SHARDS");
  CHECK(bad.rc == 1);
  CHECK(bad.err.find("QPOINTS_SHARDS") != std::string::npos);
}

TEST_CASE("moments and census emit parseable tables") {
  auto r = run_cli({"moments", "--family", "univ", "--heights", "10,1000", "--s", "1,2", "--t", "1",
                    "--window", "30"});
  CHECK(r.rc == 0);
  CHECK(r.out ==
        "#QPTABLE v1 moments\n"
        "#COLUMNS T,family,avg_points_pow_1,avg_points_pow_2,avg_sqdivcount_pow_1,"
        "avg_rank2_pow_1,avg_rank2_pow_2,rank_covered,window_empty,split_fallback\n"
        "10,2,2,5,4,0,0,0,0,0\n"
        "1000,166,197/83,1070/83,492/83,0,0,0,0,0\n");
  r = run_cli({"census", "--family", "univ", "--height-max", "10000", "--moduli", "4,9"});
  CHECK(r.rc == 0);
  CHECK(r.out ==
        "#QPTABLE v1 census\n"
        "#COLUMNS T,modulus,count,family,ratio,reference\n"
        "10000,4,1048,1048,1,1/4\n"
        "10000,9,346,1048,173/524,1/9\n");
  r = run_cli({"census", "--family", "univ", "--height-max", "100", "--moduli", "1"});
  CHECK(r.rc == 1);
}

TEST_CASE("rank aware sweeps count coverage") {
  std::string file = std::string(kDataDir) + "/sample_ranks.csv";
  auto r = run_cli({"sweep", "--family", "univ", "--height-max", "108", "--window", "5", "--s", "1",
                    "--ranks", file});
  CHECK(r.rc == 0);
  CHECK(r.out.find("rankcov=6") != std::string::npos);
  CHECK(r.out.find("rpow=9") != std::string::npos);
}

TEST_CASE("usage errors stay in the configuration exit class") {
  auto r = run_cli({"no-such-command"});
  CHECK(r.rc == 1);
  r = run_cli({"sweep"});  // missing required height
  CHECK(r.rc == 1);
  r = run_cli({});
  CHECK(r.rc == 1);
  r = run_cli({"--help"});
  CHECK(r.rc == 0);
  CHECK(r.out.find("sweep") != std::string::npos);
}
