#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cocyclelab/lab.hpp"

using namespace cocyclelab;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("cocyclelab_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(path / name);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
};

// run with artifacts directed into dir via a config file
int run(const TempDir& dir, std::vector<std::string> args, std::string* output = nullptr) {
  LabConfig cfg;
  cfg.output_dir = dir.str();
  std::string cfg_path = dir.file("lab.toml", serialize_config(cfg));
  args.insert(args.begin(), {"--config", cfg_path});
  std::ostringstream out;
  int code = run_cli(args, out);
  if (output) *output = out.str();
  return code;
}

}  // namespace

TEST_CASE("config round-trips and validates") {
  LabConfig c;
  c.grid = 96;
  c.tol_nil = 3.5e-7;
  c.output_dir = "artifacts/run one";
  c.ball_cap = 9;
  LabConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(serialize_config(back) == serialize_config(c));

  CHECK_THROWS_AS(parse_config("[numerics]\ngrid = 4\n"), config_error);
  CHECK_THROWS_AS(parse_config("[numerics]\nbogus = 1\n"), config_error);
  CHECK_THROWS_AS(parse_config("[automorphism]\na = 1\nb = 0\nc = 0\nd = 1\n"), std::exception);  // not hyperbolic
  CHECK_THROWS_AS(parse_config("[output]\ndir = unquoted\n"), config_error);

  // comments and blank lines are tolerated
  LabConfig d = parse_config("# header\n[search]\nperiod_cap = 3  # inline\n\nball_cap = 2\n");
  CHECK(d.period_cap == 3);
  CHECK(d.ball_cap == 2);
}

TEST_CASE("floats serialize with 17 significant digits") {
  CHECK(fmt17(M_PI) == "3.1415926535897931");
  CHECK(fmt17(1.0) == "1");
  CHECK(fmt17(1e-9) == "1.0000000000000001e-09");
  double x = 0.1 + 0.2;
  CHECK(fmt17(x) == fmt17(x));
}

TEST_CASE("periodic points command matches the trace count") {
  TempDir dir("pp");
  std::string out;
  REQUIRE(run(dir, {"periodic-points", "-n", "2"}, &out) == 0);
  CHECK(out.find("32 rows") != std::string::npos);

  std::string csv = dir.slurp("periodic_points.csv");
  CHECK(csv.rfind("period,a,b,d\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 33);  // header + 32 points
}

TEST_CASE("classify command reports type III for a conformal twist") {
  TempDir dir("cls");
  std::string dsl = dir.file("a.dsl", "diag(1.3, 1.3) * R(0.7)");
  std::string out;
  REQUIRE(run(dir, {"classify", "--cocycle", dsl}, &out) == 0);
  CHECK(out.find("type III") != std::string::npos);
  CHECK(dir.slurp("classification.json").find("\"type\": \"III\"") != std::string::npos);
}

TEST_CASE("identical inputs give byte-identical artifacts") {
  TempDir d1("det1"), d2("det2");
  std::string dsl1 = d1.file("a.dsl", "conj(R(2*pi*x1), [[1, 1], [0, 1]])");
  std::string dsl2 = d2.file("a.dsl", "conj(R(2*pi*x1), [[1, 1], [0, 1]])");
  REQUIRE(run(d1, {"plot", "--cocycle", dsl1, "--what", "line"}) == 0);
  REQUIRE(run(d2, {"plot", "--cocycle", dsl2, "--what", "line"}) == 0);
  CHECK(d1.slurp("plot.csv") == d2.slurp("plot.csv"));
  CHECK(d1.slurp("plot.svg") == d2.slurp("plot.svg"));
  CHECK(d1.slurp("plot.csv").rfind("x1,x2,theta,residual\n", 0) == 0);
  CHECK(d1.slurp("plot.svg").find("<svg") != std::string::npos);
}

TEST_CASE("livsic commands solve and scan") {
  TempDir dir("liv");
  std::string out;
  // coboundary of cos(2 pi x1): solvable with zero obstructions
  std::string cob = "compf(cos(2*pi*x1)) - cos(2*pi*x1)";
  REQUIRE(run(dir, {"livsic-solve", "--field", cob}, &out) == 0);
  CHECK(out.find("solved") != std::string::npos);
  CHECK(dir.slurp("phi.csv").rfind("m1,m2,re,im\n", 0) == 0);

  REQUIRE(run(dir, {"livsic-scan", "--field", cob, "-n", "4"}, &out) == 0);
  CHECK(out.find("max obstruction ") != std::string::npos);
  CHECK(dir.slurp("obstructions.csv").rfind("period,a,b,d,value\n", 0) == 0);

  REQUIRE(run(dir, {"livsic-solve", "--field", "cos(2*pi*x1)"}, &out) == 0);
  CHECK(out.find("no solution") != std::string::npos);
}

TEST_CASE("test-cohomology command verdicts and exit codes") {
  TempDir dir("tc");
  std::string out;
  int code = run(dir,
                 {"test-cohomology", "--kind", "scalar", "--k-a", "exp(compf(0.1*cos(2*pi*x1)) - 0.1*cos(2*pi*x1))",
                  "--k-b", "1", "-n", "3"},
                 &out);
  REQUIRE(code == 0);
  CHECK(out.find("verdict: cohomologous") != std::string::npos);
  CHECK(dir.slurp("verdict.json").find("\"status\": \"cohomologous\"") != std::string::npos);

  code = run(dir, {"test-cohomology", "--kind", "scalar", "--k-a", "2", "--k-b", "1", "-n", "3"}, &out);
  REQUIRE(code == 0);
  CHECK(out.find("verdict: not-cohomologous") != std::string::npos);
  CHECK(out.find("witness") != std::string::npos);
}

TEST_CASE("gallery command checks its own expectations") {
  TempDir dir("gal");
  std::string out;
  REQUIRE(run(dir, {"gallery", "7.1.i", "--check"}, &out) == 0);
  CHECK(out.find("all checks passed") != std::string::npos);
  CHECK(out.find("classified as I'") != std::string::npos);

  REQUIRE(run(dir, {"gallery", "2.6", "--check"}, &out) == 0);
  CHECK(out.find("not-cohomologous") != std::string::npos);

  REQUIRE(run(dir, {"gallery", "bogus"}, &out) == 1);
  CHECK(out.find("error:") != std::string::npos);
}

TEST_CASE("usage and file errors exit nonzero") {
  TempDir dir("err");
  std::string out;
  CHECK(run(dir, {"no-such-command"}, &out) == 1);
  CHECK(run(dir, {"classify", "--cocycle", dir.str() + "/missing.dsl"}, &out) == 1);
  CHECK(out.find("error:") != std::string::npos);
  std::ostringstream help;
  CHECK(run_cli({"--help"}, help) == 0);
  CHECK(help.str().find("classify") != std::string::npos);
}
