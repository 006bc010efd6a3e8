#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sflab/error.hpp"
#include "sflab/lab.hpp"

using namespace sflab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("sflab-lab-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

nlohmann::json strip_timings(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("timings");
    for (auto& [k, v] : j.items()) v = strip_timings(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timings(v);
  }
  return j;
}

int count(const std::string& haystack, const std::string& needle) {
  int c = 0;
  for (auto p = haystack.find(needle); p != std::string::npos; p = haystack.find(needle, p + 1)) ++c;
  return c;
}

}  // namespace

TEST_CASE("integer lists") {
  CHECK(parse_int_list("-2..2") == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(parse_int_list("1, 3,5") == std::vector<int>{1, 3, 5});
  CHECK(parse_int_list("-2..0,3") == std::vector<int>{-2, -1, 0, 3});
  CHECK_THROWS_AS(parse_int_list(""), ConfigError);
  CHECK_THROWS_AS(parse_int_list("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_int_list("3..1"), ConfigError);
  CHECK(parse_spin("1,0,1").delta() == std::array<int, 3>{1, 0, 1});
  CHECK_THROWS_AS(parse_spin("1,0"), ConfigError);
  CHECK_THROWS_AS(parse_spin("1,2,0"), ConfigError);
}

TEST_CASE("config validation enforces the hypotheses") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  RunConfig r = c;
  r.rank = 1;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  RunConfig d = c;
  d.spin = SpinStructure({0, 0, 0});
  CHECK_THROWS_AS(d.validate(), ConfigError);
  RunConfig w = c;
  w.window = 5.5;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w.window = 5.4;
  CHECK_NOTHROW(w.validate());
  RunConfig s = c;
  s.safety = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  RunConfig p = c;
  p.profile_radius = 0.7;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  RunConfig k = c;
  k.k_list.clear();
  CHECK_THROWS_AS(k.validate(), ConfigError);
}

TEST_CASE("ini configuration") {
  const RunConfig c = config_from_ini(
      "[suite]\nk = -1..1\ngrid = 6\nrank = 3\ndelta = 1,0,1\n"
      "[solver]\nmode = iterative\nwindow = 2.5\nseed = 9\n"
      "[profile]\nradius = 0.4\n"
      "[output]\ndir = results\ncache = false\nworkers = 2\n");
  CHECK(c.k_list == std::vector<int>{-1, 0, 1});
  CHECK(c.grid == 6);
  CHECK(c.rank == 3);
  CHECK(c.spin.delta() == std::array<int, 3>{1, 0, 1});
  CHECK(c.solver == SolverMode::iterative);
  CHECK(c.window == 2.5);
  CHECK(c.seed == 9);
  CHECK(c.profile_radius == 0.4);
  CHECK(c.out_dir == fs::path("results"));
  CHECK_FALSE(c.cache);
  CHECK(c.workers == 2);
  CHECK(c.topology_grid == 32);
  CHECK_THROWS_AS(config_from_ini("[suite]\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(config_from_ini("grid = 4\n"), ConfigError);
  CHECK_THROWS_AS(config_from_ini("[suite]\ngrid = many\n"), ConfigError);
  CHECK_THROWS_AS(config_from_ini("[solver]\nmode = magic\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/sflab.ini"), ConfigError);
}

TEST_CASE("verify of the trivial class") {
  TempDir tmp;
  RunConfig cfg;
  cfg.k_list = {0};
  cfg.grid = 4;
  cfg.topology_grid = 8;
  cfg.out_dir = tmp.path / "out";
  cfg.cache_dir = tmp.path / "cache";
  const VerifyOutcome v = cmd_verify(cfg);
  CHECK(v.passed);
  const auto& rec = v.report["records"][0];
  CHECK(rec["integers"]["degree"] == 0);
  CHECK(rec["integers"]["winding"] == 0);
  CHECK(rec["integers"]["mapping_torus_index"] == 0);
  CHECK(rec["integers"]["spectral_flow"] == 0);
  CHECK(rec["sfl"]["crossings"] == 0);
  CHECK(v.report["schema_version"] == kReportSchemaVersion);
  CHECK(v.report["friedrich"]["satisfied"] == true);
  CHECK(v.report["friedrich"]["bound_lambda_squared"] == 0.0);
  CHECK(fs::exists(cfg.out_dir / "report.json"));
  CHECK(fs::exists(cfg.out_dir / "spectra" / "k0.csv"));
  CHECK(fs::exists(cfg.out_dir / "flow_k0.svg"));
  CHECK(fs::exists(cfg.out_dir / "sfl_k0.json"));
  CHECK(validate_report(v.report).empty());

  RunConfig bad = cfg;
  bad.spin = SpinStructure({0, 0, 0});
  CHECK_THROWS_AS(cmd_verify(bad), ConfigError);
}

TEST_CASE("cold and warm verify runs agree apart from timings") {
  TempDir tmp;
  RunConfig cfg;
  cfg.k_list = {-1, 1};
  cfg.grid = 6;
  cfg.topology_grid = 16;
  cfg.cache_dir = tmp.path / "cache";
  cfg.out_dir = tmp.path / "cold";
  const VerifyOutcome cold = cmd_verify(cfg);
  cfg.out_dir = tmp.path / "warm";
  cfg.workers = 2;
  const VerifyOutcome warm = cmd_verify(cfg);
  nlohmann::json a = strip_timings(cold.report);
  nlohmann::json b = strip_timings(warm.report);
  a["environment"].erase("workers");
  b["environment"].erase("workers");
  CHECK(a == b);
  CHECK(cold.passed);
  CHECK(cold.report["records"][0]["k"] == -1);
  CHECK(cold.report["records"][0]["spectral_flow"] == -1);
  CHECK(cold.report["verdicts"]["pairwise_distinct_flows"] == true);
  std::ifstream svg_a(tmp.path / "cold" / "flow_k1.svg");
  std::ifstream svg_b(tmp.path / "warm" / "flow_k1.svg");
  CHECK(std::string(std::istreambuf_iterator<char>(svg_a), {}) ==
        std::string(std::istreambuf_iterator<char>(svg_b), {}));
}

TEST_CASE("report validator") {
  nlohmann::json rec = {{"k", 1},
                        {"degree", 1.0},
                        {"winding", 1.0},
                        {"mapping_torus_index", 1.0},
                        {"spectral_flow", 1},
                        {"integers", {{"degree", 1}, {"winding", 1}, {"mapping_torus_index", 1}, {"spectral_flow", 1}}}};
  nlohmann::json report = {{"schema_version", kReportSchemaVersion}, {"records", {rec}}};
  CHECK(validate_report(report).empty());

  nlohmann::json twin = rec;
  twin["k"] = 2;
  report["records"].push_back(twin);
  const auto problems = validate_report(report);
  CHECK(problems.size() >= 2);

  report["schema_version"] = 42;
  CHECK_FALSE(validate_report(report).empty());
  CHECK_FALSE(validate_report(nlohmann::json::object()).empty());

  nlohmann::json failed = {{"schema_version", kReportSchemaVersion},
                           {"records", {{{"k", 0}, {"error", {{"stage", "topology"}, {"message", "x"}}}}}}};
  CHECK(validate_report(failed).size() == 1);
}

TEST_CASE("windowed spectrum CSV") {
  TempDir tmp;
  RunConfig cfg;
  cfg.grid = 6;
  cfg.cache_dir = tmp.path;
  const std::string header = "t,eigenvalue_index,eigenvalue,residual\n";
  CHECK(cmd_spectrum(cfg, 0, 0.8) == header);
  const std::string mid = cmd_spectrum(cfg, 1, 0.5);
  CHECK(mid.size() > header.size());

  const auto alpha = std::make_shared<const ConnectionForm>(maurer_cartan(gauge_field(1, 6, 2, cfg.profile())));
  const auto oracle = window_eigs(assemble(alpha, 0.5, cfg.spin, 2, Representation::dense),
                                  SpectralWindow(3.0, 1e-6), SolverMode::dense);
  CHECK(count(mid, "\n") == static_cast<int>(oracle.eigenvalues.size()) + 1);
  cfg.solver = SolverMode::iterative;
  CHECK(count(cmd_spectrum(cfg, 1, 0.5), "\n") == count(mid, "\n"));
  CHECK(cmd_spectrum(cfg, 1, 1.0) == header);
}

TEST_CASE("flow diagrams") {
  const SflResult up = spectral_flow(circle_oracle(1, 8), SpectralWindow(3.0, 1e-6));
  const std::string svg = cmd_plot(up, "circle <w=1>");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg == cmd_plot(up, "circle <w=1>"));
  CHECK(count(svg, "fill=\"#d62728\"") == 1);
  CHECK(count(svg, "fill=\"#1f77b4\"") == 0);
  CHECK(svg.find("circle &lt;w=1&gt;") != std::string::npos);

  const auto a = HermitianOperator::dense(Eigen::Vector3cd(-1.0, 0.5, 2.0).asDiagonal().toDenseMatrix());
  const auto zero = HermitianOperator::dense(Eigen::MatrixXcd::Zero(3, 3));
  const SflResult flat = spectral_flow(OperatorPath::affine(a, zero, 0.0), SpectralWindow(3.0, 1e-6));
  const std::string fs = cmd_plot(flat);
  CHECK(count(fs, "<polygon") == 0);

  const SflResult down = spectral_flow(circle_oracle(-2, 12), SpectralWindow(3.0, 1e-6));
  CHECK(count(cmd_plot(down), "fill=\"#1f77b4\"") == 2);
}

TEST_CASE("hausdorff distance") {
  CHECK(hausdorff_distance({}, {}) == 0.0);
  CHECK(std::isinf(hausdorff_distance({1.0}, {})));
  CHECK(hausdorff_distance({1.0, 2.0}, {1.5}) == 0.5);
  CHECK(hausdorff_distance({0.0}, {0.0, 3.0}) == 3.0);
}
