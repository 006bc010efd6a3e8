#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sflab/error.hpp"
#include "sflab/gauge.hpp"
#include "sflab/lab.hpp"

namespace {

using namespace sflab;

struct CommonFlags {
  std::string config;
  std::string k;
  std::optional<int> grid;
  std::optional<int> topology_grid;
  std::optional<int> rank;
  std::string delta;
  std::optional<double> window;
  std::string solver;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> safety;
  bool no_cache = false;
  std::string cache_dir;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "INI run configuration")->check(CLI::ExistingFile);
    app->add_option("--k", k, "k values, e.g. -2..2 or 1,3");
    app->add_option("--grid", grid, "operator grid size n_g");
    app->add_option("--topology-grid", topology_grid, "grid for degree / winding / index");
    app->add_option("--rank", rank, "rank N of the gauge group (>= 2)");
    app->add_option("--delta", delta, "spin structure, e.g. 1,1,1");
    app->add_option("--window", window, "spectral window half-width");
    app->add_option("--solver", solver, "dense | iterative");
    app->add_option("--out", out, "output directory");
    app->add_option("--workers", workers, "parallel per-k pipelines");
    app->add_option("--seed", seed, "step-proposal seed");
    app->add_option("--safety", safety, "Weyl step safety factor in (0, 1)");
    app->add_flag("--no-cache", no_cache, "bypass the result cache");
    app->add_option("--cache-dir", cache_dir, "cache directory (default $SFLAB_CACHE_DIR)");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    if (!k.empty()) c.k_list = parse_int_list(k);
    if (grid) c.grid = *grid;
    if (topology_grid) c.topology_grid = *topology_grid;
    if (rank) c.rank = *rank;
    if (!delta.empty()) c.spin = parse_spin(delta);
    if (window) c.window = *window;
    if (!solver.empty()) c.solver = parse_solver_mode(solver);
    if (!out.empty()) c.out_dir = out;
    if (workers) c.workers = *workers;
    if (seed) c.seed = *seed;
    if (safety) c.safety = *safety;
    if (no_cache) c.cache = false;
    if (!cache_dir.empty()) c.cache_dir = cache_dir;
    return c;
  }
};

int single_k(const RunConfig& cfg) {
  if (cfg.k_list.size() != 1) throw ConfigError("this subcommand takes exactly one k");
  return cfg.k_list.front();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error("cannot write " + path);
}

Cache open_cache(const RunConfig& cfg) {
  Cache cache(cfg.cache_dir.empty() ? Cache::default_dir() : cfg.cache_dir, cfg.cache);
  cache.warn = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
  return cache;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-flow lab for twisted Dirac operators on the 3-torus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SFLAB_VERSION);

  CommonFlags common;
  bool extended = false;
  bool no_fallback = false;
  bool quiet = false;
  auto* verify = app.add_subcommand("verify", "run the k-suite and write report.json, CSV and SVG");
  common.attach(verify);
  verify->add_flag("--extended", extended, "run the suite on the fallback grid with the iterative solver");
  verify->add_flag("--no-fallback", no_fallback, "do not refine a mismatching flow");
  verify->add_flag("--quiet", quiet, "suppress progress output");

  double t = 1.0;
  std::string spectrum_out;
  auto* spectrum = app.add_subcommand("spectrum", "windowed eigenvalues of D^d + t X_k as CSV");
  common.attach(spectrum);
  spectrum->add_option("--t", t, "path parameter");
  spectrum->add_option("-o,--output", spectrum_out, "CSV file (default stdout)");

  std::string sfl_out;
  auto* sfl = app.add_subcommand("sfl", "spectral flow of t -> D^d + t X_k");
  common.attach(sfl);
  sfl->add_option("-o,--output", sfl_out, "JSON result file (default stdout)");

  auto* deg = app.add_subcommand("degree", "degree of the collapse map f_k");
  common.attach(deg);
  auto* wind = app.add_subcommand("winding", "winding number and mapping-torus index of F_k");
  common.attach(wind);

  std::string plot_in;
  std::string plot_out;
  std::string plot_title;
  auto* plot = app.add_subcommand("plot", "eigenvalue-flow SVG from a spectral-flow JSON result");
  plot->add_option("input", plot_in, "spectral-flow JSON")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--output", plot_out, "SVG file (default stdout)");
  plot->add_option("--title", plot_title, "diagram title");

  std::optional<double> max_age_hours;
  bool dry_run = false;
  std::string gc_dir;
  auto* gc = app.add_subcommand("cache-gc", "remove corrupt and stale cache entries");
  gc->add_option("--max-age-hours", max_age_hours, "also remove entries older than this");
  gc->add_flag("--dry-run", dry_run, "report without deleting");
  gc->add_option("--cache-dir", gc_dir, "cache directory (default $SFLAB_CACHE_DIR)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) {
      RunConfig cfg = common.resolve();
      if (extended) cfg.extended = true;
      if (no_fallback) cfg.fallback = false;
      auto log = [&](const std::string& line) {
        if (!quiet) std::cerr << line << '\n';
      };
      const VerifyOutcome outcome = cmd_verify(cfg, log);
      for (const auto& r : outcome.report["records"]) {
        std::printf("k=%+d  ", r["k"].get<int>());
        if (r.contains("integers")) {
          const auto& i = r["integers"];
          std::printf("degree=%d winding=%d index=%d flow=%d  ", i["degree"].get<int>(), i["winding"].get<int>(),
                      i["mapping_torus_index"].get<int>(), i["spectral_flow"].get<int>());
        } else if (r.contains("error")) {
          std::printf("error in %s: %s  ", r["error"]["stage"].get<std::string>().c_str(),
                      r["error"]["message"].get<std::string>().c_str());
        }
        std::printf("%s\n", r["verdict"].get<std::string>().c_str());
      }
      for (const auto& p : outcome.report["verdicts"]["validator_problems"]) {
        std::printf("problem: %s\n", p.get<std::string>().c_str());
      }
      std::printf("report: %s\n%s\n", (cfg.out_dir / "report.json").string().c_str(),
                  outcome.passed ? "PASS" : "FAIL");
      return outcome.passed ? 0 : 1;
    }
    if (*spectrum) {
      const RunConfig cfg = common.resolve();
      emit(spectrum_out, cmd_spectrum(cfg, single_k(cfg), t));
      return 0;
    }
    if (*sfl) {
      const RunConfig cfg = common.resolve();
      cfg.validate();
      Cache cache = open_cache(cfg);
      const int k = single_k(cfg);
      const SflResult r = cached_flow(cfg, cache, k, cfg.grid, cfg.solver);
      emit(sfl_out, to_json(r).dump(1) + "\n");
      std::cerr << "flow(k=" << k << ", n_g=" << cfg.grid << ") = " << r.flow << '\n';
      return 0;
    }
    if (*deg || *wind) {
      const CommonFlags& f = common;
      RunConfig cfg = f.resolve();
      const int n = f.grid ? cfg.grid : cfg.topology_grid;
      cfg.validate();
      for (int k : cfg.k_list) {
        if (*deg) {
          std::printf("k=%+d degree=%.10f\n", k, degree(sphere_map(k, n, cfg.profile())));
        } else {
          const UnitaryField field = gauge_field(k, n, cfg.rank, cfg.profile());
          std::printf("k=%+d winding=%.10f index=%.10f\n", k, winding_number(field), mapping_torus_index(field));
        }
      }
      return 0;
    }
    if (*plot) {
      std::ifstream is(plot_in);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed spectral-flow JSON: ") + e.what());
      }
      emit(plot_out, cmd_plot(sfl_from_json(doc), plot_title));
      return 0;
    }
    if (*gc) {
      const Cache cache(gc_dir.empty() ? Cache::default_dir() : std::filesystem::path(gc_dir), true);
      std::optional<std::chrono::hours> age;
      if (max_age_hours) age = std::chrono::hours(static_cast<long>(*max_age_hours));
      const auto s = cache.gc(age, dry_run);
      std::printf("%s: kept %d, removed %d (corrupt %d)%s\n", cache.dir().string().c_str(), s.kept, s.removed,
                  s.corrupt, dry_run ? " [dry run]" : "");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
