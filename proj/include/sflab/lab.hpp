#pragma once

// Orchestration behind the command-line tool: run configuration, the
// content-addressed cache, the verification suite and its report, single
// spectra, spectral-flow diagrams and the report validator.

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sflab/clifford.hpp"
#include "sflab/dirac.hpp"
#include "sflab/eigensolvers.hpp"
#include "sflab/field_io.hpp"
#include "sflab/gauge.hpp"
#include "sflab/spectral_flow.hpp"

namespace sflab {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kCacheEnv = "SFLAB_CACHE_DIR";

struct RunConfig {
  std::vector<int> k_list{-2, -1, 0, 1, 2};
  int grid = 8;               // operator grid n_g
  int topology_grid = 32;     // grid for degree / winding / index quadrature
  int rank = 2;
  SpinStructure spin{};
  double window = 3.0;
  double guard = 1e-6;
  SolverMode solver = SolverMode::dense;
  double safety = 0.5;
  int max_steps = 20000;
  std::uint64_t seed = 1;
  double profile_radius = 0.45;
  double profile_steepness = 0.25;
  bool fallback = true;       // rerun a mismatching flow on the fallback grid
  int fallback_grid = 12;
  SolverMode fallback_solver = SolverMode::iterative;
  bool extended = false;      // run the main suite on the fallback grid/solver
  std::filesystem::path out_dir = "sflab-out";
  bool cache = true;
  std::filesystem::path cache_dir;  // empty: $SFLAB_CACHE_DIR or ~/.cache/sflab
  int workers = 1;

  /// Enforces N >= 2, delta != 0, 0 < window < pi sqrt 3 and sane grids.
  void validate() const;
  CollapseProfile profile() const { return {profile_radius, profile_steepness}; }
  /// Grid and solver the suite actually runs on (the extended suite swaps them).
  int effective_grid() const { return extended ? fallback_grid : grid; }
  SolverMode effective_solver() const { return extended ? fallback_solver : solver; }
  nlohmann::json to_json() const;
};

/// "1,2,3" or a range "-2..2"; mixed forms like "-2..0,3" are accepted.
std::vector<int> parse_int_list(const std::string& text);
SpinStructure parse_spin(const std::string& text);

/// INI file with sections [suite], [solver], [profile], [fallback], [output].
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_ini(const std::string& text);

class Cache {
 public:
  /// Disabled caches miss on every lookup and store nothing.
  Cache(std::filesystem::path dir, bool enabled);
  static std::filesystem::path default_dir();

  bool enabled() const { return enabled_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Key = SHA-256 of the canonical JSON dump of `description`.
  static std::string key(const nlohmann::json& description);

  std::optional<UnitaryField> load_field(const std::string& key) const;
  void store_field(const std::string& key, const UnitaryField& field, const FieldMetadata& meta) const;
  std::optional<nlohmann::json> load_json(const std::string& key) const;
  void store_json(const std::string& key, const nlohmann::json& value) const;

  struct GcStats {
    int kept = 0;
    int removed = 0;
    int corrupt = 0;
  };
  /// Removes corrupt entries and, if max_age is given, entries older than it.
  GcStats gc(std::optional<std::chrono::hours> max_age, bool dry_run) const;

  /// Called with a message whenever a corrupt entry is discarded.
  std::function<void(const std::string&)> warn;

 private:
  std::filesystem::path entry(const std::string& key, const char* ext) const;
  void discard(const std::filesystem::path& p, const std::string& why) const;
  std::filesystem::path dir_;
  bool enabled_;
};

/// Topological integers of one k at the topology grid.
struct TopologyRecord {
  double degree = 0.0;
  double winding = 0.0;
  double index = 0.0;
};

TopologyRecord topology(int k, int n, int rank, const CollapseProfile& profile);

/// Gauge field F_k through the cache.
UnitaryField cached_gauge_field(const RunConfig& cfg, Cache& cache, int k, int n);

/// Spectral flow of t -> D^d + t X_k through the cache.
SflResult cached_flow(const RunConfig& cfg, Cache& cache, int k, int n, SolverMode solver);

struct VerifyOutcome {
  nlohmann::json report;
  bool passed = false;
};

/// Runs the suite, writes report.json, spectra/*.csv, sfl_k*.json and
/// flow_k*.svg below cfg.out_dir. `log` receives progress lines.
VerifyOutcome cmd_verify(const RunConfig& cfg,
                         const std::function<void(const std::string&)>& log = {});

/// Windowed eigenvalues of D^d + t X_k as CSV (t,eigenvalue_index,eigenvalue,residual).
std::string cmd_spectrum(const RunConfig& cfg, int k, double t);

/// Eigenvalue-versus-t diagram: window boundaries, traces, zero crossings.
std::string cmd_plot(const SflResult& result, const std::string& title = "");

/// Problems found in a verify report; empty means valid. Checks the schema
/// version, per-k integer agreement and pairwise distinct flows.
std::vector<std::string> validate_report(const nlohmann::json& report);

/// Symmetric Hausdorff distance between two finite sets of reals; +inf if
/// exactly one is empty, 0 if both are.
double hausdorff_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sflab
