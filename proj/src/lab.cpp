#include "sflab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sflab/error.hpp"
#include "sflab/field_io.hpp"
#include "sflab/hash.hpp"

#ifndef SFLAB_VERSION
#define SFLAB_VERSION "0.0.0"
#endif

namespace sflab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const double kFriedrichGap = std::numbers::pi * std::sqrt(3.0);

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error("cannot write " + path.string());
}

json profile_json(const RunConfig& cfg) {
  return {{"radius", cfg.profile_radius}, {"steepness", cfg.profile_steepness}};
}

}  // namespace

// --- configuration ------------------------------------------------------------

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  try {
    for (auto part : parts) {
      boost::trim(part);
      if (part.empty()) continue;
      const auto dots = part.find("..");
      if (dots == std::string::npos) {
        std::size_t used = 0;
        out.push_back(std::stoi(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } else {
        const int lo = std::stoi(part.substr(0, dots));
        const int hi = std::stoi(part.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty integer range '" + part + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    }
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse integer list '" + text + "'");
  }
  if (out.empty()) throw ConfigError("empty integer list '" + text + "'");
  return out;
}

SpinStructure parse_spin(const std::string& text) {
  const auto v = parse_int_list(text);
  if (v.size() != 3) throw ConfigError("delta needs three entries, got '" + text + "'");
  try {
    return SpinStructure({v[0], v[1], v[2]});
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

void RunConfig::validate() const {
  if (k_list.empty()) throw ConfigError("k list is empty");
  if (rank < 2) throw ConfigError("rank N must be at least 2 (got " + std::to_string(rank) + ")");
  if (spin.trivial()) {
    throw ConfigError("delta = (0,0,0) gives the untwisted operator a kernel; choose a non-trivial spin structure");
  }
  if (!(window > 0.0 && window < kFriedrichGap)) {
    throw ConfigError("window half-width must lie in (0, pi*sqrt(3)) so the untwisted window is empty");
  }
  try {
    SpectralWindow(window, guard).validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (grid < 2 || topology_grid < 2 || fallback_grid < 2) throw ConfigError("grid sizes must be at least 2");
  if (!(safety > 0.0 && safety < 1.0)) throw ConfigError("safety must lie in (0, 1)");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (workers < 1) throw ConfigError("workers must be positive");
  try {
    (void)profile();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

json RunConfig::to_json() const {
  return {{"k", k_list},
          {"grid", grid},
          {"topology_grid", topology_grid},
          {"rank", rank},
          {"delta", spin.delta()},
          {"window", window},
          {"guard", guard},
          {"solver", sflab::to_string(solver)},
          {"safety", safety},
          {"max_steps", max_steps},
          {"seed", seed},
          {"profile", {{"radius", profile_radius}, {"steepness", profile_steepness}}},
          {"fallback", {{"enabled", fallback}, {"grid", fallback_grid}, {"solver", sflab::to_string(fallback_solver)}}},
          {"extended", extended}};
}

RunConfig config_from_ini(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::set<std::string> known{
      "suite.k",        "suite.grid",       "suite.topology_grid", "suite.rank",     "suite.delta",
      "suite.extended", "solver.mode",      "solver.window",       "solver.guard",   "solver.safety",
      "solver.max_steps", "solver.seed",    "profile.radius",      "profile.steepness",
      "fallback.enabled", "fallback.grid",  "fallback.solver",     "output.dir",     "output.cache",
      "output.cache_dir", "output.workers"};
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!known.count(section + "." + key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
  }
  RunConfig c;
  auto read = [&tree](const char* path, auto& target) {
    if (tree.get_optional<std::string>(path)) target = tree.get<std::decay_t<decltype(target)>>(path);
  };
  try {
    if (auto v = tree.get_optional<std::string>("suite.k")) c.k_list = parse_int_list(*v);
    read("suite.grid", c.grid);
    read("suite.topology_grid", c.topology_grid);
    read("suite.rank", c.rank);
    if (auto v = tree.get_optional<std::string>("suite.delta")) c.spin = parse_spin(*v);
    read("suite.extended", c.extended);
    if (auto v = tree.get_optional<std::string>("solver.mode")) c.solver = parse_solver_mode(*v);
    read("solver.window", c.window);
    read("solver.guard", c.guard);
    read("solver.safety", c.safety);
    read("solver.max_steps", c.max_steps);
    read("solver.seed", c.seed);
    read("profile.radius", c.profile_radius);
    read("profile.steepness", c.profile_steepness);
    read("fallback.enabled", c.fallback);
    read("fallback.grid", c.fallback_grid);
    if (auto v = tree.get_optional<std::string>("fallback.solver")) c.fallback_solver = parse_solver_mode(*v);
    if (auto v = tree.get_optional<std::string>("output.dir")) c.out_dir = *v;
    read("output.cache", c.cache);
    if (auto v = tree.get_optional<std::string>("output.cache_dir")) c.cache_dir = *v;
    read("output.workers", c.workers);
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return config_from_ini(ss.str());
}

// --- cache --------------------------------------------------------------------

Cache::Cache(fs::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
  if (enabled_) fs::create_directories(dir_);
}

fs::path Cache::default_dir() {
  if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "sflab";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "sflab";
  return fs::temp_directory_path() / "sflab-cache";
}

std::string Cache::key(const json& description) { return sha256_hex(description.dump()); }

fs::path Cache::entry(const std::string& key, const char* ext) const {
  return dir_ / key.substr(0, 2) / (key + ext);
}

void Cache::discard(const fs::path& p, const std::string& why) const {
  if (warn) warn("cache: discarding corrupt entry " + p.string() + " (" + why + "); recomputing");
  std::error_code ec;
  fs::remove(p, ec);
}

namespace {

void atomic_write(const fs::path& target, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid()) + "." +
                       std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream os(tmp, std::ios::binary);
    body(os);
    if (!os) throw Error("cache: cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::optional<json> read_json_entry(const fs::path& p, std::string* why) {
  std::ifstream is(p, std::ios::binary);
  try {
    const json doc = json::parse(is);
    const json& payload = doc.at("payload");
    if (sha256_hex(payload.dump()) != doc.at("sha256").get<std::string>()) {
      *why = "checksum mismatch";
      return std::nullopt;
    }
    return payload;
  } catch (const json::exception& e) {
    *why = e.what();
    return std::nullopt;
  }
}

}  // namespace

std::optional<UnitaryField> Cache::load_field(const std::string& key) const {
  if (!enabled_) return std::nullopt;
  const fs::path p = entry(key, ".field");
  if (!fs::exists(p)) return std::nullopt;
  try {
    std::ifstream is(p, std::ios::binary);
    return read_unitary_field(is);
  } catch (const Error& e) {
    discard(p, e.what());
    return std::nullopt;
  }
}

void Cache::store_field(const std::string& key, const UnitaryField& field, const FieldMetadata& meta) const {
  if (!enabled_) return;
  atomic_write(entry(key, ".field"), [&](std::ostream& os) { write_field(os, field, meta); });
}

std::optional<json> Cache::load_json(const std::string& key) const {
  if (!enabled_) return std::nullopt;
  const fs::path p = entry(key, ".json");
  if (!fs::exists(p)) return std::nullopt;
  std::string why;
  auto v = read_json_entry(p, &why);
  if (!v) discard(p, why);
  return v;
}

void Cache::store_json(const std::string& key, const json& value) const {
  if (!enabled_) return;
  const json doc = {{"key", key}, {"sha256", sha256_hex(value.dump())}, {"payload", value}};
  atomic_write(entry(key, ".json"), [&](std::ostream& os) { os << doc.dump(); });
}

Cache::GcStats Cache::gc(std::optional<std::chrono::hours> max_age, bool dry_run) const {
  GcStats stats;
  if (!fs::exists(dir_)) return stats;
  const auto now = fs::file_time_type::clock::now();
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir_)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const std::string ext = p.extension().string();
    bool corrupt = false;
    if (p.string().find(".tmp.") != std::string::npos) {
      corrupt = true;
    } else if (ext == ".field") {
      try {
        std::ifstream is(p, std::ios::binary);
        (void)read_unitary_field(is);
      } catch (const Error&) {
        corrupt = true;
      }
    } else if (ext == ".json") {
      std::string why;
      corrupt = !read_json_entry(p, &why).has_value();
    } else {
      ++stats.kept;
      continue;
    }
    const bool old = max_age && (now - fs::last_write_time(p)) > *max_age;
    if (corrupt || old) {
      stats.corrupt += corrupt ? 1 : 0;
      ++stats.removed;
      if (!dry_run) fs::remove(p);
    } else {
      ++stats.kept;
    }
  }
  return stats;
}

// --- pipeline stages ----------------------------------------------------------

TopologyRecord topology(int k, int n, int rank, const CollapseProfile& profile) {
  TopologyRecord r;
  r.degree = degree(sphere_map(k, n, profile));
  const UnitaryField f = gauge_field(k, n, rank, profile);
  r.winding = winding_number(f);
  r.index = mapping_torus_index(f);
  return r;
}

UnitaryField cached_gauge_field(const RunConfig& cfg, Cache& cache, int k, int n) {
  const json desc = {{"kind", "gauge_field"},          {"k", k},
                     {"n", n},                         {"rank", cfg.rank},
                     {"profile", profile_json(cfg)},   {"convention", convention_tag()},
                     {"format", kFieldFormatVersion}};
  const std::string key = Cache::key(desc);
  if (auto hit = cache.load_field(key)) return std::move(*hit);
  UnitaryField f = gauge_field(k, n, cfg.rank, cfg.profile());
  cache.store_field(key, f, FieldMetadata{k, cfg.profile_radius, cfg.profile_steepness, convention_tag()});
  return f;
}

SflResult cached_flow(const RunConfig& cfg, Cache& cache, int k, int n, SolverMode solver) {
  const json desc = {{"kind", "spectral_flow"},
                     {"k", k},
                     {"n", n},
                     {"rank", cfg.rank},
                     {"delta", cfg.spin.delta()},
                     {"profile", profile_json(cfg)},
                     {"window", cfg.window},
                     {"guard", cfg.guard},
                     {"solver", to_string(solver)},
                     {"safety", cfg.safety},
                     {"max_steps", cfg.max_steps},
                     {"seed", cfg.seed},
                     {"convention", convention_tag()},
                     {"schema", kSflSchemaVersion}};
  const std::string key = Cache::key(desc);
  if (auto hit = cache.load_json(key)) {
    try {
      return sfl_from_json(*hit);
    } catch (const FormatError& e) {
      if (cache.warn) cache.warn(std::string("cache: unusable spectral-flow entry (") + e.what() + "); recomputing");
    }
  }
  const UnitaryField field = cached_gauge_field(cfg, cache, k, n);
  const auto alpha = std::make_shared<const ConnectionForm>(maurer_cartan(field));
  const TwistedDirac family(alpha, cfg.spin);
  const Representation rep = solver == SolverMode::dense ? Representation::dense : Representation::matrix_free;
  const OperatorPath path = OperatorPath::affine(
      family.untwisted(rep), family.twist(rep), family.twist_norm(),
      {EndpointRelation::Kind::unitary, "F_" + std::to_string(k) + " (D^d + X = F* D^d F)"});
  FlowControls controls;
  controls.solver = solver;
  controls.safety = cfg.safety;
  controls.max_steps = cfg.max_steps;
  controls.seed = cfg.seed;
  SflResult r = spectral_flow(path, SpectralWindow(cfg.window, cfg.guard), controls);
  cache.store_json(key, to_json(r));
  return r;
}

// --- verify -------------------------------------------------------------------

namespace {

int rounded(double x) { return static_cast<int>(std::lround(x)); }

json run_one(const RunConfig& cfg, Cache& cache, int k, const fs::path& out,
             const std::function<void(const std::string&)>& log) {
  const auto t_total = std::chrono::steady_clock::now();
  const int n = cfg.effective_grid();
  const SolverMode solver = cfg.effective_solver();
  json rec = {{"k", k}, {"grid", n}, {"topology_grid", cfg.topology_grid}, {"solver", to_string(solver)}};
  json timings = json::object();
  std::string stage = "topology";
  try {
    auto t0 = std::chrono::steady_clock::now();
    const TopologyRecord topo = topology(k, cfg.topology_grid, cfg.rank, cfg.profile());
    rec["degree"] = topo.degree;
    rec["winding"] = topo.winding;
    rec["mapping_torus_index"] = topo.index;
    timings["topology_s"] = seconds_since(t0);

    stage = "spectral_flow";
    t0 = std::chrono::steady_clock::now();
    SflResult sfl = cached_flow(cfg, cache, k, n, solver);
    int flow_grid = n;
    if (sfl.flow != k && cfg.fallback && !cfg.extended) {
      rec["resolution_diagnostic"] = {
          {"grid", n},
          {"solver", to_string(solver)},
          {"flow", sfl.flow},
          {"message", "flow at n_g = " + std::to_string(n) + " is " + std::to_string(sfl.flow) + ", not " +
                          std::to_string(k) + "; refined on n_g = " + std::to_string(cfg.fallback_grid)}};
      if (log) log("k=" + std::to_string(k) + ": flow " + std::to_string(sfl.flow) + " at n_g=" +
                   std::to_string(n) + ", refining on n_g=" + std::to_string(cfg.fallback_grid));
      sfl = cached_flow(cfg, cache, k, cfg.fallback_grid, cfg.fallback_solver);
      flow_grid = cfg.fallback_grid;
    }
    rec["spectral_flow"] = sfl.flow;
    rec["flow_grid"] = flow_grid;
    rec["sfl"] = {{"steps", sfl.steps.size()},
                  {"solves", sfl.diagnostics.solves},
                  {"rejected_proposals", sfl.diagnostics.rejected_proposals},
                  {"bisections", sfl.diagnostics.bisections},
                  {"min_gap", sfl.diagnostics.min_gap},
                  {"twist_norm", sfl.diagnostics.path_norm_bound},
                  {"crossings", sfl.crossings.size()}};
    double min_sq = std::numeric_limits<double>::infinity();
    for (const auto& s : sfl.samples) {
      for (double l : s.eigenvalues) min_sq = std::min(min_sq, l * l);
    }
    rec["min_eigenvalue_squared"] = std::isfinite(min_sq) ? json(min_sq) : json(nullptr);
    timings["flow_s"] = seconds_since(t0);

    stage = "outputs";
    const std::string tag = "k" + std::to_string(k);
    write_text(out / "spectra" / (tag + ".csv"), samples_csv(sfl));
    write_text(out / ("sfl_" + tag + ".json"), to_json(sfl).dump(1));
    write_text(out / ("flow_" + tag + ".svg"), cmd_plot(sfl, "k = " + std::to_string(k) + ", n_g = " + std::to_string(flow_grid)));

    stage = "conjugation_residual";
    t0 = std::chrono::steady_clock::now();
    rec["conjugation_residual"] = conjugation_residual(k, n, cfg.rank, cfg.profile(), cfg.spin);
    timings["residual_s"] = seconds_since(t0);

    const json ints = {{"degree", rounded(topo.degree)},
                       {"winding", rounded(topo.winding)},
                       {"mapping_torus_index", rounded(topo.index)},
                       {"spectral_flow", sfl.flow}};
    rec["integers"] = ints;
    bool pass = true;
    for (const auto& [name, v] : ints.items()) pass = pass && v.get<int>() == k;
    rec["verdict"] = pass ? "pass" : "fail";
  } catch (const std::exception& e) {
    rec["error"] = {{"stage", stage}, {"message", e.what()}};
    rec["verdict"] = "fail";
    if (log) log("k=" + std::to_string(k) + ": " + stage + " failed: " + e.what());
  }
  timings["total_s"] = seconds_since(t_total);
  rec["timings"] = timings;
  return rec;
}

}  // namespace

VerifyOutcome cmd_verify(const RunConfig& cfg, const std::function<void(const std::string&)>& log) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Cache cache(cfg.cache_dir.empty() ? Cache::default_dir() : cfg.cache_dir, cfg.cache);
  std::mutex log_mutex;
  auto safe_log = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    log(line);
  };
  cache.warn = safe_log;
  fs::create_directories(cfg.out_dir / "spectra");

  const std::size_t count = cfg.k_list.size();
  std::vector<json> records(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      safe_log("k=" + std::to_string(cfg.k_list[i]) + ": start");
      records[i] = run_one(cfg, cache, cfg.k_list[i], cfg.out_dir, safe_log);
      safe_log("k=" + std::to_string(cfg.k_list[i]) + ": " + records[i]["verdict"].get<std::string>());
    }
  };
  const int threads = std::min<int>(cfg.workers, static_cast<int>(count));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Flat torus: scalar curvature 0, so the lower bound on lambda^2 is 0.
  const auto untwisted = untwisted_spectrum(std::min(cfg.effective_grid(), 4), cfg.spin, 1);
  int antiperiodic = 0;
  for (int d : cfg.spin.delta()) antiperiodic += d;
  double gap = std::numeric_limits<double>::infinity();
  for (double l : untwisted) gap = std::min(gap, std::abs(l));
  double min_sq = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.contains("min_eigenvalue_squared") && r["min_eigenvalue_squared"].is_number()) {
      min_sq = std::min(min_sq, r["min_eigenvalue_squared"].get<double>());
    }
  }
  const bool friedrich_ok = !(min_sq < 0.0) &&
                           std::abs(gap - std::numbers::pi * std::sqrt(double(antiperiodic))) <= 1e-10;
  const json friedrich = {{"scalar_curvature", 0.0},
                          {"bound_lambda_squared", 0.0},
                          {"untwisted_gap", gap},
                          {"untwisted_gap_closed_form", std::numbers::pi * std::sqrt(double(antiperiodic))},
                          {"untwisted_gap_squared", gap * gap},
                          {"min_eigenvalue_squared_computed", std::isfinite(min_sq) ? json(min_sq) : json(nullptr)},
                          {"satisfied", friedrich_ok}};

  json report = {{"schema_version", kReportSchemaVersion},
                 {"tool", {{"name", "sflab"}, {"version", SFLAB_VERSION}}},
                 {"config", cfg.to_json()},
                 {"config_sha256", sha256_hex(cfg.to_json().dump())},
                 {"environment",
                  {{"compiler", __VERSION__},
                   {"convention", convention_tag()},
                   {"band_convention", frequency_lattice(cfg.effective_grid(), cfg.spin).band_convention()},
                   {"fft", "fftw3"},
                   {"dense_eigensolver", "lapack zheevr"},
                   {"workers", cfg.workers}}},
                 {"records", records},
                 {"friedrich", friedrich}};
  const auto problems = validate_report(report);
  bool all_pass = true;
  for (const auto& r : records) all_pass = all_pass && r["verdict"] == "pass";
  std::set<int> flows;
  for (const auto& r : records) {
    if (r.contains("spectral_flow")) flows.insert(r["spectral_flow"].get<int>());
  }
  const std::set<int> ks(cfg.k_list.begin(), cfg.k_list.end());
  report["verdicts"] = {{"all_k_pass", all_pass},
                        {"pairwise_distinct_flows", flows.size() == ks.size() && flows.size() == records.size()},
                        {"friedrich", friedrich_ok},
                        {"validator_problems", problems}};
  const bool passed = all_pass && problems.empty() && friedrich_ok;
  report["passed"] = passed;
  report["timings"] = {{"total_s", seconds_since(t0)}};
  write_text(cfg.out_dir / "report.json", report.dump(2) + "\n");
  return {report, passed};
}

std::vector<std::string> validate_report(const json& report) {
  std::vector<std::string> problems;
  try {
    if (report.at("schema_version").get<int>() != kReportSchemaVersion) {
      problems.push_back("unsupported schema_version " + report.at("schema_version").dump());
    }
    std::map<int, int> flow_of;
    for (const auto& r : report.at("records")) {
      const int k = r.at("k").get<int>();
      if (r.contains("error")) {
        problems.push_back("k=" + std::to_string(k) + ": stage " + r["error"].at("stage").get<std::string>() + " failed");
        continue;
      }
      const auto& ints = r.at("integers");
      for (const char* name : {"degree", "winding", "mapping_torus_index", "spectral_flow"}) {
        if (ints.at(name).get<int>() != k) {
          problems.push_back("k=" + std::to_string(k) + ": " + name + " = " + ints.at(name).dump());
        }
      }
      if (rounded(r.at("degree").get<double>()) != ints.at("degree").get<int>() ||
          rounded(r.at("winding").get<double>()) != ints.at("winding").get<int>() ||
          rounded(r.at("mapping_torus_index").get<double>()) != ints.at("mapping_torus_index").get<int>() ||
          r.at("spectral_flow").get<int>() != ints.at("spectral_flow").get<int>()) {
        problems.push_back("k=" + std::to_string(k) + ": integers do not match the recorded values");
      }
      if (flow_of.count(k)) problems.push_back("k=" + std::to_string(k) + " appears twice");
      flow_of[k] = r.at("spectral_flow").get<int>();
    }
    std::map<int, int> owner;
    for (const auto& [k, f] : flow_of) {
      if (auto it = owner.find(f); it != owner.end()) {
        problems.push_back("flows of k=" + std::to_string(it->second) + " and k=" + std::to_string(k) +
                           " coincide (" + std::to_string(f) + ")");
      } else {
        owner[f] = k;
      }
    }
  } catch (const json::exception& e) {
    problems.push_back(std::string("malformed report: ") + e.what());
  }
  return problems;
}

// --- spectrum / plot ----------------------------------------------------------

std::string cmd_spectrum(const RunConfig& cfg, int k, double t) {
  cfg.validate();
  Cache cache(cfg.cache_dir.empty() ? Cache::default_dir() : cfg.cache_dir, cfg.cache);
  const int n = cfg.effective_grid();
  const SolverMode solver = cfg.effective_solver();
  const UnitaryField field = cached_gauge_field(cfg, cache, k, n);
  const auto alpha = std::make_shared<const ConnectionForm>(maurer_cartan(field));
  const TwistedDirac family(alpha, cfg.spin);
  const HermitianOperator op =
      family.at(t, solver == SolverMode::dense ? Representation::dense : Representation::matrix_free);
  const WindowEigs eigs = window_eigs(op, SpectralWindow(cfg.window, cfg.guard), solver);
  SflResult wrap;
  wrap.samples.push_back({t, eigs.eigenvalues, eigs.residuals});
  return samples_csv(wrap);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

}  // namespace

std::string cmd_plot(const SflResult& r, const std::string& title) {
  constexpr double width = 800.0;
  constexpr double height = 500.0;
  constexpr double left = 70.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  double t0 = 0.0;
  double t1 = 1.0;
  if (!r.samples.empty()) {
    t0 = r.samples.front().t;
    t1 = std::max(r.samples.back().t, t0 + 1e-12);
  }
  double ymax = r.window > 0.0 ? 1.5 * r.window : 1.0;
  for (const auto& s : r.samples) {
    for (double l : s.eigenvalues) ymax = std::max(ymax, std::abs(l));
  }
  ymax *= 1.05;
  auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * (width - left - right); };
  auto Y = [&](double l) { return top + (ymax - l) / (2.0 * ymax) * (height - top - bottom); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(title.empty() ? "spectral flow" : title) << " (flow = " << r.flow << ")</text>\n";
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(width - left - right)
     << "\" height=\"" << fmt(height - top - bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";

  os << "<g stroke=\"#999\" stroke-dasharray=\"4 3\">\n";
  os << "<line x1=\"" << fmt(X(t0)) << "\" y1=\"" << fmt(Y(0)) << "\" x2=\"" << fmt(X(t1)) << "\" y2=\"" << fmt(Y(0))
     << "\"/>\n</g>\n";

  for (int i = 0; i <= 4; ++i) {
    const double t = t0 + (t1 - t0) * i / 4.0;
    os << "<text x=\"" << fmt(X(t)) << "\" y=\"" << fmt(height - bottom + 18) << "\" text-anchor=\"middle\">" << fmt(t)
       << "</text>\n";
  }
  for (int i = -2; i <= 2; ++i) {
    const double l = ymax * i / 2.5;
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(Y(l) + 4) << "\" text-anchor=\"end\">" << fmt(l)
       << "</text>\n";
  }
  os << "<text x=\"" << fmt(width / 2) << "\" y=\"" << fmt(height - 10) << "\" text-anchor=\"middle\">t</text>\n";
  os << "<text x=\"16\" y=\"" << fmt(height / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << fmt(height / 2) << ")\">eigenvalue</text>\n";

  // Per-step counting windows.
  os << "<g fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1\">\n";
  for (int sign : {1, -1}) {
    os << "<polyline points=\"";
    for (const auto& st : r.steps) {
      os << fmt(X(st.t_start)) << ',' << fmt(Y(sign * st.window)) << ' ' << fmt(X(st.t_end)) << ','
         << fmt(Y(sign * st.window)) << ' ';
    }
    os << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g fill=\"#bbb\">\n";
  for (const auto& s : r.samples) {
    for (double l : s.eigenvalues) {
      os << "<circle cx=\"" << fmt(X(s.t)) << "\" cy=\"" << fmt(Y(l)) << "\" r=\"1.5\"/>\n";
    }
  }
  os << "</g>\n";

  os << "<g stroke=\"#333\" stroke-width=\"1.2\">\n";
  for (const auto& st : r.steps) {
    const std::size_t m = std::min(st.start_eigs.size(), st.end_eigs.size());
    for (std::size_t j = 0; j < m; ++j) {
      os << "<line x1=\"" << fmt(X(st.t_start)) << "\" y1=\"" << fmt(Y(st.start_eigs[j])) << "\" x2=\""
         << fmt(X(st.t_end)) << "\" y2=\"" << fmt(Y(st.end_eigs[j])) << "\"/>\n";
    }
  }
  os << "</g>\n";

  for (const auto& c : r.crossings) {
    const double x = X(0.5 * (c.t_start + c.t_end));
    const double y = Y(0.0);
    if (c.direction > 0) {
      os << "<polygon fill=\"#d62728\" points=\"" << fmt(x) << ',' << fmt(y - 7) << ' ' << fmt(x - 6) << ','
         << fmt(y + 5) << ' ' << fmt(x + 6) << ',' << fmt(y + 5) << "\"/>\n";
    } else {
      os << "<polygon fill=\"#1f77b4\" points=\"" << fmt(x) << ',' << fmt(y + 7) << ' ' << fmt(x - 6) << ','
         << fmt(y - 5) << ' ' << fmt(x + 6) << ',' << fmt(y - 5) << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

double hausdorff_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (double x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (double y : q) best = std::min(best, std::abs(x - y));
      d = std::max(d, best);
    }
    return d;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace sflab
