#include "sflab/spectral_flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "sflab/error.hpp"

namespace sflab {

namespace {

HermitianOperator scaled(const HermitianOperator& op, double c) {
  if (op.is_dense()) return HermitianOperator::dense(c * op.matrix(), std::abs(c) * op.norm_bound());
  return HermitianOperator::matrix_free(
      op.dim(),
      [op, c](const HermitianOperator::Block& in, HermitianOperator::Block& out) {
        op.apply(in, out);
        out *= c;
      },
      std::abs(c) * op.norm_bound());
}

HermitianOperator shifted(const HermitianOperator& base, double dt, const HermitianOperator& slope) {
  if (dt == 0.0) return base;
  return HermitianOperator::combine(1.0, base, dt, slope);
}

// Exact norm for dense differences, the combined bound otherwise.
HermitianOperator tight(const HermitianOperator& op) {
  if (op.is_dense()) return HermitianOperator::dense(op.matrix());
  return op;
}

}  // namespace

// --- OperatorPath -------------------------------------------------------------

OperatorPath OperatorPath::affine(HermitianOperator a0, HermitianOperator x, double x_norm,
                                  EndpointRelation relation) {
  if (a0.dim() != x.dim()) throw ShapeError("affine path: A0 and X differ in dimension");
  if (!(x_norm >= 0.0)) throw PreconditionError("affine path: ||X|| bound must be non-negative");
  OperatorPath p;
  p.segments_.push_back({0.0, 1.0, std::move(a0), std::move(x), x_norm});
  p.relation_ = std::move(relation);
  return p;
}

OperatorPath OperatorPath::sampled(const std::vector<double>& times,
                                   const std::vector<HermitianOperator>& samples,
                                   EndpointRelation relation) {
  if (times.size() != samples.size() || times.size() < 2) {
    throw ShapeError("sampled path needs at least two (t, operator) pairs");
  }
  OperatorPath p;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] > times[i])) throw PreconditionError("sampled path: times must increase");
    if (samples[i].dim() != samples[i + 1].dim()) throw ShapeError("sampled path: dimension mismatch");
    const double h = times[i + 1] - times[i];
    HermitianOperator slope =
        tight(HermitianOperator::combine(1.0 / h, samples[i + 1], -1.0 / h, samples[i]));
    const double norm = slope.norm_bound();
    p.segments_.push_back({times[i], times[i + 1], samples[i], std::move(slope), norm});
  }
  p.relation_ = std::move(relation);
  return p;
}

OperatorPath OperatorPath::rescaled(double t_start, double t_end) const {
  if (!(t_end > t_start)) throw PreconditionError("rescaled: empty parameter range");
  const double old0 = this->t_start();
  const double r = (t_end - t_start) / (this->t_end() - old0);
  OperatorPath p;
  p.relation_ = relation_;
  for (const auto& s : segments_) {
    p.segments_.push_back({t_start + (s.t0 - old0) * r, t_start + (s.t1 - old0) * r, s.base,
                           scaled(s.slope, 1.0 / r), s.slope_norm / r});
  }
  p.segments_.back().t1 = t_end;
  return p;
}

OperatorPath OperatorPath::reversed() const {
  const double sum = t_start() + t_end();
  OperatorPath p;
  p.relation_ = relation_;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    p.segments_.push_back({sum - it->t1, sum - it->t0, shifted(it->base, it->t1 - it->t0, it->slope),
                           scaled(it->slope, -1.0), it->slope_norm});
  }
  p.segments_.front().t0 = t_start();
  p.segments_.back().t1 = t_end();
  return p;
}

OperatorPath OperatorPath::concat(const OperatorPath& next) const {
  if (dim() != next.dim()) throw ShapeError("concat: dimension mismatch");
  const HermitianOperator end = at(t_end());
  const HermitianOperator start = next.at(next.t_start());
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd probe(dim(), 4);
  for (Eigen::Index j = 0; j < probe.cols(); ++j) {
    for (Eigen::Index i = 0; i < probe.rows(); ++i) probe(i, j) = {gauss(rng), gauss(rng)};
  }
  Eigen::MatrixXcd ye;
  Eigen::MatrixXcd ys;
  end.apply(probe, ye);
  start.apply(probe, ys);
  const double scale = std::max({1.0, end.norm_bound(), start.norm_bound()});
  for (Eigen::Index j = 0; j < probe.cols(); ++j) {
    if ((ye.col(j) - ys.col(j)).norm() > 1e-10 * scale * probe.col(j).norm()) {
      throw PreconditionError("concat: end of the first path differs from start of the second");
    }
  }
  OperatorPath p = rescaled(0.0, 0.5);
  const OperatorPath q = next.rescaled(0.5, 1.0);
  p.segments_.insert(p.segments_.end(), q.segments_.begin(), q.segments_.end());
  p.relation_ = {};
  return p;
}

std::size_t OperatorPath::segment_index(double t) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (t <= segments_[i].t1) return i;
  }
  return segments_.size() - 1;
}

HermitianOperator OperatorPath::at(double t) const {
  const PathSegment& s = segments_[segment_index(t)];
  return shifted(s.base, t - s.t0, s.slope);
}

OperatorPath circle_oracle(int winding, int n_modes) {
  if (n_modes < 2 * std::abs(winding) + 4) {
    throw PreconditionError("circle_oracle: need n_modes >= 2|w| + 4 (got " +
                            std::to_string(n_modes) + " for w = " + std::to_string(winding) + ")");
  }
  Eigen::VectorXd diag(n_modes);
  const int first = -(n_modes / 2);
  for (int i = 0; i < n_modes; ++i) diag(i) = first + i + 0.5;
  const double lo = std::abs(diag(0));
  const double hi = std::abs(diag(n_modes - 1));
  HermitianOperator a0 = HermitianOperator::dense(diag.cast<std::complex<double>>().asDiagonal().toDenseMatrix(),
                                                  std::max(lo, hi));
  HermitianOperator x = HermitianOperator::dense(
      Eigen::MatrixXcd::Identity(n_modes, n_modes) * static_cast<double>(winding),
      std::abs(winding));
  EndpointRelation rel{EndpointRelation::Kind::unitary,
                       "multiplication by exp(i w theta), shifting modes by w = " +
                           std::to_string(winding)};
  return OperatorPath::affine(std::move(a0), std::move(x), std::abs(winding), std::move(rel));
}

// --- engine -------------------------------------------------------------------

void FlowControls::validate() const {
  if (max_steps < 1) throw PreconditionError("max_steps must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw PreconditionError("safety must lie in (0, 1)");
  if (!(window_floor > 0.0 && window_floor <= 1.0)) {
    throw PreconditionError("window_floor must lie in (0, 1]");
  }
  if (!(zero_tolerance >= 0.0)) throw PreconditionError("zero_tolerance must be non-negative");
}

namespace {

struct Sample {
  double t = 0.0;
  std::vector<double> eigs;  // ascending, within the outer window
  std::vector<double> residuals;
  bool has_zero = false;
};

// Distance from the spectrum to the window boundary +-w. Eigenvalues the solver
// did not return lie beyond `outer`, hence at distance >= outer - w.
double boundary_gap(const std::vector<double>& eigs, double w, double outer) {
  double g = outer - w;
  for (double l : eigs) g = std::min(g, std::abs(std::abs(l) - w));
  return g;
}

// Window half-width in [lo, hi] farthest from every |lambda|.
std::pair<double, double> choose_window(const std::vector<double>& eigs, double lo, double hi,
                                        double outer) {
  std::vector<double> cands{lo, hi};
  std::vector<double> mags;
  for (double l : eigs) mags.push_back(std::abs(l));
  std::sort(mags.begin(), mags.end());
  for (std::size_t i = 0; i + 1 < mags.size(); ++i) {
    const double mid = 0.5 * (mags[i] + mags[i + 1]);
    if (mid > lo && mid < hi) cands.push_back(mid);
  }
  double best = hi;
  double best_gap = -1.0;
  for (double c : cands) {
    const double g = boundary_gap(eigs, c, outer);
    if (g > best_gap + 1e-15 || (std::abs(g - best_gap) <= 1e-15 && c > best)) {
      best = c;
      best_gap = g;
    }
  }
  return {best, best_gap};
}

int negatives(const std::vector<double>& eigs, double w) {
  int n = 0;
  for (double l : eigs) n += (l < 0.0 && l > -w) ? 1 : 0;
  return n;
}

std::vector<double> inside(const std::vector<double>& eigs, double w) {
  std::vector<double> out;
  for (double l : eigs) {
    if (std::abs(l) < w) out.push_back(l);
  }
  return out;
}

class PathWalker {
 public:
  explicit PathWalker(const OperatorPath& path) : path_(path) {}

  // Upper bound on ||A(b) - A(a)|| for a <= b.
  double budget(double a, double b) const {
    double sum = 0.0;
    for (const auto& s : path_.segments()) {
      const double lo = std::max(a, s.t0);
      const double hi = std::min(b, s.t1);
      if (hi > lo) sum += s.slope_norm * (hi - lo);
    }
    return sum;
  }

  // Largest b <= t_end with budget(a, b) <= amount.
  double advance(double a, double amount) const {
    double t = a;
    for (const auto& s : path_.segments()) {
      if (s.t1 <= t) continue;
      const double len = s.t1 - std::max(t, s.t0);
      const double cost = s.slope_norm * len;
      if (cost <= amount) {
        amount -= cost;
        t = s.t1;
        continue;
      }
      return std::max(t, s.t0) + amount / s.slope_norm;
    }
    return path_.t_end();
  }

 private:
  const OperatorPath& path_;
};

}  // namespace

SflResult spectral_flow(const OperatorPath& path, const SpectralWindow& window,
                        const FlowControls& controls) {
  window.validate();
  controls.validate();
  const double w_hi = window.half_width;
  const double w_lo = controls.window_floor * w_hi;
  const double outer = 2.0 * w_hi - w_lo;
  const SpectralWindow solve_window(outer, 0.0);
  const double t_end = path.t_end();

  SflResult result;
  result.window = w_hi;
  result.diagnostics.solver = to_string(controls.solver);
  result.diagnostics.min_gap = std::numeric_limits<double>::infinity();
  result.diagnostics.min_abs_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& s : path.segments()) {
    result.diagnostics.path_norm_bound = std::max(result.diagnostics.path_norm_bound, s.slope_norm);
  }

  FilteredSubspaceSolver iterative(controls.iterative);
  auto evaluate = [&](double t) {
    const HermitianOperator op = path.at(t);
    WindowEigs r = controls.solver == SolverMode::dense
                       ? window_eigs(op, solve_window, SolverMode::dense)
                       : iterative.solve(op, solve_window);
    ++result.diagnostics.solves;
    Sample s{t, std::move(r.eigenvalues), std::move(r.residuals), false};
    for (double l : s.eigs) s.has_zero = s.has_zero || std::abs(l) <= controls.zero_tolerance;
    return s;
  };
  auto record = [&](const Sample& s) {
    result.samples.push_back({s.t, s.eigs, s.residuals});
    for (double l : s.eigs) {
      result.diagnostics.min_abs_eigenvalue = std::min(result.diagnostics.min_abs_eigenvalue, std::abs(l));
    }
  };

  Sample a = evaluate(path.t_start());
  if (a.has_zero) throw PreconditionError("path start operator has an eigenvalue at 0");
  record(a);

  std::mt19937_64 rng(controls.seed);
  std::uniform_real_distribution<double> jitter(0.85, 1.0);
  const PathWalker walker(path);
  double optimism = 2.0;

  // Trace bookkeeping for crossing records: ids aligned with a.eigs.
  std::vector<int> ids(a.eigs.size());
  int next_id = 0;
  for (auto& id : ids) id = next_id++;

  while (a.t < t_end) {
    if (static_cast<int>(result.steps.size()) >= controls.max_steps) {
      throw RefinementError("spectral flow: max_steps (" + std::to_string(controls.max_steps) +
                                ") exhausted at t = " + std::to_string(a.t),
                            a.t, static_cast<int>(result.steps.size()));
    }
    const auto [w_i, g_a] = choose_window(a.eigs, w_lo, w_hi, outer);
    if (!(g_a > window.guard)) {
      ++result.diagnostics.hazard_flags;
      throw RefinementError("spectral flow: no window in [" + std::to_string(w_lo) + ", " +
                                std::to_string(w_hi) + "] keeps a gap above the guard at t = " +
                                std::to_string(a.t),
                            a.t, static_cast<int>(result.steps.size()));
    }
    const double sure = controls.safety * g_a;
    double t_b = walker.advance(a.t, optimism * sure * jitter(rng));
    bool optimistic = optimism > 1.0;
    int bisections = 0;
    Sample b;
    double g_b = 0.0;
    for (;;) {
      if (!(t_b > a.t)) {
        throw RefinementError("spectral flow: step size underflow at t = " + std::to_string(a.t), a.t,
                              static_cast<int>(result.steps.size()));
      }
      b = evaluate(t_b);
      if (b.has_zero && t_b >= t_end) {
        throw PreconditionError("path end operator has an eigenvalue at 0");
      }
      g_b = boundary_gap(b.eigs, w_i, outer);
      const double cost = walker.budget(a.t, t_b);
      const bool weyl_ok = cost <= controls.safety * (g_a + g_b);
      const bool hazard = !(g_b > window.guard);
      if (hazard) ++result.diagnostics.hazard_flags;
      if (weyl_ok && !hazard && !b.has_zero) break;
      if (!weyl_ok && optimistic) {
        ++result.diagnostics.rejected_proposals;
        optimism = std::max(1.0, optimism * 0.7);
        optimistic = false;
        t_b = std::min(t_b, walker.advance(a.t, sure * jitter(rng)));
        continue;
      }
      if (++bisections > controls.max_bisections) {
        throw RefinementError("spectral flow: bisection limit reached near t = " + std::to_string(t_b),
                              a.t, static_cast<int>(result.steps.size()));
      }
      ++result.diagnostics.bisections;
      t_b = a.t + (t_b - a.t) * 0.5 * jitter(rng);
    }
    if (optimistic) optimism = std::min(2.0, optimism * 1.1);

    FlowStep step;
    step.t_start = a.t;
    step.t_end = b.t;
    step.window = w_i;
    step.start_eigs = inside(a.eigs, w_i);
    step.end_eigs = inside(b.eigs, w_i);
    step.start_negatives = negatives(a.eigs, w_i);
    step.end_negatives = negatives(b.eigs, w_i);
    step.gap_start = g_a;
    step.gap_end = g_b;
    step.weyl_budget = walker.budget(a.t, b.t);
    for (double r : b.residuals) step.max_residual = std::max(step.max_residual, r);
    result.diagnostics.min_gap = std::min({result.diagnostics.min_gap, g_a, g_b});

    // Ordered matching: the windowed counts agree because nothing crossed +-w_i.
    // Outside the window, eigenvalues pair up outward from the window edge.
    std::vector<int> new_ids(b.eigs.size(), -1);
    auto index_range = [&](const std::vector<double>& e, auto pred) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (pred(e[i])) idx.push_back(i);
      }
      return idx;
    };
    const auto in_a = index_range(a.eigs, [&](double l) { return std::abs(l) < w_i; });
    const auto in_b = index_range(b.eigs, [&](double l) { return std::abs(l) < w_i; });
    for (std::size_t j = 0; j < std::min(in_a.size(), in_b.size()); ++j) {
      const double la = a.eigs[in_a[j]];
      const double lb = b.eigs[in_b[j]];
      new_ids[in_b[j]] = ids[in_a[j]];
      if ((la < 0.0) != (lb < 0.0)) {
        result.crossings.push_back({a.t, b.t, la < 0.0 ? 1 : -1, ids[in_a[j]]});
      }
    }
    auto low_a = index_range(a.eigs, [&](double l) { return l <= -w_i; });
    auto low_b = index_range(b.eigs, [&](double l) { return l <= -w_i; });
    std::reverse(low_a.begin(), low_a.end());
    std::reverse(low_b.begin(), low_b.end());
    for (std::size_t j = 0; j < std::min(low_a.size(), low_b.size()); ++j) new_ids[low_b[j]] = ids[low_a[j]];
    const auto high_a = index_range(a.eigs, [&](double l) { return l >= w_i; });
    const auto high_b = index_range(b.eigs, [&](double l) { return l >= w_i; });
    for (std::size_t j = 0; j < std::min(high_a.size(), high_b.size()); ++j) new_ids[high_b[j]] = ids[high_a[j]];
    for (auto& id : new_ids) {
      if (id < 0) id = next_id++;
    }

    result.flow += step.contribution();
    result.steps.push_back(std::move(step));
    record(b);
    ids = std::move(new_ids);
    a = std::move(b);
  }
  if (!std::isfinite(result.diagnostics.min_gap)) result.diagnostics.min_gap = outer - w_hi;
  return result;
}

// --- serialization ------------------------------------------------------------

nlohmann::json to_json(const SflResult& r) {
  using nlohmann::json;
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"t_start", s.t_start},
                     {"t_end", s.t_end},
                     {"window", s.window},
                     {"start_eigenvalues", s.start_eigs},
                     {"end_eigenvalues", s.end_eigs},
                     {"start_negatives", s.start_negatives},
                     {"end_negatives", s.end_negatives},
                     {"gap_start", s.gap_start},
                     {"gap_end", s.gap_end},
                     {"weyl_budget", s.weyl_budget},
                     {"max_residual", s.max_residual}});
  }
  json crossings = json::array();
  for (const auto& c : r.crossings) {
    crossings.push_back(
        {{"t_start", c.t_start}, {"t_end", c.t_end}, {"direction", c.direction}, {"trace", c.trace}});
  }
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"t", s.t}, {"eigenvalues", s.eigenvalues}, {"residuals", s.residuals}});
  }
  const auto& d = r.diagnostics;
  return {{"schema_version", kSflSchemaVersion},
          {"flow", r.flow},
          {"window", r.window},
          {"steps", steps},
          {"crossings", crossings},
          {"samples", samples},
          {"diagnostics",
           {{"solves", d.solves},
            {"rejected_proposals", d.rejected_proposals},
            {"bisections", d.bisections},
            {"hazard_flags", d.hazard_flags},
            {"min_gap", d.min_gap},
            {"min_abs_eigenvalue", std::isfinite(d.min_abs_eigenvalue) ? json(d.min_abs_eigenvalue) : json(nullptr)},
            {"path_norm_bound", d.path_norm_bound},
            {"solver", d.solver}}}};
}

SflResult sfl_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSflSchemaVersion) {
      throw FormatError("unsupported spectral-flow schema_version " + j.at("schema_version").dump());
    }
    SflResult r;
    r.flow = j.at("flow").get<int>();
    r.window = j.at("window").get<double>();
    for (const auto& s : j.at("steps")) {
      FlowStep st;
      st.t_start = s.at("t_start").get<double>();
      st.t_end = s.at("t_end").get<double>();
      st.window = s.at("window").get<double>();
      st.start_eigs = s.at("start_eigenvalues").get<std::vector<double>>();
      st.end_eigs = s.at("end_eigenvalues").get<std::vector<double>>();
      st.start_negatives = s.at("start_negatives").get<int>();
      st.end_negatives = s.at("end_negatives").get<int>();
      st.gap_start = s.at("gap_start").get<double>();
      st.gap_end = s.at("gap_end").get<double>();
      st.weyl_budget = s.at("weyl_budget").get<double>();
      st.max_residual = s.at("max_residual").get<double>();
      r.steps.push_back(std::move(st));
    }
    for (const auto& c : j.at("crossings")) {
      r.crossings.push_back({c.at("t_start").get<double>(), c.at("t_end").get<double>(),
                             c.at("direction").get<int>(), c.at("trace").get<int>()});
    }
    for (const auto& s : j.at("samples")) {
      r.samples.push_back({s.at("t").get<double>(), s.at("eigenvalues").get<std::vector<double>>(),
                           s.at("residuals").get<std::vector<double>>()});
    }
    const auto& d = j.at("diagnostics");
    r.diagnostics.solves = d.at("solves").get<int>();
    r.diagnostics.rejected_proposals = d.at("rejected_proposals").get<int>();
    r.diagnostics.bisections = d.at("bisections").get<int>();
    r.diagnostics.hazard_flags = d.at("hazard_flags").get<int>();
    r.diagnostics.min_gap = d.at("min_gap").get<double>();
    r.diagnostics.min_abs_eigenvalue = d.at("min_abs_eigenvalue").is_null()
                                           ? std::numeric_limits<double>::infinity()
                                           : d.at("min_abs_eigenvalue").get<double>();
    r.diagnostics.path_norm_bound = d.at("path_norm_bound").get<double>();
    r.diagnostics.solver = d.at("solver").get<std::string>();
    int sum = 0;
    for (const auto& st : r.steps) sum += st.contribution();
    if (sum != r.flow) throw FormatError("spectral-flow record: flow does not equal the step sum");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed spectral-flow record: ") + e.what());
  }
}

std::string samples_csv(const SflResult& r) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,eigenvalue_index,eigenvalue,residual\n";
  for (const auto& s : r.samples) {
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      os << s.t << ',' << i << ',' << s.eigenvalues[i] << ','
         << (i < s.residuals.size() ? s.residuals[i] : 0.0) << '\n';
    }
  }
  return os.str();
}

}  // namespace sflab
