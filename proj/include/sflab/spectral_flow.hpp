#pragma once

// Spectral flow of piecewise-affine paths of Hermitian operators, counted in
// a zero-centred window under Weyl step control, plus the analytic circle
// family used as an oracle.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sflab/eigensolvers.hpp"
#include "sflab/hermitian_operator.hpp"

namespace sflab {

struct EndpointRelation {
  enum class Kind { none, unitary };
  Kind kind = Kind::none;
  std::string conjugator;  // free-form description of U with A_start = U* A_end U
};

/// A(t) = base + (t - t0) * slope on [t0, t1].
struct PathSegment {
  double t0 = 0.0;
  double t1 = 1.0;
  HermitianOperator base;
  HermitianOperator slope;
  double slope_norm = 0.0;  // upper bound on ||slope||
};

class OperatorPath {
 public:
  /// t -> a0 + t * x on [0, 1]; `x_norm` must bound ||x||.
  static OperatorPath affine(HermitianOperator a0, HermitianOperator x, double x_norm,
                             EndpointRelation relation = {});
  /// Piecewise-linear interpolation of dense samples at strictly increasing times.
  static OperatorPath sampled(const std::vector<double>& times,
                              const std::vector<HermitianOperator>& samples,
                              EndpointRelation relation = {});
  /// Same operators traversed over [t_start, t_end] instead of the current range.
  OperatorPath rescaled(double t_start, double t_end) const;
  /// t -> A(t_start + t_end - t).
  OperatorPath reversed() const;
  /// this on [0, 1/2] followed by `next` on [1/2, 1]; the junction operators
  /// must agree within 1e-10 (relative to their norms).
  OperatorPath concat(const OperatorPath& next) const;

  double t_start() const { return segments_.front().t0; }
  double t_end() const { return segments_.back().t1; }
  Eigen::Index dim() const { return segments_.front().base.dim(); }
  const std::vector<PathSegment>& segments() const { return segments_; }
  const EndpointRelation& relation() const { return relation_; }
  std::size_t segment_index(double t) const;
  HermitianOperator at(double t) const;

 private:
  OperatorPath() = default;
  std::vector<PathSegment> segments_;
  EndpointRelation relation_;
};

/// Diagonal path diag(n + 1/2 + t w), n = -n_modes/2, ..., the eigenvalue lines of
/// -i d/dtheta + t w on antiperiodic circle spinors. Flow is exactly w.
OperatorPath circle_oracle(int winding, int n_modes);

struct FlowControls {
  int max_steps = 20000;
  double safety = 0.5;           // fraction of the Weyl budget a step may use
  double window_floor = 0.5;     // per-step window half-width lies in [floor * w, w]
  double zero_tolerance = 1e-10; // |lambda| below this at a sample forces bisection
  SolverMode solver = SolverMode::dense;
  IterativeOptions iterative;
  std::uint64_t seed = 1;        // perturbs step proposals; never the integer
  int max_bisections = 60;
  void validate() const;
};

struct FlowStep {
  double t_start = 0.0;
  double t_end = 0.0;
  double window = 0.0;                 // half-width w_i used for counting
  std::vector<double> start_eigs;      // eigenvalues in (-w_i, w_i) at t_start
  std::vector<double> end_eigs;        // eigenvalues in (-w_i, w_i) at t_end
  int start_negatives = 0;
  int end_negatives = 0;
  double gap_start = 0.0;              // distance of the spectrum to +-w_i
  double gap_end = 0.0;
  double weyl_budget = 0.0;            // ||A(t_end) - A(t_start)|| bound used
  double max_residual = 0.0;
  int contribution() const { return start_negatives - end_negatives; }
};

struct Crossing {
  double t_start = 0.0;
  double t_end = 0.0;
  int direction = 0;  // +1 negative -> positive
  int trace = 0;
};

struct SpectrumSample {
  double t = 0.0;
  std::vector<double> eigenvalues;  // everything the solver returned (outer window)
  std::vector<double> residuals;
};

struct FlowDiagnostics {
  int solves = 0;
  int rejected_proposals = 0;
  int bisections = 0;
  int hazard_flags = 0;
  double min_gap = 0.0;
  double min_abs_eigenvalue = 0.0;  // smallest |lambda| over all samples
  double path_norm_bound = 0.0;
  std::string solver;
};

struct SflResult {
  int flow = 0;
  double window = 0.0;
  std::vector<FlowStep> steps;
  std::vector<Crossing> crossings;
  std::vector<SpectrumSample> samples;
  FlowDiagnostics diagnostics;
};

SflResult spectral_flow(const OperatorPath& path, const SpectralWindow& window,
                        const FlowControls& controls = {});

inline constexpr int kSflSchemaVersion = 1;

nlohmann::json to_json(const SflResult& r);
SflResult sfl_from_json(const nlohmann::json& j);
/// CSV with columns t,eigenvalue_index,eigenvalue,residual.
std::string samples_csv(const SflResult& r);

}  // namespace sflab
