#pragma once

// The two fixed-site procedures: outlier detection by one soft solve, and
// the threshold search that finds the smallest error budget t admitting a
// nonnegative margin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "softpd/formulations.hpp"
#include "softpd/geometry.hpp"
#include "softpd/lp.hpp"

namespace softpd {

/// Largest meaningful error budget: one per point (PerPoint) or one per
/// point-rival pair (PerPair).
inline long stage_limit(const Dataset& data, Variant variant) {
  const auto n = static_cast<long>(data.size());
  const auto k = static_cast<long>(data.clusters());
  return variant == Variant::PerPoint ? n : (k - 1) * n;
}

/// Outlier detection: solve the stage-t soft program once and report the
/// margin errors. `outliers` lists the error points; `error_pairs` carries
/// the per-pair multiplicities (informative for PerPair counting).
struct OutlierReport {
  SoftSolution solution;
  std::vector<std::size_t> outliers;
  std::vector<std::pair<std::size_t, int>> error_pairs;
};

inline OutlierReport detect_outliers(const Dataset& data, const SiteSet& sites,
                                     long t, Variant variant,
                                     const LpSolver& solver = {}) {
  if (t < 1 || t > stage_limit(data, variant))
    throw std::invalid_argument("error budget t out of range");
  const LinearProgram lp = build_soft_lp(data, sites, t, variant);
  LpSolution sol = solver.solve(lp);
  if (sol.status == LpStatus::Unbounded)
    throw UnboundedError(
        "soft program is unbounded at this t; use a smaller error budget");
  SoftOutcome out = extract_soft_solution(std::move(sol), data, sites, t, variant);
  MarginReport rep = extract_errors(out.solution->diagram, data,
                                    out.solution->epsilon);
  return {std::move(*out.solution), std::move(rep.error_points),
          std::move(rep.error_pairs)};
}

/// Result of the threshold search. tau = t_min / stage_limit; t_min = 0 with
/// tau = 0 when the clustering is already separable (margin >= 0) and the
/// diagram is then the hard optimum. Otherwise the diagram solves stage t_min
/// and epsilon is its margin (0 for an unbounded stage, see below).
struct ThresholdResult {
  double tau = 0.0;
  long t_min = 0;
  long t_max = 0;
  Variant variant = Variant::PerPoint;
  PowerDiagram diagram;
  double epsilon = 0.0;
  long lp_solve_count = 0;
  double hard_epsilon = 0.0;
  std::optional<SoftSolution> soft;  // absent when tau = 0
};

namespace detail {

/// Finite representative of an unbounded stage: slide the vertex along the
/// certified ray until the margin component reaches zero.
inline SoftSolution extend_along_ray(const LpSolution& sol, const Dataset& data,
                                     const SiteSet& sites, long t,
                                     Variant variant) {
  const std::size_t k = data.clusters();
  const double eps0 = sol.x[k - 1];
  const double rate = sol.ray[k - 1];
  if (!(rate > 0.0))
    throw NumericError("unbounded soft program with non-improving margin ray");
  const double alpha = eps0 < 0.0 ? -eps0 / rate : 0.0;
  std::vector<double> x(sol.x);
  for (std::size_t c = 0; c < x.size(); ++c) x[c] += alpha * sol.ray[c];
  return soft_solution_from_point(x, data, sites, t, variant);
}

/// Same idea when no ray was computed: stage T_max is always unbounded along
/// (gamma fixed, eps +1, every xi +1), which keeps all rows tight-or-better
/// because the eps and xi contributions cancel. Any feasible point of the
/// shared feasible region extends to a stage-T_max solution with eps = 0.
inline SoftSolution extend_all_ones(const LpSolution& sol, const Dataset& data,
                                    const SiteSet& sites, long t,
                                    Variant variant) {
  const std::size_t k = data.clusters();
  const double alpha = std::max(0.0, -sol.x[k - 1]);
  std::vector<double> x(sol.x);
  x[k - 1] += alpha;
  for (std::size_t c = k; c < x.size(); ++c) x[c] += alpha;
  return soft_solution_from_point(x, data, sites, t, variant);
}

}  // namespace detail

/// Threshold search. Step 1 solves the hard program; a nonnegative margin
/// exits with tau = 0. Otherwise binary search on t in [1, T_max] for the
/// smallest stage with margin >= 0 (unbounded counts as +inf), warm-starting
/// each probe from the previous one. Stage T_max is always unbounded, so the
/// search needs no probe there; if it ends on a never-probed T_max the last
/// probe's vertex is extended along the all-ones direction instead of
/// solving again. Total solves <= ceil(log2 T_max) + 1 including the hard one.
inline ThresholdResult least_squares_threshold(const Dataset& data,
                                               const SiteSet& sites,
                                               Variant variant,
                                               const LpSolver& solver = {},
                                               bool warm_start = true) {
  ThresholdResult res;
  res.variant = variant;
  res.t_max = stage_limit(data, variant);

  const SigmaMatrix sigma = build_sigma(data, sites);
  const LinearProgram hard = build_hard_margin_lp(sigma);
  LpSolution hs = solver.solve(hard);
  res.lp_solve_count = 1;
  if (hs.status != LpStatus::Optimal)
    throw NumericError("hard-margin program did not solve to optimality");
  const std::size_t k = data.clusters();
  res.hard_epsilon = hs.x[k - 1];
  if (res.hard_epsilon >= -kNumTol) {
    std::vector<double> gamma(k, 0.0);
    for (std::size_t i = 1; i < k; ++i) gamma[i] = hs.x[i - 1];
    res.diagram = PowerDiagram(sites, gamma);
    res.epsilon = res.hard_epsilon;
    return res;
  }

  long lo = 1, hi = res.t_max;
  WarmStart warm;
  bool have_warm = false;
  std::optional<std::pair<long, SoftOutcome>> remembered;
  std::optional<std::pair<long, SoftOutcome>> last_infeasible;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    const LinearProgram lp = build_soft_lp(data, sites, mid, variant);
    LpSolution sol = warm_start && have_warm ? solver.solve(lp, &warm)
                                             : solver.solve(lp);
    ++res.lp_solve_count;
    warm = sol.warm;
    have_warm = true;
    SoftOutcome out = extract_soft_solution(std::move(sol), data, sites, mid, variant);
    const bool feasible = out.status == LpStatus::Unbounded ||
                          out.solution->epsilon >= -kNumTol;
    if (feasible) {
      remembered.emplace(mid, std::move(out));
      hi = mid;
    } else {
      last_infeasible.emplace(mid, std::move(out));
      lo = mid + 1;
    }
  }
  res.t_min = lo;
  res.tau = static_cast<double>(lo) / static_cast<double>(res.t_max);

  const auto finite_rep = [&](SoftOutcome& out, long t) -> SoftSolution {
    if (out.status != LpStatus::Unbounded) return std::move(*out.solution);
    if (!out.lp.ray.empty())
      return detail::extend_along_ray(out.lp, data, sites, t, variant);
    // Backends without ray certificates may hand back an unusable point with
    // the unbounded verdict. The feasible region does not depend on t, so a
    // zero-objective resolve recovers a point to push along the all-ones
    // direction. Costs one extra solve, only on such backends.
    try {
      return detail::extend_all_ones(out.lp, data, sites, t, variant);
    } catch (const NumericError&) {
      LinearProgram lp = build_soft_lp(data, sites, t, variant);
      std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
      LpSolution sol = solver.solve(lp);
      ++res.lp_solve_count;
      if (sol.status != LpStatus::Optimal)
        throw NumericError("feasibility recovery for an unbounded stage failed");
      return detail::extend_all_ones(sol, data, sites, t, variant);
    }
  };
  SoftSolution soft = [&]() -> SoftSolution {
    if (remembered && remembered->first == lo)
      return finite_rep(remembered->second, lo);
    if (lo == res.t_max && last_infeasible)
      return detail::extend_all_ones(last_infeasible->second.lp, data, sites,
                                     lo, variant);
    // Unreachable for t_max >= 2, kept as a safe fallback.
    const LinearProgram lp = build_soft_lp(data, sites, lo, variant);
    LpSolution sol = warm_start && have_warm ? solver.solve(lp, &warm)
                                             : solver.solve(lp);
    ++res.lp_solve_count;
    SoftOutcome out = extract_soft_solution(std::move(sol), data, sites, lo, variant);
    return finite_rep(out, lo);
  }();
  res.diagram = soft.diagram;
  res.epsilon = soft.epsilon;
  res.soft = std::move(soft);
  return res;
}

/// One sweep entry: the optimum margin and objective of stage t, with
/// unbounded stages reported as +inf/+inf.
struct CurvePoint {
  long t = 0;
  double epsilon = 0.0;
  double theta = 0.0;
  bool unbounded = false;
};

inline std::vector<CurvePoint> epsilon_curve(const Dataset& data,
                                             const SiteSet& sites,
                                             Variant variant,
                                             std::span<const long> t_list,
                                             const LpSolver& solver = {},
                                             bool warm_start = true) {
  const long t_max = stage_limit(data, variant);
  std::vector<CurvePoint> curve;
  curve.reserve(t_list.size());
  WarmStart warm;
  bool have_warm = false;
  for (const long t : t_list) {
    if (t < 1 || t > t_max)
      throw std::invalid_argument("curve stage out of range");
    const LinearProgram lp = build_soft_lp(data, sites, t, variant);
    LpSolution sol = warm_start && have_warm ? solver.solve(lp, &warm)
                                             : solver.solve(lp);
    warm = sol.warm;
    have_warm = true;
    CurvePoint p;
    p.t = t;
    if (sol.status == LpStatus::Unbounded) {
      p.unbounded = true;
      p.epsilon = std::numeric_limits<double>::infinity();
      p.theta = std::numeric_limits<double>::infinity();
    } else {
      SoftOutcome out = extract_soft_solution(std::move(sol), data, sites, t, variant);
      p.epsilon = out.solution->epsilon;
      p.theta = out.solution->objective;
    }
    curve.push_back(p);
  }
  return curve;
}

}  // namespace softpd
