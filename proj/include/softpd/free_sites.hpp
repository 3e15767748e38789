#pragma once

// Best-effort local optimization over free sites. The fixed-site programs
// are exact LPs; freeing S makes the problem non-convex, so this runs an
// alternating ascent: solve the fixed-site LP, estimate the gradient of its
// re-solved optimum as a function of S by central differences, and take a
// backtracking step that is accepted only when the re-solved LP objective
// actually goes up. The scale anchors (s_j - s_i).(c_j - c_i) >= 1 over
// cluster means c are enforced by rescaling, which leaves the cells, the
// margin and the objective unchanged.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "softpd/algorithms.hpp"
#include "softpd/formulations.hpp"
#include "softpd/geometry.hpp"
#include "softpd/lp.hpp"

namespace softpd {

enum class FreeVariant { Hard, PerPair, PerPoint };

inline const char* free_variant_name(FreeVariant v) {
  switch (v) {
    case FreeVariant::Hard: return "spd";
    case FreeVariant::PerPair: return "mme";
    default: return "mep";
  }
}

struct LocalSolveReport {
  SiteSet sites;
  std::vector<double> gamma;
  double epsilon = 0.0;
  std::vector<double> xi;  // empty for the hard variant
  double objective = 0.0;
  double initial_objective = 0.0;
  long iterations = 0;
  bool converged = false;
  double violation_norm = 0.0;
  FreeVariant variant = FreeVariant::Hard;
  long t = 0;
};

namespace detail {

/// Smallest pairwise alignment of site differences with cluster-mean
/// differences; the scale anchors require every term >= 1.
inline double min_alignment(const SiteSet& sites, const SiteSet& means) {
  double lo = std::numeric_limits<double>::infinity();
  const std::size_t d = sites.dim();
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        v += (sites.site(j)[c] - sites.site(i)[c]) *
             (means.site(j)[c] - means.site(i)[c]);
      lo = std::min(lo, v);
    }
  return lo;
}

inline double anchor_violation_sq(const SiteSet& sites, const SiteSet& means) {
  double sum = 0.0;
  const std::size_t d = sites.dim();
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        v += (sites.site(j)[c] - sites.site(i)[c]) *
             (means.site(j)[c] - means.site(i)[c]);
      const double gap = std::max(0.0, 1.0 - v);
      sum += gap * gap;
    }
  return sum;
}

struct InnerSolve {
  bool ok = false;  // false: LP unbounded or sites degenerate
  double theta = -std::numeric_limits<double>::infinity();
  std::vector<double> gamma;
  double epsilon = 0.0;
  std::vector<double> xi;
};

inline InnerSolve solve_inner(const Dataset& data, const SiteSet& sites,
                              FreeVariant variant, long t,
                              const LpSolver& solver) {
  InnerSolve in;
  try {
    const std::size_t k = data.clusters();
    if (variant == FreeVariant::Hard) {
      const LinearProgram lp = build_hard_margin_lp(build_sigma(data, sites));
      const LpSolution sol = solver.solve(lp);
      if (sol.status != LpStatus::Optimal) return in;
      in.gamma.assign(k, 0.0);
      for (std::size_t i = 1; i < k; ++i) in.gamma[i] = sol.x[i - 1];
      in.epsilon = sol.x[k - 1];
      in.theta = in.epsilon;
    } else {
      const Variant v = variant == FreeVariant::PerPair ? Variant::PerPair
                                                        : Variant::PerPoint;
      const LinearProgram lp = build_soft_lp(data, sites, t, v);
      LpSolution sol = solver.solve(lp);
      if (sol.status != LpStatus::Optimal) return in;
      SoftSolution s = soft_solution_from_point(sol.x, data, sites, t, v);
      in.gamma = s.diagram.gamma;
      in.epsilon = s.epsilon;
      in.xi = std::move(s.xi);
      in.theta = s.objective;
    }
    in.ok = std::isfinite(in.theta);
  } catch (const std::exception&) {
    in.ok = false;
  }
  return in;
}

/// Rescale repair: divide all site coordinates by the minimal anchor value
/// when it is below 1. Cells, margin and objective are scale-invariant in
/// (S, gamma) jointly, but here only S moves between LP solves, so repair is
/// applied to candidates before their LP re-solve. Returns false when the
/// candidate is beyond repair (non-positive alignment).
inline bool repair_scale(std::vector<double>& coords, std::size_t dim,
                         const SiteSet& means, bool* rescaled = nullptr) {
  try {
    SiteSet s(dim, coords);
    const double delta = min_alignment(s, means);
    if (!(delta > 1e-12)) return false;
    if (delta < 1.0) {
      for (double& c : coords) c /= delta;
      if (rescaled) *rescaled = true;
    }
    return true;
  } catch (const std::exception&) {
    return false;  // coincident candidate sites
  }
}

}  // namespace detail

/// Alternating local ascent on the free-site program. Starts from the
/// cluster means (rescaled to satisfy the anchors) unless sites are given.
/// Stops when an accepted step improves the LP objective by less than `tol`
/// (matching the reference precision of 0.001) or after `max_iterations`.
inline LocalSolveReport local_optimize(const Dataset& data, FreeVariant variant,
                                       long t = 1,
                                       std::optional<SiteSet> start = {},
                                       const LpSolver& solver = {},
                                       long max_iterations = 500,
                                       double tol = 1e-3) {
  if (variant != FreeVariant::Hard) {
    const Variant v = variant == FreeVariant::PerPair ? Variant::PerPair
                                                      : Variant::PerPoint;
    if (t < 1 || t > stage_limit(data, v))
      throw std::invalid_argument("error budget t out of range");
  }
  const SiteSet means = data.cluster_means();
  const std::size_t dim = data.dim();
  std::vector<double> coords;
  if (start) {
    if (start->dim() != dim || start->size() != data.clusters())
      throw std::invalid_argument("starting sites shape mismatch");
    coords = start->coords();
  } else {
    coords = means.coords();
  }
  if (!detail::repair_scale(coords, dim, means))
    throw std::invalid_argument(
        "starting sites cannot satisfy the scale anchors by rescaling");

  SiteSet sites(dim, coords);
  detail::InnerSolve inner = detail::solve_inner(data, sites, variant, t, solver);
  if (!inner.ok)
    throw UnboundedError(
        "fixed-site program at the starting sites has no finite optimum; "
        "use a smaller error budget");

  LocalSolveReport rep;
  rep.variant = variant;
  rep.t = variant == FreeVariant::Hard ? 0 : t;
  rep.initial_objective = inner.theta;

  bool converged = false;
  long iter = 0;
  for (; iter < max_iterations; ++iter) {
    const auto theta_at = [&](const std::vector<double>& c) {
      try {
        const detail::InnerSolve in =
            detail::solve_inner(data, SiteSet(dim, c), variant, t, solver);
        return in.ok ? in.theta : -std::numeric_limits<double>::infinity();
      } catch (const std::exception&) {
        return -std::numeric_limits<double>::infinity();
      }
    };

    // Ascent direction from central differences on the re-solved optimum.
    // Around a generic base the inner optimum keeps one basis, so theta is a
    // smooth function of S there; differencing the fixed-(gamma, eps) row
    // penalties instead would straddle the kinks that sit exactly at the
    // optimum and stall the search.
    double coord_max = 0.0;
    for (double c : coords) coord_max = std::max(coord_max, std::abs(c));
    const double h = 1e-5 * (1.0 + coord_max);
    std::vector<double> grad(coords.size(), 0.0);
    double gnorm2 = 0.0;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      std::vector<double> up = coords, dn = coords;
      up[c] += h;
      dn[c] -= h;
      const double tu = theta_at(up);
      const double td = theta_at(dn);
      if (!std::isfinite(tu) || !std::isfinite(td)) continue;
      grad[c] = (tu - td) / (2.0 * h);
      gnorm2 += grad[c] * grad[c];
    }
    if (!(gnorm2 > 1e-18)) { converged = true; break; }

    // Backtracking line search on the true re-solved objective.
    double alpha = (1.0 + std::sqrt(squared_norm(coords))) /
                   (1.0 + std::sqrt(gnorm2));
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt, alpha *= 0.5) {
      std::vector<double> cand(coords.size());
      for (std::size_t c = 0; c < coords.size(); ++c)
        cand[c] = coords[c] + alpha * grad[c];
      if (!detail::repair_scale(cand, dim, means)) continue;
      SiteSet cand_sites(dim, cand);
      detail::InnerSolve cand_inner =
          detail::solve_inner(data, cand_sites, variant, t, solver);
      if (!cand_inner.ok) continue;
      if (!(cand_inner.theta >= inner.theta + 1e-4 * alpha * gnorm2)) continue;
      const double gain = cand_inner.theta - inner.theta;
      coords = std::move(cand);
      sites = std::move(cand_sites);
      inner = std::move(cand_inner);
      accepted = true;
      if (gain < tol) converged = true;
      break;
    }
    if (!accepted) { converged = true; break; }
    if (converged) { ++iter; break; }
  }

  rep.sites = std::move(sites);
  rep.gamma = inner.gamma;
  rep.epsilon = inner.epsilon;
  rep.xi = inner.xi;
  rep.objective = inner.theta;
  rep.iterations = iter;
  rep.converged = converged;
  rep.violation_norm =
      std::sqrt(detail::anchor_violation_sq(rep.sites, means));
  return rep;
}

}  // namespace softpd
