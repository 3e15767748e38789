#pragma once

// Builders for the margin programs over a fixed clustered point set.
//
// All of them share the normalized pair geometry: for ordered clusters
// (i, j), u_ij = (s_j - s_i) / |s_j - s_i| and the cell gap
// g_ij = (gamma_j - gamma_i) / |s_j - s_i|. gamma_1 is pinned to zero, so the
// gamma variables are gamma_2 .. gamma_k, followed by the margin variable
// eps, followed by any penalty variables. Row order is point-major with
// rival clusters ascending.

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "softpd/geometry.hpp"
#include "softpd/lp.hpp"

namespace softpd {

/// Per ordered pair (i, j): the farthest reach of cluster i along u_ij,
/// sigma_ij = max over x in C_i of u_ij . x, plus the site distances.
struct SigmaMatrix {
  std::size_t k = 0;
  std::vector<double> sigma;  // k*k, diagonal unused
  std::vector<double> dist;   // k*k

  double at(std::size_t i, std::size_t j) const { return sigma[i * k + j]; }
  double d(std::size_t i, std::size_t j) const { return dist[i * k + j]; }
};

inline SigmaMatrix build_sigma(const Dataset& data, const SiteSet& sites) {
  if (sites.size() != data.clusters())
    throw std::invalid_argument("one site per cluster required");
  if (sites.dim() != data.dim())
    throw std::invalid_argument("site and point dimensions disagree");
  const PairTable t = build_pair_table(sites);
  SigmaMatrix s;
  s.k = sites.size();
  s.sigma.assign(s.k * s.k, -std::numeric_limits<double>::infinity());
  s.dist = t.dists;
  for (std::size_t l = 0; l < data.size(); ++l) {
    const auto i = static_cast<std::size_t>(data.label(l));
    for (std::size_t j = 0; j < s.k; ++j) {
      if (j == i) continue;
      const double v = dot(t.unit(i, j), data.point(l));
      auto& cell = s.sigma[i * s.k + j];
      if (v > cell) cell = v;
    }
  }
  return s;
}

/// Penalty coefficient for allowing up to t margin errors. Strictly between
/// 1/(t+1) and 1/t, which is what makes the counting bounds work.
inline double margin_penalty(long t) {
  if (t < 1) throw std::invalid_argument("penalty stage must be at least 1");
  const double td = static_cast<double>(t);
  return (td + 0.5) / (td * (td + 1.0));
}

namespace detail {

inline std::string gamma_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "G%07zu", i + 1);
  return buf;
}

inline std::string xi_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "X%07zu", r + 1);
  return buf;
}

}  // namespace detail

/// Largest-margin program over fixed sites: maximize eps subject to
/// sigma_ij + eps <= g_ij for every ordered pair. k(k-1) rows, k variables
/// (gamma_2..gamma_k free, then eps free). Negative optimum means the
/// clustering is not separable with these sites.
inline LinearProgram build_hard_margin_lp(const SigmaMatrix& s) {
  const std::size_t k = s.k;
  if (k < 2) throw std::invalid_argument("need at least 2 clusters");
  LinearProgram lp(k);  // gamma_2..gamma_k, eps
  for (std::size_t c = 0; c < k; ++c) lp.var_sign[c] = VarSign::Free;
  lp.objective[k - 1] = 1.0;
  for (std::size_t c = 0; c + 1 < k; ++c) lp.var_names.push_back(detail::gamma_name(c + 1));
  lp.var_names.push_back("EPSILON");
  std::vector<double> row(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      std::fill(row.begin(), row.end(), 0.0);
      const double inv = 1.0 / s.d(i, j);
      if (i > 0) row[i - 1] += inv;
      if (j > 0) row[j - 1] -= inv;
      row[k - 1] = 1.0;
      lp.add_row(row, -s.at(i, j));
    }
  return lp;
}

/// Soft-margin program at stage t: rows u_ij.x_l + eps <= g_ij + xi over all
/// points l and rivals j, objective eps - f_t * sum(xi). PerPair gives each
/// row its own penalty; PerPoint shares one penalty across a point's rows.
inline LinearProgram build_soft_lp(const Dataset& data, const SiteSet& sites,
                                   long t, Variant variant) {
  const double f = margin_penalty(t);
  if (sites.size() != data.clusters())
    throw std::invalid_argument("one site per cluster required");
  if (sites.dim() != data.dim())
    throw std::invalid_argument("site and point dimensions disagree");
  const PairTable pt = build_pair_table(sites);
  const std::size_t k = data.clusters();
  const std::size_t n = data.size();
  const std::size_t nxi = variant == Variant::PerPair ? n * (k - 1) : n;
  const std::size_t base = k;  // gamma_2..gamma_k then eps
  LinearProgram lp(base + nxi);
  for (std::size_t c = 0; c < base; ++c) lp.var_sign[c] = VarSign::Free;
  lp.objective[base - 1] = 1.0;
  for (std::size_t x = 0; x < nxi; ++x) lp.objective[base + x] = -f;
  for (std::size_t c = 0; c + 1 < k; ++c) lp.var_names.push_back(detail::gamma_name(c + 1));
  lp.var_names.push_back("EPSILON");
  for (std::size_t x = 0; x < nxi; ++x) lp.var_names.push_back(detail::xi_name(x));

  std::vector<double> row(lp.nvars);
  std::size_t pair_rank = 0;
  for (std::size_t l = 0; l < n; ++l) {
    const auto i = static_cast<std::size_t>(data.label(l));
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      std::fill(row.begin(), row.end(), 0.0);
      const double inv = 1.0 / pt.dist(i, j);
      if (i > 0) row[i - 1] += inv;
      if (j > 0) row[j - 1] -= inv;
      row[base - 1] = 1.0;
      const std::size_t xi_col =
          base + (variant == Variant::PerPair ? pair_rank : l);
      row[xi_col] = -1.0;
      lp.add_row(row, -dot(pt.unit(i, j), data.point(l)));
      ++pair_rank;
    }
  }
  return lp;
}

/// Feasibility system deciding whether any sites admit a separating diagram
/// for this clustering: for every point and rival, (s_j - s_i).x_l <=
/// gamma_j - gamma_i, plus the scale anchors (s_j - s_i).(c_j - c_i) >= 1
/// over unordered pairs of cluster means c. Variables are the k*d site
/// coordinates followed by gamma_2..gamma_k, all free; the objective is zero.
inline LinearProgram build_site_feasibility_lp(const Dataset& data) {
  const std::size_t k = data.clusters();
  const std::size_t d = data.dim();
  const SiteSet means = data.cluster_means();
  LinearProgram lp(k * d + (k - 1));
  for (std::size_t c = 0; c < lp.nvars; ++c) lp.var_sign[c] = VarSign::Free;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "S%03zu_%03zu", i + 1, c + 1);
      lp.var_names.push_back(buf);
    }
  for (std::size_t i = 1; i < k; ++i) lp.var_names.push_back(detail::gamma_name(i));

  std::vector<double> row(lp.nvars);
  const auto gamma_col = [&](std::size_t i) { return k * d + i - 1; };
  for (std::size_t l = 0; l < data.size(); ++l) {
    const auto i = static_cast<std::size_t>(data.label(l));
    const auto x = data.point(l);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t c = 0; c < d; ++c) {
        row[j * d + c] += x[c];
        row[i * d + c] -= x[c];
      }
      if (j > 0) row[gamma_col(j)] -= 1.0;
      if (i > 0) row[gamma_col(i)] += 1.0;
      lp.add_row(row, 0.0);
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      std::fill(row.begin(), row.end(), 0.0);
      const auto ci = means.site(i), cj = means.site(j);
      for (std::size_t c = 0; c < d; ++c) {
        const double delta = cj[c] - ci[c];
        row[j * d + c] = -delta;
        row[i * d + c] = delta;
      }
      lp.add_row(row, -1.0);
    }
  return lp;
}

/// Outcome of a soft solve: either a finite solution or an unbounded
/// certificate (the objective can be pushed arbitrarily high at this stage).
struct SoftOutcome {
  LpStatus status = LpStatus::Optimal;
  std::optional<SoftSolution> solution;
  LpSolution lp;
};

/// Builds a SoftSolution from any feasible point of the soft-margin program
/// (variable order gamma_2..gamma_k, eps, xi...): gamma_1 = 0, penalty values
/// clamped at zero within tolerance, every row rechecked, objective recomputed.
inline SoftSolution soft_solution_from_point(std::span<const double> x,
                                             const Dataset& data,
                                             const SiteSet& sites, long t,
                                             Variant variant) {
  const std::size_t k = data.clusters();
  std::vector<double> gamma(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) gamma[i] = x[i - 1];
  const double eps = x[k - 1];
  std::vector<double> xi(x.begin() + static_cast<std::ptrdiff_t>(k), x.end());
  double xi_sum = 0.0;
  for (double& v : xi) {
    if (v < -kNumTol) throw NumericError("negative penalty in soft solution");
    if (v < 0.0) v = 0.0;
    xi_sum += v;
  }
  SoftSolution s{PowerDiagram(sites, gamma), eps, variant, t, std::move(xi),
                 eps - margin_penalty(t) * xi_sum};
  const PairTable pt = build_pair_table(sites);
  for (std::size_t l = 0; l < data.size(); ++l) {
    const auto i = static_cast<std::size_t>(data.label(l));
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double xi_v = variant == Variant::PerPair
                              ? s.xi[pair_xi_index(data, l, static_cast<int>(j))]
                              : s.xi[l];
      const double slack = pair_slack(s.diagram, pt, data.point(l), i, j);
      if (slack + xi_v - eps < -kNumTol)
        throw NumericError("soft solution violates a margin row");
    }
  }
  return s;
}

/// Reassembles a SoftSolution from a solved soft-margin program. Unbounded
/// outcomes carry only the LP result (vertex plus certified ray).
inline SoftOutcome extract_soft_solution(LpSolution sol, const Dataset& data,
                                         const SiteSet& sites, long t,
                                         Variant variant) {
  SoftOutcome out;
  out.status = sol.status;
  if (sol.status == LpStatus::Infeasible)
    throw NumericError("soft-margin program reported infeasible");
  if (sol.status == LpStatus::Unbounded) {
    out.lp = std::move(sol);
    return out;
  }
  out.solution = soft_solution_from_point(sol.x, data, sites, t, variant);
  out.lp = std::move(sol);
  return out;
}

}  // namespace softpd
