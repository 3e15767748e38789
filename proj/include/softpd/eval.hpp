#pragma once

// Evaluation utilities and the exhaustive oracles the tests lean on:
// balanced least-squares assignments by enumeration, linear-scan threshold,
// classifier scoring, and repeated-solve timing sweeps.

#include <chrono>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "softpd/algorithms.hpp"
#include "softpd/formulations.hpp"
#include "softpd/geometry.hpp"
#include "softpd/lp.hpp"

namespace softpd {

/// Exhaustive balanced least-squares assignment: among all clusterings of
/// the given shape, return one minimizing the total squared distance of each
/// point to its assigned site. Ties go to the lexicographically smallest
/// label sequence. Enumeration is exponential, so inputs are capped at 12
/// points; this is a test-scale oracle, not a production path.
inline Dataset brute_force_balanced_lsa(std::size_t dim,
                                        const std::vector<double>& coords,
                                        const SiteSet& sites,
                                        const std::vector<std::size_t>& shape) {
  if (dim == 0 || coords.size() % dim != 0)
    throw std::invalid_argument("coordinate count not a multiple of dimension");
  const std::size_t n = coords.size() / dim;
  if (n > 12) throw std::invalid_argument("oracle capped at 12 points");
  const std::size_t k = sites.size();
  if (sites.dim() != dim) throw std::invalid_argument("site dimension mismatch");
  if (shape.size() != k) throw std::invalid_argument("one shape entry per site");
  if (std::accumulate(shape.begin(), shape.end(), std::size_t{0}) != n)
    throw std::invalid_argument("shape entries must sum to the point count");

  // Per point-site squared distances up front.
  std::vector<double> cost(n * k);
  for (std::size_t l = 0; l < n; ++l) {
    std::span<const double> x{coords.data() + l * dim, dim};
    for (std::size_t c = 0; c < k; ++c)
      cost[l * k + c] = squared_distance(sites.site(c), x);
  }

  std::vector<std::size_t> room = shape;
  std::vector<int> labels(n, -1), best_labels;
  double best = std::numeric_limits<double>::infinity();
  const auto recurse = [&](auto&& self, std::size_t l, double acc) -> void {
    if (acc >= best) return;  // keeps the first (lex-least) of equal cost
    if (l == n) {
      best = acc;
      best_labels = labels;
      return;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (room[c] == 0) continue;
      --room[c];
      labels[l] = static_cast<int>(c);
      self(self, l + 1, acc + cost[l * k + c]);
      ++room[c];
    }
    labels[l] = -1;
  };
  recurse(recurse, 0, 0.0);
  return Dataset(dim, k, coords, best_labels);
}

/// Linear-scan threshold oracle: stage 0 is the hard program, then every
/// stage in turn until the margin is nonnegative (an unbounded stage counts
/// as +inf). Intentionally artless; pairs with the binary search in tests.
inline long brute_force_threshold(const Dataset& data, const SiteSet& sites,
                                  Variant variant, const LpSolver& solver = {}) {
  const LinearProgram hard = build_hard_margin_lp(build_sigma(data, sites));
  const LpSolution hs = solver.solve(hard);
  if (hs.status != LpStatus::Optimal)
    throw NumericError("hard-margin program did not solve to optimality");
  if (hs.x[data.clusters() - 1] >= -kNumTol) return 0;
  const long t_max = stage_limit(data, variant);
  for (long t = 1; t < t_max; ++t) {
    const LinearProgram lp = build_soft_lp(data, sites, t, variant);
    const LpSolution sol = solver.solve(lp);
    if (sol.status == LpStatus::Unbounded) return t;
    if (sol.x[data.clusters() - 1] >= -kNumTol) return t;
  }
  return t_max;  // the final stage is always unbounded
}

/// Confusion counts from classifying a test set with a diagram. Rows are
/// true clusters, columns predicted cells.
struct EvalReport {
  std::size_t k = 0;
  std::vector<long> confusion;  // k*k row-major
  std::size_t total = 0;
  std::size_t misclassified = 0;
  double rate = 0.0;

  long at(std::size_t truth, std::size_t predicted) const {
    return confusion[truth * k + predicted];
  }
};

inline EvalReport evaluate_classifier(const PowerDiagram& p, const Dataset& test) {
  if (p.sites.dim() != test.dim())
    throw std::invalid_argument("model and test dimensions disagree");
  if (p.sites.size() != test.clusters())
    throw std::invalid_argument("model and test cluster counts disagree");
  EvalReport rep;
  rep.k = test.clusters();
  rep.confusion.assign(rep.k * rep.k, 0);
  rep.total = test.size();
  for (std::size_t l = 0; l < test.size(); ++l) {
    const auto truth = static_cast<std::size_t>(test.label(l));
    const auto pred = static_cast<std::size_t>(p.classify(test.point(l)));
    ++rep.confusion[truth * rep.k + pred];
    if (pred != truth) ++rep.misclassified;
  }
  rep.rate = static_cast<double>(rep.misclassified) /
             static_cast<double>(rep.total);
  return rep;
}

/// Wall-clock timing of repeated soft solves per stage; informational only.
struct TimingEntry {
  long t = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  int solves = 0;
  double total_seconds = 0.0;
  double mean_seconds = 0.0;
};

inline std::vector<TimingEntry> timing_report(const Dataset& data,
                                              const SiteSet& sites,
                                              Variant variant,
                                              std::span<const long> t_list,
                                              const LpSolver& solver = {},
                                              int repeats = 10) {
  std::vector<TimingEntry> out;
  out.reserve(t_list.size());
  for (const long t : t_list) {
    const LinearProgram lp = build_soft_lp(data, sites, t, variant);
    TimingEntry e;
    e.t = t;
    e.rows = lp.row_count();
    e.cols = lp.nvars;
    e.solves = repeats;
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) (void)solver.solve(lp);
    const auto stop = std::chrono::steady_clock::now();
    e.total_seconds = std::chrono::duration<double>(stop - start).count();
    e.mean_seconds = e.total_seconds / repeats;
    out.push_back(e);
  }
  return out;
}

}  // namespace softpd
