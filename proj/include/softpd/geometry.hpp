#pragma once

// Clustered point sets, sites, and power-diagram cells in the (S, gamma)
// representation: cell i collects the x with gamma_i - s_i.x minimal, which
// matches the usual |s_i - x|^2 - w_i rule under w_i = s_i.s_i - 2 gamma_i.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "softpd/common.hpp"

namespace softpd {

/// Fixed sites, stored flat row-major. Pairwise distinct by construction.
/// Default construction gives the empty placeholder used by result structs.
class SiteSet {
 public:
  SiteSet() = default;

  SiteSet(std::size_t dim, std::vector<double> coords)
      : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) throw std::invalid_argument("site dimension must be positive");
    if (coords_.empty() || coords_.size() % dim_ != 0)
      throw std::invalid_argument("site coordinate count not a multiple of dimension");
    k_ = coords_.size() / dim_;
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = i + 1; j < k_; ++j)
        if (squared_distance(site(i), site(j)) <= kSiteTol * kSiteTol)
          throw std::invalid_argument("sites " + std::to_string(i) + " and " +
                                      std::to_string(j) + " coincide");
  }

  static SiteSet from_points(const std::vector<std::vector<double>>& pts) {
    if (pts.empty()) throw std::invalid_argument("no sites given");
    std::vector<double> flat;
    flat.reserve(pts.size() * pts.front().size());
    for (const auto& p : pts) {
      if (p.size() != pts.front().size())
        throw std::invalid_argument("inconsistent site dimensions");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return SiteSet(pts.front().size(), std::move(flat));
  }

  std::size_t size() const { return k_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> site(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::size_t k_ = 0;
};

/// Labeled points. Labels are 0-based cluster ids; every cluster is nonempty
/// and cluster means are pairwise distinct (rejected at construction
/// otherwise, since downstream programs divide by mean separations).
class Dataset {
 public:
  Dataset(std::size_t dim, std::size_t k, std::vector<double> coords,
          std::vector<int> labels)
      : dim_(dim), k_(k), coords_(std::move(coords)), labels_(std::move(labels)) {
    if (dim_ < 1) throw std::invalid_argument("dimension must be at least 1");
    if (k_ < 2) throw std::invalid_argument("need at least 2 clusters");
    if (coords_.size() != labels_.size() * dim_)
      throw std::invalid_argument("coordinate and label counts disagree");
    n_ = labels_.size();
    if (n_ < 2) throw std::invalid_argument("need at least 2 points");
    std::vector<std::size_t> sizes(k_, 0);
    for (int lbl : labels_) {
      if (lbl < 0 || static_cast<std::size_t>(lbl) >= k_)
        throw std::invalid_argument("label out of range");
      ++sizes[static_cast<std::size_t>(lbl)];
    }
    for (std::size_t i = 0; i < k_; ++i)
      if (sizes[i] == 0)
        throw std::invalid_argument("cluster " + std::to_string(i) + " is empty");
    const auto m = means_flat();
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = i + 1; j < k_; ++j) {
        std::span<const double> mi{m.data() + i * dim_, dim_};
        std::span<const double> mj{m.data() + j * dim_, dim_};
        if (squared_distance(mi, mj) <= kSiteTol * kSiteTol)
          throw std::invalid_argument("clusters " + std::to_string(i) + " and " +
                                      std::to_string(j) + " have equal means");
      }
  }

  static Dataset from_points(const std::vector<std::vector<double>>& pts,
                             const std::vector<int>& labels, std::size_t k) {
    if (pts.empty()) throw std::invalid_argument("no points given");
    std::vector<double> flat;
    flat.reserve(pts.size() * pts.front().size());
    for (const auto& p : pts) {
      if (p.size() != pts.front().size())
        throw std::invalid_argument("inconsistent point dimensions");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return Dataset(pts.front().size(), k, std::move(flat), labels);
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::size_t clusters() const { return k_; }
  std::span<const double> point(std::size_t l) const {
    return {coords_.data() + l * dim_, dim_};
  }
  int label(std::size_t l) const { return labels_[l]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& coords() const { return coords_; }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(k_, 0);
    for (int lbl : labels_) ++sizes[static_cast<std::size_t>(lbl)];
    return sizes;
  }

  /// Cluster means, usable directly as sites (distinctness holds by the
  /// construction-time check).
  SiteSet cluster_means() const { return SiteSet(dim_, means_flat()); }

 private:
  std::vector<double> means_flat() const {
    std::vector<double> m(k_ * dim_, 0.0);
    std::vector<std::size_t> sizes(k_, 0);
    for (std::size_t l = 0; l < n_; ++l) {
      const auto lbl = static_cast<std::size_t>(labels_[l]);
      ++sizes[lbl];
      const auto p = point(l);
      for (std::size_t c = 0; c < dim_; ++c) m[lbl * dim_ + c] += p[c];
    }
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t c = 0; c < dim_; ++c) m[i * dim_ + c] /= double(sizes[i]);
    return m;
  }

  std::size_t dim_, k_;
  std::vector<double> coords_;
  std::vector<int> labels_;
  std::size_t n_ = 0;
};

/// Unit direction from site i toward site j and their distance.
struct PairDirection {
  std::vector<double> unit;
  double dist = 0.0;
};

inline PairDirection pair_direction(const SiteSet& s, std::size_t i, std::size_t j) {
  if (i >= s.size() || j >= s.size() || i == j)
    throw std::invalid_argument("bad site pair");
  const auto si = s.site(i), sj = s.site(j);
  const double d = distance(si, sj);
  if (d <= kSiteTol) throw std::invalid_argument("degenerate site pair");
  PairDirection out;
  out.dist = d;
  out.unit.resize(s.dim());
  for (std::size_t c = 0; c < s.dim(); ++c) out.unit[c] = (sj[c] - si[c]) / d;
  return out;
}

/// All ordered pair directions at once; unit(i,j) and dist(i,j) lookups.
struct PairTable {
  std::size_t k = 0, dim = 0;
  std::vector<double> units;  // k*k*dim, entry (i,j) empty-diagonal
  std::vector<double> dists;  // k*k

  std::span<const double> unit(std::size_t i, std::size_t j) const {
    return {units.data() + (i * k + j) * dim, dim};
  }
  double dist(std::size_t i, std::size_t j) const { return dists[i * k + j]; }
};

inline PairTable build_pair_table(const SiteSet& s) {
  PairTable t;
  t.k = s.size();
  t.dim = s.dim();
  t.units.assign(t.k * t.k * t.dim, 0.0);
  t.dists.assign(t.k * t.k, 0.0);
  for (std::size_t i = 0; i < t.k; ++i)
    for (std::size_t j = 0; j < t.k; ++j) {
      if (i == j) continue;
      auto pd = pair_direction(s, i, j);
      t.dists[i * t.k + j] = pd.dist;
      std::copy(pd.unit.begin(), pd.unit.end(),
                t.units.begin() + static_cast<std::ptrdiff_t>((i * t.k + j) * t.dim));
    }
  return t;
}

/// Sites plus per-site offsets. gamma is stored raw; normalized gaps
/// (gamma_j - gamma_i) / |s_j - s_i| are derived on demand.
struct PowerDiagram {
  SiteSet sites;
  std::vector<double> gamma;

  PowerDiagram() = default;

  PowerDiagram(SiteSet s, std::vector<double> g)
      : sites(std::move(s)), gamma(std::move(g)) {
    if (gamma.size() != sites.size())
      throw std::invalid_argument("one gamma per site required");
  }

  /// Index of the cell containing x; exact ties go to the smaller index.
  int classify(std::span<const double> x) const {
    int best = 0;
    double best_score = gamma[0] - dot(sites.site(0), x);
    for (std::size_t i = 1; i < sites.size(); ++i) {
      const double score = gamma[i] - dot(sites.site(i), x);
      if (score < best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    return best;
  }
};

inline std::vector<double> gamma_from_weights(const SiteSet& s,
                                              std::span<const double> w) {
  if (w.size() != s.size()) throw std::invalid_argument("one weight per site");
  std::vector<double> g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    g[i] = 0.5 * (squared_norm(s.site(i)) - w[i]);
  return g;
}

inline std::vector<double> weights_from_gamma(const SiteSet& s,
                                              std::span<const double> g) {
  if (g.size() != s.size()) throw std::invalid_argument("one gamma per site");
  std::vector<double> w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    w[i] = squared_norm(s.site(i)) - 2.0 * g[i];
  return w;
}

/// Normalized gap (gamma_j - gamma_i) / |s_j - s_i| of an ordered pair.
inline double normalized_gap(const PowerDiagram& p, const PairTable& t,
                             std::size_t i, std::size_t j) {
  return (p.gamma[j] - p.gamma[i]) / t.dist(i, j);
}

/// Signed distance of point x (in cluster i) from the (i, j) bisector,
/// positive on the cluster-i side.
inline double pair_slack(const PowerDiagram& p, const PairTable& t,
                         std::span<const double> x, std::size_t i, std::size_t j) {
  return normalized_gap(p, t, i, j) - dot(t.unit(i, j), x);
}

/// Least pair slack over all points and rival clusters. Positive means every
/// point sits strictly inside its own cell by that geometric distance.
inline double margin_of(const PowerDiagram& p, const Dataset& d) {
  const PairTable t = build_pair_table(p.sites);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < d.size(); ++l) {
    const auto i = static_cast<std::size_t>(d.label(l));
    for (std::size_t j = 0; j < d.clusters(); ++j) {
      if (j == i) continue;
      m = std::min(m, pair_slack(p, t, d.point(l), i, j));
    }
  }
  return m;
}

/// Margin errors and support vectors of a solution at a given margin eps,
/// decided on pair slacks: a pair (l, j) errs when slack < eps - tol and
/// supports when slack <= eps + tol. Point views aggregate over rivals.
struct MarginReport {
  std::vector<std::pair<std::size_t, int>> error_pairs;
  std::vector<std::pair<std::size_t, int>> support_pairs;
  std::vector<std::size_t> error_points;
  std::vector<std::size_t> support_points;
};

inline MarginReport extract_errors(const PowerDiagram& p, const Dataset& d,
                                   double eps, double tol = kNumTol) {
  const PairTable t = build_pair_table(p.sites);
  MarginReport r;
  for (std::size_t l = 0; l < d.size(); ++l) {
    const auto i = static_cast<std::size_t>(d.label(l));
    double least = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.clusters(); ++j) {
      if (j == i) continue;
      const double slack = pair_slack(p, t, d.point(l), i, j) - eps;
      least = std::min(least, slack);
      if (slack < -tol) r.error_pairs.emplace_back(l, static_cast<int>(j));
      if (slack <= tol) r.support_pairs.emplace_back(l, static_cast<int>(j));
    }
    if (least < -tol) r.error_points.push_back(l);
    if (least <= tol) r.support_points.push_back(l);
  }
  return r;
}

enum class Separation { No, Separating, Strict };

/// Checks whether the diagram separates the clustering: every point weakly in
/// its own cell, and for each ordered pair (i, j) some point of cluster i
/// strictly off the (i, j) bisector so no cluster collapses into a boundary.
inline Separation verify_separating(const PowerDiagram& p, const Dataset& d,
                                    double tol = kNumTol) {
  const PairTable t = build_pair_table(p.sites);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < d.size(); ++l) {
    const auto i = static_cast<std::size_t>(d.label(l));
    for (std::size_t j = 0; j < d.clusters(); ++j)
      if (j != i) m = std::min(m, pair_slack(p, t, d.point(l), i, j));
  }
  if (m > tol) return Separation::Strict;
  if (m < -tol) return Separation::No;
  std::vector<std::vector<std::size_t>> members(d.clusters());
  for (std::size_t l = 0; l < d.size(); ++l)
    members[static_cast<std::size_t>(d.label(l))].push_back(l);
  for (std::size_t i = 0; i < d.clusters(); ++i)
    for (std::size_t j = 0; j < d.clusters(); ++j) {
      if (i == j) continue;
      bool witness = false;
      for (std::size_t l : members[i])
        if (pair_slack(p, t, d.point(l), i, j) > tol) {
          witness = true;
          break;
        }
      if (!witness) return Separation::No;
    }
  return Separation::Separating;
}

/// Soft assignment solution: a diagram, its margin, and the penalty values.
/// For PerPoint xi has one entry per point; for PerPair one entry per
/// (point, rival) in point-major order with rivals ascending.
struct SoftSolution {
  PowerDiagram diagram;
  double epsilon = 0.0;
  Variant variant = Variant::PerPoint;
  long t = 0;
  std::vector<double> xi;
  double objective = 0.0;
};

/// Position of the (l, j) penalty inside a per-pair xi vector.
inline std::size_t pair_xi_index(const Dataset& d, std::size_t l, int j) {
  const int lbl = d.label(l);
  if (j == lbl) throw std::invalid_argument("no penalty against own cluster");
  const auto k = static_cast<int>(d.clusters());
  const int rank = j < lbl ? j : j - 1;
  return l * static_cast<std::size_t>(k - 1) + static_cast<std::size_t>(rank);
}

}  // namespace softpd
