#pragma once

// Deterministic SVG rendering of a 2-D instance: points colored by cluster,
// sites as outlined dots, cell-boundary segments clipped to the bounding
// box, and a translucent margin band of half-width eps when eps > 0.
// Support-vector points (pair slack equal to eps within tolerance) are drawn
// enlarged. All coordinates go through fixed-precision formatting, so the
// output is byte-stable for identical inputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "softpd/geometry.hpp"

namespace softpd {

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline const char* svg_color(std::size_t cluster) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
  return palette[cluster % (sizeof palette / sizeof palette[0])];
}

/// Clip the parametric line p0 + t*v to an axis-aligned rectangle.
/// Returns false when the line misses the rectangle.
inline bool clip_line_to_box(const double p0[2], const double v[2],
                             const double lo[2], const double hi[2],
                             double& t0, double& t1) {
  t0 = -1e18;
  t1 = 1e18;
  for (int a = 0; a < 2; ++a) {
    if (std::abs(v[a]) < 1e-14) {
      if (p0[a] < lo[a] || p0[a] > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - p0[a]) / v[a];
    double tb = (hi[a] - p0[a]) / v[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 < t1;
}

}  // namespace detail

/// Render the diagram and data to an SVG document (2-D only).
inline std::string emit_svg(const PowerDiagram& p, const Dataset& data,
                            double eps) {
  if (data.dim() != 2 || p.sites.dim() != 2)
    throw std::invalid_argument("SVG rendering is 2-D only");
  if (p.sites.size() != data.clusters())
    throw std::invalid_argument("diagram and data cluster counts disagree");

  // World bounding box over points and sites, padded.
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  const auto widen = [&](std::span<const double> q) {
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], q[a]);
      hi[a] = std::max(hi[a], q[a]);
    }
  };
  for (std::size_t l = 0; l < data.size(); ++l) widen(data.point(l));
  for (std::size_t i = 0; i < p.sites.size(); ++i) widen(p.sites.site(i));
  for (int a = 0; a < 2; ++a) {
    const double pad = 0.12 * std::max(hi[a] - lo[a], 1e-9) + 1e-9;
    lo[a] -= pad;
    hi[a] += pad;
  }

  // Fit into a fixed canvas, preserving aspect, y up.
  const double margin = 20.0, width = 640.0, height = 480.0;
  const double scale = std::min((width - 2 * margin) / (hi[0] - lo[0]),
                                (height - 2 * margin) / (hi[1] - lo[1]));
  const auto sx = [&](double x) { return margin + (x - lo[0]) * scale; };
  const auto sy = [&](double y) { return height - margin - (y - lo[1]) * scale; };

  // Boundary runs per unordered pair: points on the bisector where the two
  // cells involved are actually the winning cells.
  struct Segment {
    double a[2], b[2];
  };
  std::vector<Segment> boundary;
  const std::size_t k = p.sites.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto si = p.sites.site(i), sj = p.sites.site(j);
      const double u[2] = {sj[0] - si[0], sj[1] - si[1]};
      const double g = p.gamma[j] - p.gamma[i];
      const double uu = u[0] * u[0] + u[1] * u[1];
      const double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);
      const double shift = (g - (u[0] * cx + u[1] * cy)) / uu;
      const double p0[2] = {cx + shift * u[0], cy + shift * u[1]};
      const double un = std::sqrt(uu);
      const double v[2] = {-u[1] / un, u[0] / un};
      double t0, t1;
      if (!detail::clip_line_to_box(p0, v, lo, hi, t0, t1)) continue;
      const int steps = 256;
      const double dt = (t1 - t0) / steps;
      int run_start = -1;
      for (int s = 0; s <= steps; ++s) {
        bool active = false;
        if (s < steps) {
          const double tm = t0 + (s + 0.5) * dt;
          const double q[2] = {p0[0] + tm * v[0], p0[1] + tm * v[1]};
          const int cell = p.classify(q);
          active = cell == static_cast<int>(i) || cell == static_cast<int>(j);
        }
        if (active && run_start < 0) run_start = s;
        if (!active && run_start >= 0) {
          const double ta = t0 + run_start * dt, tb = t0 + s * dt;
          boundary.push_back({{p0[0] + ta * v[0], p0[1] + ta * v[1]},
                              {p0[0] + tb * v[0], p0[1] + tb * v[1]}});
          run_start = -1;
        }
      }
    }

  const MarginReport rep = extract_errors(p, data, eps);
  std::vector<bool> is_support(data.size(), false);
  for (std::size_t l : rep.support_points) is_support[l] = true;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";

  if (eps > 0.0) {
    const std::string band_width = detail::fmt2(2.0 * eps * scale);
    for (const auto& s : boundary)
      out += "<line class=\"band\" x1=\"" + detail::fmt2(sx(s.a[0])) +
             "\" y1=\"" + detail::fmt2(sy(s.a[1])) + "\" x2=\"" +
             detail::fmt2(sx(s.b[0])) + "\" y2=\"" + detail::fmt2(sy(s.b[1])) +
             "\" stroke=\"#bbbbbb\" stroke-opacity=\"0.40\" stroke-width=\"" +
             band_width + "\"/>\n";
  }
  for (const auto& s : boundary)
    out += "<line class=\"boundary\" x1=\"" + detail::fmt2(sx(s.a[0])) +
           "\" y1=\"" + detail::fmt2(sy(s.a[1])) + "\" x2=\"" +
           detail::fmt2(sx(s.b[0])) + "\" y2=\"" + detail::fmt2(sy(s.b[1])) +
           "\" stroke=\"#444444\" stroke-width=\"1.50\"/>\n";

  for (std::size_t l = 0; l < data.size(); ++l) {
    const auto x = data.point(l);
    const auto c = static_cast<std::size_t>(data.label(l));
    out += "<circle class=\"point\" cx=\"" + detail::fmt2(sx(x[0])) +
           "\" cy=\"" + detail::fmt2(sy(x[1])) + "\" r=\"" +
           (is_support[l] ? "6.00" : "3.50") + "\" fill=\"" +
           detail::svg_color(c) + "\"/>\n";
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto s = p.sites.site(i);
    out += "<circle class=\"site\" cx=\"" + detail::fmt2(sx(s[0])) +
           "\" cy=\"" + detail::fmt2(sy(s[1])) + "\" r=\"8.00\" fill=\"" +
           detail::svg_color(i) + "\" stroke=\"#000000\" stroke-width=\"2.00\"/>\n";
  }

  out += "<text x=\"24\" y=\"24\" font-family=\"monospace\" font-size=\"14\">"
         "eps = " + detail::fmt6(eps) + "</text>\n";
  if (eps <= 0.0)
    out += "<text x=\"24\" y=\"44\" font-family=\"monospace\" font-size=\"14\">"
           "margin band empty (eps &lt;= 0)</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace softpd
