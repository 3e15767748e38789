#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace softpd {

/// Tolerance for sign decisions on slacks and penalty variables.
inline constexpr double kNumTol = 1e-7;
/// Two sites closer than this are considered coincident.
inline constexpr double kSiteTol = 1e-10;
/// Residual tolerance for LP solutions on scaled rows.
inline constexpr double kLpTol = 1e-9;

/// Soft assignment flavor: one penalty per violated pair, or one per point.
enum class Variant { PerPair, PerPoint };

inline const char* variant_name(Variant v) {
  return v == Variant::PerPair ? "mme" : "mep";
}

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnboundedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_number(line) {}
  std::size_t line_number;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace softpd
