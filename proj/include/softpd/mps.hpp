#pragma once

// Fixed-format MPS writer for the inequality-form programs used here.
// Fields sit at columns 2, 5, 15, 25, 40 and 50; names are at most 8
// characters. All rows are L-type, free variables get FR bound lines, and an
// OBJSENSE section declares maximization.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "softpd/lp.hpp"

namespace softpd {

namespace detail {

inline std::string mps_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  if (std::string(buf).size() > 12) std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string mps_field(const std::string& s, std::size_t width) {
  std::string out = s;
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

}  // namespace detail

inline std::string default_var_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%07zu", j + 1);
  return buf;
}

inline std::string mps_row_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R%07zu", i + 1);
  return buf;
}

/// Writes the program in fixed MPS, columns in variable order.
inline void write_mps(std::ostream& os, const LinearProgram& lp,
                      const std::string& name = "SOFTPD") {
  using detail::mps_field;
  using detail::mps_number;
  std::vector<std::string> names = lp.var_names;
  if (names.size() != lp.nvars) {
    names.resize(lp.nvars);
    for (std::size_t j = 0; j < lp.nvars; ++j) names[j] = default_var_name(j);
  }
  os << "NAME          " << name << "\n";
  os << "OBJSENSE\n    MAX\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (std::size_t i = 0; i < lp.row_count(); ++i)
    os << " L  " << mps_row_name(i) << "\n";
  os << "COLUMNS\n";
  for (std::size_t j = 0; j < lp.nvars; ++j) {
    const std::string lead = "    " + mps_field(names[j], 10);
    if (lp.objective[j] != 0.0)
      os << lead << mps_field("OBJ", 10) << mps_number(lp.objective[j]) << "\n";
    for (std::size_t i = 0; i < lp.row_count(); ++i) {
      const double a = lp.rows[i * lp.nvars + j];
      if (a != 0.0)
        os << lead << mps_field(mps_row_name(i), 10) << mps_number(a) << "\n";
    }
  }
  os << "RHS\n";
  for (std::size_t i = 0; i < lp.row_count(); ++i)
    if (lp.rhs[i] != 0.0)
      os << "    " << mps_field("RHS", 10) << mps_field(mps_row_name(i), 10)
         << mps_number(lp.rhs[i]) << "\n";
  os << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.nvars; ++j)
    if (lp.var_sign[j] == VarSign::Free)
      os << " FR " << mps_field("BND", 10) << names[j] << "\n";
  os << "ENDATA\n";
}

}  // namespace softpd
