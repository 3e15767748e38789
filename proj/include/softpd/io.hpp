#pragma once

// Data ingestion and serialization: LIBSVM and CSV readers, model files,
// canonical JSON, and the external-solver exec bridge.
//
// CSV layout: header "x1,...,xd,label", decimal floats, one point per row.
// Site files drop the label column. Label tokens are mapped to clusters by
// sorted order (numeric when every token parses as a number), so reading a
// file twice, or a round-tripped copy, yields identical cluster ids.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "softpd/geometry.hpp"
#include "softpd/lp.hpp"
#include "softpd/mps.hpp"

namespace softpd {

/// Parsed points plus the label-token mapping (cluster c came from token
/// label_names[c]).
struct ParsedDataset {
  Dataset data;
  std::vector<std::string> label_names;
};

namespace detail {

inline bool parse_double_token(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && !tok.empty();
}

/// Sorted distinct tokens: numerically when every token is a number, else
/// lexicographically; duplicates by numeric value keep one representative.
inline std::vector<std::string> sorted_label_tokens(
    const std::vector<std::string>& raw) {
  std::vector<std::string> tokens;
  for (const auto& t : raw)
    if (std::find(tokens.begin(), tokens.end(), t) == tokens.end())
      tokens.push_back(t);
  bool numeric = true;
  std::vector<double> values(tokens.size());
  for (std::size_t i = 0; i < tokens.size() && numeric; ++i)
    numeric = parse_double_token(tokens[i], values[i]);
  std::vector<std::size_t> order(tokens.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (numeric && values[a] != values[b]) return values[a] < values[b];
    return tokens[a] < tokens[b];
  });
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (std::size_t i : order) out.push_back(tokens[i]);
  return out;
}

inline int label_index(const std::vector<std::string>& names,
                       const std::string& token) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == token) return static_cast<int>(i);
  return -1;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// LIBSVM reader: lines of "label idx:val idx:val ..." with 1-based strictly
/// increasing indices; absent indices are zero. The dimension is the largest
/// index seen unless overridden (an override smaller than an actual index is
/// a parse error at that line).
inline ParsedDataset parse_libsvm(std::istream& in,
                                  std::optional<std::size_t> expected_dim = {}) {
  struct Record {
    std::string label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Record> records;
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t lineno = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::strip(line);
    if (body.empty()) continue;
    std::istringstream ls(body);
    Record rec;
    if (!(ls >> rec.label)) throw ParseError(lineno, "missing label");
    std::string tok;
    std::size_t prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(lineno, "malformed feature '" + tok + "'");
      const std::string istr = tok.substr(0, colon);
      const std::string vstr = tok.substr(colon + 1);
      char* iend = nullptr;
      const long long idx = std::strtoll(istr.c_str(), &iend, 10);
      if (iend != istr.c_str() + istr.size() || idx < 1)
        throw ParseError(lineno, "bad feature index '" + istr + "'");
      double val = 0.0;
      if (!detail::parse_double_token(vstr, val))
        throw ParseError(lineno, "bad feature value '" + vstr + "'");
      const auto uidx = static_cast<std::size_t>(idx);
      if (uidx <= prev)
        throw ParseError(lineno, "feature indices must be strictly increasing");
      if (expected_dim && uidx > *expected_dim)
        throw ParseError(lineno, "feature index " + istr +
                                     " exceeds the declared dimension");
      prev = uidx;
      max_index = std::max(max_index, uidx);
      rec.entries.emplace_back(uidx, val);
    }
    raw_labels.push_back(rec.label);
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ParseError(lineno, "no data lines");
  const std::size_t d = expected_dim ? *expected_dim : max_index;
  if (d == 0) throw ParseError(lineno, "no feature indices seen");

  const std::vector<std::string> names = detail::sorted_label_tokens(raw_labels);
  std::vector<double> coords(records.size() * d, 0.0);
  std::vector<int> labels(records.size());
  for (std::size_t l = 0; l < records.size(); ++l) {
    labels[l] = detail::label_index(names, records[l].label);
    for (const auto& [idx, val] : records[l].entries)
      coords[l * d + (idx - 1)] = val;
  }
  return {Dataset(d, names.size(), std::move(coords), std::move(labels)), names};
}

/// CSV reader for the documented layout (header x1,...,xd,label).
inline ParsedDataset parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = detail::split(detail::strip(line), ',');
  if (header.size() < 2 || detail::strip(header.back()) != "label")
    throw ParseError(1, "header must be x1,...,xd,label");
  const std::size_t d = header.size() - 1;
  for (std::size_t c = 0; c < d; ++c)
    if (detail::strip(header[c]) != "x" + std::to_string(c + 1))
      throw ParseError(1, "header must be x1,...,xd,label");

  std::vector<double> coords;
  std::vector<std::string> raw_labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::strip(line);
    if (body.empty()) continue;
    const auto parts = detail::split(body, ',');
    if (parts.size() != d + 1)
      throw ParseError(lineno, "expected " + std::to_string(d + 1) + " fields");
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0.0;
      if (!detail::parse_double_token(detail::strip(parts[c]), v))
        throw ParseError(lineno, "bad number '" + parts[c] + "'");
      coords.push_back(v);
    }
    raw_labels.push_back(detail::strip(parts[d]));
  }
  if (raw_labels.empty()) throw ParseError(lineno, "no data rows");
  const std::vector<std::string> names = detail::sorted_label_tokens(raw_labels);
  std::vector<int> labels(raw_labels.size());
  for (std::size_t l = 0; l < raw_labels.size(); ++l)
    labels[l] = detail::label_index(names, raw_labels[l]);
  return {Dataset(d, names.size(), std::move(coords), std::move(labels)), names};
}

namespace detail {

inline std::string full_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV writer; the exact inverse of parse_csv (full double precision).
inline void write_csv(std::ostream& out, const Dataset& data,
                      const std::vector<std::string>& label_names = {}) {
  for (std::size_t c = 0; c < data.dim(); ++c) out << "x" << c + 1 << ",";
  out << "label\n";
  for (std::size_t l = 0; l < data.size(); ++l) {
    const auto x = data.point(l);
    for (std::size_t c = 0; c < data.dim(); ++c)
      out << detail::full_double(x[c]) << ",";
    const auto lbl = static_cast<std::size_t>(data.label(l));
    if (label_names.empty()) out << lbl + 1;
    else out << label_names[lbl];
    out << "\n";
  }
}

/// Site files: same CSV layout minus the label column.
inline SiteSet parse_sites_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = detail::split(detail::strip(line), ',');
  const std::size_t d = header.size();
  for (std::size_t c = 0; c < d; ++c)
    if (detail::strip(header[c]) != "x" + std::to_string(c + 1))
      throw ParseError(1, "header must be x1,...,xd");
  std::vector<double> coords;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::strip(line);
    if (body.empty()) continue;
    const auto parts = detail::split(body, ',');
    if (parts.size() != d)
      throw ParseError(lineno, "expected " + std::to_string(d) + " fields");
    for (const auto& p : parts) {
      double v = 0.0;
      if (!detail::parse_double_token(detail::strip(p), v))
        throw ParseError(lineno, "bad number '" + p + "'");
      coords.push_back(v);
    }
  }
  if (coords.empty()) throw ParseError(lineno, "no site rows");
  return SiteSet(d, std::move(coords));
}

inline void write_sites_csv(std::ostream& out, const SiteSet& sites) {
  for (std::size_t c = 0; c < sites.dim(); ++c) {
    if (c) out << ",";
    out << "x" << c + 1;
  }
  out << "\n";
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto s = sites.site(i);
    for (std::size_t c = 0; c < sites.dim(); ++c) {
      if (c) out << ",";
      out << detail::full_double(s[c]);
    }
    out << "\n";
  }
}

/// Canonical JSON: object keys sorted, floats rendered %.6f, integers plain.
/// Byte-identical output for identical values, independent of build or run.
inline void canonical_json_to(const nlohmann::json& j, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (j.type()) {
    case value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.cbegin(); it != j.cend(); ++it) {
        if (!first) out += ", ";
        first = false;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        canonical_json_to(it.value(), out);
      }
      out += '}';
      break;
    }
    case value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        canonical_json_to(j[i], out);
      }
      out += ']';
      break;
    }
    case value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.6f", j.get<double>());
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

inline std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  canonical_json_to(j, out);
  return out;
}

/// Serialized classifier: sites, offsets, and the margin context they came
/// from. Floats are stored at full precision; the canonical renderer is for
/// reports, not models.
struct Model {
  PowerDiagram diagram;
  double epsilon = 0.0;
  std::string variant = "spd";
  long t = 0;
};

inline void write_model(std::ostream& out, const Model& m) {
  nlohmann::json j;
  j["d"] = m.diagram.sites.dim();
  j["k"] = m.diagram.sites.size();
  nlohmann::json sites = nlohmann::json::array();
  for (std::size_t i = 0; i < m.diagram.sites.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (double c : m.diagram.sites.site(i)) row.push_back(c);
    sites.push_back(row);
  }
  j["sites"] = sites;
  j["gamma"] = m.diagram.gamma;
  j["epsilon"] = m.epsilon;
  j["variant"] = m.variant;
  j["t"] = m.t;
  out << j.dump(2) << "\n";
}

inline Model read_model(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("bad model JSON: ") + e.what());
  }
  try {
    const auto d = j.at("d").get<std::size_t>();
    const auto k = j.at("k").get<std::size_t>();
    std::vector<double> coords;
    for (const auto& row : j.at("sites"))
      for (const auto& v : row) coords.push_back(v.get<double>());
    if (coords.size() != d * k)
      throw ParseError(0, "model sites shape disagrees with d and k");
    auto gamma = j.at("gamma").get<std::vector<double>>();
    Model m{PowerDiagram(SiteSet(d, std::move(coords)), std::move(gamma)),
            j.value("epsilon", 0.0), j.value("variant", std::string("spd")),
            j.value("t", 0L)};
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("bad model JSON: ") + e.what());
  }
}

/// External solver bridge: writes the program as fixed-format MPS, runs
/// `command <mps> <out.json>`, and reads the solution back. Expected reply:
/// {"status": "optimal"|"unbounded"|"infeasible", "x": [...column order...],
///  "objective": number, "duals": [...], "ray": [...]} (objective, duals and
/// ray optional). Warm starts are accepted but not forwarded.
class ExecBackend {
 public:
  explicit ExecBackend(std::string command) : command_(std::move(command)) {}

  LpSolution operator()(const LinearProgram& lp, const WarmStart*) const {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const unsigned serial = counter.fetch_add(1);
    const auto base = fs::temp_directory_path() /
                      ("softpd_lp_" + std::to_string(serial) + "_" +
                       std::to_string(std::chrono::steady_clock::now()
                                          .time_since_epoch()
                                          .count()));
    const fs::path mps_path = base.string() + ".mps";
    const fs::path out_path = base.string() + ".json";
    {
      std::ofstream mps(mps_path);
      write_mps(mps, lp);
      if (!mps) throw NumericError("failed to write MPS file");
    }
    const std::string cmd =
        command_ + " '" + mps_path.string() + "' '" + out_path.string() + "'";
    const int rc = std::system(cmd.c_str());
    nlohmann::json j;
    {
      std::ifstream in(out_path);
      if (rc != 0 || !in) {
        std::error_code ec;
        fs::remove(mps_path, ec);
        fs::remove(out_path, ec);
        throw NumericError("external solver failed (exit " +
                           std::to_string(rc) + ")");
      }
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        std::error_code ec;
        fs::remove(mps_path, ec);
        fs::remove(out_path, ec);
        throw NumericError(std::string("bad external solver reply: ") + e.what());
      }
    }
    std::error_code ec;
    fs::remove(mps_path, ec);
    fs::remove(out_path, ec);

    LpSolution sol;
    const std::string status = j.value("status", std::string("error"));
    if (status == "optimal") sol.status = LpStatus::Optimal;
    else if (status == "unbounded") sol.status = LpStatus::Unbounded;
    else if (status == "infeasible") sol.status = LpStatus::Infeasible;
    else throw NumericError("external solver reported: " + status);
    if (sol.status != LpStatus::Infeasible) {
      sol.x = j.value("x", std::vector<double>{});
      if (sol.x.size() != lp.nvars)
        throw NumericError("external solver returned wrong variable count");
      double obj = 0.0;
      for (std::size_t c = 0; c < lp.nvars; ++c) obj += lp.objective[c] * sol.x[c];
      sol.objective = j.value("objective", obj);
      sol.duals = j.value("duals", std::vector<double>{});
      sol.ray = j.value("ray", std::vector<double>{});
    }
    return sol;
  }

 private:
  std::string command_;
};

/// Solver handle for a CLI-selected backend: bundled simplex by default,
/// exec bridge when a command is given.
inline LpSolver make_solver(const std::string& exec_command = {}) {
  LpSolver s;
  if (!exec_command.empty()) s.backend = ExecBackend(exec_command);
  return s;
}

}  // namespace softpd
