#pragma once

// Dense two-phase primal simplex for problems of the form
//   maximize c.v  subject to  a_i.v <= b_i,  each v_j free or >= 0.
//
// Pivot choice is deterministic: most negative reduced cost with lowest
// column index on ties, switching permanently to Bland's smallest-index rule
// after a run of degenerate pivots, which also guarantees termination on
// degenerate inputs. Rows are scaled to unit max coefficient. Warm starts
// carry an opaque token; reusing one never changes the reported status or
// objective, only the iteration count.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "softpd/common.hpp"

namespace softpd {

enum class LpStatus { Optimal, Unbounded, Infeasible };

inline const char* status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Unbounded: return "unbounded";
    default: return "infeasible";
  }
}

enum class VarSign : unsigned char { NonNegative, Free };

struct LinearProgram {
  std::size_t nvars = 0;
  std::vector<double> objective;        // maximize objective . v
  std::vector<VarSign> var_sign;
  std::vector<double> rows;             // row-major m x nvars
  std::vector<double> rhs;
  std::vector<std::string> var_names;   // optional, used by the MPS writer

  explicit LinearProgram(std::size_t nv = 0)
      : nvars(nv), objective(nv, 0.0), var_sign(nv, VarSign::NonNegative) {}

  std::size_t row_count() const { return rhs.size(); }

  void add_row(std::span<const double> a, double b) {
    if (a.size() != nvars) throw std::invalid_argument("row length mismatch");
    rows.insert(rows.end(), a.begin(), a.end());
    rhs.push_back(b);
  }

  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * nvars, nvars};
  }
};

/// Hash of the constraint data only (not the objective), so a token minted on
/// one program stays usable after pure objective changes.
inline std::uint64_t constraint_fingerprint(const LinearProgram& lp) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(lp.nvars);
  mix(lp.row_count());
  for (auto s : lp.var_sign) mix(static_cast<std::uint64_t>(s));
  for (double d : lp.rows) mix(std::bit_cast<std::uint64_t>(d));
  for (double d : lp.rhs) mix(std::bit_cast<std::uint64_t>(d));
  return h;
}

namespace detail {
struct SimplexState;
}

/// Opaque warm-start token. basic_cols indexes the solver's internal column
/// space; state holds the final tableau for constraint-identical re-solves.
struct WarmStart {
  std::uint64_t fingerprint = 0;
  std::vector<int> basic_cols;
  std::shared_ptr<const detail::SimplexState> state;
  bool usable() const { return fingerprint != 0 && !basic_cols.empty(); }
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = kLpTol;
  long max_iterations = 0;      // 0: derived from problem size
  bool scale_rows = true;
  bool compute_duals = true;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> x;        // primal values, present when Optimal
  double objective = 0.0;       // c.x when Optimal
  std::vector<double> duals;    // per-row multipliers when Optimal
  std::vector<double> ray;      // verified recession direction when Unbounded
  long iterations = 0;
  WarmStart warm;
};

namespace detail {

struct SimplexState {
  std::uint64_t fingerprint = 0;
  std::size_t m = 0, nexp = 0, ncol = 0;
  std::vector<double> tab;            // m x (ncol + 1), rhs in last column
  std::vector<int> basis;
  std::vector<double> row_scale;
  std::vector<signed char> row_neg;
  std::vector<int> exp_orig;
  std::vector<signed char> exp_sign;
  std::vector<int> art_col_of_row;    // -1 where no artificial exists
};

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt)
      : lp_(lp), opt_(opt), fp_(constraint_fingerprint(lp)) {}

  std::uint64_t fingerprint() const { return fp_; }

  // Fresh tableau with the slack/artificial starting basis.
  void build_cold() {
    const std::size_t m = lp_.row_count();
    layout();
    row_scale_.assign(m, 1.0);
    if (opt_.scale_rows) {
      for (std::size_t i = 0; i < m; ++i) {
        double mx = 0.0;
        for (double v : lp_.row(i)) mx = std::max(mx, std::abs(v));
        if (mx > 1e-300) row_scale_[i] = mx;
      }
    }
    row_neg_.assign(m, 0);
    art_col_of_row_.assign(m, -1);
    std::size_t nart = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (lp_.rhs[i] / row_scale_[i] < 0.0) row_neg_[i] = 1, ++nart;
    ncol_ = nexp_ + m + nart;
    tab_.assign(m * (ncol_ + 1), 0.0);
    basis_.assign(m, 0);
    std::size_t art = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double* row = tab_row(i);
      const double sgn = row_neg_[i] ? -1.0 : 1.0;
      const auto a = lp_.row(i);
      for (std::size_t c = 0; c < nexp_; ++c)
        row[c] = sgn * exp_sign_[c] * a[static_cast<std::size_t>(exp_orig_[c])] /
                 row_scale_[i];
      row[nexp_ + i] = sgn;
      row[ncol_] = sgn * lp_.rhs[i] / row_scale_[i];
      if (row_neg_[i]) {
        const int ac = static_cast<int>(nexp_ + m + art++);
        art_col_of_row_[i] = ac;
        row[static_cast<std::size_t>(ac)] = 1.0;
        basis_[i] = ac;
      } else {
        basis_[i] = static_cast<int>(nexp_ + i);
      }
    }
    m_ = m;
  }

  // Adopt the final tableau of a previous solve over identical constraints.
  void load_state(const SimplexState& st) {
    m_ = st.m;
    nexp_ = st.nexp;
    ncol_ = st.ncol;
    tab_ = st.tab;
    basis_ = st.basis;
    row_scale_ = st.row_scale;
    row_neg_ = st.row_neg;
    exp_orig_ = st.exp_orig;
    exp_sign_ = st.exp_sign;
    art_col_of_row_ = st.art_col_of_row;
  }

  // Rebuild the tableau around a caller-supplied basis by elimination.
  // Returns false when the basis is unusable (singular or infeasible).
  bool build_from_basis(const std::vector<int>& basic_cols) {
    build_cold();
    if (basic_cols.size() != m_) return false;
    for (int c : basic_cols)
      if (c < 0 || static_cast<std::size_t>(c) >= ncol_ + 0) return false;
    std::vector<char> used(ncol_, 0);
    for (std::size_t r = 0; r < m_; ++r) {
      const auto pc = static_cast<std::size_t>(basic_cols[r]);
      if (used[pc]) return false;
      used[pc] = 1;
      // partial pivot among rows not yet assigned
      std::size_t best = m_;
      double best_abs = 1e-9;
      for (std::size_t i = r; i < m_; ++i) {
        const double v = std::abs(tab_row(i)[pc]);
        if (v > best_abs) best_abs = v, best = i;
      }
      if (best == m_) return false;
      if (best != r) swap_rows(best, r);
      normalize_and_eliminate(r, pc);
      basis_[r] = static_cast<int>(pc);
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (tab_row(i)[ncol_] < -opt_.feas_tol * 10) return false;
    for (std::size_t i = 0; i < m_; ++i)
      if (tab_row(i)[ncol_] < 0.0) tab_row(i)[ncol_] = 0.0;
    return true;
  }

  bool needs_phase1() const {
    for (std::size_t i = 0; i < m_; ++i)
      if (is_artificial(static_cast<std::size_t>(basis_[i])) &&
          tab_row_const(i)[ncol_] > opt_.feas_tol)
        return true;
    return false;
  }

  // Phase 1: minimize the artificial sum. Returns false on infeasibility.
  bool run_phase1(long& iterations) {
    std::vector<double> colcost(ncol_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (art_col_of_row_[i] >= 0) colcost[static_cast<std::size_t>(art_col_of_row_[i])] = 1.0;
    rebuild_cost(colcost);
    if (iterate(iterations, /*ban_artificials=*/false) >= 0)
      throw NumericError("phase 1 reported unbounded");
    double w = -cost_[ncol_];
    double scale = 1.0;
    for (std::size_t i = 0; i < m_; ++i)
      scale = std::max(scale, std::abs(tab_row(i)[ncol_]));
    if (w > 1e-7 * scale) return false;
    drive_out_artificials();
    return true;
  }

  // Phase 2 over the real objective. Returns the entering column (or -1)
  // through unbounded_col when the program is unbounded.
  LpStatus run_phase2(long& iterations, int& unbounded_col) {
    std::vector<double> colcost(ncol_, 0.0);
    for (std::size_t c = 0; c < nexp_; ++c)
      colcost[c] = -exp_sign_[c] * lp_.objective[static_cast<std::size_t>(exp_orig_[c])];
    rebuild_cost(colcost);
    unbounded_col = iterate(iterations, /*ban_artificials=*/true);
    return unbounded_col < 0 ? LpStatus::Optimal : LpStatus::Unbounded;
  }

  std::vector<double> primal() const {
    std::vector<double> x(lp_.nvars, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const auto c = static_cast<std::size_t>(basis_[r]);
      if (c < nexp_)
        x[static_cast<std::size_t>(exp_orig_[c])] +=
            exp_sign_[c] * tab_row_const(r)[ncol_];
    }
    return x;
  }

  std::vector<double> duals() const {
    std::vector<double> y(lp_.row_count());
    for (std::size_t i = 0; i < lp_.row_count(); ++i)
      y[i] = cost_[nexp_ + i] / row_scale_[i];
    return y;
  }

  // Recession direction of the original variables for an entering column
  // whose ratio test found no blocker.
  std::vector<double> ray(int entering) const {
    std::vector<double> r(lp_.nvars, 0.0);
    const auto pc = static_cast<std::size_t>(entering);
    if (pc < nexp_) r[static_cast<std::size_t>(exp_orig_[pc])] += exp_sign_[pc];
    for (std::size_t i = 0; i < m_; ++i) {
      const auto bc = static_cast<std::size_t>(basis_[i]);
      if (bc < nexp_)
        r[static_cast<std::size_t>(exp_orig_[bc])] +=
            exp_sign_[bc] * (-tab_row_const(i)[pc]);
    }
    return r;
  }

  std::shared_ptr<const SimplexState> snapshot() const {
    auto st = std::make_shared<SimplexState>();
    st->fingerprint = fp_;
    st->m = m_;
    st->nexp = nexp_;
    st->ncol = ncol_;
    st->tab = tab_;
    st->basis = basis_;
    st->row_scale = row_scale_;
    st->row_neg = row_neg_;
    st->exp_orig = exp_orig_;
    st->exp_sign = exp_sign_;
    st->art_col_of_row = art_col_of_row_;
    return st;
  }

  const std::vector<int>& basis() const { return basis_; }

  double max_scaled_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < lp_.row_count(); ++i) {
      const double res = (dot(lp_.row(i), x) - lp_.rhs[i]) / row_scale_[i];
      worst = std::max(worst, res);
    }
    return worst;
  }

 private:
  void layout() {
    exp_orig_.clear();
    exp_sign_.clear();
    for (std::size_t j = 0; j < lp_.nvars; ++j) {
      exp_orig_.push_back(static_cast<int>(j));
      exp_sign_.push_back(1);
      if (lp_.var_sign[j] == VarSign::Free) {
        exp_orig_.push_back(static_cast<int>(j));
        exp_sign_.push_back(-1);
      }
    }
    nexp_ = exp_orig_.size();
  }

  double* tab_row(std::size_t i) { return tab_.data() + i * (ncol_ + 1); }
  const double* tab_row_const(std::size_t i) const {
    return tab_.data() + i * (ncol_ + 1);
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap_ranges(tab_row(a), tab_row(a) + ncol_ + 1, tab_row(b));
    std::swap(basis_[a], basis_[b]);
  }

  void normalize_and_eliminate(std::size_t pr, std::size_t pc) {
    double* prow = tab_row(pr);
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c <= ncol_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double* row = tab_row(r);
      const double f = row[pc];
      if (std::abs(f) < 1e-14) { row[pc] = 0.0; continue; }
      for (std::size_t c = 0; c <= ncol_; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    normalize_and_eliminate(pr, pc);
    const double f = cost_[pc];
    if (std::abs(f) > 0.0) {
      const double* prow = tab_row(pr);
      for (std::size_t c = 0; c <= ncol_; ++c) cost_[c] -= f * prow[c];
      cost_[pc] = 0.0;
    }
    basis_[pr] = static_cast<int>(pc);
  }

  void rebuild_cost(const std::vector<double>& colcost) {
    cost_.assign(ncol_ + 1, 0.0);
    std::copy(colcost.begin(), colcost.end(), cost_.begin());
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = colcost[static_cast<std::size_t>(basis_[r])];
      if (cb == 0.0) continue;
      const double* row = tab_row_const(r);
      for (std::size_t c = 0; c <= ncol_; ++c) cost_[c] -= cb * row[c];
    }
    for (std::size_t r = 0; r < m_; ++r) cost_[static_cast<std::size_t>(basis_[r])] = 0.0;
  }

  bool is_artificial(std::size_t c) const { return c >= nexp_ + lp_.row_count(); }

  // Core pivoting loop with the degeneracy-triggered switch to Bland's rule.
  // Returns -1 on optimality, else the unbounded entering column.
  int iterate(long& iterations, bool ban_artificials) {
    const double ptol = opt_.pivot_tol;
    long max_iter = opt_.max_iterations > 0
                        ? opt_.max_iterations
                        : 50000 + 100 * static_cast<long>(m_ + ncol_);
    long stall = 0;
    double last_obj = cost_[ncol_];
    for (;;) {
      int pc = -1;
      if (!bland_) {
        double best = -ptol;
        for (std::size_t c = 0; c < ncol_; ++c) {
          if (ban_artificials && is_artificial(c)) continue;
          if (cost_[c] < best) { best = cost_[c]; pc = static_cast<int>(c); }
        }
      } else {
        for (std::size_t c = 0; c < ncol_; ++c) {
          if (ban_artificials && is_artificial(c)) continue;
          if (cost_[c] < -ptol) { pc = static_cast<int>(c); break; }
        }
      }
      if (pc < 0) return -1;

      const auto pcu = static_cast<std::size_t>(pc);
      std::size_t pr = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double* row = tab_row_const(r);
        const double e = row[pcu];
        double ratio;
        if (e > ptol) {
          ratio = row[ncol_] / e;
        } else if (std::abs(e) > ptol &&
                   is_artificial(static_cast<std::size_t>(basis_[r])) &&
                   row[ncol_] <= opt_.feas_tol) {
          // An artificial parked at zero must not regrow. Only valid while it
          // actually sits at zero; firing on a positive-valued artificial
          // would pivot a nonzero rhs through a negative element and break
          // primal feasibility.
          ratio = 0.0;
        } else {
          continue;
        }
        const double tie = 1e-10 * (1.0 + std::abs(best_ratio));
        if (ratio < best_ratio - tie ||
            (ratio <= best_ratio + tie && pr != m_ && basis_[r] < basis_[pr])) {
          best_ratio = std::max(ratio, 0.0);
          pr = r;
        } else if (pr == m_ && ratio < best_ratio) {
          best_ratio = std::max(ratio, 0.0);
          pr = r;
        }
      }
      if (pr == m_) return pc;

      pivot(pr, pcu);
      if (++iterations > max_iter)
        throw NumericError("simplex iteration limit exceeded");
      const double obj = cost_[ncol_];
      if (std::abs(obj - last_obj) <= 1e-13 * (1.0 + std::abs(obj))) {
        if (++stall > 500) bland_ = true;
      } else {
        stall = 0;
      }
      last_obj = obj;
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      const auto bc = static_cast<std::size_t>(basis_[r]);
      if (!is_artificial(bc)) continue;
      const double* row = tab_row_const(r);
      std::size_t pc = ncol_;
      double best = opt_.pivot_tol;
      for (std::size_t c = 0; c < nexp_ + lp_.row_count(); ++c)
        if (std::abs(row[c]) > best) { best = std::abs(row[c]); pc = c; }
      if (pc < ncol_) pivot(r, pc);
      // otherwise the row is redundant; its artificial stays parked at zero
    }
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  std::uint64_t fp_;
  std::size_t m_ = 0, nexp_ = 0, ncol_ = 0;
  std::vector<double> tab_, cost_;
  std::vector<int> basis_;
  std::vector<double> row_scale_;
  std::vector<signed char> row_neg_;
  std::vector<int> exp_orig_;
  std::vector<signed char> exp_sign_;
  std::vector<int> art_col_of_row_;
  bool bland_ = false;
};

}  // namespace detail

/// Solve the program, optionally continuing from a warm-start token minted by
/// an earlier solve. The token is advisory: it can change the pivot path but
/// never the status or the optimal objective.
inline LpSolution solve(const LinearProgram& lp, const WarmStart* warm = nullptr,
                        const SimplexOptions& opt = {}) {
  if (lp.objective.size() != lp.nvars || lp.var_sign.size() != lp.nvars)
    throw std::invalid_argument("objective/sign size mismatch");
  if (lp.rows.size() != lp.row_count() * lp.nvars)
    throw std::invalid_argument("row storage size mismatch");
  if (lp.nvars == 0) throw std::invalid_argument("program has no variables");

  detail::Tableau t(lp, opt);
  LpSolution out;

  bool ready = false;
  if (warm && warm->usable() && warm->fingerprint == t.fingerprint()) {
    if (warm->state && warm->state->fingerprint == t.fingerprint()) {
      t.load_state(*warm->state);
      ready = true;
    } else if (t.build_from_basis(warm->basic_cols)) {
      ready = true;
    }
  }
  if (!ready) t.build_cold();

  if (t.needs_phase1() && !t.run_phase1(out.iterations)) {
    out.status = LpStatus::Infeasible;
    return out;
  }

  int unbounded_col = -1;
  out.status = t.run_phase2(out.iterations, unbounded_col);

  out.warm.fingerprint = t.fingerprint();
  out.warm.basic_cols = t.basis();
  out.warm.state = t.snapshot();

  if (out.status == LpStatus::Unbounded) {
    out.x = t.primal();
    out.ray = t.ray(unbounded_col);
    // certify the direction before reporting it
    double cdir = dot(std::span<const double>(lp.objective), out.ray);
    double rnorm = std::sqrt(squared_norm(out.ray));
    if (!(cdir > 1e-9 * (1.0 + rnorm))) throw NumericError("unbounded certificate fails objective test");
    for (std::size_t i = 0; i < lp.row_count(); ++i) {
      double drift = dot(lp.row(i), out.ray);
      double rowscale = 1.0 + std::sqrt(squared_norm(lp.row(i))) * rnorm;
      if (drift > 1e-6 * rowscale) throw NumericError("unbounded certificate violates a row");
    }
    for (std::size_t j = 0; j < lp.nvars; ++j)
      if (lp.var_sign[j] == VarSign::NonNegative && out.ray[j] < -1e-9 * (1.0 + rnorm))
        throw NumericError("unbounded certificate violates a sign bound");
    return out;
  }

  out.x = t.primal();
  for (std::size_t j = 0; j < lp.nvars; ++j)
    if (lp.var_sign[j] == VarSign::NonNegative && out.x[j] < 0.0 &&
        out.x[j] > -opt.feas_tol * 100)
      out.x[j] = 0.0;
  out.objective = dot(std::span<const double>(lp.objective), out.x);
  if (opt.compute_duals) out.duals = t.duals();

  const double viol = t.max_scaled_violation(out.x);
  if (viol > std::max(opt.feas_tol, 1e-9))
    throw NumericError("solution violates a scaled row by " + std::to_string(viol));
  return out;
}

/// Feasibility check: Optimal means a feasible point was found (returned in x).
inline LpSolution solve_feasibility(const LinearProgram& lp,
                                    const SimplexOptions& opt = {}) {
  LinearProgram copy = lp;
  std::fill(copy.objective.begin(), copy.objective.end(), 0.0);
  return solve(copy, nullptr, opt);
}

/// Pluggable backend carrying the same contract as solve(); used to hand
/// large instances to an external solver.
using LpBackend = std::function<LpSolution(const LinearProgram&, const WarmStart*)>;

struct LpSolver {
  SimplexOptions options{};
  LpBackend backend{};

  LpSolution solve(const LinearProgram& lp, const WarmStart* warm = nullptr) const {
    if (backend) return backend(lp, warm);
    return softpd::solve(lp, warm, options);
  }
};

}  // namespace softpd
