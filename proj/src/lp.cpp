#include "hybridgrid/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "hybridgrid/grid.hpp"

namespace hybridgrid {

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                double cost) {
  vars.push_back({std::move(name), lower, upper, cost});
  return static_cast<int>(vars.size()) - 1;
}

int LinearProgram::add_row(std::string name, double rhs) {
  rows.push_back({std::move(name), {}, rhs});
  return static_cast<int>(rows.size()) - 1;
}

void LinearProgram::add_coeff(int row, int var, double value) {
  if (value != 0.0) rows[static_cast<std::size_t>(row)].coeffs.emplace_back(var, value);
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-7;

/// Bounded-variable primal simplex, dense basis inverse, Bland's rule.
/// Columns 0..n-1 are structural, n..n+m-1 the phase-1 artificials.
struct Simplex {
  int n = 0;
  int m = 0;
  int total = 0;
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> lower, upper;
  std::vector<double> cost;  // phase-2 costs (artificials 0)
  std::vector<double> rhs;
  std::vector<VarState> state;
  std::vector<int> basis;
  std::vector<double> binv;  // m*m row-major
  std::vector<double> xb;
  std::vector<double> dtol;  // per-column reduced-cost tolerance
  int iterations = 0;
  int pivots_since_refactor = 0;

  double& bi(int i, int j) { return binv[static_cast<std::size_t>(i) * m + j]; }
  double bi(int i, int j) const { return binv[static_cast<std::size_t>(i) * m + j]; }

  double nonbasic_value(int j) const {
    switch (state[j]) {
      case VarState::AtLower:
        return lower[j];
      case VarState::AtUpper:
        return upper[j];
      default:
        return 0.0;
    }
  }

  void build(const LinearProgram& lp) {
    n = static_cast<int>(lp.vars.size());
    m = static_cast<int>(lp.rows.size());
    total = n + m;
    cols.assign(total, {});
    lower.assign(total, 0.0);
    upper.assign(total, 0.0);
    cost.assign(total, 0.0);
    rhs.assign(m, 0.0);
    for (int j = 0; j < n; ++j) {
      lower[j] = lp.vars[j].lower;
      upper[j] = lp.vars[j].upper;
      cost[j] = lp.vars[j].cost;
    }
    for (int i = 0; i < m; ++i) {
      rhs[i] = lp.rows[i].rhs;
      for (const auto& [var, coeff] : lp.rows[i].coeffs)
        cols[var].emplace_back(i, coeff);
    }
    // Coefficients for the same (row, var) pair accumulate.
    for (int j = 0; j < n; ++j) {
      auto& c = cols[j];
      std::sort(c.begin(), c.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::pair<int, double>> merged;
      for (const auto& [row, coeff] : c) {
        if (!merged.empty() && merged.back().first == row)
          merged.back().second += coeff;
        else
          merged.emplace_back(row, coeff);
      }
      c = std::move(merged);
    }
    dtol.assign(total, 0.0);
    for (int j = 0; j < total; ++j) {
      double norm = std::abs(cost[j]);
      for (const auto& [row, coeff] : cols[j]) norm += std::abs(coeff);
      dtol[j] = 1e-9 * (1.0 + norm);
    }
  }

  void init_basis() {
    state.assign(total, VarState::FreeZero);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lower[j]))
        state[j] = VarState::AtLower;
      else if (std::isfinite(upper[j]))
        state[j] = VarState::AtUpper;
      else
        state[j] = VarState::FreeZero;
    }
    // Residual of each row at the nonbasic point decides the artificial sign,
    // so every artificial starts feasible at |residual|.
    std::vector<double> residual = rhs;
    for (int j = 0; j < n; ++j) {
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& [row, coeff] : cols[j]) residual[row] -= coeff * v;
    }
    basis.assign(m, 0);
    binv.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      const double sign = residual[i] < 0.0 ? -1.0 : 1.0;
      const int art = n + i;
      cols[art] = {{i, sign}};
      lower[art] = 0.0;
      upper[art] = kLpInf;
      state[art] = VarState::Basic;
      basis[i] = art;
      bi(i, i) = sign;
    }
    compute_xb();
  }

  void compute_xb() {
    std::vector<double> r = rhs;
    for (int j = 0; j < total; ++j) {
      if (state[j] == VarState::Basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& [row, coeff] : cols[j]) r[row] -= coeff * v;
    }
    xb.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += bi(i, k) * r[k];
      xb[i] = s;
    }
  }

  void refactorize() {
    // Gauss-Jordan inverse of the basis matrix, partial pivoting.
    std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
    for (int c = 0; c < m; ++c)
      for (const auto& [row, coeff] : cols[basis[c]])
        mat[static_cast<std::size_t>(row) * m + c] = coeff;
    std::vector<double> inv(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) inv[static_cast<std::size_t>(i) * m + i] = 1.0;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      double best = std::abs(mat[static_cast<std::size_t>(col) * m + col]);
      for (int i = col + 1; i < m; ++i) {
        const double v = std::abs(mat[static_cast<std::size_t>(i) * m + col]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-12) throw SolverError("singular basis during refactorization");
      if (piv != col) {
        for (int k = 0; k < m; ++k) {
          std::swap(mat[static_cast<std::size_t>(piv) * m + k],
                    mat[static_cast<std::size_t>(col) * m + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * m + k],
                    inv[static_cast<std::size_t>(col) * m + k]);
        }
      }
      const double p = mat[static_cast<std::size_t>(col) * m + col];
      for (int k = 0; k < m; ++k) {
        mat[static_cast<std::size_t>(col) * m + k] /= p;
        inv[static_cast<std::size_t>(col) * m + k] /= p;
      }
      for (int i = 0; i < m; ++i) {
        if (i == col) continue;
        const double f = mat[static_cast<std::size_t>(i) * m + col];
        if (f == 0.0) continue;
        for (int k = 0; k < m; ++k) {
          mat[static_cast<std::size_t>(i) * m + k] -= f * mat[static_cast<std::size_t>(col) * m + k];
          inv[static_cast<std::size_t>(i) * m + k] -= f * inv[static_cast<std::size_t>(col) * m + k];
        }
      }
    }
    binv = std::move(inv);
    pivots_since_refactor = 0;
  }

  std::vector<double> duals(const std::vector<double>& c) const {
    std::vector<double> y(m, 0.0);
    for (int i = 0; i < m; ++i) {
      const double cb = c[basis[i]];
      if (cb == 0.0) continue;
      for (int k = 0; k < m; ++k) y[k] += cb * bi(i, k);
    }
    return y;
  }

  double reduced_cost(int j, const std::vector<double>& c,
                      const std::vector<double>& y) const {
    double d = c[j];
    for (const auto& [row, coeff] : cols[j]) d -= y[row] * coeff;
    return d;
  }

  /// One simplex phase: returns true when optimal, throws on unbounded when
  /// allow_unbounded is false; sets *unbounded otherwise.
  bool iterate(const std::vector<double>& c, bool* unbounded) {
    const int max_iter = 20000 + 200 * total;
    if (unbounded) *unbounded = false;
    while (true) {
      if (++iterations > max_iter)
        throw SolverError("simplex iteration limit exceeded");
      const std::vector<double> y = duals(c);

      // Bland: first favorable column in index order enters.
      int enter = -1;
      double enter_dir = 0.0;
      for (int j = 0; j < total; ++j) {
        if (state[j] == VarState::Basic) continue;
        if (upper[j] - lower[j] <= 0.0 && state[j] != VarState::FreeZero)
          continue;  // fixed variable can never improve
        const double d = reduced_cost(j, c, y);
        if (state[j] == VarState::AtLower && d < -dtol[j]) {
          enter = j;
          enter_dir = 1.0;
          break;
        }
        if (state[j] == VarState::AtUpper && d > dtol[j]) {
          enter = j;
          enter_dir = -1.0;
          break;
        }
        if (state[j] == VarState::FreeZero && std::abs(d) > dtol[j]) {
          enter = j;
          enter_dir = d > 0.0 ? -1.0 : 1.0;
          break;
        }
      }
      if (enter < 0) return true;

      // Direction through the basis.
      std::vector<double> w(m, 0.0);
      for (const auto& [row, coeff] : cols[enter])
        for (int i = 0; i < m; ++i) w[i] += bi(i, row) * coeff;

      // Ratio test. Candidates: basic variables hitting a bound, or the
      // entering variable reaching its opposite bound.
      double t_best = kLpInf;
      int blocker = -1;   // variable index (Bland tie-break), -1 = none
      int block_row = -1;
      bool block_to_upper = false;
      for (int i = 0; i < m; ++i) {
        const double g = enter_dir * w[i];  // basic i moves by -g*t
        const int v = basis[i];
        if (g > kPivotTol) {
          if (!std::isfinite(lower[v])) continue;
          const double t = (xb[i] - lower[v]) / g;
          if (t < t_best - 1e-9 || (t < t_best + 1e-9 && (blocker < 0 || v < blocker))) {
            if (t < t_best) t_best = std::max(t, 0.0);
            blocker = v;
            block_row = i;
            block_to_upper = false;
          }
        } else if (g < -kPivotTol) {
          if (!std::isfinite(upper[v])) continue;
          const double t = (upper[v] - xb[i]) / (-g);
          if (t < t_best - 1e-9 || (t < t_best + 1e-9 && (blocker < 0 || v < blocker))) {
            if (t < t_best) t_best = std::max(t, 0.0);
            blocker = v;
            block_row = i;
            block_to_upper = true;
          }
        }
      }
      const double own_range =
          (state[enter] == VarState::FreeZero || !std::isfinite(lower[enter]) ||
           !std::isfinite(upper[enter]))
              ? kLpInf
              : upper[enter] - lower[enter];
      const bool own_blocks =
          own_range < t_best - 1e-9 ||
          (own_range < t_best + 1e-9 && (blocker < 0 || enter < blocker));

      if (own_blocks && std::isfinite(own_range)) {
        // Bound flip, basis unchanged.
        state[enter] =
            state[enter] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        compute_xb();
        continue;
      }
      if (blocker < 0) {
        if (unbounded) {
          *unbounded = true;
          return false;
        }
        throw SolverError("unbounded direction in phase 1");
      }

      // Pivot: blocker leaves to the bound it hit, enter becomes basic (its
      // value falls out of the xb recomputation below).
      state[blocker] = block_to_upper ? VarState::AtUpper : VarState::AtLower;
      state[enter] = VarState::Basic;
      basis[block_row] = enter;

      const double pivot = w[block_row];
      if (std::abs(pivot) < kPivotTol)
        throw SolverError("numerically singular pivot");
      for (int k = 0; k < m; ++k) bi(block_row, k) /= pivot;
      for (int i = 0; i < m; ++i) {
        if (i == block_row) continue;
        const double f = w[i];
        if (f == 0.0) continue;
        for (int k = 0; k < m; ++k) bi(i, k) -= f * bi(block_row, k);
      }
      if (++pivots_since_refactor >= 200) refactorize();
      compute_xb();
    }
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  LpSolution sol;
  const int n = static_cast<int>(lp.vars.size());
  const int m = static_cast<int>(lp.rows.size());

  for (const auto& v : lp.vars) {
    if (v.lower > v.upper + 1e-12) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
  }

  if (m == 0) {
    // Pure box problem: each variable sits at its cost-minimizing bound.
    sol.x.assign(n, 0.0);
    sol.reduced_costs.assign(n, 0.0);
    double obj = lp.cost_offset;
    for (int j = 0; j < n; ++j) {
      const auto& v = lp.vars[j];
      double x = v.cost >= 0.0 ? v.lower : v.upper;
      if (!std::isfinite(x)) {
        if (v.cost == 0.0)
          x = 0.0;
        else {
          sol.status = LpStatus::unbounded;
          return sol;
        }
      }
      sol.x[j] = x;
      sol.reduced_costs[j] = v.cost;
      obj += v.cost * x;
    }
    sol.status = LpStatus::optimal;
    sol.objective = obj;
    sol.dual_objective = obj;
    return sol;
  }

  Simplex sx;
  sx.build(lp);
  sx.init_basis();

  // Phase 1: minimize the artificial infeasibility.
  std::vector<double> phase1(sx.total, 0.0);
  for (int j = n; j < sx.total; ++j) phase1[j] = 1.0;
  sx.iterate(phase1, nullptr);

  double infeas = 0.0;
  double rhs_scale = 1.0;
  for (int i = 0; i < m; ++i) rhs_scale = std::max(rhs_scale, std::abs(sx.rhs[i]));
  for (int i = 0; i < m; ++i)
    if (sx.basis[i] >= n) infeas += std::max(0.0, sx.xb[i]);
  if (infeas > kFeasTol * rhs_scale) {
    sol.status = LpStatus::infeasible;
    for (int i = 0; i < m; ++i)
      if (sx.basis[i] >= n && sx.xb[i] > kFeasTol * rhs_scale)
        sol.infeasible_rows.push_back(sx.basis[i] - n);
    sol.iterations = sx.iterations;
    return sol;
  }

  // Phase 2: artificials locked at zero.
  for (int j = n; j < sx.total; ++j) {
    sx.lower[j] = 0.0;
    sx.upper[j] = 0.0;
    if (sx.state[j] != VarState::Basic) sx.state[j] = VarState::AtLower;
  }
  sx.compute_xb();
  bool unbounded = false;
  sx.iterate(sx.cost, &unbounded);
  if (unbounded) {
    sol.status = LpStatus::unbounded;
    sol.iterations = sx.iterations;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.iterations = sx.iterations;
  sol.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j)
    if (sx.state[j] != VarState::Basic) sol.x[j] = sx.nonbasic_value(j);
  for (int i = 0; i < m; ++i)
    if (sx.basis[i] < n) sol.x[sx.basis[i]] = sx.xb[i];

  sol.objective = lp.cost_offset;
  for (int j = 0; j < n; ++j) sol.objective += lp.vars[j].cost * sol.x[j];

  const std::vector<double> y = sx.duals(sx.cost);
  sol.duals.assign(y.begin(), y.end());
  sol.reduced_costs.assign(n, 0.0);
  sol.dual_objective = lp.cost_offset;
  for (int i = 0; i < m; ++i) sol.dual_objective += y[i] * sx.rhs[i];
  for (int j = 0; j < n; ++j) {
    if (sx.state[j] == VarState::Basic) continue;
    const double d = sx.reduced_cost(j, sx.cost, y);
    sol.reduced_costs[j] = d;
    sol.dual_objective += d * sol.x[j];
  }
  return sol;
}

}  // namespace hybridgrid
