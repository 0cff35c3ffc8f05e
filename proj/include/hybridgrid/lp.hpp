#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hybridgrid {

inline constexpr double kLpInf = std::numeric_limits<double>::infinity();

/// Canonical LP form: minimize c'x + offset subject to Ax = b, l <= x <= u.
/// Inequalities are expressed through variable bounds (slack variables where
/// a row needs a range).
struct LinearProgram {
  struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kLpInf;
    double cost = 0.0;
  };
  struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
    double rhs = 0.0;
  };

  std::vector<Variable> vars;
  std::vector<Row> rows;
  double cost_offset = 0.0;

  int add_variable(std::string name, double lower, double upper, double cost);
  int add_row(std::string name, double rhs);
  void add_coeff(int row, int var, double value);
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> x;              // per variable
  std::vector<double> duals;          // per row (y)
  std::vector<double> reduced_costs;  // per variable (0 for basic variables)
  std::vector<int> infeasible_rows;   // rows whose balance cannot be met
  int iterations = 0;
};

/// Dense two-phase primal simplex for bounded variables with Bland's rule
/// (deterministic anti-cycling pivoting: same input bytes, same solution
/// bytes). Sized for desk-scale programs, not industrial ones.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace hybridgrid
