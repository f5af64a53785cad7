#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hvac {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct Term {
  int var;
  double coef;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;
};

/// A minimisation problem `min c·x` over bounded variables and sparse rows.
/// Built incrementally and treated as immutable once handed to a solver.
class LinearProgram {
public:
  int add_variable(std::string name, double lower, double upper, double cost,
                   bool integral = false);
  void add_row(std::string name, std::vector<Term> terms, RowSense sense,
               double rhs);
  /// Declares integral variables of which exactly one takes value 1. The
  /// branch-and-bound uses these to fix siblings when one member is set to 1.
  void add_sos1_group(std::vector<int> vars);

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_integral() const;

  const std::vector<double> &costs() const { return cost_; }
  const std::vector<double> &lower() const { return lower_; }
  const std::vector<double> &upper() const { return upper_; }
  const std::vector<bool> &integral() const { return integral_; }
  const std::vector<std::string> &names() const { return names_; }
  const std::vector<Row> &rows() const { return rows_; }
  const std::vector<std::vector<int>> &sos1_groups() const { return sos1_; }

  double evaluate_objective(const std::vector<double> &x) const;
  double row_activity(int row, const std::vector<double> &x) const;
  /// Largest bound or row violation of `x`.
  double max_violation(const std::vector<double> &x) const;

private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<bool> integral_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
  std::vector<std::vector<int>> sos1_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char *to_string(SolveStatus status);

struct SimplexOptions {
  long max_pivots = 50000;
  /// Consecutive degenerate pivots before pricing switches to Bland's rule.
  int bland_after_degenerate = 1000;
  int refactor_interval = 100;
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
};

struct LpResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  long pivots = 0;
};

/// Bounded-variable primal simplex, two phases, dense tableau.
/// `lower`/`upper` override the program's own bounds when given.
LpResult solve_relaxation(const LinearProgram &program,
                          const SimplexOptions &options = {},
                          const std::vector<double> *lower = nullptr,
                          const std::vector<double> *upper = nullptr);

struct MipOptions {
  SimplexOptions lp;
  long max_nodes = 10000;
  double integrality_tol = 1e-6;
  /// Optional primal heuristic: given a node's relaxed solution, propose
  /// values for the integral variables. The proposal is completed by an LP
  /// solve with those variables fixed.
  std::function<std::optional<std::vector<double>>(const std::vector<double> &)>
      rounding;
};

struct MipResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double best_bound = 0.0;
  long nodes = 0;
  long pivots = 0;
};

/// Best-first branch-and-bound over the integral variables.
MipResult solve_mip(const LinearProgram &program, const MipOptions &options = {});

/// Solves the continuous relaxation, or the full mixed-integer problem when
/// `ignore_integrality` is false.
LpResult solve_lp(const LinearProgram &program, bool ignore_integrality = true,
                  const SimplexOptions &options = {});

/// Writes a line-oriented ASCII listing of the program (see docs/lp_listing.md).
void write_lp_listing(std::ostream &out, const LinearProgram &program);

} // namespace hvac
