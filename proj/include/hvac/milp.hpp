#pragma once

#include "hvac/linear_program.hpp"
#include "hvac/thermal_model.hpp"

#include <array>
#include <vector>

namespace hvac {

struct MilpConfig {
  double big_m_low = -1000.0; ///< μ, a temperature the zone never reaches from above
  double big_m_high = 1000.0; ///< M, a temperature the zone never reaches from below
  /// Emit T_min <= T_in <= T_max as hard rows in addition to the penalty.
  bool hard_comfort = false;
};

/// Column indices of one slot's variables in the day program.
struct SlotVars {
  int power = -1;
  int indoor = -1;
  std::array<int, 3> w{-1, -1, -1};
  std::array<int, 3> x{-1, -1, -1};
};

struct MilpModel {
  EnvParams params;
  MilpConfig config;
  LinearProgram program;
  std::vector<SlotVars> slots;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> power;  ///< kW
  std::vector<double> indoor; ///< °F
  std::vector<std::array<double, 3>> w;
  std::vector<std::array<double, 3>> x;
  double objective = 0.0; ///< cents
  long nodes = 0;
  long pivots = 0;
};

/// Day program with binary regime indicators per slot: dynamics rows for
/// slots 1..T-1, indicator sums, big-M sandwich rows and the linearised
/// discomfort in the objective. The initial indoor temperature is fixed by
/// bounds.
MilpModel build_milp(const EnvParams &params, const DayProfile &profile,
                     double t_in_initial, const MilpConfig &config = {});

/// Exact solve by branch-and-bound. A regime-classification heuristic seeds
/// the incumbent unless `use_heuristic` is false.
MilpSolution solve_milp(const MilpModel &model, MipOptions options = {},
                        bool use_heuristic = true);

/// Builds and solves the day starting from indoor = outdoor[0].
MilpSolution solve_day(const EnvParams &params, const DayProfile &profile,
                       const MilpConfig &config = {});

/// Independent formulation: discomfort as two non-negative slacks per slot,
/// a pure LP with no indicator variables.
MilpSolution solve_convex_oracle(const EnvParams &params,
                                 const DayProfile &profile, double t_in_initial,
                                 const SimplexOptions &options = {});

struct BruteForceResult {
  std::vector<double> power;
  double objective = 0.0;
  /// Lipschitz constant of the objective in power times the grid step.
  double error_bound = 0.0;
  long evaluations = 0;
};

/// Exhaustive grid search over power schedules for days of at most 3 slots.
BruteForceResult brute_force_small(const EnvParams &params,
                                   const DayProfile &profile,
                                   double t_in_initial, double grid_step);

} // namespace hvac
