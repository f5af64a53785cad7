#pragma once

#include "hvac/milp.hpp"
#include "hvac/mlp.hpp"
#include "hvac/thermal_model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hvac {

/// Maps (outdoor °F, indoor °F, price, slot 1..T) to a power command in kW.
using Controller = std::function<double(double, double, double, int)>;

Controller imitation_controller(const MlpParams &params);
/// Plays back a stored schedule regardless of the observed state.
Controller replay_controller(std::vector<double> schedule);

/// Simulates a day slot by slot: indoor starts at the first outdoor reading
/// and each command is applied for one slot through the heating dynamics.
Trajectory run_closed_loop(const Controller &controller, const EnvParams &params,
                           const DayProfile &profile);

struct ForecastNoise {
  double mean = 0.5;  ///< °F
  double sigma = 6.0; ///< °F
};

/// Adds independent Gaussian error to every outdoor reading.
DayProfile perturb_forecast(const DayProfile &profile, std::uint64_t seed,
                            const ForecastNoise &noise = {});

struct ForecastRun {
  DayProfile forecast;
  MilpSolution plan;
  Trajectory realised;
};

/// Plans the day on forecast weather, then executes that schedule against
/// the real weather.
ForecastRun run_forecast_milp(const EnvParams &params, const DayProfile &real,
                              std::uint64_t seed, const ForecastNoise &noise = {},
                              const MilpConfig &config = {});

double mae(std::span<const double> values, std::span<const double> reference);

struct MapeResult {
  std::optional<double> percent; ///< empty when every sample was skipped
  int used = 0;
  int skipped = 0;
};

/// Percentage error over samples whose |reference| >= denom_floor.
MapeResult mape(std::span<const double> values, std::span<const double> reference,
                double denom_floor = 1e-3);

/// Population standard deviation (divides by N).
double std_dev(std::span<const double> values);

struct AlphaSweepRow {
  double alpha = 0.0;
  double tin_min_f = 0.0;
  double tin_max_f = 0.0;
  /// Minimum over slots 2..T that full heating in the previous slot could
  /// have brought up to t_min.
  double controllable_tin_min_f = 0.0;
  double total_cost_cents = 0.0;
  double total_discomfort = 0.0;
};

std::vector<AlphaSweepRow> alpha_sweep(const EnvParams &params,
                                       const std::vector<DayProfile> &days,
                                       const std::vector<double> &alphas,
                                       const MilpConfig &config = {});

void write_alpha_sweep_csv(std::ostream &out, const std::vector<AlphaSweepRow> &rows);

/// How a compared method produces its realised trajectory for one day.
struct Policy {
  std::string name;
  std::function<Trajectory(const DayProfile &day, int day_index,
                           const MilpSolution &optimum)>
      run;
};

Policy imitation_policy(const EnvParams &params, const MlpParams &model);
/// Per-day forecast seeds are derived from `seed` and the day index.
Policy forecast_policy(const EnvParams &params, std::uint64_t seed,
                       const ForecastNoise &noise = {}, const MilpConfig &config = {});
Policy replay_policy(const EnvParams &params);

struct DayMetrics {
  std::string day_id;
  double mae_power_kw = 0.0;
  MapeResult mape_power;
  double cost_err_cents = 0.0;
  MapeResult cost_err_pct; ///< single-sample MAPE of the daily cost
  double tin_min_f = 0.0;
  double tin_max_f = 0.0;
  double tin_sigma_f = 0.0;
  double objective = 0.0;
  double optimal_objective = 0.0;
  Trajectory trajectory;
};

struct EvalReport {
  std::string controller;
  std::vector<DayMetrics> days;

  // Season aggregates: arithmetic means of the per-day values.
  double mean_mae_power_kw = 0.0;
  std::optional<double> mean_mape_power_pct;
  double mean_cost_err_cents = 0.0;
  std::optional<double> mean_cost_err_pct;
  double mean_tin_sigma_f = 0.0;
  double mean_objective = 0.0;
  double mean_optimal_objective = 0.0;
  int mape_skipped = 0;

  // Pooled over every hourly indoor temperature of the season.
  double tin_min_f = 0.0;
  double tin_max_f = 0.0;
  double tin_mean_f = 0.0;
  double tin_sigma_f = 0.0;
};

struct SeasonEvaluation {
  std::vector<MilpSolution> optima;
  std::vector<EvalReport> reports; ///< one per policy, in the given order
};

/// Compares each policy against the end-of-day MILP optimum of every day.
SeasonEvaluation evaluate_season(const EnvParams &params,
                                 const std::vector<DayProfile> &days,
                                 const std::vector<Policy> &policies,
                                 const MilpConfig &config = {});

void write_report_csv(std::ostream &out, const std::vector<EvalReport> &reports);
void write_summary(std::ostream &out, const std::vector<EvalReport> &reports);
/// Long-format plot data: day_id,slot,series,power_kw,tin_f,tin_c.
void write_plot_csv(std::ostream &out, const std::vector<DayProfile> &days,
                    const SeasonEvaluation &evaluation);

} // namespace hvac
