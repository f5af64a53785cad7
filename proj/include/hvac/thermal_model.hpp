#pragma once

#include <span>
#include <string>
#include <vector>

namespace hvac {

/// Building, HVAC and comfort constants. Temperatures in °F, power in kW.
///
/// Defaults reproduce the single-zone heating configuration used throughout
/// the toolkit (small home, 15 kW heater, 19–24 °C comfort band).
struct EnvParams {
  double epsilon = 0.7;         ///< thermal inertia, dimensionless in [0,1)
  double eta = 2.5;             ///< thermal conversion efficiency
  double conductivity_A = 0.14; ///< overall thermal conductivity, kW/°F
  double p_max = 15.0;          ///< heater rating, kW
  double t_min = 66.2;          ///< lower comfort bound, °F
  double t_max = 75.2;          ///< upper comfort bound, °F
  double alpha = 4.0;           ///< discomfort weight, cents per °F per slot
  int slots_per_day = 24;
  double slot_hours = 1.0;

  /// Temperature gain per kW of heating over one slot: (1-ε)·η/A.
  double heating_gain() const { return (1.0 - epsilon) * eta / conductivity_A; }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// Outdoor temperature and price for one day, one entry per slot.
struct DayProfile {
  std::string day_id;
  int month = 0; ///< calendar month 1..12, 0 when unknown
  std::vector<double> outdoor; ///< °F
  std::vector<double> price;   ///< cents/kWh

  int slots() const { return static_cast<int>(outdoor.size()); }

  /// Checks lengths against `slots` and that prices are non-negative.
  void validate(int slots) const;
};

struct Trajectory {
  std::vector<double> power;  ///< kW per slot
  std::vector<double> indoor; ///< °F at the start of each slot
  double cost_cents = 0.0;
  double discomfort_degF_hours = 0.0;
  double objective = 0.0;
};

double step_indoor_temperature(const EnvParams &params, double t_in,
                               double t_out, double power);

double thermal_discomfort(const EnvParams &params, double t_in);

double day_cost(std::span<const double> power, std::span<const double> price,
                double slot_hours);

/// Simulates one day under a fixed power schedule. indoor[0] is
/// `t_in_initial`; the temperature produced by the last slot's power lies
/// past the horizon and is not recorded.
Trajectory rollout(const EnvParams &params, const DayProfile &profile,
                   std::span<const double> power, double t_in_initial);

/// Objective of a trajectory: cost plus α-weighted discomfort summed over
/// the recorded indoor temperatures.
void score_trajectory(const EnvParams &params, const DayProfile &profile,
                      Trajectory &traj);

inline double fahrenheit_to_celsius(double f) { return (f - 32.0) * 5.0 / 9.0; }
inline double celsius_to_fahrenheit(double c) { return c * 9.0 / 5.0 + 32.0; }

} // namespace hvac
