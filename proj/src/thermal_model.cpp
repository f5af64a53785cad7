#include "hvac/thermal_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvac {

void EnvParams::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in [0,1)");
  if (!(eta > 0.0))
    throw std::invalid_argument("eta must be positive");
  if (!(conductivity_A > 0.0))
    throw std::invalid_argument("conductivity_A must be positive");
  if (!(p_max > 0.0))
    throw std::invalid_argument("p_max must be positive");
  if (!(t_min < t_max))
    throw std::invalid_argument("t_min must be below t_max");
  if (!(alpha >= 0.0))
    throw std::invalid_argument("alpha must be non-negative");
  if (slots_per_day < 1)
    throw std::invalid_argument("slots_per_day must be at least 1");
  if (!(slot_hours > 0.0))
    throw std::invalid_argument("slot_hours must be positive");
}

void DayProfile::validate(int slots) const {
  if (static_cast<int>(outdoor.size()) != slots ||
      static_cast<int>(price.size()) != slots)
    throw std::invalid_argument("day " + day_id + ": expected " +
                                std::to_string(slots) + " slots");
  for (double p : price)
    if (!(p >= 0.0))
      throw std::invalid_argument("day " + day_id + ": negative price");
  for (double t : outdoor)
    if (!std::isfinite(t))
      throw std::invalid_argument("day " + day_id + ": non-finite outdoor");
}

double step_indoor_temperature(const EnvParams &params, double t_in,
                               double t_out, double power) {
  if (!(power >= 0.0 && power <= params.p_max))
    throw std::domain_error("power " + std::to_string(power) +
                            " kW outside [0, p_max]");
  return params.epsilon * t_in +
         (1.0 - params.epsilon) *
             (t_out + params.eta * power / params.conductivity_A);
}

double thermal_discomfort(const EnvParams &params, double t_in) {
  return std::max(params.t_min - t_in, 0.0) +
         std::max(t_in - params.t_max, 0.0);
}

double day_cost(std::span<const double> power, std::span<const double> price,
                double slot_hours) {
  if (power.size() != price.size())
    throw std::domain_error("power and price lengths differ");
  double total = 0.0;
  for (std::size_t t = 0; t < power.size(); ++t)
    total += power[t] * slot_hours * price[t];
  return total;
}

void score_trajectory(const EnvParams &params, const DayProfile &profile,
                      Trajectory &traj) {
  traj.cost_cents = day_cost(traj.power, profile.price, params.slot_hours);
  double discomfort = 0.0;
  for (double t : traj.indoor)
    discomfort += thermal_discomfort(params, t);
  traj.discomfort_degF_hours = discomfort;
  traj.objective = traj.cost_cents + params.alpha * discomfort;
}

Trajectory rollout(const EnvParams &params, const DayProfile &profile,
                   std::span<const double> power, double t_in_initial) {
  const auto slots = profile.outdoor.size();
  if (power.size() != slots || profile.price.size() != slots)
    throw std::domain_error("rollout: schedule length does not match day");
  Trajectory traj;
  traj.power.assign(power.begin(), power.end());
  traj.indoor.resize(slots);
  double t_in = t_in_initial;
  for (std::size_t t = 0; t < slots; ++t) {
    traj.indoor[t] = t_in;
    t_in = step_indoor_temperature(params, t_in, profile.outdoor[t], power[t]);
  }
  score_trajectory(params, profile, traj);
  return traj;
}

} // namespace hvac
