#include "hvac/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hvac {

namespace {

std::string slot_name(const char *base, int t) {
  return std::string(base) + "_" + std::to_string(t + 1);
}

double clamp_power(const EnvParams &params, double p) {
  return std::clamp(p, 0.0, params.p_max);
}

} // namespace

MilpModel build_milp(const EnvParams &params, const DayProfile &profile,
                     double t_in_initial, const MilpConfig &config) {
  params.validate();
  const int slots = profile.slots();
  profile.validate(slots);

  MilpModel model{params, config, {}, {}};
  auto &lp = model.program;
  model.slots.resize(slots);

  const double a = params.alpha;
  for (int t = 0; t < slots; ++t) {
    auto &v = model.slots[t];
    v.power = lp.add_variable(slot_name("p", t), 0.0, params.p_max,
                              profile.price[t] * params.slot_hours);
    const double lo = t == 0 ? t_in_initial : -kInfinity;
    const double hi = t == 0 ? t_in_initial : kInfinity;
    v.indoor = lp.add_variable(slot_name("tin", t), lo, hi, 0.0);
    v.w[0] = lp.add_variable(slot_name("w1", t), 0.0, 1.0, a * params.t_min, true);
    v.w[1] = lp.add_variable(slot_name("w2", t), 0.0, 1.0, 0.0, true);
    v.w[2] = lp.add_variable(slot_name("w3", t), 0.0, 1.0, -a * params.t_max, true);
    v.x[0] = lp.add_variable(slot_name("x1", t), -kInfinity, kInfinity, -a);
    v.x[1] = lp.add_variable(slot_name("x2", t), -kInfinity, kInfinity, 0.0);
    v.x[2] = lp.add_variable(slot_name("x3", t), -kInfinity, kInfinity, a);
  }

  const double gain = params.eta / params.conductivity_A;
  for (int t = 0; t + 1 < slots; ++t) {
    const auto &now = model.slots[t];
    const auto &next = model.slots[t + 1];
    lp.add_row(slot_name("dyn", t),
               {{next.indoor, 1.0},
                {now.indoor, -params.epsilon},
                {now.power, -(1.0 - params.epsilon) * gain}},
               RowSense::Equal, (1.0 - params.epsilon) * profile.outdoor[t]);
  }

  const double mu = config.big_m_low;
  const double big = config.big_m_high;
  for (int t = 0; t < slots; ++t) {
    const auto &v = model.slots[t];
    lp.add_row(slot_name("wsum", t), {{v.w[0], 1.0}, {v.w[1], 1.0}, {v.w[2], 1.0}},
               RowSense::Equal, 1.0);
    lp.add_row(slot_name("xsum", t),
               {{v.x[0], 1.0}, {v.x[1], 1.0}, {v.x[2], 1.0}, {v.indoor, -1.0}},
               RowSense::Equal, 0.0);
    lp.add_row(slot_name("x1lo", t), {{v.w[0], mu}, {v.x[0], -1.0}},
               RowSense::LessEqual, 0.0);
    lp.add_row(slot_name("x1hi", t), {{v.x[0], 1.0}, {v.w[0], -params.t_min}},
               RowSense::LessEqual, 0.0);
    lp.add_row(slot_name("x2lo", t), {{v.w[1], params.t_min}, {v.x[1], -1.0}},
               RowSense::LessEqual, 0.0);
    lp.add_row(slot_name("x2hi", t), {{v.x[1], 1.0}, {v.w[1], -params.t_max}},
               RowSense::LessEqual, 0.0);
    lp.add_row(slot_name("x3lo", t), {{v.w[2], params.t_max}, {v.x[2], -1.0}},
               RowSense::LessEqual, 0.0);
    lp.add_row(slot_name("x3hi", t), {{v.x[2], 1.0}, {v.w[2], -big}},
               RowSense::LessEqual, 0.0);
    lp.add_sos1_group({v.w[0], v.w[1], v.w[2]});
  }

  if (config.hard_comfort) {
    for (int t = 0; t < slots; ++t) {
      const int tin = model.slots[t].indoor;
      lp.add_row(slot_name("comfort_lo", t), {{tin, 1.0}}, RowSense::GreaterEqual,
                 params.t_min);
      lp.add_row(slot_name("comfort_hi", t), {{tin, 1.0}}, RowSense::LessEqual,
                 params.t_max);
    }
  }
  return model;
}

MilpSolution solve_milp(const MilpModel &model, MipOptions options,
                        bool use_heuristic) {
  if (use_heuristic && !options.rounding) {
    // Select each slot's regime from its relaxed indoor temperature.
    options.rounding = [&model](const std::vector<double> &x)
        -> std::optional<std::vector<double>> {
      std::vector<double> proposal = x;
      const double tol = 1e-7;
      for (const auto &v : model.slots) {
        const double tin = x[v.indoor];
        int regime = 1;
        if (tin < model.params.t_min - tol)
          regime = 0;
        else if (tin > model.params.t_max + tol)
          regime = 2;
        for (int k = 0; k < 3; ++k)
          proposal[v.w[k]] = k == regime ? 1.0 : 0.0;
      }
      return proposal;
    };
  }

  auto mip = solve_mip(model.program, options);
  MilpSolution sol;
  sol.status = mip.status;
  sol.nodes = mip.nodes;
  sol.pivots = mip.pivots;
  if (mip.values.empty())
    return sol;
  sol.objective = mip.objective;
  for (const auto &v : model.slots) {
    sol.power.push_back(clamp_power(model.params, mip.values[v.power]));
    sol.indoor.push_back(mip.values[v.indoor]);
    sol.w.push_back({mip.values[v.w[0]], mip.values[v.w[1]], mip.values[v.w[2]]});
    sol.x.push_back({mip.values[v.x[0]], mip.values[v.x[1]], mip.values[v.x[2]]});
  }
  return sol;
}

MilpSolution solve_day(const EnvParams &params, const DayProfile &profile,
                       const MilpConfig &config) {
  if (profile.outdoor.empty())
    throw std::invalid_argument("solve_day: empty profile");
  return solve_milp(build_milp(params, profile, profile.outdoor.front(), config));
}

MilpSolution solve_convex_oracle(const EnvParams &params,
                                 const DayProfile &profile, double t_in_initial,
                                 const SimplexOptions &options) {
  params.validate();
  const int slots = profile.slots();
  profile.validate(slots);

  LinearProgram lp;
  std::vector<int> power(slots), indoor(slots), under(slots), over(slots);
  for (int t = 0; t < slots; ++t) {
    power[t] = lp.add_variable(slot_name("p", t), 0.0, params.p_max,
                               profile.price[t] * params.slot_hours);
    const double lo = t == 0 ? t_in_initial : -kInfinity;
    const double hi = t == 0 ? t_in_initial : kInfinity;
    indoor[t] = lp.add_variable(slot_name("tin", t), lo, hi, 0.0);
    under[t] = lp.add_variable(slot_name("u", t), 0.0, kInfinity, params.alpha);
    over[t] = lp.add_variable(slot_name("v", t), 0.0, kInfinity, params.alpha);
  }
  const double gain = params.eta / params.conductivity_A;
  for (int t = 0; t + 1 < slots; ++t)
    lp.add_row(slot_name("dyn", t),
               {{indoor[t + 1], 1.0},
                {indoor[t], -params.epsilon},
                {power[t], -(1.0 - params.epsilon) * gain}},
               RowSense::Equal, (1.0 - params.epsilon) * profile.outdoor[t]);
  for (int t = 0; t < slots; ++t) {
    lp.add_row(slot_name("under", t), {{under[t], 1.0}, {indoor[t], 1.0}},
               RowSense::GreaterEqual, params.t_min);
    lp.add_row(slot_name("over", t), {{over[t], 1.0}, {indoor[t], -1.0}},
               RowSense::GreaterEqual, -params.t_max);
  }

  auto r = solve_relaxation(lp, options);
  MilpSolution sol;
  sol.status = r.status;
  sol.pivots = r.pivots;
  if (r.status != SolveStatus::Optimal)
    return sol;
  sol.objective = r.objective;
  for (int t = 0; t < slots; ++t) {
    sol.power.push_back(clamp_power(params, r.values[power[t]]));
    sol.indoor.push_back(r.values[indoor[t]]);
  }
  return sol;
}

BruteForceResult brute_force_small(const EnvParams &params,
                                   const DayProfile &profile,
                                   double t_in_initial, double grid_step) {
  const int slots = profile.slots();
  if (slots < 1 || slots > 3)
    throw std::domain_error("brute_force_small supports 1 to 3 slots");
  if (!(grid_step > 0.0))
    throw std::domain_error("grid_step must be positive");
  profile.validate(slots);

  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double p = static_cast<double>(k) * grid_step;
    if (p >= params.p_max - 1e-12) {
      grid.push_back(params.p_max);
      break;
    }
    grid.push_back(p);
  }

  BruteForceResult best;
  best.objective = kInfinity;
  std::vector<double> current(slots, 0.0);

  // Depth-first enumeration carrying the partial objective and state.
  auto recurse = [&](auto &&self, int t, double t_in, double partial) -> void {
    const double here = partial + params.alpha * thermal_discomfort(params, t_in);
    for (double p : grid) {
      current[t] = p;
      const double value = here + p * params.slot_hours * profile.price[t];
      if (t + 1 == slots) {
        ++best.evaluations;
        if (value < best.objective) {
          best.objective = value;
          best.power = current;
        }
      } else {
        self(self, t + 1,
             step_indoor_temperature(params, t_in, profile.outdoor[t], p), value);
      }
    }
  };
  recurse(recurse, 0, t_in_initial, 0.0);

  const double max_price =
      *std::max_element(profile.price.begin(), profile.price.end());
  const double lipschitz =
      slots * (max_price * params.slot_hours + params.alpha * params.heating_gain());
  best.error_bound = lipschitz * grid_step;
  return best;
}

} // namespace hvac
