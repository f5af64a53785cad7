#include "hvac/evaluation.hpp"

#include "hvac/text_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace hvac {

Controller imitation_controller(const MlpParams &params) {
  return [&params](double t_out, double t_in, double price, int slot) {
    return predict_power(params, t_out, t_in, price, slot);
  };
}

Controller replay_controller(std::vector<double> schedule) {
  return [schedule = std::move(schedule)](double, double, double, int slot) {
    if (slot < 1 || slot > static_cast<int>(schedule.size()))
      throw std::out_of_range("replay schedule has no slot " + std::to_string(slot));
    return schedule[slot - 1];
  };
}

Trajectory run_closed_loop(const Controller &controller, const EnvParams &params,
                           const DayProfile &profile) {
  const int slots = profile.slots();
  if (slots == 0)
    throw std::invalid_argument("run_closed_loop: empty profile");
  profile.validate(slots);

  Trajectory traj;
  traj.indoor.reserve(slots);
  traj.power.reserve(slots);
  double t_in = profile.outdoor.front();
  for (int t = 0; t < slots; ++t) {
    traj.indoor.push_back(t_in);
    const double p = controller(profile.outdoor[t], t_in, profile.price[t], t + 1);
    if (!std::isfinite(p))
      throw std::domain_error("controller returned a non-finite command at slot " +
                              std::to_string(t + 1) + " of " + profile.day_id);
    traj.power.push_back(p);
    t_in = step_indoor_temperature(params, t_in, profile.outdoor[t], p);
  }
  score_trajectory(params, profile, traj);
  return traj;
}

DayProfile perturb_forecast(const DayProfile &profile, std::uint64_t seed,
                            const ForecastNoise &noise) {
  if (!(noise.sigma >= 0.0))
    throw std::invalid_argument("forecast noise sigma must be non-negative");
  DayProfile forecast = profile;
  if (noise.sigma == 0.0) {
    for (double &v : forecast.outdoor)
      v += noise.mean;
    return forecast;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> error(noise.mean, noise.sigma);
  for (double &v : forecast.outdoor)
    v += error(rng);
  return forecast;
}

ForecastRun run_forecast_milp(const EnvParams &params, const DayProfile &real,
                              std::uint64_t seed, const ForecastNoise &noise,
                              const MilpConfig &config) {
  ForecastRun run;
  run.forecast = perturb_forecast(real, seed, noise);
  run.plan = solve_day(params, run.forecast, config);
  if (run.plan.status != SolveStatus::Optimal)
    throw std::runtime_error("forecast MILP for " + real.day_id + " ended " +
                             to_string(run.plan.status));
  run.realised = rollout(params, real, run.plan.power, real.outdoor.front());
  return run;
}

double mae(std::span<const double> values, std::span<const double> reference) {
  if (values.size() != reference.size())
    throw std::invalid_argument("mae: length mismatch");
  if (values.empty())
    throw std::invalid_argument("mae: no samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    sum += std::abs(values[i] - reference[i]);
  return sum / static_cast<double>(values.size());
}

MapeResult mape(std::span<const double> values, std::span<const double> reference,
                double denom_floor) {
  if (values.size() != reference.size())
    throw std::invalid_argument("mape: length mismatch");
  MapeResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(reference[i]) < denom_floor) {
      ++r.skipped;
      continue;
    }
    sum += std::abs((values[i] - reference[i]) / reference[i]);
    ++r.used;
  }
  if (r.used > 0)
    r.percent = 100.0 * sum / r.used;
  return r;
}

double std_dev(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("std_dev: no samples");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

std::vector<AlphaSweepRow> alpha_sweep(const EnvParams &params,
                                       const std::vector<DayProfile> &days,
                                       const std::vector<double> &alphas,
                                       const MilpConfig &config) {
  if (days.empty())
    throw std::invalid_argument("alpha_sweep: no days");
  std::vector<AlphaSweepRow> rows;
  for (double alpha : alphas) {
    EnvParams p = params;
    p.alpha = alpha;
    AlphaSweepRow row;
    row.alpha = alpha;
    row.tin_min_f = row.controllable_tin_min_f = std::numeric_limits<double>::infinity();
    row.tin_max_f = -std::numeric_limits<double>::infinity();
    for (const auto &day : days) {
      const auto sol = solve_day(p, day, config);
      if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error("alpha sweep: " + day.day_id + " ended " +
                                 to_string(sol.status));
      // Score the realised schedule rather than trusting solver indicators.
      const auto traj = rollout(p, day, sol.power, day.outdoor.front());
      for (std::size_t t = 0; t < traj.indoor.size(); ++t) {
        row.tin_min_f = std::min(row.tin_min_f, traj.indoor[t]);
        row.tin_max_f = std::max(row.tin_max_f, traj.indoor[t]);
        // Count the slot only if full power in the previous slot could
        // have lifted it to the comfort floor.
        if (t > 0 && step_indoor_temperature(p, traj.indoor[t - 1], day.outdoor[t - 1],
                                             p.p_max) >= p.t_min)
          row.controllable_tin_min_f = std::min(row.controllable_tin_min_f, traj.indoor[t]);
      }
      row.total_cost_cents += traj.cost_cents;
      row.total_discomfort += traj.discomfort_degF_hours;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_alpha_sweep_csv(std::ostream &out, const std::vector<AlphaSweepRow> &rows) {
  out << "alpha,tin_min_c,tin_max_c,total_cost_cents,tin_min_f,tin_max_f,"
         "controllable_tin_min_f,total_discomfort_degf_h\n";
  for (const auto &r : rows) {
    out << format_double(r.alpha) << ',' << format_fixed(fahrenheit_to_celsius(r.tin_min_f), 4)
        << ',' << format_fixed(fahrenheit_to_celsius(r.tin_max_f), 4) << ','
        << format_fixed(r.total_cost_cents, 4) << ',' << format_fixed(r.tin_min_f, 4) << ','
        << format_fixed(r.tin_max_f, 4) << ',' << format_fixed(r.controllable_tin_min_f, 4)
        << ',' << format_fixed(r.total_discomfort, 4) << '\n';
  }
}

Policy imitation_policy(const EnvParams &params, const MlpParams &model) {
  return {"imitation", [params, &model](const DayProfile &day, int, const MilpSolution &) {
            return run_closed_loop(imitation_controller(model), params, day);
          }};
}

Policy forecast_policy(const EnvParams &params, std::uint64_t seed,
                       const ForecastNoise &noise, const MilpConfig &config) {
  return {"forecast_milp",
          [params, seed, noise, config](const DayProfile &day, int day_index,
                                        const MilpSolution &) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(day_index)};
            std::uint64_t day_seed = 0;
            std::array<std::uint32_t, 2> words{};
            seq.generate(words.begin(), words.end());
            day_seed = (std::uint64_t{words[0]} << 32) | words[1];
            return run_forecast_milp(params, day, day_seed, noise, config).realised;
          }};
}

Policy replay_policy(const EnvParams &params) {
  return {"milp_replay", [params](const DayProfile &day, int, const MilpSolution &opt) {
            return run_closed_loop(replay_controller(opt.power), params, day);
          }};
}

namespace {

template <class F> double mean_of(const std::vector<DayMetrics> &days, F field) {
  double sum = 0.0;
  for (const auto &d : days)
    sum += field(d);
  return sum / static_cast<double>(days.size());
}

std::optional<double> mean_defined(const std::vector<std::optional<double>> &values) {
  double sum = 0.0;
  int n = 0;
  for (const auto &v : values)
    if (v) {
      sum += *v;
      ++n;
    }
  if (n == 0)
    return std::nullopt;
  return sum / n;
}

void summarise(EvalReport &report) {
  const auto &days = report.days;
  report.mean_mae_power_kw = mean_of(days, [](const DayMetrics &d) { return d.mae_power_kw; });
  report.mean_cost_err_cents =
      mean_of(days, [](const DayMetrics &d) { return d.cost_err_cents; });
  report.mean_tin_sigma_f = mean_of(days, [](const DayMetrics &d) { return d.tin_sigma_f; });
  report.mean_objective = mean_of(days, [](const DayMetrics &d) { return d.objective; });
  report.mean_optimal_objective =
      mean_of(days, [](const DayMetrics &d) { return d.optimal_objective; });

  std::vector<std::optional<double>> mp, cp;
  std::vector<double> pooled;
  for (const auto &d : days) {
    mp.push_back(d.mape_power.percent);
    cp.push_back(d.cost_err_pct.percent);
    report.mape_skipped += d.mape_power.skipped;
    pooled.insert(pooled.end(), d.trajectory.indoor.begin(), d.trajectory.indoor.end());
  }
  report.mean_mape_power_pct = mean_defined(mp);
  report.mean_cost_err_pct = mean_defined(cp);
  report.tin_min_f = *std::min_element(pooled.begin(), pooled.end());
  report.tin_max_f = *std::max_element(pooled.begin(), pooled.end());
  report.tin_mean_f =
      std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
  report.tin_sigma_f = std_dev(pooled);
}

std::string optional_fixed(const std::optional<double> &v, int digits) {
  return v ? format_fixed(*v, digits) : std::string();
}

double f_to_c_delta(double f) { return f * 5.0 / 9.0; }

} // namespace

SeasonEvaluation evaluate_season(const EnvParams &params,
                                 const std::vector<DayProfile> &days,
                                 const std::vector<Policy> &policies,
                                 const MilpConfig &config) {
  if (days.empty())
    throw std::invalid_argument("evaluate_season: no days");
  SeasonEvaluation result;
  for (const auto &day : days) {
    auto sol = solve_day(params, day, config);
    if (sol.status != SolveStatus::Optimal)
      throw std::runtime_error("reference MILP for " + day.day_id + " ended " +
                               to_string(sol.status));
    result.optima.push_back(std::move(sol));
  }

  for (const auto &policy : policies) {
    EvalReport report;
    report.controller = policy.name;
    for (std::size_t i = 0; i < days.size(); ++i) {
      const auto &day = days[i];
      const auto &opt = result.optima[i];
      DayMetrics m;
      m.day_id = day.day_id;
      m.trajectory = policy.run(day, static_cast<int>(i), opt);
      const auto reference = rollout(params, day, opt.power, day.outdoor.front());
      m.mae_power_kw = mae(m.trajectory.power, opt.power);
      m.mape_power = mape(m.trajectory.power, opt.power);
      m.cost_err_cents = std::abs(m.trajectory.cost_cents - reference.cost_cents);
      const double cost = m.trajectory.cost_cents;
      const double ref_cost = reference.cost_cents;
      m.cost_err_pct = mape({&cost, 1}, {&ref_cost, 1});
      m.tin_min_f = *std::min_element(m.trajectory.indoor.begin(), m.trajectory.indoor.end());
      m.tin_max_f = *std::max_element(m.trajectory.indoor.begin(), m.trajectory.indoor.end());
      m.tin_sigma_f = std_dev(m.trajectory.indoor);
      m.objective = m.trajectory.objective;
      m.optimal_objective = opt.objective;
      report.days.push_back(std::move(m));
    }
    summarise(report);
    result.reports.push_back(std::move(report));
  }
  return result;
}

void write_report_csv(std::ostream &out, const std::vector<EvalReport> &reports) {
  out << "day_id,controller,mae_power_kw,mape_power_pct,cost_err_cents,cost_err_pct,"
         "tin_min_c,tin_max_c,tin_sigma,skipped\n";
  for (const auto &r : reports)
    for (const auto &d : r.days)
      out << d.day_id << ',' << r.controller << ',' << format_fixed(d.mae_power_kw, 6) << ','
          << optional_fixed(d.mape_power.percent, 4) << ','
          << format_fixed(d.cost_err_cents, 4) << ','
          << optional_fixed(d.cost_err_pct.percent, 4) << ','
          << format_fixed(fahrenheit_to_celsius(d.tin_min_f), 4) << ','
          << format_fixed(fahrenheit_to_celsius(d.tin_max_f), 4) << ','
          << format_fixed(f_to_c_delta(d.tin_sigma_f), 4) << ',' << d.mape_power.skipped
          << '\n';
}

void write_summary(std::ostream &out, const std::vector<EvalReport> &reports) {
  for (const auto &r : reports) {
    out << "[" << r.controller << "]\n";
    out << "days = " << r.days.size() << '\n';
    out << "mean_mae_power_kw = " << format_fixed(r.mean_mae_power_kw, 6) << '\n';
    out << "mean_mape_power_pct = "
        << (r.mean_mape_power_pct ? format_fixed(*r.mean_mape_power_pct, 4) : "undefined")
        << '\n';
    out << "mape_skipped_samples = " << r.mape_skipped << '\n';
    out << "mean_cost_err_cents = " << format_fixed(r.mean_cost_err_cents, 4) << '\n';
    out << "mean_cost_err_pct = "
        << (r.mean_cost_err_pct ? format_fixed(*r.mean_cost_err_pct, 4) : "undefined") << '\n';
    out << "mean_objective_cents = " << format_fixed(r.mean_objective, 4) << '\n';
    out << "mean_optimal_objective_cents = " << format_fixed(r.mean_optimal_objective, 4)
        << '\n';
    out << "tin_min = " << format_fixed(r.tin_min_f, 4) << " F / "
        << format_fixed(fahrenheit_to_celsius(r.tin_min_f), 4) << " C\n";
    out << "tin_max = " << format_fixed(r.tin_max_f, 4) << " F / "
        << format_fixed(fahrenheit_to_celsius(r.tin_max_f), 4) << " C\n";
    out << "tin_sigma_pooled = " << format_fixed(r.tin_sigma_f, 4) << " F / "
        << format_fixed(f_to_c_delta(r.tin_sigma_f), 4) << " C\n";
    out << "tin_sigma_daily_mean = " << format_fixed(r.mean_tin_sigma_f, 4) << " F / "
        << format_fixed(f_to_c_delta(r.mean_tin_sigma_f), 4) << " C\n\n";
  }
}

void write_plot_csv(std::ostream &out, const std::vector<DayProfile> &days,
                    const SeasonEvaluation &evaluation) {
  out << "day_id,slot,series,power_kw,tin_f,tin_c\n";
  auto emit = [&](const std::string &day_id, const std::string &series,
                  const std::vector<double> &power, const std::vector<double> &indoor) {
    for (std::size_t t = 0; t < power.size(); ++t)
      out << day_id << ',' << t + 1 << ',' << series << ',' << format_fixed(power[t], 6)
          << ',' << format_fixed(indoor[t], 4) << ','
          << format_fixed(fahrenheit_to_celsius(indoor[t]), 4) << '\n';
  };
  for (std::size_t i = 0; i < days.size(); ++i) {
    emit(days[i].day_id, "outdoor", std::vector<double>(days[i].outdoor.size(), 0.0),
         days[i].outdoor);
    emit(days[i].day_id, "milp_optimal", evaluation.optima[i].power,
         evaluation.optima[i].indoor);
    for (const auto &r : evaluation.reports)
      emit(days[i].day_id, r.controller, r.days[i].trajectory.power,
           r.days[i].trajectory.indoor);
  }
}

} // namespace hvac
