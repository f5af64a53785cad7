#include "hvac/app.hpp"

#include "hvac/data_pipeline.hpp"
#include "hvac/text_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace hvac {

namespace fs = std::filesystem;

fs::path RunConfig::dataset_file() const {
  return dataset_path.value_or(out_dir / "dataset.csv");
}

fs::path RunConfig::stats_file() const {
  auto p = dataset_file();
  return p.replace_extension(".stats");
}

fs::path RunConfig::model_file() const { return model_path.value_or(out_dir / "model.txt"); }

Settings read_settings(std::istream &in, const std::string &source) {
  Settings settings;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto text = trim(line);
    if (text.empty())
      continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    if (key.empty())
      throw UsageError(source + ":" + std::to_string(lineno) + ": empty key");
    if (!settings.emplace(key, value).second)
      throw UsageError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                       "'");
  }
  return settings;
}

std::pair<std::string, std::string> parse_override(const std::string &text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("override '" + text + "' is not key=value");
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

namespace {

double to_double(const std::string &key, const std::string &value) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v))
    throw UsageError("key '" + key + "': '" + value + "' is not a finite number");
  return *v;
}

template <class Int> Int to_int(const std::string &key, const std::string &value) {
  Int out{};
  const auto *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty())
    throw UsageError("key '" + key + "': '" + value + "' is not an integer");
  return out;
}

bool to_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes")
    return true;
  if (value == "false" || value == "0" || value == "no")
    return false;
  throw UsageError("key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<double> to_doubles(const std::string &key, const std::string &value) {
  std::vector<double> out;
  for (const auto &f : split_fields(value))
    out.push_back(to_double(key, std::string(trim(f))));
  return out;
}

struct KeySpec {
  const char *name;
  const char *fallback;
  const char *help;
  std::function<void(RunConfig &, const std::string &key, const std::string &value,
                     bool celsius)>
      apply;
};

double temperature(const std::string &key, const std::string &value, bool celsius) {
  const double v = to_double(key, value);
  return celsius ? celsius_to_fahrenheit(v) : v;
}

double temperature_delta(const std::string &key, const std::string &value, bool celsius) {
  const double v = to_double(key, value);
  return celsius ? v * 9.0 / 5.0 : v;
}

const std::vector<KeySpec> &key_specs() {
  using C = RunConfig;
  using S = const std::string &;
  static const std::vector<KeySpec> specs = {
      {"temp_unit", "F", "unit of every temperature in config and input CSV (F|C)",
       [](C &, S, S, bool) {}},
      {"epsilon", "0.7", "thermal inertia",
       [](C &c, S k, S v, bool) { c.env.epsilon = to_double(k, v); }},
      {"eta", "2.5", "thermal conversion efficiency",
       [](C &c, S k, S v, bool) { c.env.eta = to_double(k, v); }},
      {"conductivity_A", "0.14", "thermal conductivity, kW/F",
       [](C &c, S k, S v, bool) { c.env.conductivity_A = to_double(k, v); }},
      {"p_max", "15", "heater rating, kW",
       [](C &c, S k, S v, bool) { c.env.p_max = to_double(k, v); }},
      {"t_min", "66.2", "lower comfort bound",
       [](C &c, S k, S v, bool cel) { c.env.t_min = temperature(k, v, cel); }},
      {"t_max", "75.2", "upper comfort bound",
       [](C &c, S k, S v, bool cel) { c.env.t_max = temperature(k, v, cel); }},
      {"alpha", "4", "discomfort weight, cents per F per slot",
       [](C &c, S k, S v, bool) { c.env.alpha = to_double(k, v); }},
      {"slots_per_day", "24", "slots per day",
       [](C &c, S k, S v, bool) { c.env.slots_per_day = to_int<int>(k, v); }},
      {"slot_hours", "1", "slot length, hours",
       [](C &c, S k, S v, bool) { c.env.slot_hours = to_double(k, v); }},
      {"big_m_low", "-1000", "big-M lower temperature",
       [](C &c, S k, S v, bool cel) { c.milp.big_m_low = temperature(k, v, cel); }},
      {"big_m_high", "1000", "big-M upper temperature",
       [](C &c, S k, S v, bool cel) { c.milp.big_m_high = temperature(k, v, cel); }},
      {"hard_comfort", "false", "add the comfort band as hard constraints",
       [](C &c, S k, S v, bool) { c.milp.hard_comfort = to_bool(k, v); }},
      {"learning_rate", "0.001", "Adam step size",
       [](C &c, S k, S v, bool) { c.train.learning_rate = to_double(k, v); }},
      {"batch_size", "32", "mini-batch size",
       [](C &c, S k, S v, bool) { c.train.batch_size = to_int<int>(k, v); }},
      {"epochs", "500", "training epochs",
       [](C &c, S k, S v, bool) { c.train.epochs = to_int<int>(k, v); }},
      {"validation_fraction", "0.1", "fraction of training days held out",
       [](C &c, S k, S v, bool) { c.train.validation_fraction = to_double(k, v); }},
      {"hidden", "100,100", "hidden layer widths",
       [](C &c, S k, S v, bool) {
         c.train.hidden.clear();
         for (const auto &f : split_fields(v))
           c.train.hidden.push_back(to_int<int>(k, std::string(trim(f))));
       }},
      {"seed", "1", "seed for synthetic data, training and forecast noise",
       [](C &c, S k, S v, bool) { c.seed = to_int<std::uint64_t>(k, v); }},
      {"train_seed", "<seed>", "training seed",
       [](C &c, S k, S v, bool) { c.train.seed = to_int<std::uint64_t>(k, v); }},
      {"forecast_seed", "<seed>", "forecast noise seed",
       [](C &c, S k, S v, bool) { c.forecast_seed = to_int<std::uint64_t>(k, v); }},
      {"forecast_mean", "0.5 F", "forecast error mean",
       [](C &c, S k, S v, bool cel) { c.noise.mean = temperature_delta(k, v, cel); }},
      {"forecast_sigma", "6 F", "forecast error standard deviation",
       [](C &c, S k, S v, bool cel) { c.noise.sigma = temperature_delta(k, v, cel); }},
      {"threads", "1", "worker threads for dataset labelling",
       [](C &c, S k, S v, bool) { c.threads = to_int<int>(k, v); }},
      {"temperature_csv", "", "outdoor temperature series (timestamp,value)",
       [](C &c, S, S v, bool) { c.temperature_csv = v; }},
      {"price_csv", "", "price series (timestamp,value), cents/kWh",
       [](C &c, S, S v, bool) { c.price_csv = v; }},
      {"day_outdoor", "", "inline single day: outdoor temperatures",
       [](C &c, S k, S v, bool cel) {
         c.inline_outdoor = to_doubles(k, v);
         if (cel)
           for (double &t : c.inline_outdoor)
             t = celsius_to_fahrenheit(t);
       }},
      {"day_price", "", "inline single day: prices",
       [](C &c, S k, S v, bool) { c.inline_price = to_doubles(k, v); }},
      {"train_days", "60", "training days taken from the season",
       [](C &c, S k, S v, bool) { c.train_days = to_int<int>(k, v); }},
      {"eval_days", "30", "held-out evaluation days taken from the season",
       [](C &c, S k, S v, bool) { c.eval_days = to_int<int>(k, v); }},
      {"holdout", "interleaved", "evaluation days: interleaved or tail",
       [](C &c, S k, S v, bool) {
         if (v == "interleaved")
           c.holdout = RunConfig::Holdout::Interleaved;
         else if (v == "tail")
           c.holdout = RunConfig::Holdout::Tail;
         else
           throw UsageError("key '" + k + "': expected interleaved or tail, got '" + v + "'");
       }},
      {"day_index", "0", "day solved or simulated by solve-day and simulate",
       [](C &c, S k, S v, bool) { c.day_index = to_int<int>(k, v); }},
      {"alphas", "0,1,2,4,8", "alpha values for sweep-alpha",
       [](C &c, S k, S v, bool) { c.alphas = to_doubles(k, v); }},
      {"out_dir", "out", "output directory",
       [](C &c, S, S v, bool) { c.out_dir = v; }},
      {"dataset", "<out_dir>/dataset.csv", "dataset file",
       [](C &c, S, S v, bool) { c.dataset_path = v; }},
      {"model", "<out_dir>/model.txt", "model file",
       [](C &c, S, S v, bool) { c.model_path = v; }},
  };
  return specs;
}

} // namespace

RunConfig resolve_config(const Settings &settings) {
  const auto &specs = key_specs();
  for (const auto &[key, value] : settings) {
    const bool known = std::any_of(specs.begin(), specs.end(),
                                   [&](const KeySpec &s) { return key == s.name; });
    if (!known)
      throw UsageError("unknown configuration key '" + key + "'");
  }

  bool celsius = false;
  if (const auto it = settings.find("temp_unit"); it != settings.end()) {
    if (it->second == "C")
      celsius = true;
    else if (it->second != "F")
      throw UsageError("temp_unit must be F or C, got '" + it->second + "'");
  }

  RunConfig config;
  config.csv_celsius = celsius;
  for (const auto &spec : specs)
    if (const auto it = settings.find(spec.name); it != settings.end())
      spec.apply(config, it->first, it->second, celsius);
  if (!settings.count("train_seed"))
    config.train.seed = config.seed;
  if (!settings.count("forecast_seed"))
    config.forecast_seed = config.seed;

  if (config.inline_outdoor.size() != config.inline_price.size())
    throw UsageError("day_outdoor and day_price must have the same length");
  if (!config.inline_outdoor.empty()) {
    if (config.temperature_csv || config.price_csv)
      throw UsageError("an inline day cannot be combined with CSV inputs");
    if (!settings.count("slots_per_day"))
      config.env.slots_per_day = static_cast<int>(config.inline_outdoor.size());
  }
  if (config.temperature_csv.has_value() != config.price_csv.has_value())
    throw UsageError("temperature_csv and price_csv must be given together");
  for (const auto &p : {config.temperature_csv, config.price_csv})
    if (p && !fs::is_regular_file(*p))
      throw UsageError("input file not found: " + p->string());

  try {
    config.env.validate();
    config.train.validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  if (config.train_days < 1 || config.eval_days < 0)
    throw UsageError("train_days must be >= 1 and eval_days >= 0");
  if (config.threads < 1)
    throw UsageError("threads must be >= 1");
  if (config.day_index < 0)
    throw UsageError("day_index must be >= 0");
  if (!(config.noise.sigma >= 0.0))
    throw UsageError("forecast_sigma must be >= 0");
  if (!(config.milp.big_m_low < config.env.t_min && config.env.t_max < config.milp.big_m_high))
    throw UsageError("big-M temperatures must enclose the comfort band");
  return config;
}

void describe_keys(std::ostream &out) {
  for (const auto &s : key_specs())
    out << "  " << s.name << " (default " << (*s.fallback ? s.fallback : "unset")
        << "): " << s.help << '\n';
}

std::vector<DayProfile> load_days(const RunConfig &config) {
  if (!config.inline_outdoor.empty()) {
    DayProfile d;
    d.day_id = "inline";
    d.outdoor = config.inline_outdoor;
    d.price = config.inline_price;
    d.validate(config.env.slots_per_day);
    return {d};
  }
  if (config.temperature_csv) {
    auto temps = load_series_csv(*config.temperature_csv);
    if (config.csv_celsius)
      for (auto &pt : temps)
        pt.value = celsius_to_fahrenheit(pt.value);
    const auto prices = load_series_csv(*config.price_csv);
    auto days = filter_heating_season(assemble_days(temps, prices), config.env);
    std::erase_if(days, [&](const DayProfile &d) {
      return d.slots() != config.env.slots_per_day;
    });
    if (days.empty())
      throw std::runtime_error("no complete heating-season days in the input series");
    return days;
  }
  return synth_generate(config.seed, config.train_days + config.eval_days,
                        config.env.slots_per_day);
}

DaySplit split_days(const std::vector<DayProfile> &days, const RunConfig &config) {
  const int total = config.train_days + config.eval_days;
  if (total > static_cast<int>(days.size()))
    throw std::runtime_error("need " + std::to_string(total) + " days, only " +
                             std::to_string(days.size()) + " available");
  DaySplit split;
  for (int i = 0; i < total; ++i) {
    bool held_out = false;
    if (config.holdout == RunConfig::Holdout::Tail)
      held_out = i >= config.train_days;
    else
      held_out = (i + 1) * config.eval_days / total > i * config.eval_days / total;
    (held_out ? split.eval : split.train).push_back(days[i]);
  }
  return split;
}

namespace {

const DayProfile &pick_day(const std::vector<DayProfile> &days, int index) {
  if (index >= static_cast<int>(days.size()))
    throw UsageError("day_index " + std::to_string(index) + " out of range (" +
                     std::to_string(days.size()) + " days available)");
  return days[index];
}

void ensure_out_dir(const RunConfig &config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + config.out_dir.string() + ": " + ec.message());
}

MlpParams read_model(const RunConfig &config) {
  const auto path = config.model_file();
  std::ifstream in(path);
  if (!in)
    throw UsageError("model not found: " + path.string() + " (run train first)");
  return load_model(in, path.string());
}

void write_schedule(std::ostream &out, const DayProfile &day, const Trajectory &traj) {
  out << "slot,t_out_f,price,power_kw,tin_f,tin_c\n";
  for (int t = 0; t < day.slots(); ++t)
    out << t + 1 << ',' << format_double(day.outdoor[t]) << ',' << format_double(day.price[t])
        << ',' << format_double(traj.power[t]) << ',' << format_double(traj.indoor[t]) << ','
        << format_double(fahrenheit_to_celsius(traj.indoor[t])) << '\n';
}

} // namespace

void cmd_solve_day(const RunConfig &config, std::ostream &log) {
  const auto days = load_days(config);
  const auto &day = pick_day(days, config.day_index);
  const auto sol = solve_day(config.env, day, config.milp);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("MILP for " + day.day_id + " ended " + to_string(sol.status));
  const auto traj = rollout(config.env, day, sol.power, day.outdoor.front());

  ensure_out_dir(config);
  write_file_atomically(config.out_dir / "schedule.csv",
                        [&](std::ostream &out) { write_schedule(out, day, traj); });
  write_file_atomically(config.out_dir / "solve_summary.txt", [&](std::ostream &out) {
    out << "day_id = " << day.day_id << '\n'
        << "objective_cents = " << format_double(sol.objective) << '\n'
        << "energy_cost_cents = " << format_double(traj.cost_cents) << '\n'
        << "discomfort_degf_slots = " << format_double(traj.discomfort_degF_hours) << '\n'
        << "discomfort_cents = "
        << format_double(config.env.alpha * traj.discomfort_degF_hours) << '\n'
        << "nodes = " << sol.nodes << '\n';
  });
  log << day.day_id << ": objective " << format_fixed(sol.objective, 4) << " cents = cost "
      << format_fixed(traj.cost_cents, 4) << " + discomfort "
      << format_fixed(config.env.alpha * traj.discomfort_degF_hours, 4) << '\n';
}

void cmd_build_dataset(const RunConfig &config, std::ostream &log) {
  const auto days = split_days(load_days(config), config).train;
  const auto ds = build_training_set(config.env, days, config.milp, config.threads);
  for (const auto &f : ds.failures)
    log << "skipped " << f << '\n';
  if (ds.examples.empty())
    throw std::runtime_error("every training day failed to solve");

  ensure_out_dir(config);
  const auto data_path = config.dataset_file();
  const auto stats_path = config.stats_file();
  write_file_atomically(data_path, [&](std::ostream &out) { write_dataset_csv(out, ds); });
  try {
    write_file_atomically(stats_path, [&](std::ostream &out) { write_stats(out, ds.stats); });
  } catch (...) {
    std::error_code ec;
    fs::remove(data_path, ec);
    throw;
  }
  log << "days " << ds.day_ids.size() << ", skipped " << ds.skipped_days() << ", rows "
      << ds.examples.size() << '\n';
}

void cmd_train(const RunConfig &config, std::ostream &log) {
  const auto data_path = config.dataset_file();
  const auto stats_path = config.stats_file();
  std::ifstream data_in(data_path), stats_in(stats_path);
  if (!data_in || !stats_in)
    throw UsageError("dataset not found: " + data_path.string() + " (run build-dataset first)");
  auto ds = read_dataset_csv(data_in, data_path.string());
  if (ds.examples.empty())
    throw UsageError("dataset " + data_path.string() + " is empty");
  ds.stats = read_stats(stats_in, stats_path.string());

  const auto result = train(ds, config.train, config.env.p_max);
  ensure_out_dir(config);
  write_file_atomically(config.model_file(),
                        [&](std::ostream &out) { save_model(out, result.params); });
  write_file_atomically(config.out_dir / "loss_history.csv", [&](std::ostream &out) {
    out << "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
      out << e << ',' << format_double(result.train_loss[e]) << ',';
      if (e < result.val_loss.size())
        out << format_double(result.val_loss[e]);
      out << '\n';
    }
  });
  log << "best epoch " << result.best_epoch << ", loss " << format_double(result.best_loss)
      << " (" << (result.val_loss.empty() ? "training" : "validation") << ")\n";
}

void cmd_simulate(const RunConfig &config, std::ostream &log) {
  const auto model = read_model(config);
  const auto days = load_days(config);
  const auto &day = pick_day(days, config.day_index);
  const auto traj = run_closed_loop(imitation_controller(model), config.env, day);
  const auto opt = solve_day(config.env, day, config.milp);
  if (opt.status != SolveStatus::Optimal)
    throw std::runtime_error("MILP for " + day.day_id + " ended " + to_string(opt.status));

  ensure_out_dir(config);
  write_file_atomically(config.out_dir / "simulation.csv", [&](std::ostream &out) {
    out << "slot,t_out_f,price,power_kw,tin_f,optimal_power_kw,optimal_tin_f\n";
    for (int t = 0; t < day.slots(); ++t)
      out << t + 1 << ',' << format_double(day.outdoor[t]) << ','
          << format_double(day.price[t]) << ',' << format_double(traj.power[t]) << ','
          << format_double(traj.indoor[t]) << ',' << format_double(opt.power[t]) << ','
          << format_double(opt.indoor[t]) << '\n';
  });
  log << day.day_id << ": controller objective " << format_fixed(traj.objective, 4)
      << " cents, optimum " << format_fixed(opt.objective, 4) << " cents\n";
}

void cmd_evaluate(const RunConfig &config, std::ostream &log) {
  if (config.eval_days < 1)
    throw UsageError("evaluate needs eval_days >= 1");
  const auto model = read_model(config);
  const auto days = split_days(load_days(config), config).eval;
  const auto eval = evaluate_season(
      config.env, days,
      {imitation_policy(config.env, model),
       forecast_policy(config.env, config.forecast_seed, config.noise, config.milp),
       replay_policy(config.env)},
      config.milp);

  ensure_out_dir(config);
  write_file_atomically(config.out_dir / "eval_report.csv",
                        [&](std::ostream &out) { write_report_csv(out, eval.reports); });
  write_file_atomically(config.out_dir / "eval_summary.txt",
                        [&](std::ostream &out) { write_summary(out, eval.reports); });
  write_file_atomically(config.out_dir / "eval_plot.csv",
                        [&](std::ostream &out) { write_plot_csv(out, days, eval); });
  for (const auto &r : eval.reports)
    log << r.controller << ": MAE " << format_fixed(r.mean_mae_power_kw, 4)
        << " kW, cost error " << format_fixed(r.mean_cost_err_cents, 4)
        << " cents, indoor sigma " << format_fixed(r.tin_sigma_f, 4) << " F\n";
}

void cmd_sweep_alpha(const RunConfig &config, std::ostream &log) {
  const auto days = load_days(config);
  const auto rows = alpha_sweep(config.env, days, config.alphas, config.milp);
  ensure_out_dir(config);
  write_file_atomically(config.out_dir / "alpha_sweep.csv",
                        [&](std::ostream &out) { write_alpha_sweep_csv(out, rows); });
  for (const auto &r : rows)
    log << "alpha " << format_double(r.alpha) << ": indoor "
        << format_fixed(r.tin_min_f, 2) << ".." << format_fixed(r.tin_max_f, 2)
        << " F, cost " << format_fixed(r.total_cost_cents, 2) << " cents\n";
}

void cmd_gen_synth(const RunConfig &config, std::ostream &log) {
  const auto days = synth_generate(config.seed, config.train_days + config.eval_days,
                                   config.env.slots_per_day);
  ensure_out_dir(config);
  const int minutes_per_slot = 24 * 60 / config.env.slots_per_day;
  auto write_series = [&](const fs::path &path, auto field) {
    write_file_atomically(path, [&](std::ostream &out) {
      out << "timestamp,value\n";
      for (const auto &d : days)
        for (int t = 0; t < d.slots(); ++t) {
          const int m = t * minutes_per_slot;
          char stamp[32];
          std::snprintf(stamp, sizeof stamp, "%sT%02d:%02d:00", d.day_id.c_str(), m / 60,
                        m % 60);
          const double v = field(d, t);
          out << stamp << ',' << format_double(v) << '\n';
        }
    });
  };
  write_series(config.out_dir / "synth_temperature.csv", [&](const DayProfile &d, int t) {
    return config.csv_celsius ? fahrenheit_to_celsius(d.outdoor[t]) : d.outdoor[t];
  });
  write_series(config.out_dir / "synth_price.csv",
               [](const DayProfile &d, int t) { return d.price[t]; });
  log << "wrote " << days.size() << " days (" << days.front().day_id << " .. "
      << days.back().day_id << ")\n";
}

const std::vector<std::string> &command_names() {
  static const std::vector<std::string> names{"solve-day", "build-dataset", "train",
                                              "simulate",  "evaluate",      "sweep-alpha",
                                              "gen-synth"};
  return names;
}

int run_command(const std::string &name, const RunConfig &config, std::ostream &log,
                std::ostream &err) {
  static const std::map<std::string, void (*)(const RunConfig &, std::ostream &)> table{
      {"solve-day", cmd_solve_day}, {"build-dataset", cmd_build_dataset},
      {"train", cmd_train},         {"simulate", cmd_simulate},
      {"evaluate", cmd_evaluate},   {"sweep-alpha", cmd_sweep_alpha},
      {"gen-synth", cmd_gen_synth}};
  const auto it = table.find(name);
  if (it == table.end()) {
    err << "unknown command '" << name << "'\n";
    return 2;
  }
  try {
    it->second(config, log);
    return 0;
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace hvac
