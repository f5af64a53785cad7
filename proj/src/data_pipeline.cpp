#include "hvac/data_pipeline.hpp"

#include "hvac/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

namespace hvac {

namespace chr = std::chrono;

ParseError::ParseError(const std::string &source, int line,
                       const std::string &what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

chr::sys_seconds parse_timestamp(const std::string &text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const std::string t(trim(text));
  int n = std::sscanf(t.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h,
                      &mi, &consumed);
  if (n < 6 || (sep != 'T' && sep != ' '))
    throw std::invalid_argument("bad timestamp '" + t + "'");
  std::string rest = t.substr(consumed);
  if (!rest.empty() && rest[0] == ':') {
    int extra = 0;
    if (std::sscanf(rest.c_str(), ":%2d%n", &s, &extra) != 1)
      throw std::invalid_argument("bad timestamp '" + t + "'");
    rest = rest.substr(extra);
  }
  if (!(rest.empty() || rest == "Z"))
    throw std::invalid_argument("bad timestamp '" + t + "'");
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59)
    throw std::invalid_argument("bad timestamp '" + t + "'");
  return chr::sys_days{ymd} + chr::hours{h} + chr::minutes{mi} + chr::seconds{s};
}

std::string format_date(chr::sys_days day) {
  const chr::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

TimeSeries parse_series_csv(std::istream &in, const std::string &source,
                            int value_column) {
  if (value_column < 1)
    throw std::invalid_argument("value column must be at least 1");
  TimeSeries series;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#')
      continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) <= value_column)
      throw ParseError(source, lineno, "expected timestamp and value");
    const auto value = parse_double(fields[value_column]);
    std::optional<chr::sys_seconds> when;
    try {
      when = parse_timestamp(fields[0]);
    } catch (const std::invalid_argument &) {
    }
    if (series.empty() && lineno == 1 && !when && !value)
      continue; // header
    if (!when)
      throw ParseError(source, lineno, "malformed timestamp");
    if (!value)
      throw ParseError(source, lineno, "missing or non-numeric value");
    if (!series.empty() && *when <= series.back().time)
      throw ParseError(source, lineno, "timestamps not increasing");
    series.push_back({*when, *value});
  }
  return series;
}

TimeSeries load_series_csv(const std::filesystem::path &path, int value_column) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open file");
  return parse_series_csv(in, path.string(), value_column);
}

namespace {

struct CalendarDay {
  chr::sys_days date;
  std::array<std::optional<double>, 24> hours;
};

std::vector<CalendarDay> group_by_day(const TimeSeries &series) {
  std::vector<CalendarDay> days;
  for (const auto &pt : series) {
    const auto date = chr::floor<chr::days>(pt.time);
    const auto since = pt.time - date;
    if (since % chr::hours{1} != chr::seconds{0})
      throw std::invalid_argument("series is not hourly at " + format_date(date));
    if (days.empty() || days.back().date != date)
      days.push_back({date, {}});
    const auto hour = chr::duration_cast<chr::hours>(since).count();
    days.back().hours[hour] = pt.value;
  }
  return days;
}

bool complete(const CalendarDay &day) {
  return std::all_of(day.hours.begin(), day.hours.end(),
                     [](const auto &v) { return v.has_value(); });
}

} // namespace

std::vector<DayProfile> assemble_days(const TimeSeries &temperature,
                                      const TimeSeries &price,
                                      AssembleReport *report) {
  const auto temp_days = group_by_day(temperature);
  const auto price_days = group_by_day(price);
  const std::size_t paired = std::min(temp_days.size(), price_days.size());
  if (paired == 0)
    throw std::invalid_argument("temperature and price series do not overlap");

  AssembleReport local;
  local.unpaired_days = static_cast<int>(std::max(temp_days.size(), price_days.size()) - paired);
  std::vector<DayProfile> out;
  for (std::size_t i = 0; i < paired; ++i) {
    const auto &td = temp_days[i];
    const auto &pd = price_days[i];
    const std::string id = format_date(td.date);
    if (!complete(td) || !complete(pd)) {
      local.dropped_days.push_back(id);
      continue;
    }
    DayProfile day;
    day.day_id = id;
    day.month = static_cast<int>(static_cast<unsigned>(chr::year_month_day{td.date}.month()));
    for (int h = 0; h < 24; ++h) {
      day.outdoor.push_back(*td.hours[h]);
      day.price.push_back(*pd.hours[h]);
    }
    out.push_back(std::move(day));
  }
  if (out.empty())
    throw std::invalid_argument("no complete days in the overlap");
  if (report)
    *report = std::move(local);
  return out;
}

std::vector<DayProfile> filter_heating_season(const std::vector<DayProfile> &days,
                                              const EnvParams &params) {
  std::vector<DayProfile> kept;
  for (const auto &day : days) {
    if (day.month >= 6 && day.month <= 8)
      continue;
    if (day.outdoor.empty() ||
        *std::min_element(day.outdoor.begin(), day.outdoor.end()) > params.t_min)
      continue;
    kept.push_back(day);
  }
  return kept;
}

NormalizationStats compute_stats(const std::vector<TrainingExample> &examples,
                                 double p_max) {
  NormalizationStats stats;
  stats.label_scale = p_max;
  if (examples.empty())
    return stats;
  stats.min = stats.max = examples.front().features;
  for (const auto &ex : examples) {
    for (int k = 0; k < kFeatureCount; ++k) {
      stats.min[k] = std::min(stats.min[k], ex.features[k]);
      stats.max[k] = std::max(stats.max[k], ex.features[k]);
    }
  }
  return stats;
}

Dataset build_training_set(const EnvParams &params,
                           const std::vector<DayProfile> &days,
                           const MilpConfig &config, int threads) {
  params.validate();
  struct Outcome {
    std::optional<MilpSolution> solution;
    std::string error;
  };
  std::vector<Outcome> outcomes(days.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < days.size(); i = next++) {
      try {
        days[i].validate(params.slots_per_day);
        auto sol = solve_day(params, days[i], config);
        if (sol.status == SolveStatus::Optimal)
          outcomes[i].solution = std::move(sol);
        else
          outcomes[i].error = to_string(sol.status);
      } catch (const std::exception &e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n_threads; ++k)
      pool.emplace_back(worker);
  }

  Dataset ds;
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (!outcomes[i].solution) {
      ds.failures.push_back(days[i].day_id + ": " + outcomes[i].error);
      continue;
    }
    const auto &sol = *outcomes[i].solution;
    const int day_index = static_cast<int>(ds.day_ids.size());
    ds.day_ids.push_back(days[i].day_id);
    for (int t = 0; t < days[i].slots(); ++t) {
      TrainingExample ex;
      ex.features = {days[i].outdoor[t], sol.indoor[t], days[i].price[t],
                     static_cast<double>(t + 1)};
      ex.label = sol.power[t];
      ex.day = day_index;
      ds.examples.push_back(ex);
    }
  }
  ds.stats = compute_stats(ds.examples, params.p_max);
  return ds;
}

Features normalize_features(const Features &features,
                            const NormalizationStats &stats, Direction direction) {
  Features out{};
  for (int k = 0; k < kFeatureCount; ++k) {
    if (stats.degenerate(k)) {
      out[k] = direction == Direction::Forward ? 0.0 : stats.min[k];
      continue;
    }
    const double span = stats.max[k] - stats.min[k];
    out[k] = direction == Direction::Forward ? (features[k] - stats.min[k]) / span
                                             : features[k] * span + stats.min[k];
  }
  return out;
}

double normalize_label(double label, const NormalizationStats &stats,
                       Direction direction) {
  return direction == Direction::Forward ? label / stats.label_scale
                                         : label * stats.label_scale;
}

void write_dataset_csv(std::ostream &out, const Dataset &dataset) {
  out << "day_id,slot,t_out_f,t_in_f,price,label_kw\n";
  for (const auto &ex : dataset.examples) {
    out << dataset.day_ids[ex.day] << ',' << static_cast<int>(ex.features[3]) << ','
        << format_double(ex.features[0]) << ',' << format_double(ex.features[1])
        << ',' << format_double(ex.features[2]) << ',' << format_double(ex.label)
        << '\n';
  }
}

void write_stats(std::ostream &out, const NormalizationStats &stats) {
  out << "# min-max normalisation, features: t_out_f,t_in_f,price,slot\n";
  out << "feature_min=";
  for (int k = 0; k < kFeatureCount; ++k)
    out << (k ? "," : "") << format_double(stats.min[k]);
  out << "\nfeature_max=";
  for (int k = 0; k < kFeatureCount; ++k)
    out << (k ? "," : "") << format_double(stats.max[k]);
  out << "\nlabel_scale=" << format_double(stats.label_scale) << '\n';
}

Dataset read_dataset_csv(std::istream &in, const std::string &source) {
  Dataset ds;
  std::map<std::string, int> index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    if (lineno == 1 && line.rfind("day_id,", 0) == 0)
      continue;
    const auto f = split_fields(line);
    if (f.size() != 6)
      throw ParseError(source, lineno, "expected 6 columns");
    TrainingExample ex;
    const auto slot = parse_double(f[1]);
    const auto tout = parse_double(f[2]);
    const auto tin = parse_double(f[3]);
    const auto price = parse_double(f[4]);
    const auto label = parse_double(f[5]);
    if (!slot || !tout || !tin || !price || !label)
      throw ParseError(source, lineno, "non-numeric field");
    auto [it, inserted] = index.emplace(f[0], static_cast<int>(ds.day_ids.size()));
    if (inserted)
      ds.day_ids.push_back(f[0]);
    ex.features = {*tout, *tin, *price, *slot};
    ex.label = *label;
    ex.day = it->second;
    ds.examples.push_back(ex);
  }
  return ds;
}

NormalizationStats read_stats(std::istream &in, const std::string &source) {
  NormalizationStats stats;
  bool have_min = false, have_max = false, have_scale = false;
  std::string line;
  int lineno = 0;
  const auto parse_vec = [&](const std::string &text, Features &into) {
    const auto f = split_fields(text);
    if (f.size() != kFeatureCount)
      throw ParseError(source, lineno, "expected 4 values");
    for (int k = 0; k < kFeatureCount; ++k) {
      const auto v = parse_double(f[k]);
      if (!v)
        throw ParseError(source, lineno, "non-numeric value");
      into[k] = *v;
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(source, lineno, "expected key=value");
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    if (key == "feature_min") {
      parse_vec(value, stats.min);
      have_min = true;
    } else if (key == "feature_max") {
      parse_vec(value, stats.max);
      have_max = true;
    } else if (key == "label_scale") {
      const auto v = parse_double(value);
      if (!v || !(*v > 0.0))
        throw ParseError(source, lineno, "label_scale must be positive");
      stats.label_scale = *v;
      have_scale = true;
    } else {
      throw ParseError(source, lineno, "unknown key '" + key + "'");
    }
  }
  if (!have_min || !have_max || !have_scale)
    throw ParseError(source, 0, "incomplete normalisation stats");
  return stats;
}

namespace {

chr::sys_days next_non_summer_day(chr::sys_days day) {
  do {
    day += chr::days{1};
  } while (static_cast<unsigned>(chr::year_month_day{day}.month()) >= 6 &&
           static_cast<unsigned>(chr::year_month_day{day}.month()) <= 8);
  return day;
}

} // namespace

chr::sys_days synth_date(int index) {
  chr::sys_days day = chr::sys_days{chr::year{2013} / chr::January / 1};
  for (int i = 0; i < index; ++i)
    day = next_non_summer_day(day);
  return day;
}

std::vector<DayProfile> synth_generate(std::uint64_t seed, int n_days,
                                       int slots_per_day) {
  if (n_days < 1)
    throw std::invalid_argument("n_days must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> noise(0.0, 1.0);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double phase = uniform(0.0, two_pi);
  // The tariff shape is fixed for the season; only its level moves day to day.
  const double morning = uniform(1.5, 3.0);
  const double evening = uniform(1.5, 3.0);
  const double hours_per_slot = 24.0 / slots_per_day;

  std::vector<DayProfile> days;
  chr::sys_days date = synth_date(0);
  for (int d = 0; d < n_days; ++d) {
    if (d > 0)
      date = next_non_summer_day(date);
    DayProfile day;
    day.day_id = format_date(date);
    day.month = static_cast<int>(static_cast<unsigned>(chr::year_month_day{date}.month()));

    const double seasonal = 32.5 + 17.5 * std::cos(two_pi * d / 90.0 + phase);
    const double mean = std::clamp(seasonal + uniform(-5.0, 5.0), 10.0, 55.0);
    const double amplitude = uniform(3.0, 12.0);
    const double base = uniform(3.0, 12.0);
    for (int t = 0; t < slots_per_day; ++t) {
      const double hour = t * hours_per_slot;
      // Coldest around 03:00, warmest around 15:00.
      const double diurnal = amplitude * std::sin(two_pi * (hour - 9.0) / 24.0);
      day.outdoor.push_back(mean + diurnal + 2.0 * noise(rng));
      double multiplier = 1.0;
      if (hour >= 7.0 && hour < 10.0)
        multiplier = morning;
      else if (hour >= 17.0 && hour < 21.0)
        multiplier = evening;
      const double p = base * multiplier + 0.05 * base * noise(rng);
      day.price.push_back(std::max(p, 0.1));
    }
    days.push_back(std::move(day));
  }
  return days;
}

} // namespace hvac
