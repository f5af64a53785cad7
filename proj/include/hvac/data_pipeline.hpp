#pragma once

#include "hvac/milp.hpp"
#include "hvac/thermal_model.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvac {

/// Malformed input; carries the 1-based line number when one applies.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &source, int line, const std::string &what);
  int line() const { return line_; }

private:
  int line_;
};

struct SeriesPoint {
  std::chrono::sys_seconds time;
  double value;
};
using TimeSeries = std::vector<SeriesPoint>;

/// Parses `YYYY-MM-DD[T ]HH:MM[:SS][Z]`.
std::chrono::sys_seconds parse_timestamp(const std::string &text);
std::string format_date(std::chrono::sys_days day);

/// Reads `timestamp,value` rows. `value_column` selects the value field
/// (1 = second column). A non-numeric first row is treated as a header.
TimeSeries parse_series_csv(std::istream &in, const std::string &source,
                            int value_column = 1);
TimeSeries load_series_csv(const std::filesystem::path &path,
                           int value_column = 1);

struct AssembleReport {
  std::vector<std::string> dropped_days; ///< days with missing hours
  int unpaired_days = 0;                 ///< days cut when lengths differ
};

/// Groups both series into calendar days and pairs them by day index.
/// The temperature calendar names the resulting days.
std::vector<DayProfile> assemble_days(const TimeSeries &temperature,
                                      const TimeSeries &price,
                                      AssembleReport *report = nullptr);

/// Drops June–August days and days that never fall below t_min.
std::vector<DayProfile> filter_heating_season(const std::vector<DayProfile> &days,
                                              const EnvParams &params);

constexpr int kFeatureCount = 4;
using Features = std::array<double, kFeatureCount>;

/// One imitation sample: (outdoor °F, indoor °F, price, slot 1..T) → kW.
struct TrainingExample {
  Features features{};
  double label = 0.0;
  int day = 0; ///< index into Dataset::day_ids
};

struct NormalizationStats {
  Features min{};
  Features max{};
  double label_scale = 1.0;

  bool degenerate(int feature) const { return !(max[feature] > min[feature]); }
};

struct Dataset {
  std::vector<TrainingExample> examples;
  NormalizationStats stats;
  std::vector<std::string> day_ids;
  std::vector<std::string> failures; ///< "day_id: reason" for skipped days

  int skipped_days() const { return static_cast<int>(failures.size()); }
};

NormalizationStats compute_stats(const std::vector<TrainingExample> &examples,
                                 double p_max);

/// Labels each day with its MILP optimum. Days are solved on `threads`
/// workers and merged in input order.
Dataset build_training_set(const EnvParams &params,
                           const std::vector<DayProfile> &days,
                           const MilpConfig &config = {}, int threads = 1);

enum class Direction { Forward, Inverse };

/// Min-max scaling to [0,1]; degenerate features map to 0.
Features normalize_features(const Features &features,
                            const NormalizationStats &stats, Direction direction);
double normalize_label(double label, const NormalizationStats &stats,
                       Direction direction);

void write_dataset_csv(std::ostream &out, const Dataset &dataset);
void write_stats(std::ostream &out, const NormalizationStats &stats);
Dataset read_dataset_csv(std::istream &in, const std::string &source);
NormalizationStats read_stats(std::istream &in, const std::string &source);

/// Deterministic stand-in for historical winter data. Dates start on
/// 2013-01-01 and skip June–August.
std::vector<DayProfile> synth_generate(std::uint64_t seed, int n_days,
                                       int slots_per_day = 24);

/// Calendar day of the `index`-th synthetic day.
std::chrono::sys_days synth_date(int index);

} // namespace hvac
