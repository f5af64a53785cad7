#pragma once

#include "hvac/evaluation.hpp"
#include "hvac/milp.hpp"
#include "hvac/mlp.hpp"
#include "hvac/thermal_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvac {

/// Bad configuration, bad arguments or unusable inputs; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  EnvParams env;
  MilpConfig milp;
  TrainConfig train;
  ForecastNoise noise;
  std::uint64_t seed = 1;
  std::uint64_t forecast_seed = 1;
  int threads = 1;
  bool csv_celsius = false; ///< temperature CSV values are °C

  // Day source. With both CSV paths set the days come from disk, with an
  // inline day they come from day_outdoor/day_price, otherwise synthetic.
  std::optional<std::filesystem::path> temperature_csv;
  std::optional<std::filesystem::path> price_csv;
  std::vector<double> inline_outdoor; ///< °F
  std::vector<double> inline_price;
  int train_days = 60;
  int eval_days = 30;
  /// Evaluation days spread evenly through the season, or the trailing block.
  enum class Holdout { Interleaved, Tail } holdout = Holdout::Interleaved;
  int day_index = 0;

  std::vector<double> alphas{0.0, 1.0, 2.0, 4.0, 8.0};

  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> dataset_path;
  std::optional<std::filesystem::path> model_path;

  std::filesystem::path dataset_file() const;
  std::filesystem::path stats_file() const;
  std::filesystem::path model_file() const;
};

using Settings = std::map<std::string, std::string>;

/// Reads `key = value` lines; `#` starts a comment. Duplicate keys are errors.
Settings read_settings(std::istream &in, const std::string &source);

/// Parses a `key=value` command-line override.
std::pair<std::string, std::string> parse_override(const std::string &text);

/// Turns raw settings into a validated configuration. Every key must be
/// known. Temperatures are read in `temp_unit` (F or C) and stored in °F.
RunConfig resolve_config(const Settings &settings);

/// Human-readable list of accepted keys with their defaults.
void describe_keys(std::ostream &out);

/// The configured season: loaded, filtered and in calendar order.
std::vector<DayProfile> load_days(const RunConfig &config);

struct DaySplit {
  std::vector<DayProfile> train;
  std::vector<DayProfile> eval;
};

/// Splits the first train_days + eval_days days of the season.
DaySplit split_days(const std::vector<DayProfile> &days, const RunConfig &config);

void cmd_solve_day(const RunConfig &config, std::ostream &log);
void cmd_build_dataset(const RunConfig &config, std::ostream &log);
void cmd_train(const RunConfig &config, std::ostream &log);
void cmd_simulate(const RunConfig &config, std::ostream &log);
void cmd_evaluate(const RunConfig &config, std::ostream &log);
void cmd_sweep_alpha(const RunConfig &config, std::ostream &log);
void cmd_gen_synth(const RunConfig &config, std::ostream &log);

const std::vector<std::string> &command_names();

/// Runs one subcommand and converts failures into exit codes:
/// 0 success, 1 runtime failure, 2 usage or configuration error.
int run_command(const std::string &name, const RunConfig &config, std::ostream &log,
                std::ostream &err);

} // namespace hvac
