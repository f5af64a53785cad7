#include "doctest.h"

#include "hvac/data_pipeline.hpp"
#include "hvac/text_io.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace hvac;

namespace {

std::string hourly_csv(const std::string &date, int hours, double value,
                       int skip_hour = -1) {
  std::string out;
  for (int h = 0; h < hours; ++h) {
    if (h == skip_hour)
      continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sT%02d:00:00,%g\n", date.c_str(), h, value + h);
    out += buf;
  }
  return out;
}

TimeSeries parse(const std::string &text) {
  std::istringstream in(text);
  return parse_series_csv(in, "mem");
}

} // namespace

TEST_CASE("series CSV parsing") {
  const auto two = parse("timestamp,value\n2016-01-01T00:00,1.5\n2016-01-01 01:00:00Z,2\n");
  REQUIRE(two.size() == 2);
  CHECK(two[0].value == 1.5);
  CHECK(two[1].value == 2.0);
  CHECK(two[1].time - two[0].time == std::chrono::hours{1});

  try {
    parse("2016-01-01T00:00,1\n2016-01-01T01:00,\n");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("2016-01-01T01:00,1\n2016-01-01T00:00,2\n"), ParseError);
  CHECK_THROWS_AS(parse("2016-13-01T01:00,1\n"), ParseError);
  CHECK_THROWS_AS(parse("2016-01-01T01:00,nan\n"), ParseError);
  CHECK_THROWS_AS(load_series_csv("/nonexistent/file.csv"), ParseError);

  std::istringstream wide("2016-01-01T00:00,9,3.25\n");
  CHECK(parse_series_csv(wide, "mem", 2).front().value == 3.25);
}

TEST_CASE("three hourly days group into three profiles") {
  const auto temp = parse(hourly_csv("2016-01-01", 24, 10) +
                          hourly_csv("2016-01-02", 24, 20) +
                          hourly_csv("2016-01-03", 24, 30));
  CHECK(temp.size() == 72);
  const auto price = parse(hourly_csv("2020-01-01", 24, 5) +
                           hourly_csv("2020-01-02", 24, 6) +
                           hourly_csv("2020-01-03", 24, 7));
  AssembleReport report;
  const auto days = assemble_days(temp, price, &report);
  REQUIRE(days.size() == 3);
  CHECK(days[0].day_id == "2016-01-01");
  CHECK(days[0].month == 1);
  CHECK(days[1].outdoor[3] == 23.0);
  CHECK(days[2].price[23] == 30.0);
  CHECK(report.dropped_days.empty());
  CHECK(report.unpaired_days == 0);
}

TEST_CASE("incomplete days are dropped and reported") {
  const auto temp = parse(hourly_csv("2016-02-01", 24, 10) +
                          hourly_csv("2016-02-02", 24, 10, 5));
  const auto price = parse(hourly_csv("2020-02-01", 24, 5) +
                           hourly_csv("2020-02-02", 24, 5));
  AssembleReport report;
  const auto days = assemble_days(temp, price, &report);
  CHECK(days.size() == 1);
  REQUIRE(report.dropped_days.size() == 1);
  CHECK(report.dropped_days[0] == "2016-02-02");
}

TEST_CASE("mismatched lengths truncate to the shorter series") {
  const auto temp = parse(hourly_csv("2016-02-01", 24, 10) +
                          hourly_csv("2016-02-02", 24, 10) +
                          hourly_csv("2016-02-03", 24, 10));
  const auto price = parse(hourly_csv("2020-02-01", 24, 5));
  AssembleReport report;
  const auto days = assemble_days(temp, price, &report);
  CHECK(days.size() == 1);
  CHECK(report.unpaired_days == 2);
  CHECK_THROWS_AS(assemble_days(temp, TimeSeries{}), std::invalid_argument);
}

TEST_CASE("heating-season filter") {
  const EnvParams p;
  DayProfile july, january, warm_october;
  july.month = 7;
  july.outdoor.assign(24, 40.0);
  january.month = 1;
  january.outdoor.assign(24, 30.0);
  january.outdoor[4] = 20.0;
  warm_october.month = 10;
  warm_october.outdoor.assign(24, 75.0);
  warm_october.outdoor[5] = 70.0;
  const auto kept = filter_heating_season({july, january, warm_october}, p);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].month == 1);
}

TEST_CASE("synthetic generator") {
  const auto a = synth_generate(7, 90);
  const auto b = synth_generate(7, 90);
  REQUIRE(a.size() == 90);
  for (std::size_t d = 0; d < a.size(); ++d) {
    CHECK(a[d].outdoor == b[d].outdoor);
    CHECK(a[d].price == b[d].price);
    CHECK(a[d].outdoor.size() == 24);
    for (double c : a[d].price)
      CHECK(c >= 0.1);
    CHECK((a[d].month < 6 || a[d].month > 8));
  }
  CHECK(a.front().day_id == "2013-01-01");
  CHECK(a[89].day_id == "2013-03-31");
  CHECK(synth_generate(8, 1)[0].outdoor != a[0].outdoor);
  CHECK(format_date(synth_date(151)) == "2013-09-01");
  // Winter-like: most days need heating.
  CHECK(filter_heating_season(a, EnvParams{}).size() == 90);
}

TEST_CASE("training set from the two-slot toy day") {
  EnvParams p;
  p.slots_per_day = 2;
  DayProfile d;
  d.day_id = "toy";
  d.outdoor = {50.0, 50.0};
  d.price = {10.0, 10.0};
  const auto ds = build_training_set(p, {d});
  REQUIRE(ds.examples.size() == 2);
  CHECK(ds.examples[0].label == doctest::Approx(3.024));
  CHECK(ds.examples[1].label == doctest::Approx(0.0));
  CHECK(ds.examples[1].features[1] == doctest::Approx(66.2));
  CHECK(ds.examples[1].features[3] == 2.0);
}

TEST_CASE("training set on synthetic days") {
  const EnvParams p;
  const auto days = synth_generate(3, 10);
  const auto ds = build_training_set(p, days);
  CHECK(ds.examples.size() == 240);
  CHECK(ds.skipped_days() == 0);
  for (const auto &ex : ds.examples) {
    CHECK(ex.label >= 0.0);
    CHECK(ex.label <= 15.0);
    CHECK(ex.features[3] >= 1.0);
    CHECK(ex.features[3] <= 24.0);
  }

  // Labels replayed over their source day reproduce the MILP objective and
  // the indoor feature follows the dynamics.
  for (std::size_t d = 0; d < days.size(); ++d) {
    std::vector<double> power;
    for (int t = 0; t < 24; ++t)
      power.push_back(ds.examples[d * 24 + t].label);
    const auto traj = rollout(p, days[d], power, days[d].outdoor[0]);
    const auto sol = solve_day(p, days[d]);
    CHECK(traj.objective == doctest::Approx(sol.objective).epsilon(1e-6));
    for (int t = 0; t + 1 < 24; ++t) {
      const auto &ex = ds.examples[d * 24 + t];
      CHECK(ds.examples[d * 24 + t + 1].features[1] ==
            doctest::Approx(step_indoor_temperature(p, ex.features[1],
                                                    ex.features[0], ex.label))
                .epsilon(1e-9));
    }
  }

  // Parallel labelling merges in day order.
  const auto threaded = build_training_set(p, days, {}, 3);
  std::ostringstream one, many;
  write_dataset_csv(one, ds);
  write_dataset_csv(many, threaded);
  CHECK(one.str() == many.str());
}

TEST_CASE("failed days are skipped and counted") {
  const EnvParams p;
  auto days = synth_generate(3, 3);
  days[1].price.pop_back();
  const auto ds = build_training_set(p, days);
  CHECK(ds.examples.size() == 48);
  REQUIRE(ds.skipped_days() == 1);
  CHECK(ds.failures[0].rfind(days[1].day_id, 0) == 0);
}

TEST_CASE("normalisation") {
  NormalizationStats stats;
  stats.min = {0.0, 40.0, 1.0, 1.0};
  stats.max = {50.0, 80.0, 1.0, 24.0};
  stats.label_scale = 15.0;
  const Features lo{0.0, 40.0, 1.0, 1.0}, hi{50.0, 80.0, 1.0, 24.0};
  const auto nlo = normalize_features(lo, stats, Direction::Forward);
  const auto nhi = normalize_features(hi, stats, Direction::Forward);
  CHECK(nlo[0] == 0.0);
  CHECK(nhi[0] == 1.0);
  CHECK(nhi[3] == 1.0);
  CHECK(stats.degenerate(2));
  CHECK(nhi[2] == 0.0);
  CHECK(normalize_label(15.0, stats, Direction::Forward) == 1.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 90.0);
  for (int i = 0; i < 10000; ++i) {
    Features f{u(rng), u(rng), 1.0, u(rng)};
    const auto back = normalize_features(normalize_features(f, stats, Direction::Forward),
                                         stats, Direction::Inverse);
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(back[k] - f[k]) <= 1e-12 * (1.0 + std::abs(f[k])));
    const double label = std::abs(u(rng)) / 6.0;
    CHECK(std::abs(normalize_label(normalize_label(label, stats, Direction::Forward),
                                   stats, Direction::Inverse) - label) <= 1e-12);
  }
}

TEST_CASE("dataset and stats files round-trip") {
  const EnvParams p;
  const auto ds = build_training_set(p, synth_generate(5, 2));
  std::ostringstream csv, stats;
  write_dataset_csv(csv, ds);
  write_stats(stats, ds.stats);
  CHECK(csv.str().rfind("day_id,slot,t_out_f,t_in_f,price,label_kw\n", 0) == 0);

  std::istringstream csv_in(csv.str()), stats_in(stats.str());
  const auto back = read_dataset_csv(csv_in, "mem");
  const auto back_stats = read_stats(stats_in, "mem");
  REQUIRE(back.examples.size() == ds.examples.size());
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    CHECK(back.examples[i].features == ds.examples[i].features);
    CHECK(back.examples[i].label == ds.examples[i].label);
    CHECK(back.examples[i].day == ds.examples[i].day);
  }
  CHECK(back.day_ids == ds.day_ids);
  CHECK(back_stats.min == ds.stats.min);
  CHECK(back_stats.max == ds.stats.max);
  CHECK(back_stats.label_scale == ds.stats.label_scale);

  std::istringstream bad("day_id,slot,t_out_f,t_in_f,price,label_kw\nd,1,2,3,4,5\nd,2,x,3,4,5\n");
  try {
    read_dataset_csv(bad, "mem");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("text helpers") {
  CHECK(parse_double(" 1.25 ") == 1.25);
  CHECK_FALSE(parse_double("1.2x"));
  CHECK_FALSE(parse_double(""));
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(split_fields("a,,b").size() == 3);
}
