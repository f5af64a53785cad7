// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include "hvac/app.hpp"
#include "hvac/data_pipeline.hpp"
#include "hvac/evaluation.hpp"
#include "hvac/milp.hpp"
#include "hvac/mlp.hpp"
#include "hvac/text_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>

using namespace hvac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char *title, const std::function<Outcome()> &check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = check();
  } catch (const std::exception &e) {
    r = {false, std::string("threw: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!r.pass)
    ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", id, title,
              r.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const EnvParams kParams;
const std::uint64_t kSeed = 1;

const std::vector<DayProfile> &season100() {
  static const auto days = synth_generate(kSeed, 100);
  return days;
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto &day : season100()) {
    const auto milp = solve_day(kParams, day);
    const auto lp = solve_convex_oracle(kParams, day, day.outdoor.front());
    if (milp.status != SolveStatus::Optimal || lp.status != SolveStatus::Optimal)
      return {false, day.day_id + " not solved to optimality"};
    worst = std::max(worst, std::abs(milp.objective - lp.objective) / std::abs(lp.objective));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs <= 300.0,
          "100 days, worst relative gap " + fmt("%.3g", worst) + ", " + fmt("%.1f", secs) +
              " s (limit 1e-6, 300 s)"};
}

Outcome brute_force_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> temp(20.0, 70.0), price(1.0, 30.0), pmax(2.0, 5.0),
      alpha(0.0, 8.0);
  std::uniform_int_distribution<int> slots(1, 3);
  int ok = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 50; ++i) {
    EnvParams p;
    // A small heater keeps the 0.01 kW grid small enough to enumerate.
    p.p_max = pmax(rng);
    p.alpha = alpha(rng);
    DayProfile day;
    day.day_id = "bf" + std::to_string(i);
    const int n = slots(rng);
    for (int t = 0; t < n; ++t) {
      day.outdoor.push_back(temp(rng));
      day.price.push_back(price(rng));
    }
    const double t0_in = temp(rng);
    const auto milp = solve_milp(build_milp(p, day, t0_in));
    const auto bf = brute_force_small(p, day, t0_in, 0.01);
    const double slack = bf.objective - milp.objective;
    const bool good = milp.status == SolveStatus::Optimal &&
                      milp.objective <= bf.objective + 1e-9 * (1.0 + bf.objective) &&
                      slack <= bf.error_bound;
    ok += good;
    if (bf.error_bound > 0.0)
      worst_ratio = std::max(worst_ratio, slack / bf.error_bound);
  }
  const double secs = seconds_since(t0);
  return {ok == 50 && secs <= 60.0,
          std::to_string(ok) + "/50 instances within bound, largest gap/bound " +
              fmt("%.3f", worst_ratio) + ", " + fmt("%.1f", secs) + " s (limit 60 s)"};
}

Outcome hand_instance() {
  DayProfile day;
  day.day_id = "hand";
  day.outdoor = {50.0, 50.0};
  day.price = {10.0, 10.0};
  const auto sol = solve_day(kParams, day);
  const bool good = sol.status == SolveStatus::Optimal &&
                    std::abs(sol.power[0] - 3.024) <= 1e-3 && std::abs(sol.power[1]) <= 1e-3 &&
                    std::abs(sol.objective - 95.04) <= 1e-3;
  return {good, "p=[" + fmt("%.4f", sol.power[0]) + ", " + fmt("%.4f", sol.power[1]) +
                    "] kW, objective " + fmt("%.4f", sol.objective) + " cents"};
}

Outcome replay_identity() {
  double worst = 0.0;
  for (const auto &day : season100()) {
    const auto sol = solve_day(kParams, day);
    const auto traj = run_closed_loop(replay_controller(sol.power), kParams, day);
    worst = std::max(worst, std::abs(traj.objective - sol.objective) / std::abs(sol.objective));
  }
  return {worst <= 1e-9, "100 days, worst relative difference " + fmt("%.3g", worst)};
}

// Smallest |pre-activation| of any hidden unit over the batch. Central
// differences are meaningless when the stencil straddles a ReLU kink.
double kink_margin(const MlpParams &p, const std::vector<Sample> &batch) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto &s : batch) {
    std::vector<double> a(s.x.begin(), s.x.end());
    for (std::size_t li = 0; li + 1 < p.layers.size(); ++li) {
      const auto &layer = p.layers[li];
      std::vector<double> next(layer.out);
      for (int o = 0; o < layer.out; ++o) {
        double z = layer.bias[o];
        for (int i = 0; i < layer.in; ++i)
          z += layer.w(o, i) * a[i];
        margin = std::min(margin, std::abs(z));
        next[o] = std::max(z, 0.0);
      }
      a = std::move(next);
    }
  }
  return margin;
}

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> bias(0.0, 0.3);
  const double h = 1e-5;
  double worst = 0.0;
  int redrawn = 0;
  for (int draw = 0, attempt = 0; draw < 100; ++attempt) {
    auto p = init_mlp({4, 8, 8, 1}, 500 + attempt);
    for (auto &l : p.layers)
      for (auto &b : l.bias)
        b = bias(rng);
    std::vector<Sample> batch(5);
    for (auto &s : batch) {
      for (auto &x : s.x)
        x = u(rng);
      s.y = u(rng);
    }
    if (kink_margin(p, batch) < 1e-3) {
      ++redrawn;
      continue;
    }
    ++draw;
    Gradients g;
    loss_and_gradients(p, batch, g);
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
      auto probe = [&](double &param, double analytic) {
        const double keep = param;
        param = keep + h;
        const double up = mean_squared_error(p, batch);
        param = keep - h;
        const double down = mean_squared_error(p, batch);
        param = keep;
        const double numeric = (up - down) / (2.0 * h);
        diff += (analytic - numeric) * (analytic - numeric);
        na += analytic * analytic;
        nn += numeric * numeric;
      };
      for (std::size_t k = 0; k < p.layers[li].weights.size(); ++k)
        probe(p.layers[li].weights[k], g.layers[li].weights[k]);
      for (std::size_t k = 0; k < p.layers[li].bias.size(); ++k)
        probe(p.layers[li].bias[k], g.layers[li].bias[k]);
    }
    worst = std::max(worst, std::sqrt(diff) / (std::sqrt(na) + std::sqrt(nn)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs <= 30.0,
          "100 draws on 4:8:8:1, worst relative error " + fmt("%.3g", worst) +
              " (limit 1e-4), " + std::to_string(redrawn) +
              " draws replaced for a hidden unit within 1e-3 of its kink"};
}

struct ImitationRun {
  SeasonEvaluation eval;
  double train_seconds = 0.0;
  double total_seconds = 0.0;
};

const ImitationRun &imitation_run() {
  static const ImitationRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig config; // 60 training days, 30 interleaved evaluation days
    config.seed = kSeed;
    config.forecast_seed = kSeed;
    config.train.seed = kSeed;
    config.train.epochs = 1500;
    const auto split = split_days(synth_generate(kSeed, 90), config);
    const auto ds = build_training_set(kParams, split.train);
    const auto t1 = std::chrono::steady_clock::now();
    const auto trained = train(ds, config.train, kParams.p_max);
    ImitationRun r;
    r.train_seconds = seconds_since(t1);
    r.eval = evaluate_season(kParams, split.eval,
                             {imitation_policy(kParams, trained.params),
                              forecast_policy(kParams, config.forecast_seed, config.noise),
                              replay_policy(kParams)});
    r.total_seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome imitation_quality() {
  const auto &run = imitation_run();
  const auto &il = run.eval.reports[0];
  const double ratio = il.mean_objective / il.mean_optimal_objective;
  const bool good = il.days.size() == 30 && il.mean_mae_power_kw <= 0.5 &&
                    std::abs(ratio - 1.0) <= 0.05 && run.total_seconds <= 900.0;
  return {good, "MAE " + fmt("%.4f", il.mean_mae_power_kw) + " kW (limit 0.5), mean objective " +
                    fmt("%.2f", il.mean_objective) + " vs optimal " +
                    fmt("%.2f", il.mean_optimal_objective) + " (" +
                    fmt("%+.2f", 100.0 * (ratio - 1.0)) + "%, limit 5%), " +
                    fmt("%.0f", run.total_seconds) + " s"};
}

Outcome baseline_dominance() {
  const auto &run = imitation_run();
  const auto &il = run.eval.reports[0];
  const auto &fc = run.eval.reports[1];
  const bool a = il.mean_mae_power_kw < fc.mean_mae_power_kw;
  const bool b = il.mean_cost_err_cents < fc.mean_cost_err_cents;
  const bool c = il.tin_sigma_f < fc.tin_sigma_f;
  return {a && b && c,
          std::string("(a) MAE ") + fmt("%.4f", il.mean_mae_power_kw) + " vs " +
              fmt("%.4f", fc.mean_mae_power_kw) + " kW " + (a ? "ok" : "NOT") +
              "; (b) cost error " + fmt("%.2f", il.mean_cost_err_cents) + " vs " +
              fmt("%.2f", fc.mean_cost_err_cents) + " cents " + (b ? "ok" : "NOT") +
              "; (c) indoor sigma " + fmt("%.3f", il.tin_sigma_f) + " vs " +
              fmt("%.3f", fc.tin_sigma_f) + " F " + (c ? "ok" : "NOT")};
}

Outcome alpha_trend() {
  const auto days = synth_generate(kSeed, 90);
  const auto rows = alpha_sweep(kParams, days, {0.0, 1.0, 2.0, 4.0, 8.0});
  bool monotone = true;
  std::string trace;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      monotone = monotone && rows[i].tin_min_f >= rows[i - 1].tin_min_f - 1e-9 &&
                 rows[i].total_cost_cents >= rows[i - 1].total_cost_cents - 1e-6;
    }
    trace += (i ? "; " : "") + std::string("a=") + fmt("%g", rows[i].alpha) + " min " +
             fmt("%.2f", rows[i].tin_min_f) + " F cost " + fmt("%.0f", rows[i].total_cost_cents);
  }
  const double reachable_min = rows.back().controllable_tin_min_f;
  const bool near = reachable_min >= kParams.t_min - 0.5;
  return {monotone && near, trace + "; reachable-slot min at a=8 " +
                                fmt("%.3f", reachable_min) + " F (floor " +
                                fmt("%.1f", kParams.t_min - 0.5) + ")"};
}

Outcome metric_units() {
  int bad = 0;
  const std::vector<double> a{1.0, 3.0}, b{2.0, 2.0};
  bad += mae(a, b) != 1.0;
  const std::vector<double> v{1.1}, r{1.0};
  const auto m = mape(v, r);
  bad += !m.percent || std::abs(*m.percent - 10.0) > 1e-12 || m.skipped != 0;
  const std::vector<double> v2{1.0, 5.0}, r2{0.0, 4.0};
  const auto m2 = mape(v2, r2);
  bad += !m2.percent || std::abs(*m2.percent - 25.0) > 1e-12 || m2.skipped != 1;
  const std::vector<double> zeros{0.0, 0.0};
  const auto m3 = mape(b, zeros);
  bad += m3.percent.has_value() || m3.skipped != 2;
  const std::vector<double> s{19.0, 21.0}, flat{3.0, 3.0, 3.0};
  bad += std_dev(s) != 1.0; // divide-by-N; the N-1 form would give sqrt(2)
  bad += std_dev(flat) != 0.0;
  bad += mae(s, s) != 0.0;
  return {bad == 0, std::to_string(7 - bad) + "/7 hand cases exact"};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "hvac_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "train_days = 12\neval_days = 6\nepochs = 40\nhidden = 16,16\n"
           "alphas = 0,2,8\nday_index = 3\n";
  }
  int mismatched = 0, files = 0;
  std::string failed;
  for (const auto &cmd : command_names()) {
    for (const char *run : {"a", "b"}) {
      const fs::path out = root / run;
      // train, simulate and evaluate consume artifacts of earlier commands,
      // so each run directory accumulates the whole pipeline.
      const std::string line = std::string(HVAC_CLI_PATH) + " " + cmd + " --config " +
                               cfg.string() + " --seed 5 --out " + out.string() +
                               " > " + (root / "log.txt").string() + " 2>&1";
      if (std::system(line.c_str()) != 0)
        failed += " " + cmd;
    }
  }
  for (const auto &entry : fs::directory_iterator(root / "a")) {
    ++files;
    const auto other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
      ++mismatched;
  }
  const bool good = failed.empty() && mismatched == 0 && files >= 12;
  return {good, std::to_string(command_names().size()) + " commands run twice, " +
                    std::to_string(files) + " files compared, " + std::to_string(mismatched) +
                    " differ" + (failed.empty() ? "" : ", failed:" + failed)};
}

} // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "brute-force agreement", brute_force_agreement);
  report(3, "hand-derived instance", hand_instance);
  report(4, "replay identity", replay_identity);
  report(5, "gradient check", gradient_check);
  report(6, "imitation quality", imitation_quality);
  report(7, "baseline dominance", baseline_dominance);
  report(8, "alpha sweep trend", alpha_trend);
  report(9, "metric unit tests", metric_units);
  report(10, "CLI determinism", cli_determinism);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
