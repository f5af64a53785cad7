#include "doctest.h"

#include "hvac/linear_program.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace hvac;

namespace {

// Solves a small dense n×n system by Gaussian elimination; false if singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double> &x) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k]))
        piv = i;
    if (std::abs(a[piv][k]) < 1e-10)
      return false;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (int i = 0; i < n; ++i) {
      if (i == k)
        continue;
      const double f = a[i][k] / a[k][k];
      for (int j = k; j < n; ++j)
        a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i)
    x[i] = b[i] / a[i][i];
  return true;
}

// Vertex enumeration oracle for box-bounded LPs with <= rows: every
// optimum of a bounded LP is attained at a point where n of the
// constraints (rows or bounds) are tight.
double vertex_oracle(const LinearProgram &lp, bool &feasible) {
  const int n = lp.num_variables();
  std::vector<std::vector<double>> cons;
  std::vector<double> rhs;
  for (const auto &row : lp.rows()) {
    std::vector<double> a(n, 0.0);
    for (const auto &t : row.terms)
      a[t.var] += t.coef;
    cons.push_back(a);
    rhs.push_back(row.rhs);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    cons.push_back(e);
    rhs.push_back(lp.upper()[j]);
    cons.push_back(e);
    rhs.push_back(lp.lower()[j]);
  }
  const int k = static_cast<int>(cons.size());
  double best = kInfinity;
  feasible = false;
  std::vector<int> pick(n);
  auto rec = [&](auto &&self, int start, int depth) -> void {
    if (depth == n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b, x;
      for (int idx : pick) {
        a.push_back(cons[idx]);
        b.push_back(rhs[idx]);
      }
      if (!solve_dense(a, b, x))
        return;
      if (lp.max_violation(x) > 1e-9)
        return;
      feasible = true;
      best = std::min(best, lp.evaluate_objective(x));
      return;
    }
    for (int i = start; i < k; ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

} // namespace

TEST_CASE("minimising x over a box picks the lower bound") {
  LinearProgram lp;
  lp.add_variable("x", 0.0, 5.0, 1.0);
  const auto r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.values[0] == 0.0);
  CHECK(r.objective == 0.0);
}

TEST_CASE("contradictory bounds are infeasible") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0.0, 10.0, 1.0);
  CHECK_THROWS(lp.add_variable("y", 3.0, 2.0, 1.0));
  std::vector<double> lo{3.0}, hi{2.0};
  CHECK(solve_relaxation(lp, {}, &lo, &hi).status == SolveStatus::Infeasible);
  lp.add_row("r", {{x, 1.0}}, RowSense::GreaterEqual, 11.0);
  CHECK(solve_lp(lp).status == SolveStatus::Infeasible);
}

TEST_CASE("textbook LP") {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 → (2, 6), value 36
  LinearProgram lp;
  const int x = lp.add_variable("x", 0.0, kInfinity, -3.0);
  const int y = lp.add_variable("y", 0.0, kInfinity, -5.0);
  lp.add_row("a", {{x, 1.0}}, RowSense::LessEqual, 4.0);
  lp.add_row("b", {{y, 2.0}}, RowSense::LessEqual, 12.0);
  lp.add_row("c", {{x, 3.0}, {y, 2.0}}, RowSense::LessEqual, 18.0);
  const auto r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.values[x] == doctest::Approx(2.0));
  CHECK(r.values[y] == doctest::Approx(6.0));
  CHECK(r.objective == doctest::Approx(-36.0));
}

TEST_CASE("free variables and equality rows") {
  // min |z - 3| written with a free z and two slacks: z - s + t = 3
  LinearProgram lp;
  const int z = lp.add_variable("z", -kInfinity, kInfinity, 0.0);
  const int s = lp.add_variable("s", 0.0, kInfinity, 1.0);
  const int t = lp.add_variable("t", 0.0, kInfinity, 1.0);
  lp.add_row("eq", {{z, 1.0}, {s, -1.0}, {t, 1.0}}, RowSense::Equal, 3.0);
  lp.add_row("lo", {{z, 1.0}}, RowSense::GreaterEqual, 5.0);
  const auto r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(2.0));
  CHECK(r.values[z] == doctest::Approx(5.0));
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0.0, kInfinity, -1.0);
  const int y = lp.add_variable("y", 0.0, kInfinity, 0.0);
  lp.add_row("r", {{x, 1.0}, {y, -1.0}}, RowSense::LessEqual, 1.0);
  CHECK(solve_lp(lp).status == SolveStatus::Unbounded);
}

TEST_CASE("pivot cap yields IterationLimit") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0.0, kInfinity, -3.0);
  const int y = lp.add_variable("y", 0.0, kInfinity, -5.0);
  lp.add_row("c", {{x, 3.0}, {y, 2.0}}, RowSense::LessEqual, 18.0);
  lp.add_row("d", {{x, 1.0}, {y, 3.0}}, RowSense::GreaterEqual, 1.0);
  SimplexOptions opts;
  opts.max_pivots = 0;
  CHECK(solve_lp(lp, true, opts).status == SolveStatus::IterationLimit);
}

TEST_CASE("random box LPs agree with vertex enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-5.0, 5.0), bound(0.5, 6.0);
  int feasible_count = 0;
  for (int trial = 0; trial < 150; ++trial) {
    LinearProgram lp;
    const int n = 2 + trial % 2;
    for (int j = 0; j < n; ++j) {
      const double lo = -bound(rng);
      lp.add_variable("x" + std::to_string(j), lo, lo + 2 * bound(rng), coef(rng));
    }
    const int m = 1 + trial % 4;
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j)
        terms.push_back({j, coef(rng)});
      lp.add_row("r" + std::to_string(i), terms, RowSense::LessEqual, coef(rng));
    }
    bool feasible = false;
    const double expected = vertex_oracle(lp, feasible);
    const auto r = solve_lp(lp);
    if (!feasible) {
      CHECK(r.status == SolveStatus::Infeasible);
      continue;
    }
    ++feasible_count;
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(expected).epsilon(1e-8));
    CHECK(lp.max_violation(r.values) <= 1e-7);
  }
  CHECK(feasible_count > 50);
}

TEST_CASE("degenerate LP terminates") {
  // Many redundant rows through the optimal vertex.
  LinearProgram lp;
  const int x = lp.add_variable("x", 0.0, kInfinity, -1.0);
  const int y = lp.add_variable("y", 0.0, kInfinity, -1.0);
  for (int k = 1; k <= 30; ++k)
    lp.add_row("r" + std::to_string(k), {{x, double(k)}, {y, 1.0}},
               RowSense::LessEqual, double(k) + 1.0);
  SimplexOptions opts;
  opts.bland_after_degenerate = 2;
  const auto r = solve_lp(lp, true, opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-2.0));
}

TEST_CASE("branch-and-bound matches enumeration on small knapsacks") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> w(1, 20), v(1, 30);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 8;
    LinearProgram lp;
    std::vector<int> weight(n), value(n);
    std::vector<Term> row;
    for (int j = 0; j < n; ++j) {
      weight[j] = w(rng);
      value[j] = v(rng);
      lp.add_variable("b" + std::to_string(j), 0.0, 1.0, -value[j], true);
      row.push_back({j, double(weight[j])});
    }
    const int cap = 40;
    lp.add_row("cap", row, RowSense::LessEqual, cap);
    int best = 0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      int wt = 0, val = 0;
      for (int j = 0; j < n; ++j)
        if (mask >> j & 1) {
          wt += weight[j];
          val += value[j];
        }
      if (wt <= cap)
        best = std::max(best, val);
    }
    const auto r = solve_mip(lp);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-best));
    for (double x : r.values)
      CHECK(std::min(std::abs(x), std::abs(x - 1.0)) <= 1e-6);
    const auto relaxed = solve_lp(lp);
    CHECK(relaxed.objective <= r.objective + 1e-9);
  }
}

TEST_CASE("node cap yields IterationLimit") {
  LinearProgram lp;
  std::vector<Term> row;
  for (int j = 0; j < 10; ++j) {
    lp.add_variable("b" + std::to_string(j), 0.0, 1.0, -(j + 1.5), true);
    row.push_back({j, 2.0 * j + 3.0});
  }
  lp.add_row("cap", row, RowSense::LessEqual, 20.5);
  MipOptions opts;
  opts.max_nodes = 1;
  CHECK(solve_mip(lp, opts).status == SolveStatus::IterationLimit);
}

TEST_CASE("LP listing format") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0.0, 5.0, 2.0);
  const int b = lp.add_variable("b", 0.0, 1.0, -1.0, true);
  const int f = lp.add_variable("f", -kInfinity, kInfinity, 0.0);
  lp.add_row("r1", {{x, 1.0}, {b, -3.0}, {f, 1.0}}, RowSense::LessEqual, 4.0);
  std::ostringstream out;
  write_lp_listing(out, lp);
  CHECK(out.str() == "minimize\n obj: + 2 x - 1 b\n"
                     "subject to\n r1: + 1 x - 3 b + 1 f <= 4\n"
                     "bounds\n 0 <= x <= 5\n 0 <= b <= 1\n -inf <= f <= +inf\n"
                     "integer\n b\n"
                     "end\n");
}
