#include "hvac/linear_program.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace hvac {

namespace {

struct Node {
  double bound;
  long order; // creation index, breaks ties deterministically
  std::vector<double> lower;
  std::vector<double> upper;
};

struct NodeCompare {
  bool operator()(const Node &a, const Node &b) const {
    if (a.bound != b.bound)
      return a.bound > b.bound;
    return a.order > b.order;
  }
};

// Most fractional integral variable, or -1 when the point is integral.
int pick_branch_variable(const LinearProgram &lp, const std::vector<double> &x,
                         double tol) {
  int best = -1;
  double best_score = tol;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (!lp.integral()[j])
      continue;
    const double frac = x[j] - std::floor(x[j]);
    const double score = std::min(frac, 1.0 - frac);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

} // namespace

MipResult solve_mip(const LinearProgram &program, const MipOptions &options) {
  MipResult result;
  const int n = program.num_variables();

  // sos1 membership per variable
  std::vector<int> group_of(n, -1);
  for (std::size_t g = 0; g < program.sos1_groups().size(); ++g)
    for (int v : program.sos1_groups()[g])
      group_of[v] = static_cast<int>(g);

  bool have_incumbent = false;
  double incumbent = kInfinity;
  const auto prune_level = [&]() {
    return incumbent - 1e-9 * (1.0 + std::abs(incumbent));
  };

  const auto try_heuristic = [&](const Node &node, const std::vector<double> &x) {
    if (!options.rounding)
      return;
    auto proposal = options.rounding(x);
    if (!proposal || static_cast<int>(proposal->size()) != n)
      return;
    std::vector<double> lo = node.lower, hi = node.upper;
    for (int j = 0; j < n; ++j) {
      if (!program.integral()[j])
        continue;
      const double v = std::round((*proposal)[j]);
      if (v < lo[j] || v > hi[j])
        return;
      lo[j] = hi[j] = v;
    }
    auto lp = solve_relaxation(program, options.lp, &lo, &hi);
    result.pivots += lp.pivots;
    if (lp.status == SolveStatus::Optimal && lp.objective < incumbent) {
      incumbent = lp.objective;
      result.values = std::move(lp.values);
      have_incumbent = true;
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeCompare> open;
  long created = 0;
  open.push(Node{-kInfinity, created++, program.lower(), program.upper()});
  double best_bound = -kInfinity;
  bool limit_hit = false;

  while (!open.empty()) {
    if (result.nodes >= options.max_nodes) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound >= prune_level())
      continue;

    ++result.nodes;
    auto lp = solve_relaxation(program, options.lp, &node.lower, &node.upper);
    result.pivots += lp.pivots;
    if (lp.status == SolveStatus::IterationLimit) {
      limit_hit = true;
      break;
    }
    if (lp.status == SolveStatus::Unbounded) {
      result.status = SolveStatus::Unbounded;
      return result;
    }
    if (lp.status != SolveStatus::Optimal)
      continue;
    if (result.nodes == 1)
      best_bound = lp.objective;
    if (have_incumbent && lp.objective >= prune_level())
      continue;

    const int branch = pick_branch_variable(program, lp.values,
                                            options.integrality_tol);
    if (branch < 0) {
      incumbent = lp.objective;
      result.values = std::move(lp.values);
      have_incumbent = true;
      continue;
    }
    try_heuristic(node, lp.values);
    if (have_incumbent && lp.objective >= prune_level())
      continue;

    Node up{lp.objective, created++, node.lower, node.upper};
    up.lower[branch] = std::ceil(lp.values[branch]);
    if (group_of[branch] >= 0 && up.lower[branch] >= 1.0) {
      for (int v : program.sos1_groups()[group_of[branch]])
        if (v != branch)
          up.lower[v] = up.upper[v] = 0.0;
    }
    Node down{lp.objective, created++, std::move(node.lower),
              std::move(node.upper)};
    down.upper[branch] = std::floor(lp.values[branch]);
    open.push(std::move(up));
    open.push(std::move(down));
  }

  if (have_incumbent) {
    result.objective = program.evaluate_objective(result.values);
    result.status = limit_hit ? SolveStatus::IterationLimit : SolveStatus::Optimal;
    double open_bound = incumbent;
    if (limit_hit && !open.empty())
      open_bound = std::min(open_bound, open.top().bound);
    result.best_bound = limit_hit ? open_bound : result.objective;
  } else {
    result.status = limit_hit ? SolveStatus::IterationLimit : SolveStatus::Infeasible;
    result.best_bound = best_bound;
  }
  return result;
}

} // namespace hvac
