#include "hvac/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvac {

namespace {

enum class VarState { Basic, AtLower, AtUpper, FreeZero };

// Dense tableau over the equality form  A·x = b,  l <= x <= u.
// Columns: structural variables, one slack per inequality row, one
// artificial per row.
class DenseSimplex {
public:
  DenseSimplex(const LinearProgram &program, const SimplexOptions &options,
               const std::vector<double> &lower,
               const std::vector<double> &upper)
      : opts_(options), m_(program.num_rows()),
        n_struct_(program.num_variables()) {
    int slacks = 0;
    for (const auto &row : program.rows())
      if (row.sense != RowSense::Equal)
        ++slacks;
    n_ = n_struct_ + slacks + m_;
    first_art_ = n_struct_ + slacks;

    a_.assign(static_cast<std::size_t>(m_) * n_, 0.0);
    b_.resize(m_);
    lo_.assign(n_, 0.0);
    hi_.assign(n_, kInfinity);
    cost_.assign(n_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      cost_[j] = program.costs()[j];
    }

    int slack = n_struct_;
    for (int i = 0; i < m_; ++i) {
      const auto &row = program.rows()[i];
      for (const auto &term : row.terms)
        at(i, term.var) += term.coef;
      b_[i] = row.rhs;
      if (row.sense == RowSense::LessEqual)
        at(i, slack++) = 1.0;
      else if (row.sense == RowSense::GreaterEqual)
        at(i, slack++) = -1.0;
    }

    state_.assign(n_, VarState::AtLower);
    value_.assign(n_, 0.0);
    for (int j = 0; j < first_art_; ++j)
      set_nonbasic_default(j);

    // Row residuals decide whether a slack can start basic or whether an
    // artificial is needed.
    basis_.assign(m_, -1);
    slack = n_struct_;
    for (int i = 0; i < m_; ++i) {
      double r = b_[i];
      for (int j = 0; j < first_art_; ++j)
        r -= at(i, j) * value_[j];
      const auto &row = program.rows()[i];
      const int art = first_art_ + i;
      at(i, art) = r >= 0.0 ? 1.0 : -1.0;
      int own_slack = -1;
      if (row.sense != RowSense::Equal)
        own_slack = slack++;
      if (own_slack >= 0 && at(i, own_slack) * r >= 0.0) {
        basis_[i] = own_slack;
        state_[own_slack] = VarState::Basic;
        value_[own_slack] = std::abs(r);
        hi_[art] = 0.0;
        state_[art] = VarState::AtLower;
        value_[art] = 0.0;
      } else {
        basis_[i] = art;
        state_[art] = VarState::Basic;
        value_[art] = std::abs(r);
      }
    }
  }

  LpResult run(long &pivots) {
    LpResult result;
    refactor();

    // Phase 1: drive artificials to zero.
    std::vector<double> phase1(n_, 0.0);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      phase1[first_art_ + i] = 1.0;
      if (state_[first_art_ + i] == VarState::Basic)
        need_phase1 = true;
    }
    if (need_phase1) {
      auto status = optimise(phase1, pivots);
      if (status == SolveStatus::IterationLimit) {
        result.status = status;
        result.pivots = pivots;
        return result;
      }
      refactor();
      for (int i = 0; i < m_; ++i) {
        if (value_[first_art_ + i] > opts_.feasibility_tol) {
          result.status = SolveStatus::Infeasible;
          result.pivots = pivots;
          return result;
        }
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int art = first_art_ + i;
      hi_[art] = 0.0;
      if (state_[art] != VarState::Basic) {
        state_[art] = VarState::AtLower;
        value_[art] = 0.0;
      }
    }

    auto status = optimise(cost_, pivots);
    result.pivots = pivots;
    if (status != SolveStatus::Optimal) {
      result.status = status;
      return result;
    }
    refactor();
    result.status = SolveStatus::Optimal;
    result.values.assign(value_.begin(), value_.begin() + n_struct_);
    for (int j = 0; j < n_struct_; ++j)
      result.objective += cost_[j] * result.values[j];
    return result;
  }

private:
  double &at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double &tab(int i, int j) { return t_[static_cast<std::size_t>(i) * n_ + j]; }

  void set_nonbasic_default(int j) {
    if (std::isfinite(lo_[j])) {
      state_[j] = VarState::AtLower;
      value_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      state_[j] = VarState::AtUpper;
      value_[j] = hi_[j];
    } else {
      state_[j] = VarState::FreeZero;
      value_[j] = 0.0;
    }
  }

  // Rebuilds T = B^-1·A and the basic values from the original rows by
  // Gauss-Jordan elimination restricted to the basic columns.
  void refactor() {
    t_ = a_;
    std::vector<double> rhs(m_);
    for (int i = 0; i < m_; ++i) {
      double r = b_[i];
      for (int j = 0; j < n_; ++j)
        if (state_[j] != VarState::Basic && value_[j] != 0.0)
          r -= a_[static_cast<std::size_t>(i) * n_ + j] * value_[j];
      rhs[i] = r;
    }

    std::vector<int> cols = basis_;
    std::vector<int> row_of(m_, -1);
    std::vector<bool> used(m_, false);
    for (int k = 0; k < m_; ++k) {
      const int col = cols[k];
      int best = -1;
      double best_abs = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (used[i])
          continue;
        const double v = std::abs(tab(i, col));
        if (v > best_abs) {
          best_abs = v;
          best = i;
        }
      }
      if (best < 0 || best_abs < 1e-12)
        throw std::runtime_error("simplex: singular basis");
      used[best] = true;
      row_of[k] = best;
      eliminate(best, col, rhs);
    }
    for (int k = 0; k < m_; ++k)
      basis_[row_of[k]] = cols[k];
    for (int i = 0; i < m_; ++i)
      value_[basis_[i]] = rhs[i];
    since_refactor_ = 0;
  }

  void eliminate(int r, int col, std::vector<double> &rhs) {
    double *prow = &t_[static_cast<std::size_t>(r) * n_];
    const double inv = 1.0 / prow[col];
    for (int j = 0; j < n_; ++j)
      prow[j] *= inv;
    prow[col] = 1.0;
    rhs[r] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r)
        continue;
      double *row = &t_[static_cast<std::size_t>(i) * n_];
      const double f = row[col];
      if (f == 0.0)
        continue;
      for (int j = 0; j < n_; ++j)
        if (prow[j] != 0.0)
          row[j] -= f * prow[j];
      row[col] = 0.0;
      rhs[i] -= f * rhs[r];
    }
  }

  void compute_reduced_costs(const std::vector<double> &c) {
    d_ = c;
    for (int i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0)
        continue;
      const double *row = &t_[static_cast<std::size_t>(i) * n_];
      for (int j = 0; j < n_; ++j)
        d_[j] -= cb * row[j];
    }
    for (int i = 0; i < m_; ++i)
      d_[basis_[i]] = 0.0;
  }

  // +1 to increase, -1 to decrease, 0 when the column cannot improve.
  int improving_direction(int j) const {
    if (lo_[j] == hi_[j])
      return 0;
    const double dj = d_[j];
    switch (state_[j]) {
    case VarState::AtLower:
      return dj < -opts_.optimality_tol ? 1 : 0;
    case VarState::AtUpper:
      return dj > opts_.optimality_tol ? -1 : 0;
    case VarState::FreeZero:
      if (dj < -opts_.optimality_tol)
        return 1;
      return dj > opts_.optimality_tol ? -1 : 0;
    case VarState::Basic:
      break;
    }
    return 0;
  }

  SolveStatus optimise(const std::vector<double> &c, long &pivots) {
    compute_reduced_costs(c);
    bool bland = false;
    int degenerate_run = 0;
    for (;;) {
      if (pivots >= opts_.max_pivots)
        return SolveStatus::IterationLimit;
      if (since_refactor_ >= opts_.refactor_interval) {
        refactor();
        compute_reduced_costs(c);
      }

      int enter = -1;
      int dir = 0;
      double best = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == VarState::Basic)
          continue;
        const int dj_dir = improving_direction(j);
        if (dj_dir == 0)
          continue;
        if (bland) {
          enter = j;
          dir = dj_dir;
          break;
        }
        if (std::abs(d_[j]) > best) {
          best = std::abs(d_[j]);
          enter = j;
          dir = dj_dir;
        }
      }
      if (enter < 0)
        return SolveStatus::Optimal;

      // Ratio test. The entering variable's own range is a candidate.
      double theta = hi_[enter] - lo_[enter];
      int leave_row = -1;
      double leave_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double alpha = dir * tab(i, enter);
        if (std::abs(alpha) <= opts_.pivot_tol)
          continue;
        const int var = basis_[i];
        double limit;
        if (alpha > 0.0) {
          if (!std::isfinite(lo_[var]))
            continue;
          limit = (value_[var] - lo_[var]) / alpha;
        } else {
          if (!std::isfinite(hi_[var]))
            continue;
          limit = (hi_[var] - value_[var]) / -alpha;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < theta - 1e-12) {
          take = true;
        } else if (leave_row >= 0 && limit <= theta + 1e-12) {
          take = bland ? var < basis_[leave_row]
                       : std::abs(alpha) > std::abs(leave_pivot);
        }
        if (take) {
          theta = std::min(theta, limit);
          leave_row = i;
          leave_pivot = alpha;
        }
      }
      if (!std::isfinite(theta))
        return SolveStatus::Unbounded;

      ++pivots;
      ++since_refactor_;
      if (theta <= 1e-12) {
        if (++degenerate_run >= opts_.bland_after_degenerate)
          bland = true;
      } else {
        degenerate_run = 0;
      }

      const double step = dir * theta;
      for (int i = 0; i < m_; ++i) {
        const double tij = tab(i, enter);
        if (tij != 0.0)
          value_[basis_[i]] -= step * tij;
      }
      value_[enter] += step;

      if (leave_row < 0) {
        // Bound flip: entering variable runs to its opposite bound.
        if (dir > 0) {
          state_[enter] = VarState::AtUpper;
          value_[enter] = hi_[enter];
        } else {
          state_[enter] = VarState::AtLower;
          value_[enter] = lo_[enter];
        }
        continue;
      }

      const int leaving = basis_[leave_row];
      if (leave_pivot > 0.0) {
        state_[leaving] = VarState::AtLower;
        value_[leaving] = lo_[leaving];
      } else {
        state_[leaving] = VarState::AtUpper;
        value_[leaving] = hi_[leaving];
      }
      state_[enter] = VarState::Basic;
      basis_[leave_row] = enter;
      pivot(leave_row, enter);
    }
  }

  void pivot(int r, int col) {
    double *prow = &t_[static_cast<std::size_t>(r) * n_];
    const double inv = 1.0 / prow[col];
    for (int j = 0; j < n_; ++j)
      prow[j] *= inv;
    prow[col] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r)
        continue;
      double *row = &t_[static_cast<std::size_t>(i) * n_];
      const double f = row[col];
      if (f == 0.0)
        continue;
      for (int j = 0; j < n_; ++j)
        if (prow[j] != 0.0)
          row[j] -= f * prow[j];
      row[col] = 0.0;
    }
    const double f = d_[col];
    if (f != 0.0)
      for (int j = 0; j < n_; ++j)
        if (prow[j] != 0.0)
          d_[j] -= f * prow[j];
    d_[col] = 0.0;
  }

  SimplexOptions opts_;
  int m_;
  int n_struct_;
  int n_ = 0;
  int first_art_ = 0;
  std::vector<double> a_;
  std::vector<double> t_;
  std::vector<double> b_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<double> value_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  int since_refactor_ = 0;
};

} // namespace

LpResult solve_relaxation(const LinearProgram &program,
                          const SimplexOptions &options,
                          const std::vector<double> *lower,
                          const std::vector<double> *upper) {
  const auto &lo = lower ? *lower : program.lower();
  const auto &hi = upper ? *upper : program.upper();
  if (static_cast<int>(lo.size()) != program.num_variables() ||
      static_cast<int>(hi.size()) != program.num_variables())
    throw std::invalid_argument("bound override has wrong length");
  for (int j = 0; j < program.num_variables(); ++j) {
    if (lo[j] > hi[j]) {
      LpResult result;
      result.status = SolveStatus::Infeasible;
      return result;
    }
  }
  long pivots = 0;
  DenseSimplex simplex(program, options, lo, hi);
  return simplex.run(pivots);
}

LpResult solve_lp(const LinearProgram &program, bool ignore_integrality,
                  const SimplexOptions &options) {
  if (ignore_integrality || program.num_integral() == 0)
    return solve_relaxation(program, options);
  MipOptions mip;
  mip.lp = options;
  auto r = solve_mip(program, mip);
  LpResult out;
  out.status = r.status;
  out.values = std::move(r.values);
  out.objective = r.objective;
  out.pivots = r.pivots;
  return out;
}

} // namespace hvac
