#include "hvac/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace hvac {

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                double cost, bool integral) {
  if (lower > upper)
    throw std::invalid_argument("variable " + name + ": lower > upper");
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  integral_.push_back(integral);
  names_.push_back(std::move(name));
  return num_variables() - 1;
}

void LinearProgram::add_row(std::string name, std::vector<Term> terms,
                            RowSense sense, double rhs) {
  for (const auto &t : terms)
    if (t.var < 0 || t.var >= num_variables())
      throw std::invalid_argument("row " + name + " references unknown variable");
  rows_.push_back(Row{std::move(name), std::move(terms), sense, rhs});
}

void LinearProgram::add_sos1_group(std::vector<int> vars) {
  for (int v : vars)
    if (v < 0 || v >= num_variables() || !integral_[v])
      throw std::invalid_argument("sos1 group member must be an integral variable");
  sos1_.push_back(std::move(vars));
}

int LinearProgram::num_integral() const {
  return static_cast<int>(std::count(integral_.begin(), integral_.end(), true));
}

double LinearProgram::evaluate_objective(const std::vector<double> &x) const {
  double total = 0.0;
  for (int j = 0; j < num_variables(); ++j)
    total += cost_[j] * x[j];
  return total;
}

double LinearProgram::row_activity(int row, const std::vector<double> &x) const {
  double activity = 0.0;
  for (const auto &t : rows_[row].terms)
    activity += t.coef * x[t.var];
  return activity;
}

double LinearProgram::max_violation(const std::vector<double> &x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    worst = std::max(worst, x[j] - upper_[j]);
  }
  for (int i = 0; i < num_rows(); ++i) {
    const double a = row_activity(i, x);
    const double rhs = rows_[i].rhs;
    switch (rows_[i].sense) {
    case RowSense::LessEqual:
      worst = std::max(worst, a - rhs);
      break;
    case RowSense::GreaterEqual:
      worst = std::max(worst, rhs - a);
      break;
    case RowSense::Equal:
      worst = std::max(worst, std::abs(a - rhs));
      break;
    }
  }
  return worst;
}

const char *to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Optimal:
    return "optimal";
  case SolveStatus::Infeasible:
    return "infeasible";
  case SolveStatus::Unbounded:
    return "unbounded";
  case SolveStatus::IterationLimit:
    return "iteration_limit";
  }
  return "unknown";
}

namespace {

void put_number(std::ostream &out, double v) {
  if (v == kInfinity)
    out << "+inf";
  else if (v == -kInfinity)
    out << "-inf";
  else
    out << std::setprecision(17) << v;
}

void put_terms(std::ostream &out, const LinearProgram &lp,
               const std::vector<Term> &terms) {
  for (const auto &t : terms) {
    out << ' ' << (t.coef < 0 ? "- " : "+ ");
    put_number(out, std::abs(t.coef));
    out << ' ' << lp.names()[t.var];
  }
}

} // namespace

void write_lp_listing(std::ostream &out, const LinearProgram &program) {
  out << "minimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < program.num_variables(); ++j)
    if (program.costs()[j] != 0.0)
      obj.push_back({j, program.costs()[j]});
  put_terms(out, program, obj);
  out << "\nsubject to\n";
  for (const auto &row : program.rows()) {
    out << ' ' << row.name << ':';
    put_terms(out, program, row.terms);
    switch (row.sense) {
    case RowSense::LessEqual:
      out << " <= ";
      break;
    case RowSense::GreaterEqual:
      out << " >= ";
      break;
    case RowSense::Equal:
      out << " = ";
      break;
    }
    put_number(out, row.rhs);
    out << '\n';
  }
  out << "bounds\n";
  for (int j = 0; j < program.num_variables(); ++j) {
    out << ' ';
    put_number(out, program.lower()[j]);
    out << " <= " << program.names()[j] << " <= ";
    put_number(out, program.upper()[j]);
    out << '\n';
  }
  out << "integer\n";
  for (int j = 0; j < program.num_variables(); ++j)
    if (program.integral()[j])
      out << ' ' << program.names()[j] << '\n';
  out << "end\n";
}

} // namespace hvac
