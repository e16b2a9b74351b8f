#include "hc/core.hpp"

#include <cmath>

namespace hc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Infeasible: return "INFEASIBLE";
    case ErrorCode::EmptyFeasibleSet: return "EMPTY_FEASIBLE_SET";
    case ErrorCode::NonSmoothProblem: return "NON_SMOOTH_PROBLEM";
    case ErrorCode::PreconditionViolated: return "PRECONDITION_VIOLATED";
    case ErrorCode::InfeasibleStart: return "INFEASIBLE_START";
    case ErrorCode::MissingMuH: return "MISSING_MU_H";
    case ErrorCode::FeasibilityNotReached: return "FEASIBILITY_NOT_REACHED";
    case ErrorCode::QpInfeasible: return "QP_INFEASIBLE";
    case ErrorCode::NoFeasibleGridPoint: return "NO_FEASIBLE_GRID_POINT";
    case ErrorCode::InnerSolverFailed: return "INNER_SOLVER_FAILED";
  }
  return "UNKNOWN";
}

void HiddenConvexMeta::validate() const {
  if (!(mu_c > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu_c must be positive");
  if (!(d_u > 0.0)) throw Error(ErrorCode::InvalidArgument, "d_u must be positive");
  if (rho < 0.0) throw Error(ErrorCode::InvalidArgument, "rho must be non-negative");
  if (f1_lower && f1_upper && *f1_lower > *f1_upper)
    throw Error(ErrorCode::InvalidArgument, "f1_lower exceeds f1_upper");
}

ConstrainedProblem::ConstrainedProblem(std::string name, int dim, RawFunction f1, RawFunction f2,
                                       BoxSet domain, bool smooth)
    : name_(std::move(name)),
      dim_(dim),
      f1_(std::move(f1)),
      f2_(std::move(f2)),
      domain_(std::move(domain)),
      smooth_(smooth),
      counter_(std::make_shared<OracleCounter>()) {
  if (dim_ <= 0 || domain_.dim() != dim_)
    throw Error(ErrorCode::DimensionMismatch, "problem dimension and domain disagree");
}

void ConstrainedProblem::check(const Vec& x) const {
  if (x.size() != dim_)
    throw Error(ErrorCode::DimensionMismatch, name_ + ": expected dim " + std::to_string(dim_));
}

double ConstrainedProblem::f1(const Vec& x) const {
  check(x);
  counter_->add_value();
  return f1_.value(x);
}

double ConstrainedProblem::f2(const Vec& x) const {
  check(x);
  counter_->add_value();
  return f2_.value(x);
}

FirstOrder ConstrainedProblem::f1_first_order(const Vec& x) const {
  check(x);
  counter_->add_subgrad();
  return f1_.first_order(x);
}

FirstOrder ConstrainedProblem::f2_first_order(const Vec& x) const {
  check(x);
  counter_->add_subgrad();
  return f2_.first_order(x);
}

Oracle ConstrainedProblem::f1_oracle() const {
  return Oracle{[this](const Vec& x) { return f1(x); },
                [this](const Vec& x) { return f1_first_order(x); }};
}

Oracle ConstrainedProblem::f2_oracle() const {
  return Oracle{[this](const Vec& x) { return f2(x); },
                [this](const Vec& x) { return f2_first_order(x); }};
}

const char* iter_kind_name(IterKind k) {
  switch (k) {
    case IterKind::Outer: return "outer";
    case IterKind::Inner: return "inner";
    case IterKind::Epoch: return "epoch";
  }
  return "outer";
}

void Trace::record(const ConstrainedProblem& p, const Vec& x, IterKind kind,
                   std::optional<double> eta) {
  record_values(p.counter().total() - offset_, p.peek_f1(x), p.peek_f2(x), kind, eta);
}

void Trace::record_values(std::int64_t calls, double f1, double f2, IterKind kind,
                          std::optional<double> eta) {
  TraceRecord r{calls, f1, f2, f1 + lambda_ * positive_part(f2), eta, kind};
  if (!records_.empty() && records_.back().oracle_calls >= calls) {
    // Same call count: keep the latest state under the existing stamp.
    if (records_.back().oracle_calls == calls) records_.back() = r;
    return;
  }
  records_.push_back(r);
}

double exact_penalty(const ConstrainedProblem& p, const Vec& x, double lambda) {
  if (lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  return p.f1(x) + lambda * positive_part(p.f2(x));
}

double value_function_v(const ConstrainedProblem& p, const Vec& x, double eta) {
  double a = p.f1(x) - eta;
  double b = p.f2(x);
  return a > b ? a : b;
}

Vec hidden_interpolate(const HiddenMap& map, const Vec& x, const Vec& y, double alpha) {
  return map.inverse((1.0 - alpha) * map.forward(x) + alpha * map.forward(y));
}

}  // namespace hc
