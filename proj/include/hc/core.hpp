#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hc/error.hpp"
#include "hc/geometry.hpp"

namespace hc {

struct FirstOrder {
  double value = 0.0;
  Vec grad;
};

// A first-order oracle query returns value and sub-gradient together and is
// charged as one call; a value-only query is also one call.
struct Oracle {
  std::function<double(const Vec&)> value;
  std::function<FirstOrder(const Vec&)> first_order;
};

class OracleCounter {
 public:
  explicit OracleCounter(std::int64_t budget = std::numeric_limits<std::int64_t>::max())
      : budget_(budget) {}

  void add_value() { value_calls_.fetch_add(1, std::memory_order_relaxed); }
  void add_subgrad() { subgrad_calls_.fetch_add(1, std::memory_order_relaxed); }

  std::int64_t value_calls() const { return value_calls_.load(std::memory_order_relaxed); }
  std::int64_t subgrad_calls() const { return subgrad_calls_.load(std::memory_order_relaxed); }
  std::int64_t total() const { return value_calls() + subgrad_calls(); }

  std::int64_t budget() const { return budget_; }
  void set_budget(std::int64_t b) { budget_ = b; }
  std::int64_t remaining() const { return budget_ - total(); }
  bool can_afford(std::int64_t calls) const { return remaining() >= calls; }

  void reset() {
    value_calls_ = 0;
    subgrad_calls_ = 0;
  }

 private:
  std::atomic<std::int64_t> value_calls_{0};
  std::atomic<std::int64_t> subgrad_calls_{0};
  std::int64_t budget_;
};

// Caps the counter at start + budget for the lifetime of the scope.
class BudgetScope {
 public:
  BudgetScope(OracleCounter& c, std::optional<std::int64_t> budget) : c_(c), saved_(c.budget()) {
    if (budget) c_.set_budget(std::min(saved_, c_.total() + *budget));
  }
  ~BudgetScope() { c_.set_budget(saved_); }
  BudgetScope(const BudgetScope&) = delete;
  BudgetScope& operator=(const BudgetScope&) = delete;

 private:
  OracleCounter& c_;
  std::int64_t saved_;
};

struct HiddenConvexMeta {
  double mu_c = 1.0;
  double d_u = 1.0;
  double rho = 0.0;
  double g_bound = 1.0;
  std::optional<double> l_smooth;
  std::optional<double> theta_slater;
  std::optional<double> mu_h;
  std::optional<double> f1_lower;
  std::optional<double> f1_upper;
  std::optional<double> f2_lower;

  void validate() const;
};

struct HiddenMap {
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<double(const Vec&)> h1_value;
  std::function<double(const Vec&)> h2_value;
  // Sub-gradients of H1, H2 in u-space; needed by the convex reference solver.
  std::function<Vec(const Vec&)> h1_subgrad;
  std::function<Vec(const Vec&)> h2_subgrad;
  BoxSet u_box;
};

// Uncounted raw definitions of F1/F2; ConstrainedProblem adds accounting.
struct RawFunction {
  std::function<double(const Vec&)> value;
  std::function<FirstOrder(const Vec&)> first_order;
};

class ConstrainedProblem {
 public:
  ConstrainedProblem(std::string name, int dim, RawFunction f1, RawFunction f2, BoxSet domain,
                     bool smooth);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool smooth() const { return smooth_; }
  const BoxSet& domain() const { return domain_; }

  double f1(const Vec& x) const;
  double f2(const Vec& x) const;
  FirstOrder f1_first_order(const Vec& x) const;
  FirstOrder f2_first_order(const Vec& x) const;
  Vec f1_subgrad(const Vec& x) const { return f1_first_order(x).grad; }
  Vec f2_subgrad(const Vec& x) const { return f2_first_order(x).grad; }

  Oracle f1_oracle() const;
  Oracle f2_oracle() const;

  // Monitoring evaluations for traces and tests; never charged to the counter.
  double peek_f1(const Vec& x) const { return f1_.value(x); }
  double peek_f2(const Vec& x) const { return f2_.value(x); }
  FirstOrder peek_f1_first_order(const Vec& x) const { return f1_.first_order(x); }
  FirstOrder peek_f2_first_order(const Vec& x) const { return f2_.first_order(x); }

  OracleCounter& counter() const { return *counter_; }

 private:
  void check(const Vec& x) const;

  std::string name_;
  int dim_;
  RawFunction f1_;
  RawFunction f2_;
  BoxSet domain_;
  bool smooth_;
  std::shared_ptr<OracleCounter> counter_;
};

enum class IterKind { Outer, Inner, Epoch };

const char* iter_kind_name(IterKind k);

struct TraceRecord {
  std::int64_t oracle_calls = 0;
  double f1 = 0.0;
  double f2 = 0.0;
  double penalty = 0.0;
  std::optional<double> eta;
  IterKind iter_kind = IterKind::Outer;
};

// Append-only trace; records carrying a non-increasing call count are dropped
// so oracle_calls stays strictly increasing.
class Trace {
 public:
  // Call counts are stored relative to `offset` (the counter at run start).
  explicit Trace(double lambda = 1.0, std::int64_t offset = 0) : lambda_(lambda), offset_(offset) {}

  void record(const ConstrainedProblem& p, const Vec& x, IterKind kind,
              std::optional<double> eta = std::nullopt);
  void record_values(std::int64_t calls, double f1, double f2, IterKind kind,
                     std::optional<double> eta = std::nullopt);

  const std::vector<TraceRecord>& records() const { return records_; }
  double lambda() const { return lambda_; }
  std::int64_t offset() const { return offset_; }

 private:
  double lambda_;
  std::int64_t offset_;
  std::vector<TraceRecord> records_;
};

struct SolveReport {
  Vec x;
  double f1 = 0.0;
  double f2 = 0.0;
  std::int64_t oracle_calls = 0;
  Trace trace;
  // Effective parameters, echoed into summaries.
  std::map<std::string, double> params;
  std::vector<std::string> notes;
  // Iterates kept for property checks (outer iterates or bundle steps).
  std::vector<Vec> iterates;
};

double exact_penalty(const ConstrainedProblem& p, const Vec& x, double lambda);
double value_function_v(const ConstrainedProblem& p, const Vec& x, double eta);

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// x_alpha = c^{-1}((1 - alpha) c(x) + alpha c(y)).
Vec hidden_interpolate(const HiddenMap& map, const Vec& x, const Vec& y, double alpha);

}  // namespace hc
