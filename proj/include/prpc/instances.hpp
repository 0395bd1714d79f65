#pragma once

// Canonical problem library. Each instance is a closed-form Problem chosen as
// the simplest function pair (L, C) reproducing one known failure mode of
// multiplier-tuned constraint injection:
//
//   plateau                 flat regularized objective at the tie multiplier
//   two_point_tie           two optima, same regularized value, different trade-offs
//   log_unbounded           constrained optimum attainable by no multiplier
//   vanishing_gradient      constrained optimum reached only as lambda -> inf
//   finite_table            explicit (L, C) rows for exact interval arithmetic
//   ordered_regression      MSE + output-ordering hinge on a 4-point dataset
//   balanced_classification log loss + relaxed balance penalty (the 0.5 pitfall)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "prpc/core.hpp"
#include "prpc/errors.hpp"

namespace prpc {

// ---------------------------------------------------------------------------
// Regularizer building blocks

/// Ordering penalty max(0, y_i - y_j): zero iff y_i <= y_j.
inline double hinge_order_penalty(const std::vector<double>& y, std::size_t i, std::size_t j) {
  if (i >= y.size() || j >= y.size()) {
    throw ContractViolation("hinge_order_penalty: index out of range");
  }
  if (i == j) throw ContractViolation("hinge_order_penalty: i and j must differ");
  return std::max(0.0, y[i] - y[j]);
}

/// Balance penalty |sum(y) - n/2| over outputs in [0,1]. Zero for perfectly
/// balanced outputs when n is even -- and also for the degenerate all-0.5
/// relaxation this library exists to exhibit.
inline double balance_penalty(const std::vector<double>& y) {
  if (y.empty()) throw ContractViolation("balance_penalty: empty output vector");
  double sum = 0.0;
  for (double v : y) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ContractViolation("balance_penalty: outputs must lie in [0,1]");
    }
    sum += v;
  }
  return std::abs(sum - 0.5 * static_cast<double>(y.size()));
}

// ---------------------------------------------------------------------------
// Instance constructors

namespace detail {

inline ParamSpace box1(double lo, double hi) {
  return ParamSpace::make_box({Interval{lo, hi}});
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

/// W=[0,2], L(w)=w, C(w)=max(0, 1-w). At lambda=1 the regularized objective
/// is constant 1 on [0,1]; below/above 1 the optimum jumps between w=0 and w=1.
inline Problem make_plateau() {
  Problem p;
  p.name = "plateau";
  p.dim = 1;
  p.num_constraints = 1;
  p.space = detail::box1(0.0, 2.0);
  p.loss = [](const Assignment& a) { return a[0]; };
  p.violation = [](const Assignment& a) {
    return std::vector<double>{std::max(0.0, 1.0 - a[0])};
  };
  p.loss_grad = [](const Assignment&) { return std::vector<double>{1.0}; };
  p.violation_grad = [](const Assignment& a) {
    // subgradient of max(0, 1-w): the active max branch
    return std::vector<std::vector<double>>{{1.0 - a[0] > 0.0 ? -1.0 : 0.0}};
  };
  p.loss_lipschitz = 1.0;
  p.violation_lipschitz = {1.0};
  return p;
}

/// Finite W = {a, b} with L(a)=0, C(a)=1 and L(b)=1, C(b)=0. At lambda=1 both
/// points score 1 under the regularized objective: equal value, opposite
/// loss/violation trade-offs.
inline Problem make_two_point_tie() {
  Problem p;
  p.name = "two_point_tie";
  p.dim = 1;
  p.num_constraints = 1;
  p.space = ParamSpace::make_finite(
      {Assignment{{0.0}}, Assignment{{1.0}}});  // point "a", point "b"
  p.loss = [](const Assignment& a) { return a[0] < 0.5 ? 0.0 : 1.0; };
  p.violation = [](const Assignment& a) {
    return std::vector<double>{a[0] < 0.5 ? 1.0 : 0.0};
  };
  return p;
}

/// W=[0, w_max], L(w)=-w, C(w)=ln(1+max(0,w)). Every multiplier leaves the
/// regularized problem unbounded below (operationally: the grid optimum pins
/// to w_max), while PC(theta) has the finite optimum w = e^theta - 1.
inline Problem make_log_unbounded(double w_max = 1e6) {
  if (!(w_max > 0.0)) throw ContractViolation("log_unbounded: w_max must be > 0");
  Problem p;
  p.name = "log_unbounded";
  p.dim = 1;
  p.num_constraints = 1;
  p.space = detail::box1(0.0, w_max);
  p.loss = [](const Assignment& a) { return -a[0]; };
  p.violation = [](const Assignment& a) {
    return std::vector<double>{std::log1p(std::max(0.0, a[0]))};
  };
  p.loss_grad = [](const Assignment&) { return std::vector<double>{-1.0}; };
  p.violation_grad = [](const Assignment& a) {
    return std::vector<std::vector<double>>{{a[0] > 0.0 ? 1.0 / (1.0 + a[0]) : 0.0}};
  };
  p.loss_lipschitz = 1.0;
  p.violation_lipschitz = {1.0};
  return p;
}

/// W=[0,10], L(w)=w, C(w)=exp(-w): a regularizer with vanishing gradient
/// against a loss with non-vanishing gradient. Interior optimum w* = ln(lambda)
/// with C(w*) = 1/lambda, so driving C below theta needs lambda ~ 1/theta.
inline Problem make_vanishing_gradient() {
  Problem p;
  p.name = "vanishing_gradient";
  p.dim = 1;
  p.num_constraints = 1;
  p.space = detail::box1(0.0, 10.0);
  p.loss = [](const Assignment& a) { return a[0]; };
  p.violation = [](const Assignment& a) { return std::vector<double>{std::exp(-a[0])}; };
  p.loss_grad = [](const Assignment&) { return std::vector<double>{1.0}; };
  p.violation_grad = [](const Assignment& a) {
    return std::vector<std::vector<double>>{{-std::exp(-a[0])}};
  };
  p.loss_lipschitz = 1.0;
  p.violation_lipschitz = {1.0};  // |exp(-w)| derivative bounded by 1 on [0,10]
  return p;
}

// ---------------------------------------------------------------------------
// Finite tables

/// One row of a finite_table instance.
struct TableRow {
  double loss = 0.0;
  std::vector<double> violation;
};

/// Finite instance with explicit (L, C) per point. Point k is the 1-D
/// assignment (k), so tables stay addressable from configs and traces.
inline Problem make_finite_table(std::vector<TableRow> rows, std::string name = "finite_table") {
  if (rows.empty()) throw ContractViolation("finite_table: needs at least one row");
  const std::size_t m = rows.front().violation.size();
  if (m == 0) throw ContractViolation("finite_table: needs m >= 1");
  std::vector<Assignment> points;
  points.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].violation.size() != m) {
      throw ContractViolation("finite_table: rows with mixed constraint counts");
    }
    points.push_back(Assignment{{static_cast<double>(k)}});
  }
  auto table = std::make_shared<const std::vector<TableRow>>(std::move(rows));
  auto row_of = [table, name](const Assignment& a) -> const TableRow& {
    const double idx = a[0];
    const auto k = static_cast<long long>(std::llround(idx));
    if (k < 0 || static_cast<std::size_t>(k) >= table->size() ||
        std::abs(idx - static_cast<double>(k)) > 1e-9) {
      throw ContractViolation("instance '" + name + "': assignment is not a table point");
    }
    return (*table)[static_cast<std::size_t>(k)];
  };

  Problem p;
  p.name = std::move(name);
  p.dim = 1;
  p.num_constraints = m;
  p.space = ParamSpace::make_finite(std::move(points));
  p.loss = [row_of](const Assignment& a) { return row_of(a).loss; };
  p.violation = [row_of](const Assignment& a) { return row_of(a).violation; };
  return p;
}

/// Documented table whose first row w* is a constrained optimum reachable by
/// exactly the multipliers in [2, 4].
inline Problem attainable_finite_table() {
  return make_finite_table({{1.0, {0.5}},    // w*
                            {0.0, {1.0}},    // a: enforces lambda >= 2
                            {3.0, {0.0}}},   // b: enforces lambda <= 4
                           "finite_table");
}

/// Documented table whose first row w* is PC-optimal at theta = C(w*) = 1 yet
/// attainable by no multiplier: the bounds cross (lower 1, upper 0.4).
inline Problem unattainable_finite_table() {
  return make_finite_table({{1.0, {1.0}},    // w*
                            {0.0, {2.0}},    // a: enforces lambda >= 1
                            {1.2, {0.5}}},   // b: enforces lambda <= 0.4
                           "finite_table_unattainable");
}

// ---------------------------------------------------------------------------
// ML instances

/// Fixed 4-point regression set with an ordering conflict: the exact-fit
/// weights (2, 1) order the two designated outputs the wrong way round.
inline Dataset ordered_regression_dataset() {
  Dataset d;
  d.inputs = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}};
  d.targets = {2.0, 1.0, 3.0, 1.0};
  return d;
}

/// Seeded variant: inputs uniform in [-1,1]^2, targets from a fixed linear
/// rule, same ordering constraint on the first two outputs.
inline Dataset ordered_regression_dataset(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ContractViolation("ordered_regression: n must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = unif(rng), x1 = unif(rng);
    d.inputs.push_back({x0, x1});
    d.targets.push_back(2.0 * x0 + x1);
  }
  return d;
}

/// Linear model y = w . x, MSE loss, single ordering constraint
/// C = max(0, y_0 - y_1) between the first two training outputs.
inline Problem make_ordered_regression(Dataset data = ordered_regression_dataset()) {
  if (data.size() < 2) throw ContractViolation("ordered_regression: needs >= 2 points");
  auto ds = std::make_shared<const Dataset>(std::move(data));
  const std::size_t n = ds->size();

  auto outputs = [ds, n](const Assignment& a) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = a[0] * ds->inputs[i][0] + a[1] * ds->inputs[i][1];
    }
    return y;
  };

  Problem p;
  p.name = "ordered_regression";
  p.dim = 2;
  p.num_constraints = 1;
  p.space = ParamSpace::make_box({Interval{-5.0, 5.0}, Interval{-5.0, 5.0}});
  p.dataset = ds;
  p.model_outputs = outputs;
  p.loss = [ds, outputs, n](const Assignment& a) {
    const std::vector<double> y = outputs(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - ds->targets[i];
      acc += r * r;
    }
    return acc / static_cast<double>(n);
  };
  p.violation = [outputs](const Assignment& a) {
    return std::vector<double>{hinge_order_penalty(outputs(a), 0, 1)};
  };
  p.loss_grad = [ds, outputs, n](const Assignment& a) {
    const std::vector<double> y = outputs(a);
    std::vector<double> g(2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - ds->targets[i];
      g[0] += 2.0 * r * ds->inputs[i][0] / static_cast<double>(n);
      g[1] += 2.0 * r * ds->inputs[i][1] / static_cast<double>(n);
    }
    return g;
  };
  p.violation_grad = [ds, outputs](const Assignment& a) {
    const std::vector<double> y = outputs(a);
    std::vector<double> g(2, 0.0);
    if (y[0] - y[1] > 0.0) {
      g[0] = ds->inputs[0][0] - ds->inputs[1][0];
      g[1] = ds->inputs[0][1] - ds->inputs[1][1];
    }
    return std::vector<std::vector<double>>{g};
  };
  return p;
}

/// Fixed 10-point set: positive scalar inputs, the five largest labelled 1.
/// A no-bias logistic model puts every output on the same side of 0.5, so the
/// only balanced reachable prediction vector is the all-0.5 one at w=0.
inline Dataset balanced_classification_dataset() {
  Dataset d;
  for (int i = 1; i <= 10; ++i) {
    d.inputs.push_back({0.25 * static_cast<double>(i)});
    d.targets.push_back(i >= 6 ? 1.0 : 0.0);
  }
  return d;
}

/// Seeded variant: n (even) positive inputs, top half labelled 1.
inline Dataset balanced_classification_dataset(std::size_t n, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) {
    throw ContractViolation("balanced_classification: n must be even and >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.25, 2.5);
  std::vector<double> xs(n);
  for (auto& x : xs) x = unif(rng);
  std::sort(xs.begin(), xs.end());
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.inputs.push_back({xs[i]});
    d.targets.push_back(i >= n / 2 ? 1.0 : 0.0);
  }
  return d;
}

/// Logistic model y = sigmoid(w x), mean log loss, relaxed balance penalty
/// C = |sum(y) - n/2| on the raw sigmoid outputs (not rounded labels).
inline Problem make_balanced_classification(Dataset data = balanced_classification_dataset()) {
  if (data.size() < 2) throw ContractViolation("balanced_classification: needs >= 2 points");
  auto ds = std::make_shared<const Dataset>(std::move(data));
  const std::size_t n = ds->size();

  auto outputs = [ds, n](const Assignment& a) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = detail::sigmoid(a[0] * ds->inputs[i][0]);
    return y;
  };

  Problem p;
  p.name = "balanced_classification";
  p.dim = 1;
  p.num_constraints = 1;
  p.space = detail::box1(-8.0, 8.0);
  p.dataset = ds;
  p.model_outputs = outputs;
  p.loss = [ds, outputs, n](const Assignment& a) {
    const std::vector<double> y = outputs(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = ds->targets[i];
      acc -= t * std::log(y[i]) + (1.0 - t) * std::log(1.0 - y[i]);
    }
    return acc / static_cast<double>(n);
  };
  p.violation = [outputs](const Assignment& a) {
    return std::vector<double>{balance_penalty(outputs(a))};
  };
  p.loss_grad = [ds, outputs, n](const Assignment& a) {
    const std::vector<double> y = outputs(a);
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g += (y[i] - ds->targets[i]) * ds->inputs[i][0] / static_cast<double>(n);
    }
    return std::vector<double>{g};
  };
  p.violation_grad = [ds, outputs, n](const Assignment& a) {
    const std::vector<double> y = outputs(a);
    double sum = 0.0;
    for (double v : y) sum += v;
    const double sign = sum - 0.5 * static_cast<double>(n) >= 0.0 ? 1.0 : -1.0;
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += y[i] * (1.0 - y[i]) * ds->inputs[i][0];
    return std::vector<std::vector<double>>{{sign * g}};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Name-driven construction

/// Instance request: a recognized name plus a flat parameter map. Documented
/// keys per name (all optional unless noted):
///   plateau, two_point_tie, vanishing_gradient   -- none
///   log_unbounded            w_max (default 1e6)
///   finite_table             preset: 0 = documented attainable table (default),
///                                    1 = documented unattainable table;
///                            or explicit rows: rows, m, r{i}_L, r{i}_C{j}
///   ordered_regression       n + seed (seeded dataset; default fixed 4-point set)
///   balanced_classification  n (even) + seed (default fixed 10-point set)
struct InstanceSpec {
  std::string name;
  std::map<std::string, double> params;
};

namespace detail {

class ParamReader {
 public:
  ParamReader(const InstanceSpec& spec) : spec_(spec) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return spec_.params.count(key) > 0;
  }
  double get(const std::string& key, double fallback) {
    seen_.insert(key);
    auto it = spec_.params.find(key);
    return it == spec_.params.end() ? fallback : it->second;
  }
  double require(const std::string& key) {
    seen_.insert(key);
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) {
      throw ContractViolation("instance '" + spec_.name + "': missing param '" + key + "'");
    }
    return it->second;
  }
  void reject_unknown() const {
    for (const auto& [key, value] : spec_.params) {
      (void)value;
      if (!seen_.count(key)) {
        throw ContractViolation("instance '" + spec_.name + "': unknown param '" + key + "'");
      }
    }
  }

 private:
  const InstanceSpec& spec_;
  std::set<std::string> seen_;
};

inline Problem make_finite_table_from_params(ParamReader& params) {
  if (params.has("rows")) {
    const auto rows = static_cast<std::size_t>(params.require("rows"));
    const auto m = static_cast<std::size_t>(params.get("m", 1.0));
    if (rows == 0 || m == 0) throw ContractViolation("finite_table: rows and m must be >= 1");
    std::vector<TableRow> table(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      table[i].loss = params.require("r" + std::to_string(i) + "_L");
      table[i].violation.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        table[i].violation[j] =
            params.require("r" + std::to_string(i) + "_C" + std::to_string(j));
      }
    }
    return make_finite_table(std::move(table));
  }
  const double preset = params.get("preset", 0.0);
  if (preset == 0.0) return attainable_finite_table();
  if (preset == 1.0) return unattainable_finite_table();
  throw ContractViolation("finite_table: preset must be 0 (attainable) or 1 (unattainable)");
}

}  // namespace detail

inline Problem make_instance(const InstanceSpec& spec) {
  detail::ParamReader params(spec);
  Problem p;
  if (spec.name == "plateau") {
    p = make_plateau();
  } else if (spec.name == "two_point_tie") {
    p = make_two_point_tie();
  } else if (spec.name == "log_unbounded") {
    p = make_log_unbounded(params.get("w_max", 1e6));
  } else if (spec.name == "vanishing_gradient") {
    p = make_vanishing_gradient();
  } else if (spec.name == "finite_table") {
    p = detail::make_finite_table_from_params(params);
  } else if (spec.name == "ordered_regression") {
    p = params.has("n") ? make_ordered_regression(ordered_regression_dataset(
                              static_cast<std::size_t>(params.require("n")),
                              static_cast<std::uint64_t>(params.get("seed", 0.0))))
                        : make_ordered_regression();
  } else if (spec.name == "balanced_classification") {
    p = params.has("n") ? make_balanced_classification(balanced_classification_dataset(
                              static_cast<std::size_t>(params.require("n")),
                              static_cast<std::uint64_t>(params.get("seed", 0.0))))
                        : make_balanced_classification();
  } else {
    throw ContractViolation("unknown instance name '" + spec.name + "'");
  }
  params.reject_unknown();
  return p;
}

/// The seven default instances, in a fixed order.
inline std::vector<Problem> bundled_instances() {
  return {make_plateau(),
          make_two_point_tie(),
          make_log_unbounded(),
          make_vanishing_gradient(),
          attainable_finite_table(),
          make_ordered_regression(),
          make_balanced_classification()};
}

}  // namespace prpc
