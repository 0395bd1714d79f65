#pragma once

// Problem abstraction: a parameter space W plus evaluators for a loss L(w)
// and a vector C(w) of non-negative constraint violation indices, together
// with exact evaluation of the two objectives built from them:
//
//   regularized   PR(lambda):  min_{w in W}  L(w) + lambda . C(w)
//   constrained   PC(theta):   min_{w in W}  L(w)  s.t.  C(w) <= theta
//
// All domain types are immutable value types; evaluation is pure.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "prpc/errors.hpp"

namespace prpc {

// ---------------------------------------------------------------------------
// Domain types

/// One point of the parameter space: a finite real vector of dimension d >= 1.
struct Assignment {
  std::vector<double> w;

  Assignment() = default;
  explicit Assignment(std::vector<double> values) : w(std::move(values)) {
    for (double v : w) {
      if (!std::isfinite(v)) throw ContractViolation("Assignment: non-finite component");
    }
  }

  std::size_t dim() const { return w.size(); }
  double operator[](std::size_t k) const { return w[k]; }

  friend bool operator==(const Assignment& a, const Assignment& b) { return a.w == b.w; }
};

/// Closed interval [lo, hi] for one box dimension.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Parameter space: either a d-dimensional box or an explicit finite set.
struct ParamSpace {
  enum class Kind { box, finite };

  Kind kind = Kind::box;
  std::vector<Interval> box;          // kind == box
  std::vector<Assignment> elements;   // kind == finite

  static ParamSpace make_box(std::vector<Interval> intervals) {
    if (intervals.empty()) throw ContractViolation("ParamSpace: box needs dimension >= 1");
    for (const auto& iv : intervals) {
      if (!(iv.lo <= iv.hi)) throw ContractViolation("ParamSpace: box interval with lo > hi");
    }
    ParamSpace s;
    s.kind = Kind::box;
    s.box = std::move(intervals);
    return s;
  }

  static ParamSpace make_finite(std::vector<Assignment> points) {
    if (points.empty()) throw ContractViolation("ParamSpace: finite space must be non-empty");
    const std::size_t d = points.front().dim();
    for (const auto& p : points) {
      if (p.dim() != d) throw ContractViolation("ParamSpace: finite elements of mixed dimension");
    }
    ParamSpace s;
    s.kind = Kind::finite;
    s.elements = std::move(points);
    return s;
  }

  std::size_t dim() const {
    return kind == Kind::box ? box.size() : elements.front().dim();
  }

  bool contains(const Assignment& a) const {
    if (a.dim() != dim()) return false;
    if (kind == Kind::box) {
      for (std::size_t k = 0; k < box.size(); ++k) {
        if (a[k] < box[k].lo || a[k] > box[k].hi) return false;
      }
      return true;
    }
    for (const auto& e : elements) {
      if (e == a) return true;
    }
    return false;
  }
};

/// Non-negative weight vector trading loss against constraint violation.
struct Multipliers {
  std::vector<double> lambda;

  Multipliers() = default;
  explicit Multipliers(std::vector<double> values) : lambda(std::move(values)) {
    for (double v : lambda) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ContractViolation("Multipliers: components must be finite and >= 0");
      }
    }
  }

  std::size_t size() const { return lambda.size(); }
  double operator[](std::size_t j) const { return lambda[j]; }

  friend bool operator==(const Multipliers& a, const Multipliers& b) {
    return a.lambda == b.lambda;
  }
};

/// Per-constraint violation thresholds, each >= 0.
struct Threshold {
  std::vector<double> theta;

  Threshold() = default;
  explicit Threshold(std::vector<double> values) : theta(std::move(values)) {
    for (double v : theta) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ContractViolation("Threshold: components must be finite and >= 0");
      }
    }
  }

  std::size_t size() const { return theta.size(); }
  double operator[](std::size_t j) const { return theta[j]; }
};

/// A small fixed training set backing the ML instances.
struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;  // regression targets or 0/1 class labels

  std::size_t size() const { return inputs.size(); }
};

/// An experiment's single source of truth: space, evaluators, metadata.
///
/// Evaluators must be deterministic and total on the space. `violation` must
/// return component-wise non-negative values; eval_violation rejects (rather
/// than clips) anything negative so a buggy instance cannot masquerade as
/// valid. Analytic gradients and Lipschitz constants are optional extras used
/// by the descent solver and by test oracles when an instance provides them.
struct Problem {
  std::string name;
  std::size_t dim = 0;
  std::size_t num_constraints = 0;
  ParamSpace space;

  std::function<double(const Assignment&)> loss;
  std::function<std::vector<double>(const Assignment&)> violation;

  // Optional per-instance analytic derivatives (empty when unavailable).
  std::function<std::vector<double>(const Assignment&)> loss_grad;
  std::function<std::vector<std::vector<double>>(const Assignment&)> violation_grad;  // m x d

  // Optional Lipschitz constants of L and of each C_j over the space (0 = unknown).
  double loss_lipschitz = 0.0;
  std::vector<double> violation_lipschitz;

  // ML instances carry their training data for reporting (accuracy, outputs).
  std::shared_ptr<const Dataset> dataset;
  std::function<std::vector<double>(const Assignment&)> model_outputs;

  bool has_analytic_grad() const {
    return static_cast<bool>(loss_grad) && static_cast<bool>(violation_grad);
  }
  bool has_lipschitz() const {
    return loss_lipschitz > 0.0 && violation_lipschitz.size() == num_constraints;
  }
};

/// How a solve result was produced.
enum class Provenance { grid_global, descent_local, finite_enumeration };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::grid_global: return "grid_global";
    case Provenance::descent_local: return "descent_local";
    case Provenance::finite_enumeration: return "finite_enumeration";
  }
  return "unknown";
}

/// True for solver backends that return exact global optima of the
/// discretized problem (grid scans and finite enumeration).
inline bool is_exact(Provenance p) { return p != Provenance::descent_local; }

/// An assignment together with its evaluated L, C and regularized objective.
struct SolveResult {
  Assignment w;
  double loss = 0.0;
  std::vector<double> violation;
  double reg_objective = 0.0;
  Provenance provenance = Provenance::grid_global;
  bool converged = true;
  std::vector<std::string> notes;  // per-restart diagnostics etc.
};

// ---------------------------------------------------------------------------
// Operations

namespace detail {

inline void require_dim(const Problem& p, const Assignment& w) {
  if (w.dim() != p.dim) {
    throw ContractViolation("dimension mismatch: instance '" + p.name + "' has d=" +
                            std::to_string(p.dim) + ", assignment has d=" +
                            std::to_string(w.dim()));
  }
}

inline void require_multipliers(const Problem& p, const Multipliers& lambda) {
  if (lambda.size() != p.num_constraints) {
    throw ContractViolation("multiplier dimension mismatch: instance '" + p.name +
                            "' has m=" + std::to_string(p.num_constraints));
  }
}

}  // namespace detail

/// L(w). Throws EvaluationError if the evaluator returns a non-finite value.
inline double eval_loss(const Problem& p, const Assignment& w) {
  detail::require_dim(p, w);
  const double value = p.loss(w);
  if (!std::isfinite(value)) {
    throw EvaluationError("instance '" + p.name + "': non-finite loss");
  }
  return value;
}

/// C(w), component-wise >= 0. A negative component is an instance-definition
/// error and is rejected, never clipped.
inline std::vector<double> eval_violation(const Problem& p, const Assignment& w) {
  detail::require_dim(p, w);
  std::vector<double> c = p.violation(w);
  if (c.size() != p.num_constraints) {
    throw EvaluationError("instance '" + p.name + "': violation vector has wrong length");
  }
  for (double v : c) {
    if (!std::isfinite(v)) {
      throw EvaluationError("instance '" + p.name + "': non-finite violation component");
    }
    if (v < 0.0) {
      throw EvaluationError("instance '" + p.name + "': negative violation component (" +
                            std::to_string(v) + "); violation indices must be >= 0");
    }
  }
  return c;
}

/// lambda . c  with a fixed left-to-right summation order so repeated
/// evaluations are bit-identical.
inline double dot(const std::vector<double>& lambda, const std::vector<double>& c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) acc += lambda[j] * c[j];
  return acc;
}

/// L(w) + lambda . C(w).
inline double eval_regularized(const Problem& p, const Assignment& w, const Multipliers& lambda) {
  detail::require_multipliers(p, lambda);
  const double l = eval_loss(p, w);
  const std::vector<double> c = eval_violation(p, w);
  return l + dot(lambda.lambda, c);
}

/// C(w) <= theta component-wise.
inline bool is_feasible(const Problem& p, const Assignment& w, const Threshold& theta) {
  if (theta.size() != p.num_constraints) {
    throw ContractViolation("threshold dimension mismatch: instance '" + p.name + "'");
  }
  const std::vector<double> c = eval_violation(p, w);
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] > theta[j]) return false;
  }
  return true;
}

/// Component-wise a <= b.
inline bool leq(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
  }
  return true;
}

}  // namespace prpc
