#pragma once

// Certification tools. Everything here quantifies over the evaluation grid
// (exact for finite spaces, a refinable approximation for boxes):
//
//   check_theorem1           every exact regularized optimum is a constrained
//                            optimum at threshold C(w*)
//   attainability_halfspaces the linear inequalities lambda . dC + dL >= 0 a
//                            candidate optimum w* imposes on multiplier space
//   multiplier_interval      closed-form [lower, upper] for one multiplier
//   multiplier_region_feasible  grid scan of the half-space intersection
//   monotonicity_scan        raising lambda_j never raises C_j (exact solves)
//   sensitivity_curve        smallest multiplier driving C below each theta

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prpc/core.hpp"
#include "prpc/errors.hpp"
#include "prpc/search.hpp"
#include "prpc/solvers.hpp"

namespace prpc {

// Ratios with |dC_j| below this are routed to the dC_j = 0 branch instead of
// dividing; the blowup near the boundary is surfaced by sensitivity_curve,
// not hidden inside interval arithmetic.
inline constexpr double kZeroDeltaC = 1e-12;

// Default absolute tolerance for optimality comparisons.
inline constexpr double kOptimalityTol = 1e-9;

// ---------------------------------------------------------------------------
// Regularized optimum => constrained optimum

struct Theorem1Report {
  bool holds = false;
  SolveResult optimum;                       // the regularized grid optimum checked
  std::optional<Assignment> counterexample;  // feasible point with smaller loss
  double counterexample_loss = 0.0;
  std::string details;
};

/// Solve the regularized problem exactly on the grid, then verify that no
/// grid point with C <= C(w*) undercuts L(w*). For exact solves this must
/// hold; a counterexample indicates a broken instance or solver.
inline Theorem1Report check_theorem1(const Problem& p, const Multipliers& lambda,
                                     const GridSpec& grid, double tol = kOptimalityTol) {
  Theorem1Report report;
  report.optimum = solve_pr_grid(p, lambda, grid);
  report.holds = true;
  for_each_grid_point(p, grid, [&](const Assignment& w, double loss, const std::vector<double>& c) {
    if (!report.holds) return;
    if (leq(c, report.optimum.violation) && loss < report.optimum.loss - tol) {
      report.holds = false;
      report.counterexample = w;
      report.counterexample_loss = loss;
      report.details = "feasible grid point with loss " + std::to_string(loss) +
                       " < optimum loss " + std::to_string(report.optimum.loss);
    }
  });
  if (report.holds) report.details = "no feasible grid point undercuts the optimum";
  return report;
}

// ---------------------------------------------------------------------------
// Attainability half-spaces

/// One inequality lambda . delta_c + delta_l >= 0 over multiplier space,
/// contributed by the witness assignment.
struct HalfSpace {
  std::vector<double> delta_c;  // C(w) - C(w*)
  double delta_l = 0.0;         // L(w) - L(w*)
  Assignment witness;
};

struct AttainabilityHalfspaces {
  std::vector<HalfSpace> halfspaces;
  // Witnesses with dC = 0 but dL < 0: they certify that w* is not a
  // constrained optimum at theta = C(w*), so the premise of the interval
  // analysis fails. Kept separate because no multiplier can fix them.
  std::vector<HalfSpace> optimality_violations;
};

namespace detail {

inline bool all_near_zero(const std::vector<double>& v) {
  for (double x : v) {
    if (std::abs(x) > kZeroDeltaC) return false;
  }
  return true;
}

}  // namespace detail

/// Instantiate the multiplier-space inequalities over the grid. Grid points
/// with dC = 0 and dL >= 0 are trivially satisfied and skipped; dC = 0 with
/// dL < 0 goes to optimality_violations.
inline AttainabilityHalfspaces attainability_halfspaces(const Problem& p,
                                                        const Assignment& w_star,
                                                        const GridSpec& grid,
                                                        double tol = kOptimalityTol) {
  detail::require_dim(p, w_star);
  const double star_loss = eval_loss(p, w_star);
  const std::vector<double> star_c = eval_violation(p, w_star);

  AttainabilityHalfspaces out;
  for_each_grid_point(p, grid, [&](const Assignment& w, double loss, const std::vector<double>& c) {
    std::vector<double> delta_c(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) delta_c[j] = c[j] - star_c[j];
    const double delta_l = loss - star_loss;
    if (detail::all_near_zero(delta_c)) {
      if (delta_l < -tol) {
        out.optimality_violations.push_back(HalfSpace{std::move(delta_c), delta_l, w});
      }
      return;
    }
    out.halfspaces.push_back(HalfSpace{std::move(delta_c), delta_l, w});
  });
  return out;
}

/// True iff lambda satisfies every half-space within tol.
inline bool satisfies_halfspaces(const std::vector<HalfSpace>& halfspaces,
                                 const Multipliers& lambda, double tol = kOptimalityTol) {
  for (const HalfSpace& hs : halfspaces) {
    if (dot(lambda.lambda, hs.delta_c) + hs.delta_l < -tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Multiplier interval (single component, others fixed)

/// Feasible range for one multiplier component: every witness with a lower
/// j-th violation than w* caps lambda_j from above, every witness with a
/// higher one props it up from below. An empty range certifies that w* is
/// unattainable through this component for the fixed remaining multipliers.
struct MultiplierInterval {
  double lower = 0.0;  // max(0, lower bounds)
  double upper = std::numeric_limits<double>::infinity();
  bool feasible = true;
  std::optional<Assignment> binding_lower_witness;
  std::optional<Assignment> binding_upper_witness;
  std::optional<Assignment> infeasibility_witness;  // dC_j = 0 with negative residual
};

/// lambda_other holds the fixed components in index order with j removed
/// (empty when m = 1). The bound ratio for a witness is
///   R = -(dL + lambda_other . dC_other) / dC_j.
inline MultiplierInterval multiplier_interval(const std::vector<HalfSpace>& halfspaces,
                                              std::size_t j,
                                              const std::vector<double>& lambda_other = {}) {
  MultiplierInterval interval;
  for (const HalfSpace& hs : halfspaces) {
    const std::size_t m = hs.delta_c.size();
    if (j >= m || lambda_other.size() + 1 != m) {
      throw ContractViolation("multiplier_interval: component index or lambda_other size "
                              "inconsistent with half-space dimension");
    }
    double residual = hs.delta_l;
    std::size_t other = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      residual += lambda_other[other++] * hs.delta_c[k];
    }
    const double dcj = hs.delta_c[j];
    if (std::abs(dcj) <= kZeroDeltaC) {
      if (residual < 0.0) {
        interval.feasible = false;
        interval.infeasibility_witness = hs.witness;
      }
      continue;
    }
    const double ratio = -residual / dcj;
    if (dcj > 0.0) {
      if (ratio > interval.lower) {
        interval.lower = ratio;
        interval.binding_lower_witness = hs.witness;
      }
    } else {
      if (ratio < interval.upper) {
        interval.upper = ratio;
        interval.binding_upper_witness = hs.witness;
      }
    }
  }
  if (interval.lower > interval.upper) interval.feasible = false;
  return interval;
}

// ---------------------------------------------------------------------------
// Multiplier region scan (general m)

struct RegionScan {
  std::vector<Multipliers> feasible_points;
  bool any = false;
};

/// Check each candidate multiplier against the full half-space intersection.
/// An empty result is evidence (not proof) of unattainability for m > 1; for
/// m = 1 the exact interval is authoritative.
inline RegionScan multiplier_region_feasible(const std::vector<HalfSpace>& halfspaces,
                                             const std::vector<Multipliers>& candidates,
                                             double tol = kOptimalityTol) {
  RegionScan scan;
  for (const Multipliers& lambda : candidates) {
    if (satisfies_halfspaces(halfspaces, lambda, tol)) {
      scan.feasible_points.push_back(lambda);
    }
  }
  scan.any = !scan.feasible_points.empty();
  return scan;
}

// ---------------------------------------------------------------------------
// Monotonicity scan

struct MonotonicityViolation {
  Multipliers lambda_hi;  // the larger j-th component
  Multipliers lambda_lo;
  double c_hi = 0.0;  // violation achieved at lambda_hi (should be <= c_lo)
  double c_lo = 0.0;
  Provenance provenance = Provenance::grid_global;
};

/// One scanned multiplier with the violation its optimum achieved.
struct MonotonicityObservation {
  Multipliers lambda;
  double c = 0.0;
  Provenance provenance = Provenance::grid_global;
};

struct MonotonicityReport {
  long long pairs_checked = 0;
  std::vector<MonotonicityViolation> violations;
  std::vector<MonotonicityObservation> observations;  // scan order
};

/// Solve the regularized problem along a list of multipliers that differ only
/// in component j and check every ordered pair: a larger lambda_j must not
/// yield a larger C_j. Exact solves cannot violate this; descent solves can,
/// and the report records the evidence.
inline MonotonicityReport monotonicity_scan(const Problem& p,
                                            const std::vector<Multipliers>& lambdas,
                                            std::size_t j, const SolverChoice& solver,
                                            double tol = kOptimalityTol) {
  if (j >= p.num_constraints) {
    throw ContractViolation("monotonicity_scan: component index out of range");
  }
  if (lambdas.size() < 2) {
    throw ContractViolation("monotonicity_scan: need at least two multipliers");
  }
  for (const Multipliers& lambda : lambdas) {
    detail::require_multipliers(p, lambda);
    for (std::size_t k = 0; k < p.num_constraints; ++k) {
      if (k != j && lambda[k] != lambdas.front()[k]) {
        throw ContractViolation("monotonicity_scan: lambdas must vary only in component " +
                                std::to_string(j));
      }
    }
  }

  std::vector<SolveResult> solves;
  solves.reserve(lambdas.size());
  for (const Multipliers& lambda : lambdas) solves.push_back(solve_pr(p, lambda, solver));

  MonotonicityReport report;
  for (std::size_t a = 0; a < lambdas.size(); ++a) {
    report.observations.push_back(
        MonotonicityObservation{lambdas[a], solves[a].violation[j], solves[a].provenance});
  }
  for (std::size_t a = 0; a < lambdas.size(); ++a) {
    for (std::size_t b = 0; b < lambdas.size(); ++b) {
      if (a == b || lambdas[a][j] < lambdas[b][j]) continue;
      ++report.pairs_checked;
      if (solves[a].violation[j] > solves[b].violation[j] + tol) {
        report.violations.push_back(MonotonicityViolation{lambdas[a], lambdas[b],
                                                          solves[a].violation[j],
                                                          solves[b].violation[j],
                                                          solves[a].provenance});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sensitivity curve

struct SensitivityRow {
  double theta = 0.0;
  std::optional<double> lambda;  // smallest multiplier achieving C <= theta
};

struct SensitivityCurve {
  std::vector<SensitivityRow> rows;
  std::vector<std::pair<double, double>> samples;  // (lambda, achieved C) per probe
};

/// For each target theta (descending), the smallest multiplier in a log grid
/// whose exact optimum satisfies C(w*) <= theta. Thresholds near the floor of
/// the achievable violations need multipliers near the top of the range --
/// the numerical blowup this module exists to expose.
inline SensitivityCurve sensitivity_curve(const Problem& p, const std::vector<double>& thetas,
                                          double lambda_lo, double lambda_hi, int lambda_count,
                                          const GridSpec& grid) {
  if (p.num_constraints != 1) {
    throw ContractViolation("sensitivity_curve: only defined for m = 1");
  }
  for (std::size_t i = 0; i + 1 < thetas.size(); ++i) {
    if (thetas[i] < thetas[i + 1]) {
      throw ContractViolation("sensitivity_curve: thetas must be sorted descending");
    }
  }
  SensitivityCurve curve;
  std::vector<std::pair<double, double>>& samples = curve.samples;
  for (const Multipliers& lambda : log_lambda_candidates(1, lambda_lo, lambda_hi, lambda_count)) {
    const SolveResult r = solve_pr_grid(p, lambda, grid);
    samples.emplace_back(lambda[0], r.violation[0]);
  }
  for (double theta : thetas) {
    SensitivityRow row;
    row.theta = theta;
    for (const auto& [lambda, c] : samples) {
      if (c <= theta) {
        row.lambda = lambda;
        break;
      }
    }
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace prpc
