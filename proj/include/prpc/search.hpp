#pragma once

// Multiplier-space search: sweep candidate multipliers, solve the regularized
// problem at each, keep solutions whose violation meets the threshold, and
// return the lowest-loss one. The uncountable candidate set "all non-negative
// multipliers" is reified as four finite strategies: an explicit list, a
// logarithmic grid, bisection on a single multiplier, and subgradient ascent
// on the violation residual.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prpc/core.hpp"
#include "prpc/errors.hpp"
#include "prpc/solvers.hpp"

namespace prpc {

// ---------------------------------------------------------------------------
// Strategies

struct LogLambdaGrid {
  double lo = 1e-3;
  double hi = 1e3;
  int count = 16;  // per multiplier dimension; cartesian product for m > 1
};

struct BisectionParams {
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;
  double tolerance = 1e-6;  // terminal bracket width
};

struct DualAscentParams {
  Multipliers lambda0;
  double eta = 1.0;
  int iterations = 50;
};

struct LambdaStrategy {
  enum class Kind { explicit_list, log_grid, binary_search, dual_ascent };

  Kind kind = Kind::log_grid;
  std::vector<Multipliers> list;  // explicit_list
  LogLambdaGrid log_grid;         // log_grid
  BisectionParams bisection;      // binary_search (m = 1 only)
  DualAscentParams ascent;        // dual_ascent

  static LambdaStrategy explicit_list(std::vector<Multipliers> candidates) {
    LambdaStrategy s;
    s.kind = Kind::explicit_list;
    s.list = std::move(candidates);
    return s;
  }
  static LambdaStrategy logarithmic(double lo, double hi, int count) {
    LambdaStrategy s;
    s.kind = Kind::log_grid;
    s.log_grid = {lo, hi, count};
    return s;
  }
  static LambdaStrategy bisect(double lambda_lo, double lambda_hi, double tolerance) {
    LambdaStrategy s;
    s.kind = Kind::binary_search;
    s.bisection = {lambda_lo, lambda_hi, tolerance};
    return s;
  }
  static LambdaStrategy dual(Multipliers lambda0, double eta, int iterations) {
    LambdaStrategy s;
    s.kind = Kind::dual_ascent;
    s.ascent = {std::move(lambda0), eta, iterations};
    return s;
  }
};

/// Log-spaced multiplier candidates: `count` points per dimension between lo
/// and hi, cartesian product across the m dimensions (first dimension fastest).
inline std::vector<Multipliers> log_lambda_candidates(std::size_t m, double lo, double hi,
                                                      int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw ContractViolation("log lambda grid: need 0 < lo <= hi and count >= 1");
  }
  std::vector<double> axis(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    if (i == 0) {
      axis[static_cast<std::size_t>(i)] = lo;
    } else if (i == count - 1) {
      axis[static_cast<std::size_t>(i)] = hi;  // endpoints exact, no exp/log round trip
    } else {
      axis[static_cast<std::size_t>(i)] =
          std::exp(std::lerp(std::log(lo), std::log(hi),
                             static_cast<double>(i) / static_cast<double>(count - 1)));
    }
  }
  long long total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= count;
  std::vector<Multipliers> out;
  out.reserve(static_cast<std::size_t>(total));
  for (long long index = 0; index < total; ++index) {
    std::vector<double> lambda(m);
    long long rest = index;
    for (std::size_t j = 0; j < m; ++j) {
      lambda[j] = axis[static_cast<std::size_t>(rest % count)];
      rest /= count;
    }
    out.push_back(Multipliers{std::move(lambda)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Outcome

/// One attempted multiplier with its solve.
struct Pr4pcEntry {
  Multipliers lambda;
  SolveResult result;
  bool stored = false;  // passed the C(w*) <= theta filter
};

/// Full search record: every attempt, the stored subset, and the winner
/// (lowest stored loss, first in trace order on ties). An empty stored set is
/// the "no multiplier found" outcome, not an error.
struct Pr4pcOutcome {
  std::vector<Pr4pcEntry> trace;
  std::vector<std::size_t> stored;      // indices into trace
  std::optional<std::size_t> winner;    // index into trace
  std::vector<std::string> notes;

  bool no_multiplier_found() const { return !winner.has_value(); }
  const Pr4pcEntry& winner_entry() const {
    if (!winner) throw ContractViolation("Pr4pcOutcome: no winner (empty stored set)");
    return trace[*winner];
  }
};

namespace detail {

inline void require_threshold(const Problem& p, const Threshold& theta) {
  if (theta.size() != p.num_constraints) {
    throw ContractViolation("threshold dimension mismatch: instance '" + p.name + "'");
  }
}

/// Apply the store filter and winner pick to a finished trace.
inline Pr4pcOutcome finalize_outcome(const Threshold& theta, std::vector<Pr4pcEntry> trace,
                                     std::vector<std::string> notes) {
  Pr4pcOutcome out;
  out.trace = std::move(trace);
  out.notes = std::move(notes);
  for (std::size_t i = 0; i < out.trace.size(); ++i) {
    Pr4pcEntry& entry = out.trace[i];
    entry.stored = leq(entry.result.violation, theta.theta);
    if (!entry.stored) continue;
    out.stored.push_back(i);
    if (!out.winner || entry.result.loss < out.trace[*out.winner].result.loss) {
      out.winner = i;
    }
  }
  if (!out.winner) out.notes.push_back("no multiplier found: stored set is empty");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Searches

/// Bisection on a single multiplier. Valid brackets have C(w*(lambda_lo)) >=
/// theta >= C(w*(lambda_hi)); with exact solves the violation is monotone in
/// lambda, so bisection homes in on the threshold crossing. Non-monotone
/// probe pairs (expected with the descent solver) are flagged in the notes.
inline Pr4pcOutcome binary_search_multiplier(const Problem& p, const Threshold& theta,
                                             double lambda_lo, double lambda_hi, double tolerance,
                                             const SolverChoice& solver) {
  detail::require_threshold(p, theta);
  if (p.num_constraints != 1) {
    throw ContractViolation("binary_search_multiplier: only defined for m = 1");
  }
  if (!(lambda_lo >= 0.0) || !(lambda_hi > lambda_lo) || !(tolerance > 0.0)) {
    throw ContractViolation("binary_search_multiplier: need 0 <= lambda_lo < lambda_hi, tol > 0");
  }

  std::vector<Pr4pcEntry> trace;
  auto probe = [&](double lambda) -> double {
    Pr4pcEntry entry;
    entry.lambda = Multipliers{{lambda}};
    entry.result = solve_pr(p, entry.lambda, solver);
    trace.push_back(std::move(entry));
    return trace.back().result.violation[0];
  };

  const double c_lo = probe(lambda_lo);
  const double c_hi = probe(lambda_hi);
  if (!(c_lo >= theta[0] && theta[0] >= c_hi)) {
    throw InvalidBracket("binary_search_multiplier: bracket [" + std::to_string(lambda_lo) +
                         ", " + std::to_string(lambda_hi) + "] does not straddle theta: C(lo)=" +
                         std::to_string(c_lo) + ", C(hi)=" + std::to_string(c_hi));
  }

  double lo = lambda_lo, hi = lambda_hi;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted in floating point
    const double c_mid = probe(mid);
    if (c_mid > theta[0]) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  std::vector<std::string> notes;
  for (std::size_t a = 0; a < trace.size(); ++a) {
    for (std::size_t b = 0; b < trace.size(); ++b) {
      if (trace[a].lambda[0] >= trace[b].lambda[0] &&
          trace[a].result.violation[0] > trace[b].result.violation[0] + 1e-9) {
        notes.push_back("non-monotone probes: C(" + std::to_string(trace[a].lambda[0]) +
                        ") > C(" + std::to_string(trace[b].lambda[0]) + ")");
      }
    }
  }
  return detail::finalize_outcome(theta, std::move(trace), std::move(notes));
}

/// Subgradient ascent on the multipliers: lambda <- max(0, lambda + eta *
/// (C(w*) - theta)). A solver failure at an iterate is recorded and the
/// search continues from the last valid multiplier.
inline Pr4pcOutcome dual_ascent(const Problem& p, const Threshold& theta,
                                const Multipliers& lambda0, double eta, int iterations,
                                const SolverChoice& solver) {
  detail::require_threshold(p, theta);
  detail::require_multipliers(p, lambda0);
  if (!(eta > 0.0) || iterations < 1) {
    throw ContractViolation("dual_ascent: need eta > 0 and iterations >= 1");
  }

  std::vector<Pr4pcEntry> trace;
  std::vector<std::string> notes;
  Multipliers lambda = lambda0;
  for (int t = 0; t < iterations; ++t) {
    Pr4pcEntry entry;
    entry.lambda = lambda;
    try {
      entry.result = solve_pr(p, lambda, solver);
    } catch (const std::exception& e) {
      notes.push_back("iteration " + std::to_string(t) + ": solver failed: " + e.what());
      continue;  // keep the last valid multiplier
    }
    std::vector<double> next(lambda.lambda);
    for (std::size_t j = 0; j < next.size(); ++j) {
      next[j] = std::max(0.0, next[j] + eta * (entry.result.violation[j] - theta[j]));
    }
    trace.push_back(std::move(entry));
    lambda = Multipliers{std::move(next)};
  }
  return detail::finalize_outcome(theta, std::move(trace), std::move(notes));
}

/// The multiplier sweep: solve the regularized problem for each candidate,
/// store the solutions meeting the threshold, pick the stored solution with
/// the smallest loss.
inline Pr4pcOutcome pr4pc(const Problem& p, const Threshold& theta,
                          const LambdaStrategy& strategy, const SolverChoice& solver) {
  detail::require_threshold(p, theta);
  switch (strategy.kind) {
    case LambdaStrategy::Kind::binary_search:
      return binary_search_multiplier(p, theta, strategy.bisection.lambda_lo,
                                      strategy.bisection.lambda_hi, strategy.bisection.tolerance,
                                      solver);
    case LambdaStrategy::Kind::dual_ascent:
      return dual_ascent(p, theta, strategy.ascent.lambda0, strategy.ascent.eta,
                         strategy.ascent.iterations, solver);
    case LambdaStrategy::Kind::explicit_list:
    case LambdaStrategy::Kind::log_grid: {
      const std::vector<Multipliers> candidates =
          strategy.kind == LambdaStrategy::Kind::explicit_list
              ? strategy.list
              : log_lambda_candidates(p.num_constraints, strategy.log_grid.lo,
                                      strategy.log_grid.hi, strategy.log_grid.count);
      if (candidates.empty()) {
        throw ContractViolation("pr4pc: empty multiplier candidate list");
      }
      std::vector<Pr4pcEntry> trace;
      trace.reserve(candidates.size());
      for (const Multipliers& lambda : candidates) {
        detail::require_multipliers(p, lambda);
        Pr4pcEntry entry;
        entry.lambda = lambda;
        entry.result = solve_pr(p, lambda, solver);
        trace.push_back(std::move(entry));
      }
      return detail::finalize_outcome(theta, std::move(trace), {});
    }
  }
  throw ContractViolation("pr4pc: unknown strategy kind");
}

}  // namespace prpc
