#pragma once

// Solution backends for the two problem formulations.
//
// The grid solver is the certification oracle: exhaustive evaluation over a
// uniform discretization (or the full finite space), exact-by-construction
// and auditable. The descent solver is the realistic counterpart whose local
// optima exhibit the failure modes the grid oracle certifies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "prpc/core.hpp"
#include "prpc/errors.hpp"

namespace prpc {

// ---------------------------------------------------------------------------
// Configuration

/// Tie handling among equal-value grid optima. Preferring lower violation
/// makes the multiplier sweep recover the C=0 endpoint of plateaus; the
/// opposite preference exists to demonstrate what happens without that.
enum class TieBreak { prefer_low_violation, prefer_high_violation };

struct GridSpec {
  int points_per_dim = 1001;          // box spaces; >= 2
  long long budget = 10'000'000;      // max evaluations per solve
  TieBreak tie_break = TieBreak::prefer_low_violation;
  int threads = 1;                    // 0 = hardware concurrency
};

struct DescentConfig {
  double step_size = 0.05;
  int max_iters = 5000;
  double grad_tolerance = 1e-6;
  int restarts = 4;
  std::uint64_t seed = 0;
  double fd_step = 0.0;  // 0 = automatic 1e-6 * max(1, |w_k|)
};

// ---------------------------------------------------------------------------
// Grid enumeration

namespace detail {

/// Uniform grid over a box (mixed-radix decode) or the elements of a finite
/// space. Point coordinates use lo + (i * (hi - lo)) / (P - 1) so that both
/// endpoints and simple fractions come out exactly.
class GridIndexer {
 public:
  GridIndexer(const Problem& p, const GridSpec& spec) : space_(&p.space) {
    if (space_->kind == ParamSpace::Kind::finite) {
      total_ = static_cast<long long>(space_->elements.size());
    } else {
      if (spec.points_per_dim < 2) {
        throw ContractViolation("GridSpec: points_per_dim must be >= 2");
      }
      points_ = spec.points_per_dim;
      total_ = 1;
      for (std::size_t k = 0; k < space_->box.size(); ++k) {
        if (total_ > std::numeric_limits<long long>::max() / points_) {
          total_ = std::numeric_limits<long long>::max();
          break;
        }
        total_ *= points_;
      }
    }
    if (total_ > spec.budget) {
      throw BudgetExceeded("grid requires " + std::to_string(total_) +
                               " evaluations, budget is " + std::to_string(spec.budget),
                           total_);
    }
  }

  long long size() const { return total_; }

  Assignment point(long long index) const {
    if (space_->kind == ParamSpace::Kind::finite) {
      return space_->elements[static_cast<std::size_t>(index)];
    }
    std::vector<double> w(space_->box.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto i = static_cast<double>(index % points_);
      index /= points_;
      const Interval& iv = space_->box[k];
      w[k] = iv.lo + (i * (iv.hi - iv.lo)) / static_cast<double>(points_ - 1);
    }
    return Assignment{std::move(w)};
  }

 private:
  const ParamSpace* space_;
  long long points_ = 0;
  long long total_ = 0;
};

/// Candidate ordering: objective value, then violation vector, then the
/// assignment itself. A strict weak ordering, so chunked reductions merge to
/// the same winner in any order.
inline bool better_candidate(double value_a, const std::vector<double>& c_a, const Assignment& w_a,
                             double value_b, const std::vector<double>& c_b, const Assignment& w_b,
                             TieBreak tie_break) {
  if (value_a != value_b) return value_a < value_b;
  if (c_a != c_b) {
    const bool a_lex_less = std::lexicographical_compare(c_a.begin(), c_a.end(),
                                                         c_b.begin(), c_b.end());
    return tie_break == TieBreak::prefer_low_violation ? a_lex_less : !a_lex_less;
  }
  return std::lexicographical_compare(w_a.w.begin(), w_a.w.end(), w_b.w.begin(), w_b.w.end());
}

struct GridCandidate {
  bool valid = false;
  double value = 0.0;
  double loss = 0.0;
  std::vector<double> violation;
  Assignment w;
};

/// Minimize `objective(loss, violation)` over the grid, where `admit` filters
/// candidates. Chunked across threads; the merge uses better_candidate, so
/// the result is independent of the chunking.
template <typename Objective, typename Admit>
GridCandidate grid_minimize(const Problem& p, const GridSpec& spec, Objective objective,
                            Admit admit) {
  const GridIndexer grid(p, spec);
  const long long n = grid.size();

  auto scan = [&](long long begin, long long end) {
    GridCandidate best;
    for (long long i = begin; i < end; ++i) {
      const Assignment w = grid.point(i);
      const double loss = eval_loss(p, w);
      std::vector<double> c = eval_violation(p, w);
      if (!admit(c)) continue;
      const double value = objective(loss, c);
      if (!best.valid ||
          better_candidate(value, c, w, best.value, best.violation, best.w, spec.tie_break)) {
        best = GridCandidate{true, value, loss, std::move(c), w};
      }
    }
    return best;
  };

  int threads = spec.threads == 0
                    ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                    : spec.threads;
  threads = static_cast<int>(std::min<long long>(threads, std::max<long long>(n, 1)));

  GridCandidate best;
  if (threads <= 1) {
    best = scan(0, n);
  } else {
    std::vector<GridCandidate> partial(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    const long long chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long long begin = t * chunk;
      const long long end = std::min(n, begin + chunk);
      pool.emplace_back([&, t, begin, end] { partial[static_cast<std::size_t>(t)] = scan(begin, end); });
    }
    for (auto& th : pool) th.join();
    for (auto& cand : partial) {
      if (!cand.valid) continue;
      if (!best.valid || better_candidate(cand.value, cand.violation, cand.w, best.value,
                                          best.violation, best.w, spec.tie_break)) {
        best = std::move(cand);
      }
    }
  }
  return best;
}

}  // namespace detail

/// Visit every grid point (or finite element) in index order with its
/// evaluated loss and violation. The workhorse behind the certification scans.
template <typename Fn>
void for_each_grid_point(const Problem& p, const GridSpec& spec, Fn&& fn) {
  const detail::GridIndexer grid(p, spec);
  for (long long i = 0; i < grid.size(); ++i) {
    const Assignment w = grid.point(i);
    const double loss = eval_loss(p, w);
    const std::vector<double> c = eval_violation(p, w);
    fn(w, loss, c);
  }
}

/// Number of evaluations a grid solve of this problem performs.
inline long long grid_size(const Problem& p, const GridSpec& spec) {
  return detail::GridIndexer(p, spec).size();
}

// ---------------------------------------------------------------------------
// Grid solves

/// Exact minimizer of L + lambda . C over the grid. Ties break deterministically
/// per GridSpec::tie_break, then by lexicographically smaller w.
inline SolveResult solve_pr_grid(const Problem& p, const Multipliers& lambda,
                                 const GridSpec& spec) {
  detail::require_multipliers(p, lambda);
  detail::GridCandidate best = detail::grid_minimize(
      p, spec,
      [&](double loss, const std::vector<double>& c) { return loss + dot(lambda.lambda, c); },
      [](const std::vector<double>&) { return true; });

  SolveResult r;
  r.w = std::move(best.w);
  r.loss = best.loss;
  r.violation = std::move(best.violation);
  r.reg_objective = best.value;
  r.provenance = p.space.kind == ParamSpace::Kind::finite ? Provenance::finite_enumeration
                                                          : Provenance::grid_global;
  r.converged = true;
  return r;
}

/// Exact minimizer of L over the feasible grid points (C <= theta). Returns
/// nullopt when no grid point is feasible -- an outcome, not an error.
inline std::optional<SolveResult> solve_pc_grid(const Problem& p, const Threshold& theta,
                                                const GridSpec& spec) {
  if (theta.size() != p.num_constraints) {
    throw ContractViolation("threshold dimension mismatch: instance '" + p.name + "'");
  }
  detail::GridCandidate best = detail::grid_minimize(
      p, spec, [](double loss, const std::vector<double>&) { return loss; },
      [&](const std::vector<double>& c) { return leq(c, theta.theta); });
  if (!best.valid) return std::nullopt;

  SolveResult r;
  r.w = std::move(best.w);
  r.loss = best.loss;
  r.violation = std::move(best.violation);
  r.reg_objective = best.value;  // equals loss; no multiplier in play
  r.provenance = p.space.kind == ParamSpace::Kind::finite ? Provenance::finite_enumeration
                                                          : Provenance::grid_global;
  r.converged = true;
  return r;
}

// ---------------------------------------------------------------------------
// Finite differences

/// Central-difference gradient of the regularized objective, shrinking
/// one-sidedly where the stencil would leave the box. Step h <= 0 selects
/// the default 1e-6 * max(1, |w_k|) per component.
inline std::vector<double> finite_diff_grad(const Problem& p, const Multipliers& lambda,
                                            const Assignment& w, double h = 0.0) {
  detail::require_dim(p, w);
  detail::require_multipliers(p, lambda);
  if (p.space.kind != ParamSpace::Kind::box) {
    throw ContractViolation("finite_diff_grad: requires a box space");
  }
  std::vector<double> g(p.dim);
  std::vector<double> probe = w.w;
  for (std::size_t k = 0; k < p.dim; ++k) {
    const Interval& iv = p.space.box[k];
    const double hk = h > 0.0 ? h : 1e-6 * std::max(1.0, std::abs(w[k]));
    const double hp = std::min(hk, iv.hi - w[k]);
    const double hm = std::min(hk, w[k] - iv.lo);
    if (!(hp + hm > 0.0)) {
      throw ContractViolation("finite_diff_grad: degenerate interval in dimension " +
                              std::to_string(k));
    }
    probe[k] = w[k] + hp;
    const double f_plus = eval_regularized(p, Assignment{probe}, lambda);
    probe[k] = w[k] - hm;
    const double f_minus = eval_regularized(p, Assignment{probe}, lambda);
    probe[k] = w[k];
    g[k] = (f_plus - f_minus) / (hp + hm);
    if (!std::isfinite(g[k])) {
      throw EvaluationError("finite_diff_grad: non-finite difference in dimension " +
                            std::to_string(k));
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Projected gradient descent

namespace detail {

inline std::vector<double> regularized_grad(const Problem& p, const Multipliers& lambda,
                                            const Assignment& w, double fd_step) {
  if (p.has_analytic_grad()) {
    std::vector<double> g = p.loss_grad(w);
    const std::vector<std::vector<double>> cg = p.violation_grad(w);
    for (std::size_t j = 0; j < p.num_constraints; ++j) {
      for (std::size_t k = 0; k < p.dim; ++k) g[k] += lambda[j] * cg[j][k];
    }
    return g;
  }
  return finite_diff_grad(p, lambda, w, fd_step);
}

}  // namespace detail

/// Best-of-restarts projected gradient descent on the regularized objective.
/// Restart starting points are sampled uniformly from the box with the
/// configured seed. A restart that produces a non-finite iterate or gradient
/// is abandoned and noted; the remaining restarts still count.
inline SolveResult solve_pr_descent(const Problem& p, const Multipliers& lambda,
                                    const DescentConfig& cfg) {
  detail::require_multipliers(p, lambda);
  if (p.space.kind != ParamSpace::Kind::box) {
    throw ContractViolation("solve_pr_descent: requires a box space");
  }
  if (!(cfg.step_size > 0.0) || !(cfg.grad_tolerance > 0.0) || cfg.restarts < 1 ||
      cfg.max_iters < 1) {
    throw ContractViolation("DescentConfig: step_size, grad_tolerance, restarts, max_iters "
                            "must be positive");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> notes;
  std::optional<SolveResult> best;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::vector<double> w(p.dim);
    for (std::size_t k = 0; k < p.dim; ++k) {
      const Interval& iv = p.space.box[k];
      w[k] = iv.lo + (iv.hi - iv.lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }

    bool aborted = false;
    bool converged = false;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
      std::vector<double> g;
      try {
        g = detail::regularized_grad(p, lambda, Assignment{w}, cfg.fd_step);
      } catch (const EvaluationError& e) {
        notes.push_back("restart " + std::to_string(restart) + " aborted: " + e.what());
        aborted = true;
        break;
      }
      // projected gradient: directions that would leave the box do not count
      double proj_norm = 0.0;
      for (std::size_t k = 0; k < p.dim; ++k) {
        const Interval& iv = p.space.box[k];
        double gk = g[k];
        if ((w[k] <= iv.lo && gk > 0.0) || (w[k] >= iv.hi && gk < 0.0)) gk = 0.0;
        proj_norm = std::max(proj_norm, std::abs(gk));
      }
      if (proj_norm <= cfg.grad_tolerance) {
        converged = true;
        break;
      }
      bool finite = true;
      for (std::size_t k = 0; k < p.dim; ++k) {
        const Interval& iv = p.space.box[k];
        w[k] = std::clamp(w[k] - cfg.step_size * g[k], iv.lo, iv.hi);
        finite = finite && std::isfinite(w[k]);
      }
      if (!finite) {
        notes.push_back("restart " + std::to_string(restart) + " aborted: non-finite iterate");
        aborted = true;
        break;
      }
    }
    if (aborted) continue;

    SolveResult cand;
    cand.w = Assignment{w};
    try {
      cand.loss = eval_loss(p, cand.w);
      cand.violation = eval_violation(p, cand.w);
    } catch (const EvaluationError& e) {
      notes.push_back("restart " + std::to_string(restart) + " aborted: " + e.what());
      continue;
    }
    cand.reg_objective = cand.loss + dot(lambda.lambda, cand.violation);
    cand.provenance = Provenance::descent_local;
    cand.converged = converged;
    if (!best || detail::better_candidate(cand.reg_objective, cand.violation, cand.w,
                                          best->reg_objective, best->violation, best->w,
                                          TieBreak::prefer_low_violation)) {
      best = std::move(cand);
    }
  }
  if (!best) {
    throw EvaluationError("solve_pr_descent: every restart aborted on instance '" + p.name +
                          "'");
  }
  best->notes = std::move(notes);
  return *best;
}

// ---------------------------------------------------------------------------
// Backend selection

/// A solve backend plus its configuration, as chosen by configs and the
/// multiplier-search layer.
struct SolverChoice {
  enum class Kind { grid, descent };
  Kind kind = Kind::grid;
  GridSpec grid{};
  DescentConfig descent{};
};

inline SolveResult solve_pr(const Problem& p, const Multipliers& lambda,
                            const SolverChoice& solver) {
  return solver.kind == SolverChoice::Kind::grid ? solve_pr_grid(p, lambda, solver.grid)
                                                 : solve_pr_descent(p, lambda, solver.descent);
}

}  // namespace prpc
