#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prpc/instances.hpp"
#include "prpc/solvers.hpp"
#include "support.hpp"

using namespace prpc;
using prpc_test::close_abs;
using prpc_test::random_lambda;
using prpc_test::sample_interior;

namespace {

GridSpec grid(int points) {
  GridSpec g;
  g.points_per_dim = points;
  return g;
}

}  // namespace

TEST_CASE("solve_pr_grid on the closed forms") {
  const Problem plateau = make_plateau();

  SECTION("strict minimum above the tie") {
    const SolveResult r = solve_pr_grid(plateau, Multipliers{{2.0}}, grid(2001));
    CHECK(r.w[0] == 1.0);
    CHECK(r.reg_objective == 1.0);
    CHECK(r.provenance == Provenance::grid_global);
  }

  SECTION("exact tie goes to the low-violation point") {
    const SolveResult r = solve_pr_grid(make_two_point_tie(), Multipliers{{1.0}}, grid(2001));
    CHECK(r.w[0] == 1.0);  // point "b"
    CHECK(r.violation[0] == 0.0);
    CHECK(r.provenance == Provenance::finite_enumeration);
  }

  SECTION("the opposite tie preference demonstrates the lost optimum") {
    GridSpec flipped = grid(2001);
    flipped.tie_break = TieBreak::prefer_high_violation;
    const SolveResult r = solve_pr_grid(make_two_point_tie(), Multipliers{{1.0}}, flipped);
    CHECK(r.w[0] == 0.0);  // point "a"
    CHECK(r.violation[0] == 1.0);
  }

  SECTION("lambda = 0 minimizes the loss alone") {
    CHECK(solve_pr_grid(plateau, Multipliers{{0.0}}, grid(2001)).w[0] == 0.0);
    CHECK(solve_pr_grid(make_two_point_tie(), Multipliers{{0.0}}, grid(2001)).loss == 0.0);
  }
}

TEST_CASE("solve_pc_grid on the closed forms") {
  const Problem plateau = make_plateau();

  SECTION("smallest feasible loss") {
    const auto r = solve_pc_grid(plateau, Threshold{{0.4}}, grid(2001));
    REQUIRE(r.has_value());
    CHECK(r->w[0] == 0.6);
    CHECK(r->loss == 0.6);
  }

  SECTION("empty feasible set is an outcome, not an exception") {
    Problem clipped = make_plateau();  // same evaluators on a box excluding w >= 1
    clipped.space = ParamSpace::make_box({Interval{0.0, 0.9}});
    CHECK_FALSE(solve_pc_grid(clipped, Threshold{{0.0}}, grid(1001)).has_value());
  }

  SECTION("feasibility soundness against a full scan") {
    auto gen = prpc_test::rng(21);
    for (const Problem& p : bundled_instances()) {
      GridSpec g = grid(p.dim == 1 ? 501 : 101);
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> theta(p.num_constraints);
        for (double& t : theta)
          t = std::uniform_real_distribution<double>(0.0, 1.5)(gen);
        const auto r = solve_pc_grid(p, Threshold{theta}, g);
        if (!r) continue;
        CHECK(is_feasible(p, r->w, Threshold{theta}));
        for_each_grid_point(p, g, [&](const Assignment&, double loss, const std::vector<double>& c) {
          if (leq(c, theta)) CHECK(r->loss <= loss);
        });
      }
    }
  }
}

TEST_CASE("grid oracle dominance: the reported optimum really is the grid minimum") {
  auto gen = prpc_test::rng(22);
  for (const Problem& p : bundled_instances()) {
    GridSpec g = grid(p.dim == 1 ? 501 : 101);
    const Multipliers lambda = random_lambda(p.num_constraints, gen);
    const SolveResult best = solve_pr_grid(p, lambda, g);
    for_each_grid_point(p, g, [&](const Assignment&, double loss, const std::vector<double>& c) {
      CHECK(loss + dot(lambda.lambda, c) >= best.reg_objective);
    });
  }
}

TEST_CASE("budget refusal names the required evaluation count") {
  GridSpec small = grid(1001);
  small.budget = 100;
  try {
    solve_pr_grid(make_plateau(), Multipliers{{1.0}}, small);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.required == 1001);
  }

  GridSpec big = grid(4001);  // 4001^2 > default 1e7 budget on a 2-D box
  CHECK_THROWS_AS(solve_pr_grid(make_ordered_regression(), Multipliers{{1.0}}, big),
                  BudgetExceeded);
}

TEST_CASE("grid scans are thread-count independent") {
  for (int threads : {2, 3}) {
    GridSpec par = grid(2001);
    par.threads = threads;
    const SolveResult a = solve_pr_grid(make_plateau(), Multipliers{{1.0}}, grid(2001));
    const SolveResult b = solve_pr_grid(make_plateau(), Multipliers{{1.0}}, par);
    CHECK(a.w == b.w);
    CHECK(a.reg_objective == b.reg_objective);

    GridSpec par2 = grid(101);
    par2.threads = threads;
    const Multipliers lambda{{0.7}};
    const SolveResult c = solve_pr_grid(make_ordered_regression(), lambda, grid(101));
    const SolveResult d = solve_pr_grid(make_ordered_regression(), lambda, par2);
    CHECK(c.w == d.w);
    CHECK(c.reg_objective == d.reg_objective);
  }
}

TEST_CASE("solve_pr_descent finds the interior optimum") {
  const Problem p = make_vanishing_gradient();
  DescentConfig cfg;
  cfg.step_size = 0.1;
  cfg.restarts = 4;
  cfg.seed = 5;
  const SolveResult r = solve_pr_descent(p, Multipliers{{std::exp(2.0)}}, cfg);
  CHECK(r.provenance == Provenance::descent_local);
  CHECK(r.converged);
  CHECK(close_abs(r.w[0], 2.0, 1e-3));
}

TEST_CASE("solve_pr_descent stalls anywhere on the plateau") {
  DescentConfig cfg;
  cfg.restarts = 6;
  cfg.seed = 9;
  const SolveResult r = solve_pr_descent(make_plateau(), Multipliers{{1.0}}, cfg);
  CHECK(r.w[0] >= 0.0);
  CHECK(r.w[0] <= 1.0 + cfg.step_size);
  CHECK(close_abs(r.reg_objective, 1.0, 1e-9));
}

TEST_CASE("descent agrees with the grid oracle on a smooth problem") {
  const Problem p = make_ordered_regression();
  DescentConfig cfg;
  cfg.restarts = 3;
  cfg.seed = 2;
  const SolveResult descent = solve_pr_descent(p, Multipliers{{0.0}}, cfg);
  const SolveResult oracle = solve_pr_grid(p, Multipliers{{0.0}}, grid(201));
  CHECK(oracle.loss == 0.0);  // the exact-fit weights (2, 1) are on the grid
  CHECK(close_abs(descent.loss, oracle.loss, 1e-9));
}

TEST_CASE("descent never beats the grid oracle by more than discretization") {
  // bound: reg(descent) >= reg(grid) - Lip * step / 2, with Lip = L_lip + lambda C_lip
  auto gen = prpc_test::rng(23);
  const std::vector<Problem> instances = {make_plateau(), make_vanishing_gradient(),
                                          make_log_unbounded(10.0)};
  for (const Problem& p : instances) {
    REQUIRE(p.has_lipschitz());
    const double span = p.space.box[0].hi - p.space.box[0].lo;
    const double step = span / 2000.0;
    for (int trial = 0; trial < 3; ++trial) {
      const Multipliers lambda = random_lambda(1, gen, 1e-2, 1e2);
      const double lip = p.loss_lipschitz + lambda[0] * p.violation_lipschitz[0];
      DescentConfig cfg;
      cfg.step_size = 0.02;
      cfg.restarts = 4;
      cfg.seed = 31 + static_cast<std::uint64_t>(trial);
      const SolveResult descent = solve_pr_descent(p, lambda, cfg);
      const SolveResult oracle = solve_pr_grid(p, lambda, grid(2001));
      CHECK(descent.reg_objective >= oracle.reg_objective - lip * step / 2.0 - 1e-12);
    }
  }
}

TEST_CASE("descent reports non-convergence when iterations run out") {
  DescentConfig cfg;
  cfg.max_iters = 1;
  cfg.restarts = 1;
  cfg.seed = 1;
  const SolveResult r = solve_pr_descent(make_vanishing_gradient(), Multipliers{{50.0}}, cfg);
  CHECK_FALSE(r.converged);
}

TEST_CASE("descent requires a box space") {
  CHECK_THROWS_AS(solve_pr_descent(make_two_point_tie(), Multipliers{{1.0}}, DescentConfig{}),
                  ContractViolation);
}

TEST_CASE("descent aborts restarts that hit non-finite evaluations") {
  // loss is NaN below w = 0.25, a clean parabola above it
  Problem nasty;
  nasty.name = "nan_pocket";
  nasty.dim = 1;
  nasty.num_constraints = 1;
  nasty.space = ParamSpace::make_box({Interval{0.0, 1.0}});
  nasty.loss = [](const Assignment& a) {
    return a[0] < 0.25 ? std::nan("") : (a[0] - 1.0) * (a[0] - 1.0);
  };
  nasty.violation = [](const Assignment&) { return std::vector<double>{0.0}; };

  SECTION("surviving restarts still produce a result, with diagnostics") {
    DescentConfig cfg;
    cfg.restarts = 6;
    cfg.seed = 0;  // starts both inside and outside the NaN pocket
    const SolveResult r = solve_pr_descent(nasty, Multipliers{{1.0}}, cfg);
    CHECK_FALSE(r.notes.empty());
    CHECK(r.notes.front().find("aborted") != std::string::npos);
    CHECK(std::isfinite(r.loss));
  }
  SECTION("every restart aborting is an evaluation error") {
    Problem hopeless = nasty;
    hopeless.loss = [](const Assignment&) { return std::nan(""); };
    DescentConfig cfg;
    cfg.restarts = 2;
    CHECK_THROWS_AS(solve_pr_descent(hopeless, Multipliers{{1.0}}, cfg), EvaluationError);
  }
}

TEST_CASE("finite_diff_grad on the closed forms") {
  SECTION("d/dw [w + exp(-w)] at w = 1") {
    const std::vector<double> g =
        finite_diff_grad(make_vanishing_gradient(), Multipliers{{1.0}}, Assignment{{1.0}}, 1e-5);
    CHECK(close_abs(g[0], 1.0 - std::exp(-1.0), 1e-6));
    CHECK(close_abs(g[0], 0.6321205588285577, 1e-6));
  }
  SECTION("flat on the plateau") {
    const std::vector<double> g =
        finite_diff_grad(make_plateau(), Multipliers{{1.0}}, Assignment{{0.5}}, 1e-6);
    CHECK(std::abs(g[0]) <= 1e-12);
  }
  SECTION("one-sided at the boundary") {
    const std::vector<double> g =
        finite_diff_grad(make_log_unbounded(), Multipliers{{0.0}}, Assignment{{0.0}}, 1e-6);
    CHECK(close_abs(g[0], -1.0, 1e-9));
  }
}

TEST_CASE("finite differences track analytic gradients at random interior points") {
  auto gen = prpc_test::rng(24);
  const std::vector<Problem> instances = {make_vanishing_gradient(), make_log_unbounded(),
                                          make_ordered_regression(),
                                          make_balanced_classification()};
  int checked = 0;
  for (const Problem& p : instances) {
    REQUIRE(p.has_analytic_grad());
    for (int trial = 0; trial < 25; ++trial) {
      const Assignment w = sample_interior(p, gen);
      const Multipliers lambda = random_lambda(p.num_constraints, gen, 1e-2, 1e1);
      std::vector<double> analytic = p.loss_grad(w);
      const auto cg = p.violation_grad(w);
      for (std::size_t j = 0; j < p.num_constraints; ++j) {
        for (std::size_t k = 0; k < p.dim; ++k) analytic[k] += lambda[j] * cg[j][k];
      }
      const std::vector<double> fd = finite_diff_grad(p, lambda, w);
      for (std::size_t k = 0; k < p.dim; ++k) {
        CHECK(std::abs(fd[k] - analytic[k]) <=
              std::max(1e-5, 1e-4 * std::abs(analytic[k])));
      }
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("finite_diff_grad contract checks") {
  CHECK_THROWS_AS(finite_diff_grad(make_two_point_tie(), Multipliers{{1.0}}, Assignment{{0.0}}),
                  ContractViolation);
  Problem degenerate = make_plateau();
  degenerate.space = ParamSpace::make_box({Interval{0.5, 0.5}});
  CHECK_THROWS_AS(finite_diff_grad(degenerate, Multipliers{{1.0}}, Assignment{{0.5}}),
                  ContractViolation);
}
