#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "prpc/analysis.hpp"
#include "prpc/instances.hpp"
#include "support.hpp"

using namespace prpc;
using prpc_test::close_abs;
using prpc_test::random_lambda;

namespace {

GridSpec grid(int points) {
  GridSpec g;
  g.points_per_dim = points;
  return g;
}

SolverChoice grid_solver(int points) {
  SolverChoice s;
  s.grid.points_per_dim = points;
  return s;
}

}  // namespace

TEST_CASE("check_theorem1 on the closed forms") {
  SECTION("plateau above the tie") {
    const Theorem1Report r = check_theorem1(make_plateau(), Multipliers{{2.0}}, grid(2001));
    CHECK(r.holds);
    CHECK(r.optimum.w[0] == 1.0);
    CHECK(r.optimum.violation[0] == 0.0);
  }
  SECTION("two-point table below the tie") {
    const Theorem1Report r = check_theorem1(make_two_point_tie(), Multipliers{{0.5}}, grid(11));
    CHECK(r.holds);
    CHECK(r.optimum.w[0] == 0.0);  // point "a": reg 0.5 beats 1.0
  }
  SECTION("random multipliers on the regression instance") {
    auto gen = prpc_test::rng(51);
    for (int trial = 0; trial < 5; ++trial) {
      CHECK(check_theorem1(make_ordered_regression(), random_lambda(1, gen), grid(101)).holds);
    }
  }
}

TEST_CASE("check_theorem1 holds across instances and random multipliers") {
  auto gen = prpc_test::rng(52);
  for (const Problem& p : bundled_instances()) {
    const int points = p.dim == 1 ? 501 : 101;
    for (int trial = 0; trial < 5; ++trial) {
      const Theorem1Report r =
          check_theorem1(p, random_lambda(p.num_constraints, gen), grid(points));
      INFO("instance " << p.name << ": " << r.details);
      CHECK(r.holds);
    }
  }
}

TEST_CASE("attainability half-spaces of the documented attainable table") {
  const Problem table = attainable_finite_table();
  const AttainabilityHalfspaces hs = attainability_halfspaces(table, Assignment{{0.0}}, grid(11));
  REQUIRE(hs.halfspaces.size() == 2);
  CHECK(hs.optimality_violations.empty());

  // from a = (L 0, C 1):   lambda * 0.5 - 1 >= 0
  CHECK(hs.halfspaces[0].witness.w == std::vector<double>{1.0});
  CHECK(hs.halfspaces[0].delta_c == std::vector<double>{0.5});
  CHECK(hs.halfspaces[0].delta_l == -1.0);
  // from b = (L 3, C 0):   lambda * (-0.5) + 2 >= 0
  CHECK(hs.halfspaces[1].witness.w == std::vector<double>{2.0});
  CHECK(hs.halfspaces[1].delta_c == std::vector<double>{-0.5});
  CHECK(hs.halfspaces[1].delta_l == 2.0);

  SECTION("interval [2, 4], verified by solving at lambda = 3") {
    const MultiplierInterval interval = multiplier_interval(hs.halfspaces, 0);
    CHECK(interval.lower == 2.0);
    CHECK(interval.upper == 4.0);
    CHECK(interval.feasible);
    REQUIRE(interval.binding_lower_witness);
    CHECK(interval.binding_lower_witness->w == std::vector<double>{1.0});
    REQUIRE(interval.binding_upper_witness);
    CHECK(interval.binding_upper_witness->w == std::vector<double>{2.0});

    const SolveResult at3 = solve_pr_grid(table, Multipliers{{3.0}}, grid(11));
    CHECK(at3.w[0] == 0.0);
    CHECK(at3.reg_objective == 2.5);
  }
}

TEST_CASE("documented unattainable table: crossed bounds, empty interval") {
  const Problem table = unattainable_finite_table();
  const AttainabilityHalfspaces hs = attainability_halfspaces(table, Assignment{{0.0}}, grid(11));
  const MultiplierInterval interval = multiplier_interval(hs.halfspaces, 0);
  CHECK(interval.lower == 1.0);
  CHECK(close_abs(interval.upper, 0.4, 1e-12));
  CHECK_FALSE(interval.feasible);

  SECTION("w* is genuinely constrained-optimal at theta = C(w*) = 1") {
    const auto pc = solve_pc_grid(table, Threshold{{1.0}}, grid(11));
    REQUIRE(pc.has_value());
    CHECK(pc->w[0] == 0.0);
    CHECK(pc->loss == 1.0);
  }

  SECTION("unattainability certificate co-occurs with the sweep never storing w*") {
    for (double hi : {1.0, 100.0, 1000.0}) {
      const Pr4pcOutcome out = pr4pc(table, Threshold{{1.0}},
                                     LambdaStrategy::logarithmic(1e-3, hi, 64), grid_solver(11));
      for (std::size_t idx : out.stored) {
        CHECK_FALSE(out.trace[idx].result.w == Assignment{{0.0}});
      }
    }
  }
}

TEST_CASE("half-space edge cases") {
  SECTION("duplicate of w* contributes nothing") {
    const Problem table = make_finite_table({{1.0, {0.5}}, {1.0, {0.5}}, {0.0, {1.0}}});
    const AttainabilityHalfspaces hs =
        attainability_halfspaces(table, Assignment{{0.0}}, grid(11));
    CHECK(hs.halfspaces.size() == 1);  // only the genuinely different row
    CHECK(hs.optimality_violations.empty());
  }
  SECTION("equal violation, smaller loss: a certificate that w* is not optimal") {
    const Problem table = make_finite_table({{1.0, {0.5}}, {0.5, {0.5}}});
    const AttainabilityHalfspaces hs =
        attainability_halfspaces(table, Assignment{{0.0}}, grid(11));
    CHECK(hs.halfspaces.empty());
    REQUIRE(hs.optimality_violations.size() == 1);
    CHECK(hs.optimality_violations[0].delta_l == -0.5);
  }
  SECTION("no upper-bound witnesses leaves the interval unbounded") {
    const Problem table = make_finite_table({{0.0, {0.0}}, {1.0, {1.0}}});
    const AttainabilityHalfspaces hs =
        attainability_halfspaces(table, Assignment{{0.0}}, grid(11));
    const MultiplierInterval interval = multiplier_interval(hs.halfspaces, 0);
    CHECK(interval.lower == 0.0);
    CHECK(std::isinf(interval.upper));
    CHECK(interval.feasible);
  }
}

TEST_CASE("multiplier_interval with coupled components (m = 2)") {
  // w*: (L 1, C (1,1)); a: (L 0, C (2,1)) -> lambda_0 >= 1 regardless of lambda_1
  // b: (L 1.5, C (1, 0.5)) -> lambda_1 <= 1 via dC_1 = -0.5
  const Problem table =
      make_finite_table({{1.0, {1.0, 1.0}}, {0.0, {2.0, 1.0}}, {1.5, {1.0, 0.5}}});
  const AttainabilityHalfspaces hs = attainability_halfspaces(table, Assignment{{0.0}}, grid(11));
  REQUIRE(hs.halfspaces.size() == 2);

  SECTION("component 0 with lambda_1 fixed") {
    // witness a: dC_0 = 1, residual = -1 + lambda_1 * 0 -> lower bound 1
    // witness b: dC_0 = 0, residual = 0.5 - 0.5 lambda_1: negative once lambda_1 > 1
    const MultiplierInterval ok = multiplier_interval(hs.halfspaces, 0, {0.5});
    CHECK(ok.lower == 1.0);
    CHECK(ok.feasible);
    const MultiplierInterval forced = multiplier_interval(hs.halfspaces, 0, {2.0});
    CHECK_FALSE(forced.feasible);
    REQUIRE(forced.infeasibility_witness);
    CHECK(forced.infeasibility_witness->w == std::vector<double>{2.0});
  }
  SECTION("component 1 with lambda_0 fixed") {
    // witness b: dC_1 = -0.5, residual = 0.5 -> lambda_1 <= 1
    const MultiplierInterval interval = multiplier_interval(hs.halfspaces, 1, {1.0});
    CHECK(interval.upper == 1.0);
    CHECK(interval.feasible);
  }
  SECTION("dimension checks") {
    CHECK_THROWS_AS(multiplier_interval(hs.halfspaces, 2, {1.0}), ContractViolation);
    CHECK_THROWS_AS(multiplier_interval(hs.halfspaces, 0, {}), ContractViolation);
  }
}

TEST_CASE("multiplier_region_feasible") {
  const Problem attainable = attainable_finite_table();
  const auto hs = attainability_halfspaces(attainable, Assignment{{0.0}}, grid(11)).halfspaces;

  SECTION("grid points inside [2, 4] are exactly the feasible ones") {
    const RegionScan scan =
        multiplier_region_feasible(hs, log_lambda_candidates(1, 0.5, 8.0, 33));
    CHECK(scan.any);
    CHECK_FALSE(scan.feasible_points.empty());
    for (const Multipliers& lambda : scan.feasible_points) {
      CHECK(lambda[0] >= 2.0 - 1e-6);
      CHECK(lambda[0] <= 4.0 + 1e-6);
    }
  }
  SECTION("unattainable table yields an empty region") {
    const auto hs2 =
        attainability_halfspaces(unattainable_finite_table(), Assignment{{0.0}}, grid(11))
            .halfspaces;
    const RegionScan scan =
        multiplier_region_feasible(hs2, log_lambda_candidates(1, 1e-3, 1e3, 200));
    CHECK_FALSE(scan.any);
  }
  SECTION("no half-spaces: everything is feasible") {
    const RegionScan scan =
        multiplier_region_feasible({}, log_lambda_candidates(1, 0.1, 10.0, 5));
    CHECK(scan.any);
    CHECK(scan.feasible_points.size() == 5);
  }
}

TEST_CASE("interval and region scan agree for m = 1") {
  for (bool attainable : {true, false}) {
    const Problem table = attainable ? attainable_finite_table() : unattainable_finite_table();
    const auto hs = attainability_halfspaces(table, Assignment{{0.0}}, grid(11)).halfspaces;
    const MultiplierInterval interval = multiplier_interval(hs, 0);
    // refine the candidate grid until it brackets the interval endpoints
    const RegionScan scan = multiplier_region_feasible(hs, log_lambda_candidates(1, 1.0, 8.0, 257));
    CHECK(interval.feasible == scan.any);
  }
}

TEST_CASE("round trip: the producing multiplier satisfies every half-space") {
  auto gen = prpc_test::rng(53);
  for (const Problem& p : bundled_instances()) {
    const int points = p.dim == 1 ? 501 : 101;
    for (int trial = 0; trial < 3; ++trial) {
      const Multipliers lambda0 = random_lambda(p.num_constraints, gen);
      const SolveResult star = solve_pr_grid(p, lambda0, grid(points));
      const AttainabilityHalfspaces hs = attainability_halfspaces(p, star.w, grid(points));
      INFO("instance " << p.name << " lambda " << lambda0[0]);
      CHECK(satisfies_halfspaces(hs.halfspaces, lambda0, 1e-9));
      CHECK(hs.optimality_violations.empty());
    }
  }
}

TEST_CASE("monotonicity_scan on the closed forms") {
  SECTION("vanishing gradient: violation decays like 1/lambda") {
    std::vector<Multipliers> lambdas;
    for (double e : {1.0, std::exp(1.0), std::exp(2.0), std::exp(3.0)}) {
      lambdas.push_back(Multipliers{{e}});
    }
    const MonotonicityReport report =
        monotonicity_scan(make_vanishing_gradient(), lambdas, 0, grid_solver(100001));
    CHECK(report.pairs_checked == 6);
    CHECK(report.violations.empty());
    REQUIRE(report.observations.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(close_abs(report.observations[i].c * lambdas[i][0], 1.0, 1e-3));
      CHECK(report.observations[i].provenance == Provenance::grid_global);
    }
  }
  SECTION("plateau with the low-violation tie break: 1, 0, 0") {
    const std::vector<Multipliers> lambdas = {Multipliers{{0.5}}, Multipliers{{1.0}},
                                              Multipliers{{2.0}}};
    const MonotonicityReport report =
        monotonicity_scan(make_plateau(), lambdas, 0, grid_solver(2001));
    CHECK(report.violations.empty());
    REQUIRE(report.observations.size() == 3);
    CHECK(report.observations[0].c == 1.0);
    CHECK(report.observations[1].c == 0.0);
    CHECK(report.observations[2].c == 0.0);
  }
  SECTION("descent solver: recorded, not asserted") {
    SolverChoice descent;
    descent.kind = SolverChoice::Kind::descent;
    descent.descent.restarts = 1;
    descent.descent.seed = 1;
    const MonotonicityReport report = monotonicity_scan(
        make_ordered_regression(), log_lambda_candidates(1, 0.1, 10.0, 6), 0, descent);
    CHECK(report.pairs_checked == 15);
    for (const MonotonicityViolation& v : report.violations) {
      CHECK(v.provenance == Provenance::descent_local);
    }
  }
  SECTION("exactness invariant: grid solves never violate, any instance") {
    auto gen = prpc_test::rng(54);
    for (const Problem& p : bundled_instances()) {
      const int points = p.dim == 1 ? 301 : 61;
      std::vector<Multipliers> lambdas;
      for (const Multipliers& l : log_lambda_candidates(1, 1e-2, 1e2, 8)) {
        std::vector<double> full(p.num_constraints, 0.7);
        full[0] = l[0];
        lambdas.push_back(Multipliers{full});
      }
      const MonotonicityReport report = monotonicity_scan(p, lambdas, 0, grid_solver(points));
      INFO("instance " << p.name);
      CHECK(report.violations.empty());
    }
  }
  SECTION("validation") {
    const std::vector<Multipliers> bad = {Multipliers{{1.0}}};
    CHECK_THROWS_AS(monotonicity_scan(make_plateau(), bad, 0, grid_solver(11)),
                    ContractViolation);
    const Problem table2 = make_finite_table({{0.0, {0.0, 0.0}}, {1.0, {1.0, 1.0}}});
    const std::vector<Multipliers> varies_both = {Multipliers{{1.0, 1.0}}, Multipliers{{2.0, 2.0}}};
    CHECK_THROWS_AS(monotonicity_scan(table2, varies_both, 0, grid_solver(11)),
                    ContractViolation);
  }
}

TEST_CASE("sensitivity_curve on the closed forms") {
  SECTION("vanishing gradient: lambda ~ 1/theta") {
    const SensitivityCurve curve = sensitivity_curve(
        make_vanishing_gradient(), {1e-1, 1e-2, 1e-3}, 1e-2, 1e4, 121, grid(100001));
    REQUIRE(curve.rows.size() == 3);
    const double step = std::pow(1e6, 1.0 / 120.0);
    const std::vector<double> ideal = {10.0, 100.0, 1000.0};
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(curve.rows[i].lambda.has_value());
      CHECK(*curve.rows[i].lambda <= ideal[i] * step * (1 + 1e-9));
      CHECK(*curve.rows[i].lambda >= ideal[i] / step * (1 - 1e-9));
    }
  }
  SECTION("plateau: a jump, then flat") {
    const SensitivityCurve curve =
        sensitivity_curve(make_plateau(), {0.5, 0.1}, 0.25, 4.0, 33, grid(2001));
    REQUIRE(curve.rows[0].lambda.has_value());
    REQUIRE(curve.rows[1].lambda.has_value());
    CHECK(*curve.rows[0].lambda == *curve.rows[1].lambda);  // same smallest workable multiplier
    CHECK(*curve.rows[0].lambda >= 1.0 - 1e-9);
  }
  SECTION("vacuous threshold: the smallest multiplier in range works") {
    const SensitivityCurve curve =
        sensitivity_curve(make_vanishing_gradient(), {1.0}, 1e-2, 1e2, 9, grid(10001));
    REQUIRE(curve.rows[0].lambda.has_value());
    CHECK(close_abs(*curve.rows[0].lambda, 1e-2, 1e-12));
  }
  SECTION("the lambda column never decreases as theta tightens") {
    const SensitivityCurve curve = sensitivity_curve(
        make_vanishing_gradient(), {0.8, 0.4, 0.2, 0.1, 0.05}, 1e-2, 1e3, 61, grid(10001));
    double prev = 0.0;
    for (const SensitivityRow& row : curve.rows) {
      REQUIRE(row.lambda.has_value());
      CHECK(*row.lambda >= prev - 1e-12);
      prev = *row.lambda;
    }
  }
  SECTION("validation") {
    CHECK_THROWS_AS(
        sensitivity_curve(make_vanishing_gradient(), {0.1, 0.5}, 1e-2, 1e2, 9, grid(101)),
        ContractViolation);
    const Problem table2 = make_finite_table({{0.0, {0.0, 0.0}}, {1.0, {1.0, 1.0}}});
    CHECK_THROWS_AS(sensitivity_curve(table2, {0.5}, 1e-2, 1e2, 9, grid(101)),
                    ContractViolation);
  }
}
