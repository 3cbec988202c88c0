#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evoplan/allocator.hpp"
#include "evoplan/pr_metrics.hpp"

using namespace evoplan;
using Catch::Approx;

namespace {

// Constraint audit for any emitted plan; slacks must be non-negative up to
// rounding noise.
void check_plan(const Scenario& sc, const AllocationPlan& p) {
  const double eps_rate = 1e-6;
  CHECK(p.b_up_hz >= -1e-9);
  CHECK(p.b_down_hz >= -1e-9);
  CHECK(p.b_up_hz + p.b_down_hz <= sc.bandwidth_hz * (1.0 + 1e-12) + 1e-9);
  CHECK(p.rate_feature_bps + p.rate_data_bps <= p.b_up_hz * sc.se_up + eps_rate);
  CHECK(p.m_update_bps <= p.b_down_hz * sc.se_down + eps_rate);
  const bool update_ok = p.m_update_bps == 0.0 ||
                         (p.m_update_bps >= sc.update_min_bps() - 1e-9 &&
                          p.m_update_bps <= sc.update_max_bps() + 1e-9);
  CHECK(update_ok);
  CHECK(p.beta >= 0.0);
  CHECK(p.beta <= 1.0);
  CHECK(p.quant.rho <= p.beta + 1e-12);
  CHECK(p.map_joint == joint_map_lower_bound(p.map_cloud, p.map_edge, {p.beta}));
}

}  // namespace

TEST_CASE("downlink-to-update mapping") {
  Scenario sc;  // update bounds 230 kbit/s .. 23 Mbit/s, se_down = 5
  CHECK(edge_update_from_downlink(1.45e6, sc) == 7.25e6);  // exact rate arithmetic
  CHECK(edge_update_from_downlink(0.0, sc) == 0.0);
  CHECK(edge_update_from_downlink(10e6, sc) == 23e6);      // capped at update_max
  CHECK(edge_update_from_downlink(40e3, sc) == 0.0);       // 200 kbit/s < update_min
  CHECK(edge_update_from_downlink(46e3, sc) == 230e3);     // exactly update_min
  CHECK_THROWS_AS(edge_update_from_downlink(-1.0, sc), InvalidInputError);

  // monotone non-decreasing
  double prev = -1.0;
  for (double b = 0.0; b <= 6e6; b += 37e3) {
    const double m = edge_update_from_downlink(b, sc);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("feasible task split is capped by the feature stream") {
  Scenario sc;
  CHECK(beta_cap(sc, 0.0) == 0.0);
  CHECK(beta_cap(sc, sc.bandwidth_hz) == 1.0);
  const double b_up = 2000.0;  // 5100 bit/s uplink vs 8600 bit/s full feature load
  CHECK(beta_cap(sc, b_up) == Approx(2000.0 * 2.55 / 8600.0).margin(1e-15));
}

TEST_CASE("objective endpoints collapse to the single-model values") {
  Scenario sc;
  const double b_up = 6e6;
  const double m = edge_update_from_downlink(sc.bandwidth_hz - b_up, sc);
  CHECK(objective(sc, 0.0, b_up) == sc.edge_model.value(m));
  const double cloud_map = solve_data_stream(sc, sc.bandwidth_hz, 1.0).map_cloud;
  CHECK(objective(sc, 1.0, sc.bandwidth_hz) == cloud_map);
  CHECK_THROWS_AS(objective(sc, -0.1, b_up), InvalidInputError);
  CHECK_THROWS_AS(objective(sc, 0.5, sc.bandwidth_hz + 1.0), InvalidInputError);
}

TEST_CASE("objective composes the published operating point") {
  // At 8.55 MHz uplink and a 0.385 split, the remaining 1.45 MHz of downlink
  // carries exactly 7.25 Mbit/s of updates; the objective glues the two
  // model accuracies through the closed-form bound.
  Scenario sc;
  const double quant_map = solve_data_stream(sc, 8.55e6, 0.385).map_cloud;
  const double edge_map = sc.edge_model.value(7.25e6);
  CHECK(objective(sc, 0.385, 8.55e6) ==
        joint_map_lower_bound(quant_map, edge_map, {0.385}));
}

TEST_CASE("objective clamps an infeasible split to the boundary") {
  Scenario sc;
  const double b_up = 2000.0;
  const double cap = beta_cap(sc, b_up);
  CHECK(objective(sc, 1.0, b_up) == objective(sc, cap, b_up));
}

TEST_CASE("solver returns a constraint-respecting plan that beats both baselines") {
  Scenario sc;
  const AllocationPlan plan = solve(sc);
  check_plan(sc, plan);
  const AllocationPlan cloud = solve_cloud_only(sc);
  const AllocationPlan edge = solve_edge_only(sc);
  check_plan(sc, cloud);
  check_plan(sc, edge);
  CHECK(plan.map_joint >= cloud.map_joint - 1e-9);
  CHECK(plan.map_joint >= edge.map_joint - 1e-9);
  // the solved plan reproduces its own objective value
  CHECK(plan.map_joint == objective(sc, plan.beta, plan.b_up_hz));
}

TEST_CASE("solver is deterministic") {
  Scenario sc;
  const AllocationPlan a = solve(sc);
  const AllocationPlan b = solve(sc);
  CHECK(a.beta == b.beta);
  CHECK(a.b_up_hz == b.b_up_hz);
  CHECK(a.map_joint == b.map_joint);
  CHECK(a.m_update_bps == b.m_update_bps);
}

TEST_CASE("no bandwidth degenerates to the edge model without updates") {
  Scenario sc;
  sc.bandwidth_hz = 0.0;
  const AllocationPlan plan = solve(sc);
  CHECK(plan.beta == 0.0);
  CHECK(plan.b_up_hz == 0.0);
  CHECK(plan.m_update_bps == 0.0);
  CHECK(plan.map_joint == sc.edge_model.map_baseline());
}

TEST_CASE("abundant bandwidth pushes every task to the cloud") {
  Scenario sc;
  sc.bandwidth_hz = 80e6;
  const AllocationPlan plan = solve(sc);
  CHECK(plan.beta == 1.0);
  // every frame rides at the deepest ladder level; ties in accuracy resolve
  // to the smallest uplink slice that achieves it
  CHECK(plan.quant.avg_bits == sc.ladder.max_level());
  CHECK(plan.map_joint ==
        Approx(sc.cloud_model.value(sc.ladder.max_level())).margin(1e-12));
  CHECK(plan.b_up_hz <= 80e6);
  CHECK(plan.rate_feature_bps + plan.rate_data_bps <= plan.b_up_hz * sc.se_up + 1e-6);
}

TEST_CASE("vanishing bandwidth pushes every task to the edge") {
  Scenario sc;
  sc.bandwidth_hz = 0.2e6;
  const AllocationPlan plan = solve(sc);
  CHECK(plan.beta < 0.05);
  CHECK(plan.map_joint >= solve_edge_only(sc).map_joint - 1e-12);
}

TEST_CASE("cloud-only baseline") {
  Scenario sc;
  const AllocationPlan plan = solve_cloud_only(sc);
  CHECK(plan.beta == 1.0);
  CHECK(plan.b_up_hz == sc.bandwidth_hz);
  CHECK(plan.b_down_hz == 0.0);
  CHECK(plan.m_update_bps == 0.0);
  CHECK(plan.map_joint == plan.map_cloud);

  Scenario rich = sc;
  rich.bandwidth_hz = 1e9;
  CHECK(solve_cloud_only(rich).map_cloud == Approx(rich.cloud_model.map_ceiling()).margin(1e-6));

  Scenario starved = sc;
  starved.bandwidth_hz = 1000.0;  // 2550 bit/s < 8600 bit/s of features
  CHECK_THROWS_AS(solve_cloud_only(starved), InfeasibleError);
}

TEST_CASE("edge-only baseline") {
  Scenario sc;
  const AllocationPlan plan = solve_edge_only(sc);
  CHECK(plan.beta == 0.0);
  CHECK(plan.b_up_hz == 0.0);
  CHECK(plan.b_down_hz == sc.bandwidth_hz);
  CHECK(plan.m_update_bps == 23e6);  // min(update_max, 50 Mbit/s)
  CHECK(plan.map_joint == sc.edge_model.map_max());

  Scenario dark = sc;
  dark.bandwidth_hz = 0.0;
  CHECK(solve_edge_only(dark).map_joint == sc.edge_model.map_baseline());

  // frame rate never enters the edge-only path
  Scenario n5 = sc, n20 = sc;
  n5.n_frames = 5;
  n20.n_frames = 20;
  CHECK(solve_edge_only(n5).map_joint == solve_edge_only(n20).map_joint);
}

TEST_CASE("accuracy never drops when bandwidth grows") {
  Scenario sc;
  double prev = 0.0;
  for (double b : {1e6, 2e6, 5e6, 10e6, 20e6, 40e6}) {
    sc.bandwidth_hz = b;
    const double v = solve(sc).map_joint;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("stationarity diagnostic is balanced only at the optimum") {
  // A fine depth ladder keeps the quantization staircase from displacing the
  // optimizer off the smooth stationary point.
  Scenario sc;
  std::vector<double> levels;
  for (int i = 1; i <= 300; ++i) levels.push_back(0.01 * i);
  sc.ladder = QuantizationLadder(levels);
  SolverSettings fine;
  fine.b_up_steps = 401;
  fine.beta_tol = 1e-5;
  fine.refine_passes = 3;

  const AllocationPlan plan = solve(sc, fine);
  REQUIRE(plan.beta > 0.1);
  REQUIRE(plan.beta < 0.9);
  const StationarityDiagnostic at_opt = stationarity_residual(sc, plan);
  REQUIRE(at_opt.applicable);
  CHECK(std::fabs(at_opt.residual) < 0.05);

  const StationarityDiagnostic up = stationarity_residual(sc, plan.beta + 0.1, plan.b_up_hz);
  const StationarityDiagnostic down = stationarity_residual(sc, plan.beta - 0.1, plan.b_up_hz);
  REQUIRE(up.applicable);
  REQUIRE(down.applicable);
  CHECK(std::fabs(up.residual) > std::fabs(at_opt.residual));
  CHECK(std::fabs(down.residual) > std::fabs(at_opt.residual));

  // the stock ladder still optimizes to an interior point
  const Scenario stock;
  const StationarityDiagnostic coarse = stationarity_residual(stock, solve(stock));
  CHECK(coarse.applicable);
}

TEST_CASE("solver handles table-backed responses and fractional frame rates") {
  Scenario sc;
  sc.n_frames = 7.5;
  sc.cloud_model = CloudResponseModel::from_table(
      {{0.0, 0.70}, {0.125, 0.77}, {0.25, 0.82}, {0.5, 0.875}, {1.0, 0.905}, {2.0, 0.918}});
  sc.edge_model = EdgeResponseModel::from_table(
      {{230e3, 0.75}, {2e6, 0.79}, {6e6, 0.822}, {12e6, 0.84}, {23e6, 0.85}});
  const AllocationPlan plan = solve(sc);
  check_plan(sc, plan);
  CHECK(plan.map_joint >= solve_cloud_only(sc).map_joint - 1e-9);
  CHECK(plan.map_joint >= solve_edge_only(sc).map_joint - 1e-9);
}

TEST_CASE("stationarity diagnostic refuses boundary plans") {
  Scenario sc;
  const AllocationPlan cloud = solve_cloud_only(sc);
  CHECK_FALSE(stationarity_residual(sc, cloud).applicable);
  const AllocationPlan edge = solve_edge_only(sc);
  CHECK_FALSE(stationarity_residual(sc, edge).applicable);
  // update rate pinned at its maximum is a boundary too
  CHECK_FALSE(stationarity_residual(sc, 0.5, 0.2e6).applicable);
}
