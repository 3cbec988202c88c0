#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "evoplan/data_stream.hpp"
#include "evoplan/scenario.hpp"

using namespace evoplan;
using Catch::Approx;

namespace {

Scenario table_defaults() { return Scenario{}; }

double mix_rate(const std::vector<LevelAllocation>& mix, double pixels) {
  double r = 0.0;
  for (const auto& a : mix) r += pixels * a.bits_per_pixel * a.frames_per_second;
  return r;
}

double mix_avg_bits(const std::vector<LevelAllocation>& mix, double frames) {
  double b = 0.0;
  for (const auto& a : mix) b += a.bits_per_pixel * a.frames_per_second;
  return b / frames;
}

}  // namespace

TEST_CASE("quantization ladder validation") {
  CHECK_THROWS_AS(QuantizationLadder({}), InvalidInputError);
  CHECK_THROWS_AS(QuantizationLadder({0.0, 0.5}), InvalidInputError);
  CHECK_THROWS_AS(QuantizationLadder({0.5, 0.5}), InvalidInputError);
  CHECK_THROWS_AS(QuantizationLadder({1.0, 0.5}), InvalidInputError);
  const auto ladder = QuantizationLadder::default_ladder();
  CHECK(ladder.min_level() == 0.125);
  CHECK(ladder.max_level() == 2.0);
}

TEST_CASE("residual budget arithmetic") {
  // 8.55 MHz * 2.55 bit/s/Hz minus the 860-bit features of 3.85 frames/s
  CHECK(residual_budget(8.55e6, 2.55, 0.385, 10, 860) == Approx(21799189.0).epsilon(1e-12));
  CHECK(residual_budget(10e6, 2.55, 0.0, 10, 860) == Approx(25.5e6).epsilon(1e-12));
  CHECK_THROWS_AS(residual_budget(0.0, 2.55, 0.5, 10, 860), InfeasibleError);
  CHECK_THROWS_AS(residual_budget(-1.0, 2.55, 0.5, 10, 860), InvalidInputError);
}

TEST_CASE("relaxed equal-depth solution") {
  CHECK(equal_bits_relaxed(21799189.0, 0.385, 10, 1e7) == Approx(0.5662127).margin(5e-7));
  CHECK(equal_bits_relaxed(25495700.0, 1.0, 5, 1e7) == Approx(0.509914).margin(1e-6));
  CHECK(equal_bits_relaxed(0.0, 0.5, 10, 1e7) == 0.0);
  CHECK_THROWS_AS(equal_bits_relaxed(1e6, 0.0, 10, 1e7), InvalidInputError);
  CHECK_THROWS_AS(equal_bits_relaxed(-1.0, 0.5, 10, 1e7), InvalidInputError);
}

TEST_CASE("depth discretization splits frames between neighbours") {
  const auto ladder = QuantizationLadder::default_ladder();
  const double pixels = 1e7;
  // 0.6 sits between 0.5 and 1.0; 10 * (0.6-0.5)/(1.0-0.5) = 2 frames go up
  const double budget = pixels * 10 * 0.6;
  auto mix = discretize(0.6, ladder, 10, pixels, budget);
  REQUIRE(mix.size() == 2);
  CHECK(mix[0].bits_per_pixel == 0.5);
  CHECK(mix[0].frames_per_second == 8.0);
  CHECK(mix[1].bits_per_pixel == 1.0);
  CHECK(mix[1].frames_per_second == 2.0);
  CHECK(mix_rate(mix, pixels) <= budget + 1e-9);
}

TEST_CASE("depth discretization edge cases") {
  const auto ladder = QuantizationLadder::default_ladder();
  const double pixels = 1e7;

  // exact ladder hit
  auto exact = discretize(0.5, ladder, 10, pixels, pixels * 10 * 0.5);
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].bits_per_pixel == 0.5);
  CHECK(exact[0].frames_per_second == 10.0);

  // nothing to send
  CHECK(discretize(0.0, ladder, 10, pixels, 0.0).empty());

  // beyond the top level everything saturates
  auto top = discretize(3.0, ladder, 10, pixels, pixels * 10 * 3.0);
  REQUIRE(top.size() == 1);
  CHECK(top[0].bits_per_pixel == 2.0);
  CHECK(top[0].frames_per_second == 10.0);

  // below the bottom level the lower neighbour is "send nothing"
  auto low = discretize(0.05, ladder, 10, pixels, pixels * 10 * 0.05);
  REQUIRE(low.size() == 1);
  CHECK(low[0].bits_per_pixel == 0.125);
  CHECK(low[0].frames_per_second == 4.0);  // round(10 * 0.05/0.125)

  CHECK_THROWS_AS(discretize(-0.1, ladder, 10, pixels, 0.0), InvalidInputError);
}

TEST_CASE("rounded-up splits are biased back under the budget") {
  const auto ladder = QuantizationLadder::default_ladder();
  const double pixels = 1e7;
  // 0.58 rounds 1.6 -> 2 frames at depth 1.0, average 0.60 overshoots; one
  // frame must come back down.
  const double budget = pixels * 10 * 0.58;
  auto mix = discretize(0.58, ladder, 10, pixels, budget);
  REQUIRE(mix.size() == 2);
  CHECK(mix[1].frames_per_second == 1.0);
  CHECK(mix[0].frames_per_second == 9.0);
  CHECK(mix_rate(mix, pixels) <= budget);
}

TEST_CASE("discretization tracks the relaxed depth within one step per frame") {
  std::mt19937 rng(9001);
  std::uniform_real_distribution<double> depth(0.0, 2.5);
  std::uniform_real_distribution<double> frames_dist(1.0, 40.0);
  const auto ladder = QuantizationLadder::default_ladder();
  const double pixels = 1e6;
  for (int i = 0; i < 500; ++i) {
    const double b_opt = depth(rng);
    const double frames = std::floor(frames_dist(rng));
    const double budget = pixels * frames * b_opt;
    const auto mix = discretize(b_opt, ladder, frames, pixels, budget);
    CHECK(mix_rate(mix, pixels) <= budget * (1.0 + 1e-12));
    if (b_opt <= ladder.max_level() && !mix.empty()) {
      // bracket width around b_opt
      double lower = 0.0, upper = ladder.max_level();
      for (double v : ladder.levels()) {
        if (v < b_opt) lower = v;
        if (v >= b_opt) {
          upper = v;
          break;
        }
      }
      const double avg = mix_avg_bits(mix, frames);
      CHECK(std::fabs(avg - b_opt) <= (upper - lower) / frames + 1e-12);
    }
  }
}

TEST_CASE("marginal-gain allocation basics") {
  const auto ladder = QuantizationLadder({0.5, 1.0});
  const double pixels = 1000.0;
  std::vector<CloudResponseModel> models;
  models.push_back(CloudResponseModel::closed_form(0.60, 0.90, 9.0));  // steep early gain
  models.push_back(CloudResponseModel::closed_form(0.60, 0.90, 1.0));

  // zero budget: nothing allocated
  auto zero = greedy_heuristic(models, 0.0, ladder, pixels);
  CHECK(zero.mix.empty());
  CHECK(zero.rate_data == 0.0);
  CHECK(zero.rho == 0.0);
  CHECK(zero.map_cloud == Approx(0.60).margin(1e-15));

  // one step of budget: the steeper curve wins it
  auto one = greedy_heuristic(models, pixels * 0.5, ladder, pixels);
  REQUIRE(one.mix.size() == 1);
  CHECK(one.mix[0].bits_per_pixel == 0.5);
  CHECK(one.mix[0].frames_per_second == 1.0);
  CHECK(one.map_cloud == Approx((models[0].value(0.5) + 0.60) / 2).margin(1e-12));
}

TEST_CASE("marginal-gain allocation ties break to the lowest frame index") {
  const auto ladder = QuantizationLadder({1.0});
  const double pixels = 10.0;
  std::vector<CloudResponseModel> models(3, CloudResponseModel::closed_form(0.5, 0.9, 2.0));
  auto plan = greedy_heuristic(models, pixels * 1.0, ladder, pixels);
  REQUIRE(plan.mix.size() == 1);
  CHECK(plan.mix[0].frames_per_second == 1.0);
  CHECK(plan.rho == Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("marginal-gain value is non-decreasing in budget") {
  const auto ladder = QuantizationLadder::default_ladder();
  const double pixels = 100.0;
  std::vector<CloudResponseModel> models;
  for (int i = 0; i < 4; ++i) {
    models.push_back(CloudResponseModel::closed_form(0.5 + 0.02 * i, 0.9, 1.0 + i));
  }
  double prev = -1.0;
  for (double budget = 0.0; budget <= pixels * 4 * 2.0; budget += 37.0) {
    const double value = greedy_heuristic(models, budget, ladder, pixels).map_cloud;
    CHECK(value >= prev - 1e-12);
    prev = value;
  }
}

TEST_CASE("marginal-gain allocation matches the shared-curve optimum") {
  // With identical concave curves the equal-depth rule is optimal; the greedy
  // result must come within one ladder step's accuracy of it.
  const auto ladder = QuantizationLadder::default_ladder();
  const double pixels = 1000.0;
  const auto shared = CloudResponseModel::closed_form(0.60, 0.92, 3.0);
  std::vector<CloudResponseModel> models(8, shared);
  const double budget = pixels * 8 * 0.5;  // evenly divisible by the 0.5 level
  auto greedy = greedy_heuristic(models, budget, ladder, pixels);

  const double b_opt = equal_bits_relaxed(budget, 1.0, 8, pixels);
  const auto mix = discretize(b_opt, ladder, 8, pixels, budget);
  double even_map = 0.0, covered = 0.0;
  for (const auto& a : mix) {
    even_map += a.frames_per_second * shared.value(a.bits_per_pixel);
    covered += a.frames_per_second;
  }
  even_map = (even_map + (8 - covered) * shared.value(0.0)) / 8;

  const double step_gap = shared.value(1.0) - shared.value(0.5);
  CHECK(greedy.map_cloud >= even_map - step_gap - 1e-12);
  CHECK(greedy.rate_data <= budget + 1e-9);
}

TEST_CASE("data-stream solve composes the pieces") {
  Scenario sc = table_defaults();

  // no cloud frames
  auto idle = solve_data_stream(sc, 5e6, 0.0);
  CHECK(idle.rho == 0.0);
  CHECK(idle.mix.empty());
  CHECK(idle.rate_data == 0.0);

  // stock parameters at the N=10 operating point; the relaxed depth 0.5662
  // sits in the (0.5, 1.0) bracket, so the mix average may sit a full
  // bracket-width/frames away
  auto plan = solve_data_stream(sc, 8.55e6, 0.385);
  CHECK(plan.avg_bits == Approx(0.5662).margin(0.5 / 3.85 + 5e-4));
  CHECK(plan.rho <= 0.385 + 1e-12);
  const double uplink = 8.55e6 * sc.se_up;
  CHECK(sc.feature_bits * 0.385 * sc.n_frames + plan.rate_data <= uplink + 1e-6);
  CHECK(plan.map_cloud > sc.cloud_model.map_feature_only());

  // budget below one minimal-level frame: features only
  Scenario tight = sc;
  const double floor_rate = tight.feature_bits * 1.0 * tight.n_frames;
  const double b_up_tight = (floor_rate + 0.5 * tight.pixels * tight.ladder.min_level()) / tight.se_up;
  auto starved = solve_data_stream(tight, b_up_tight, 1.0);
  CHECK(starved.mix.empty());
  CHECK(starved.map_cloud == Approx(tight.cloud_model.map_feature_only()).margin(1e-12));

  // infeasible split propagates
  CHECK_THROWS_AS(solve_data_stream(sc, 1e3, 1.0), InfeasibleError);
}

TEST_CASE("data-stream solve respects the uplink budget everywhere") {
  std::mt19937 rng(9002);
  std::uniform_real_distribution<double> beta_dist(0.0, 1.0);
  std::uniform_real_distribution<double> b_up_dist(0.0, 12e6);
  Scenario sc = table_defaults();
  for (int i = 0; i < 300; ++i) {
    const double b_up = b_up_dist(rng);
    double beta = beta_dist(rng);
    const double cap = std::min(1.0, b_up * sc.se_up / (sc.feature_bits * sc.n_frames));
    beta = std::min(beta, cap);
    const auto plan = solve_data_stream(sc, b_up, beta);
    const double used = sc.feature_bits * beta * sc.n_frames + plan.rate_data;
    CHECK(used <= b_up * sc.se_up + 1e-6);
    CHECK(plan.rho <= beta + 1e-12);
  }
}

TEST_CASE("uniform shrunk depth beats a partial deep split on concave curves") {
  // For a shared concave response, sending every frame at depth rho*b always
  // averages at least as well as sending a rho-fraction at depth b.
  std::mt19937 rng(9003);
  std::uniform_real_distribution<double> rho_dist(0.05, 0.95);
  std::uniform_real_distribution<double> floor_dist(0.3, 0.7);
  std::uniform_real_distribution<double> gain_dist(0.05, 0.25);
  std::uniform_real_distribution<double> rate_dist(0.2, 8.0);
  const auto ladder = QuantizationLadder::default_ladder();
  std::uniform_int_distribution<std::size_t> level_pick(0, ladder.levels().size() - 1);
  for (int i = 0; i < 200; ++i) {
    const double floor = floor_dist(rng);
    const auto g = CloudResponseModel::closed_form(floor, std::min(1.0, floor + gain_dist(rng)),
                                                   rate_dist(rng));
    const double rho = rho_dist(rng);
    const double depth = ladder.levels()[level_pick(rng)];
    const double partial = rho * g.value(depth) + (1.0 - rho) * g.value(0.0);
    const double uniform = g.value(rho * depth);
    CHECK(uniform >= partial);
  }
}

TEST_CASE("per-frame override path allocates through the marginal-gain rule") {
  Scenario sc = table_defaults();
  sc.n_frames = 4;
  std::vector<CloudResponseModel> models;
  models.push_back(CloudResponseModel::closed_form(0.60, 0.90, 6.0));
  models.push_back(CloudResponseModel::closed_form(0.60, 0.80, 0.5));
  auto plan = solve_data_stream(sc, 1e6, 0.5, models);
  CHECK(plan.rho <= 0.5 + 1e-12);
  CHECK(plan.rate_data <= 1e6 * sc.se_up);
}
