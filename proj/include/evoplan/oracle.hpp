#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "evoplan/allocator.hpp"
#include "evoplan/errors.hpp"
#include "evoplan/scenario.hpp"

namespace evoplan {

/// Grid for the exhaustive-search baseline. Residual depths are uniform
/// across the analysed frames and taken from the scenario ladder plus the
/// no-data depth 0; the update-rate axis is {0} plus an even grid on
/// [update_min, update_max].
struct OracleGrid {
  int beta_steps = 201;
  int b_up_steps = 201;
  int m_steps = 51;
  int workers = 0;  // 0 = hardware concurrency; results never depend on this

  std::uint64_t combination_count(const Scenario& sc) const {
    return static_cast<std::uint64_t>(beta_steps) * static_cast<std::uint64_t>(b_up_steps) *
           static_cast<std::uint64_t>(m_steps + 1) *
           static_cast<std::uint64_t>(sc.ladder.levels().size() + 1);
  }
};

namespace detail {

struct OracleCandidate {
  double value = -std::numeric_limits<double>::infinity();
  int beta_idx = 0;
  int b_up_idx = 0;
  int level_idx = 0;  // 0 = no residual data
  int m_idx = 0;      // 0 = no update

  // Ascending index order doubles as the tie-break: smaller beta, then
  // smaller b_up, then shallower depth, then smaller update.
  bool better_than(const OracleCandidate& o) const {
    if (value != o.value) return value > o.value;
    if (beta_idx != o.beta_idx) return beta_idx < o.beta_idx;
    if (b_up_idx != o.b_up_idx) return b_up_idx < o.b_up_idx;
    if (level_idx != o.level_idx) return level_idx < o.level_idx;
    return m_idx < o.m_idx;
  }
};

}  // namespace detail

/// Brute-force maximization over the discretized decision space, keeping only
/// points that satisfy every rate constraint. Deterministic for any thread
/// count; refuses grids above 1e8 combinations.
inline AllocationPlan exhaustive_search(const Scenario& sc, const OracleGrid& grid = {}) {
  sc.validate();
  if (grid.beta_steps < 2 || grid.b_up_steps < 2 || grid.m_steps < 2) {
    throw InvalidInputError("exhaustive_search: each grid axis needs at least 2 steps");
  }
  const std::uint64_t combos = grid.combination_count(sc);
  if (combos > 100000000ull) {
    throw InvalidInputError("exhaustive_search: grid has " + std::to_string(combos) +
                            " combinations, refusing above 100000000");
  }

  const double B = sc.bandwidth_hz;

  // Depth axis: {0} + ladder, with the cloud response precomputed.
  std::vector<double> depths{0.0};
  for (double v : sc.ladder.levels()) depths.push_back(v);
  std::vector<double> map_cloud_at(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) map_cloud_at[i] = sc.cloud_model.value(depths[i]);

  // Update axis: {0} + even grid on [update_min, update_max].
  std::vector<double> updates{0.0};
  for (int i = 0; i < grid.m_steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid.m_steps - 1);
    updates.push_back(sc.update_min_bps() + t * (sc.update_max_bps() - sc.update_min_bps()));
  }
  std::vector<double> map_edge_at(updates.size());
  for (std::size_t i = 0; i < updates.size(); ++i) map_edge_at[i] = sc.edge_model.value(updates[i]);

  auto beta_at = [&](int i) {
    return static_cast<double>(i) / static_cast<double>(grid.beta_steps - 1);
  };
  auto b_up_at = [&](int i) {
    return B * static_cast<double>(i) / static_cast<double>(grid.b_up_steps - 1);
  };

  auto scan_beta_range = [&](int beta_lo, int beta_hi, detail::OracleCandidate& local) {
    for (int bi = beta_lo; bi < beta_hi; ++bi) {
      const double beta = beta_at(bi);
      const double rate_feature = sc.feature_bits * beta * sc.n_frames;
      const double analysed = beta * sc.n_frames;
      // With no cloud frames the depth axis is moot; keep only depth 0.
      const std::size_t depth_count = beta > 0.0 ? depths.size() : 1;
      for (int ui = 0; ui < grid.b_up_steps; ++ui) {
        const double b_up = b_up_at(ui);
        const double uplink = b_up * sc.se_up;
        if (rate_feature > uplink) continue;
        const double downlink = (B - b_up) * sc.se_down;
        for (std::size_t li = 0; li < depth_count; ++li) {
          if (rate_feature + sc.pixels * analysed * depths[li] > uplink) break;
          const double mc = map_cloud_at[li];
          for (std::size_t mi = 0; mi < updates.size(); ++mi) {
            if (updates[mi] > downlink) break;
            const double value = joint_map_lower_bound(mc, map_edge_at[mi], {beta});
            detail::OracleCandidate cand{value, bi, ui, static_cast<int>(li),
                                         static_cast<int>(mi)};
            if (cand.better_than(local)) local = cand;
          }
        }
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers =
      grid.workers > 0 ? grid.workers : static_cast<int>(std::min<unsigned>(hw, 8u));
  std::vector<detail::OracleCandidate> locals(static_cast<std::size_t>(workers));
  if (workers <= 1) {
    scan_beta_range(0, grid.beta_steps, locals[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int chunk = (grid.beta_steps + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(grid.beta_steps, lo + chunk);
      pool.emplace_back([&, lo, hi, w] {
        if (lo < hi) scan_beta_range(lo, hi, locals[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : pool) t.join();
  }
  detail::OracleCandidate best;
  for (const auto& local : locals) {
    if (local.better_than(best)) best = local;
  }
  if (!std::isfinite(best.value)) {
    throw InfeasibleError("exhaustive_search: no feasible grid point");
  }

  AllocationPlan plan;
  plan.beta = beta_at(best.beta_idx);
  plan.b_up_hz = b_up_at(best.b_up_idx);
  plan.b_down_hz = B - plan.b_up_hz;
  plan.m_update_bps = updates[static_cast<std::size_t>(best.m_idx)];
  plan.map_cloud = map_cloud_at[static_cast<std::size_t>(best.level_idx)];
  plan.map_edge = map_edge_at[static_cast<std::size_t>(best.m_idx)];
  plan.map_joint = best.value;
  plan.rate_feature_bps = sc.feature_bits * plan.beta * sc.n_frames;
  const double depth = depths[static_cast<std::size_t>(best.level_idx)];
  const double analysed = plan.beta * sc.n_frames;
  if (depth > 0.0 && analysed > 0.0) {
    plan.quant.mix.push_back({depth, analysed});
    plan.quant.rho = plan.beta;
    plan.quant.avg_bits = depth;
    plan.quant.rate_data = sc.pixels * analysed * depth;
  }
  plan.quant.map_cloud = plan.map_cloud;
  plan.rate_data_bps = plan.quant.rate_data;
  return plan;
}

}  // namespace evoplan
