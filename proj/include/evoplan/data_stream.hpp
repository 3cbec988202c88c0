#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "evoplan/errors.hpp"
#include "evoplan/response_models.hpp"

namespace evoplan {

/// Allowed residual-data quantization depths (bits per pixel), strictly
/// increasing and positive. Depth 0 ("send nothing") is implicit.
class QuantizationLadder {
 public:
  explicit QuantizationLadder(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) {
      throw InvalidInputError("QuantizationLadder: needs at least one level");
    }
    double prev = 0.0;
    for (double v : levels_) {
      if (!(v > prev)) {
        throw InvalidInputError("QuantizationLadder: levels must be positive and strictly increasing");
      }
      prev = v;
    }
  }

  static QuantizationLadder default_ladder() {
    return QuantizationLadder({0.125, 0.25, 0.5, 1.0, 2.0});
  }

  const std::vector<double>& levels() const { return levels_; }
  double max_level() const { return levels_.back(); }
  double min_level() const { return levels_.front(); }

 private:
  std::vector<double> levels_;
};

// Frames per second assigned to one quantization depth.
struct LevelAllocation {
  double bits_per_pixel = 0.0;
  double frames_per_second = 0.0;
};

/// Residual-data transmission plan for the cloud-analysed frames.
/// `mix` lists only nonzero depths; analysed frames not covered by the mix
/// upload features only.
struct QuantizationPlan {
  double rho = 0.0;                    // fraction of all frames sending residual data
  std::vector<LevelAllocation> mix;    // ascending by depth
  double rate_data = 0.0;              // bits/s consumed by the data stream
  double map_cloud = 0.0;              // frame-averaged cloud mAP over analysed frames
  double avg_bits = 0.0;               // frame-averaged bits/pixel over analysed frames

  double frames_with_data() const {
    double n = 0.0;
    for (const auto& a : mix) n += a.frames_per_second;
    return n;
  }
};

/// Uplink bits/s left for residual data once the feature stream is paid for:
/// b_up * se_up - feature_bits * beta * n_frames.
/// Throws InfeasibleError when the feature stream alone exceeds the uplink.
inline double residual_budget(double b_up_hz, double se_up, double beta, double n_frames,
                              double feature_bits) {
  if (b_up_hz < 0.0 || se_up < 0.0 || beta < 0.0 || n_frames < 0.0 || feature_bits < 0.0) {
    throw InvalidInputError("residual_budget: arguments must be non-negative");
  }
  const double budget = b_up_hz * se_up - feature_bits * beta * n_frames;
  if (budget < 0.0) {
    // splits at the exact feasibility boundary can land a rounding error below zero
    if (budget > -1e-9 * std::max(1.0, b_up_hz * se_up)) return 0.0;
    throw InfeasibleError("residual_budget: feature stream alone exceeds the uplink capacity");
  }
  return budget;
}

/// Relaxed optimum of the data-stream design: with the depth constraint
/// dropped, every analysed frame shares one depth budget / (pixels * beta * n).
inline double equal_bits_relaxed(double budget, double beta, double n_frames, double pixels) {
  if (budget < 0.0) {
    throw InvalidInputError("equal_bits_relaxed: budget must be non-negative");
  }
  const double frames = beta * n_frames;
  if (!(frames > 0.0) || !(pixels > 0.0)) {
    throw InvalidInputError("equal_bits_relaxed: beta * n_frames and pixels must be positive");
  }
  return budget / (pixels * frames);
}

/// Snaps the relaxed depth onto the ladder: frames are split between the two
/// neighbouring depths so the average tracks b_opt, biased downward if the
/// rounded split would overshoot the budget. Frames assigned depth 0 are
/// omitted from the returned mix.
inline std::vector<LevelAllocation> discretize(double b_opt, const QuantizationLadder& ladder,
                                               double frames, double pixels, double budget) {
  if (b_opt < 0.0) {
    throw InvalidInputError("discretize: relaxed depth must be non-negative");
  }
  std::vector<LevelAllocation> mix;
  if (!(frames > 0.0) || b_opt == 0.0) return mix;

  const auto& levels = ladder.levels();
  if (b_opt >= ladder.max_level()) {
    mix.push_back({ladder.max_level(), frames});
    return mix;
  }

  // Exact ladder hits need no split.
  for (double v : levels) {
    if (b_opt == v) {
      mix.push_back({v, frames});
      return mix;
    }
  }

  // Bracket b_opt between neighbours in {0} + ladder.
  double lower = 0.0;
  double upper = levels.front();
  for (double v : levels) {
    if (v < b_opt) {
      lower = v;
    } else {
      upper = v;
      break;
    }
  }

  const double frac = (b_opt - lower) / (upper - lower);
  double n_upper = static_cast<double>(std::llround(frames * frac));
  n_upper = std::min(n_upper, std::floor(frames));
  auto rate = [&](double nu) { return pixels * (nu * upper + (frames - nu) * lower); };
  while (n_upper > 0.0 && rate(n_upper) > budget) {
    n_upper -= 1.0;
  }

  const double n_lower = frames - n_upper;
  if (lower > 0.0 && n_lower > 0.0) mix.push_back({lower, n_lower});
  if (n_upper > 0.0) mix.push_back({upper, n_upper});
  return mix;
}

/// Marginal-gain allocation for heterogeneous per-frame response curves:
/// repeatedly upgrade the frame whose next ladder step buys the most mAP per
/// bit, as long as the step fits the remaining budget. Ties go to the lowest
/// frame index. Frame counts here are per second, one model per frame.
inline QuantizationPlan greedy_heuristic(std::span<const CloudResponseModel> frame_models,
                                         double budget, const QuantizationLadder& ladder,
                                         double pixels) {
  if (budget < 0.0) {
    throw InvalidInputError("greedy_heuristic: budget must be non-negative");
  }
  if (!(pixels > 0.0)) {
    throw InvalidInputError("greedy_heuristic: pixels must be positive");
  }
  const auto& levels = ladder.levels();
  const std::size_t n = frame_models.size();
  std::vector<std::size_t> rung(n, 0);  // 0 = no data; rung k = levels[k-1]

  auto depth_of = [&](std::size_t r) { return r == 0 ? 0.0 : levels[r - 1]; };

  double remaining = budget;
  while (true) {
    double best_eff = -1.0;
    std::size_t best_frame = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (rung[i] >= levels.size()) continue;
      const double cur = depth_of(rung[i]);
      const double nxt = levels[rung[i]];
      const double step_bits = pixels * (nxt - cur);
      if (step_bits > remaining) continue;
      const double gain = frame_models[i].value(nxt) - frame_models[i].value(cur);
      const double eff = gain / step_bits;
      if (eff > best_eff) {
        best_eff = eff;
        best_frame = i;
      }
    }
    if (best_frame == n) break;
    remaining -= pixels * (levels[rung[best_frame]] - depth_of(rung[best_frame]));
    ++rung[best_frame];
  }

  QuantizationPlan plan;
  double map_sum = 0.0;
  double bit_sum = 0.0;
  std::vector<double> counts(levels.size(), 0.0);
  double with_data = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = depth_of(rung[i]);
    map_sum += frame_models[i].value(d);
    bit_sum += d;
    if (rung[i] > 0) {
      counts[rung[i] - 1] += 1.0;
      with_data += 1.0;
    }
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (counts[k] > 0.0) plan.mix.push_back({levels[k], counts[k]});
  }
  plan.rate_data = pixels * bit_sum;
  if (n > 0) {
    plan.rho = with_data / static_cast<double>(n);
    plan.map_cloud = map_sum / static_cast<double>(n);
    plan.avg_bits = bit_sum / static_cast<double>(n);
  }
  return plan;
}

}  // namespace evoplan
