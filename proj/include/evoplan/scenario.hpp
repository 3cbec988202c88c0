#pragma once

#include <span>
#include <string>
#include <utility>

#include "evoplan/data_stream.hpp"
#include "evoplan/errors.hpp"
#include "evoplan/response_models.hpp"

namespace evoplan {

// Stock response-model coefficients. The endpoints sit in the accuracy
// ranges typical for small on-device detectors (edge) and large server-side
// ones (cloud); the rates are repo defaults, not measurements. Swap in fits
// from your own experiments via the config or the model constructors.
inline constexpr double kDefaultCloudFeatureOnly = 0.70;
inline constexpr double kDefaultCloudCeiling = 0.92;
inline constexpr double kDefaultCloudRate = 6.0;
inline constexpr double kDefaultEdgeBaseline = 0.75;
inline constexpr double kDefaultEdgeMax = 0.85;
inline constexpr double kDefaultEdgeRate = 8.0;
inline constexpr double kDefaultUpdateMinBps = 230e3;
inline constexpr double kDefaultUpdateMaxBps = 23e6;

/// Everything the planner needs to know about one UAV-server pair: capture
/// parameters, link budget, the quantization ladder, and the fitted accuracy
/// responses of the two models.
struct Scenario {
  double n_frames = 10.0;       // frames captured per second
  double pixels = 1e7;          // pixels per frame
  double raw_bits = 24.0;       // capture depth, bits per pixel
  double feature_bits = 860.0;  // extracted feature size, bits per frame
  double bandwidth_hz = 10e6;   // total OTA bandwidth shared by both directions
  double se_up = 2.55;          // uplink spectrum efficiency, bit/s/Hz
  double se_down = 5.0;         // downlink spectrum efficiency, bit/s/Hz
  QuantizationLadder ladder = QuantizationLadder::default_ladder();
  CloudResponseModel cloud_model = default_cloud_model();
  EdgeResponseModel edge_model = default_edge_model();

  static CloudResponseModel default_cloud_model() {
    return CloudResponseModel::closed_form(kDefaultCloudFeatureOnly, kDefaultCloudCeiling,
                                           kDefaultCloudRate);
  }
  static EdgeResponseModel default_edge_model() {
    return EdgeResponseModel::closed_form(kDefaultEdgeBaseline, kDefaultEdgeMax,
                                          kDefaultUpdateMinBps, kDefaultUpdateMaxBps,
                                          kDefaultEdgeRate);
  }

  double update_min_bps() const { return edge_model.update_min(); }
  double update_max_bps() const { return edge_model.update_max(); }

  // Raw visual data generated per second: frames * pixels * depth.
  double data_rate_bps() const { return n_frames * pixels * raw_bits; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw InvalidInputError(std::string("Scenario: ") + name + " must be positive");
    };
    positive(n_frames, "n_frames");
    positive(pixels, "pixels");
    positive(raw_bits, "raw_bits");
    positive(feature_bits, "feature_bits");
    positive(se_up, "se_up");
    positive(se_down, "se_down");
    if (bandwidth_hz < 0.0) throw InvalidInputError("Scenario: bandwidth_hz must be non-negative");
  }
};

/// Solves the data-stream design for a given uplink bandwidth and task split:
/// every analysed frame shares the relaxed depth, which is then snapped onto
/// the ladder. The resulting cloud mAP is the frame-count-weighted mean of
/// the response over the mix (frames left at depth 0 contribute the
/// feature-only value).
inline QuantizationPlan solve_data_stream(const Scenario& sc, double b_up_hz, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw InvalidInputError("solve_data_stream: beta must lie in [0,1]");
  }
  QuantizationPlan plan;
  if (beta == 0.0) {
    // No frames go to the cloud; report the would-be feature-only accuracy.
    plan.map_cloud = sc.cloud_model.map_feature_only();
    return plan;
  }
  const double budget = residual_budget(b_up_hz, sc.se_up, beta, sc.n_frames, sc.feature_bits);
  const double frames = beta * sc.n_frames;
  const double b_opt = equal_bits_relaxed(budget, beta, sc.n_frames, sc.pixels);
  plan.mix = discretize(b_opt, sc.ladder, frames, sc.pixels, budget);

  double map_sum = 0.0;
  double bit_sum = 0.0;
  double covered = 0.0;
  for (const auto& a : plan.mix) {
    map_sum += a.frames_per_second * sc.cloud_model.value(a.bits_per_pixel);
    bit_sum += a.frames_per_second * a.bits_per_pixel;
    covered += a.frames_per_second;
  }
  map_sum += (frames - covered) * sc.cloud_model.map_feature_only();
  plan.rho = covered / sc.n_frames;
  plan.rate_data = sc.pixels * bit_sum;
  plan.map_cloud = map_sum / frames;
  plan.avg_bits = bit_sum / frames;
  return plan;
}

/// Heterogeneous-frame variant: `frame_models` supplies one response curve
/// per analysed frame per second and replaces beta * n_frames as the data
/// stream's frame universe; the marginal-gain heuristic then allocates the
/// budget. The feature stream is still charged for beta * n_frames frames.
inline QuantizationPlan solve_data_stream(const Scenario& sc, double b_up_hz, double beta,
                                          std::span<const CloudResponseModel> frame_models) {
  if (frame_models.empty()) return solve_data_stream(sc, b_up_hz, beta);
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw InvalidInputError("solve_data_stream: beta must lie in [0,1]");
  }
  const double budget = residual_budget(b_up_hz, sc.se_up, beta, sc.n_frames, sc.feature_bits);
  QuantizationPlan plan = greedy_heuristic(frame_models, budget, sc.ladder, sc.pixels);
  plan.rho = std::min(beta, plan.frames_with_data() / sc.n_frames);
  return plan;
}

}  // namespace evoplan
