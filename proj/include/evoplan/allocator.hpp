#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "evoplan/errors.hpp"
#include "evoplan/pr_metrics.hpp"
#include "evoplan/scenario.hpp"

namespace evoplan {

/// Full decision vector for one operating point, with the accuracy it buys
/// and the rates each stream consumes.
struct AllocationPlan {
  double beta = 0.0;            // fraction of frames analysed at the cloud
  QuantizationPlan quant;       // residual-data design for those frames
  double b_up_hz = 0.0;
  double b_down_hz = 0.0;
  double m_update_bps = 0.0;    // model-stream rate; 0 or within [update_min, update_max]
  double map_joint = 0.0;
  double map_cloud = 0.0;
  double map_edge = 0.0;
  double rate_feature_bps = 0.0;
  double rate_data_bps = 0.0;
};

struct SolverSettings {
  int b_up_steps = 201;      // outer uplink-bandwidth grid points on [0, B]
  double beta_tol = 1e-4;    // golden-section interval tolerance on beta
  int refine_passes = 2;     // halvings of the outer step around the incumbent
};

/// Best model-update rate a downlink slice can carry: the downlink capacity,
/// capped at update_max; below update_min no update is scheduled at all.
inline double edge_update_from_downlink(double b_down_hz, const Scenario& sc) {
  if (b_down_hz < 0.0) {
    throw InvalidInputError("edge_update_from_downlink: bandwidth must be non-negative");
  }
  const double capacity = b_down_hz * sc.se_down;
  if (capacity < sc.update_min_bps()) return 0.0;
  return std::min(sc.update_max_bps(), capacity);
}

/// Largest task split the uplink can feed with features: beta * N * F <= b_up * se_up.
inline double beta_cap(const Scenario& sc, double b_up_hz) {
  const double feature_rate_full = sc.feature_bits * sc.n_frames;
  if (!(feature_rate_full > 0.0)) return 1.0;
  return std::min(1.0, b_up_hz * sc.se_up / feature_rate_full);
}

namespace detail {

inline AllocationPlan make_plan(const Scenario& sc, double beta, double b_up_hz) {
  AllocationPlan plan;
  plan.beta = beta;
  plan.b_up_hz = b_up_hz;
  plan.b_down_hz = sc.bandwidth_hz - b_up_hz;
  plan.m_update_bps = edge_update_from_downlink(plan.b_down_hz, sc);
  plan.map_edge = sc.edge_model.value(plan.m_update_bps);
  plan.quant = solve_data_stream(sc, b_up_hz, beta);
  plan.map_cloud = plan.quant.map_cloud;
  plan.map_joint = joint_map_lower_bound(plan.map_cloud, plan.map_edge, {beta});
  plan.rate_feature_bps = sc.feature_bits * beta * sc.n_frames;
  plan.rate_data_bps = plan.quant.rate_data;
  return plan;
}

/// Golden-section maximization of a unimodal function on [lo, hi]; plateau
/// ties resolve toward the left end.
template <typename F>
std::pair<double, double> golden_section_max(F&& f, double lo, double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double invphi2 = 1.0 - invphi;
  double a = lo, b = hi;
  double width = b - a;
  if (width <= tol) {
    const double mid = 0.5 * (a + b);
    return {mid, f(mid)};
  }
  double c = a + invphi2 * width;
  double d = a + invphi * width;
  double fc = f(c);
  double fd = f(d);
  while (width > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      width = b - a;
      c = a + invphi2 * width;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      width = b - a;
      d = a + invphi * width;
      fd = f(d);
    }
  }
  return fc >= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace detail

/// Joint accuracy of the operating point (beta, b_up): the downlink remainder
/// funds the model update, the uplink remainder beyond the feature stream is
/// quantized residual data. A beta beyond the uplink's feature capacity is
/// evaluated at the feasibility boundary.
inline double objective(const Scenario& sc, double beta, double b_up_hz) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw InvalidInputError("objective: beta must lie in [0,1]");
  }
  if (!(b_up_hz >= 0.0 && b_up_hz <= sc.bandwidth_hz)) {
    throw InvalidInputError("objective: b_up must lie in [0, bandwidth]");
  }
  beta = std::min(beta, beta_cap(sc, b_up_hz));
  const double m_update = edge_update_from_downlink(sc.bandwidth_hz - b_up_hz, sc);
  const double map_edge = sc.edge_model.value(m_update);
  const double map_cloud = solve_data_stream(sc, b_up_hz, beta).map_cloud;
  return joint_map_lower_bound(map_cloud, map_edge, {beta});
}

/// Maximizes the joint accuracy over the full decision vector. Outer sweep of
/// the uplink bandwidth over an even grid on [0, B]; for each slice, the task
/// split is maximized by golden-section search over [0, beta_cap] (endpoints
/// checked explicitly); the incumbent is then refined on a local grid with
/// halved steps. Ties prefer smaller beta, then smaller b_up. Deterministic.
inline AllocationPlan solve(const Scenario& sc, const SolverSettings& settings = {}) {
  sc.validate();
  const double B = sc.bandwidth_hz;

  struct Candidate {
    double value = -std::numeric_limits<double>::infinity();
    double beta = 0.0;
    double b_up = 0.0;
  };
  Candidate best;

  auto consider = [&best](double value, double beta, double b_up) {
    if (value > best.value ||
        (value == best.value && (beta < best.beta || (beta == best.beta && b_up < best.b_up)))) {
      best = {value, beta, b_up};
    }
  };

  auto search_slice = [&](double b_up) {
    auto f = [&](double beta) { return objective(sc, beta, b_up); };
    consider(f(0.0), 0.0, b_up);
    const double cap = beta_cap(sc, b_up);
    if (cap > 0.0) {
      auto [beta_in, value_in] = detail::golden_section_max(f, 0.0, cap, settings.beta_tol);
      consider(value_in, beta_in, b_up);
      consider(f(cap), cap, b_up);
    }
  };

  const int steps = std::max(2, settings.b_up_steps);
  if (B <= 0.0) {
    search_slice(0.0);
    return detail::make_plan(sc, best.beta, best.b_up);
  }
  for (int i = 0; i < steps; ++i) {
    search_slice(B * static_cast<double>(i) / static_cast<double>(steps - 1));
  }
  double step = B / static_cast<double>(steps - 1);
  for (int pass = 0; pass < settings.refine_passes; ++pass) {
    step *= 0.5;
    const double center = best.b_up;
    if (center - step >= 0.0) search_slice(center - step);
    if (center + step <= B) search_slice(center + step);
  }
  return detail::make_plan(sc, best.beta, best.b_up);
}

/// Baseline: every frame is analysed at the cloud; the whole band serves the
/// uplink and the edge model receives no updates.
inline AllocationPlan solve_cloud_only(const Scenario& sc) {
  sc.validate();
  if (sc.feature_bits * sc.n_frames > sc.bandwidth_hz * sc.se_up) {
    throw InfeasibleError("solve_cloud_only: feature stream for all frames exceeds the uplink capacity");
  }
  return detail::make_plan(sc, 1.0, sc.bandwidth_hz);
}

/// Baseline: every frame is analysed on the UAV; the whole band serves the
/// downlink model stream. Independent of the frame rate.
inline AllocationPlan solve_edge_only(const Scenario& sc) {
  sc.validate();
  return detail::make_plan(sc, 0.0, 0.0);
}

/// First-order balance diagnostic at an interior operating point. The three
/// uses of a marginal Hz — deeper residual quantization, a larger model
/// update, and a larger cloud task share — should buy equal accuracy at an
/// optimum; the residual reports the worst normalized mismatch.
struct StationarityDiagnostic {
  bool applicable = false;      // false at boundary points, where the balance has no meaning
  double residual = 0.0;        // signed, worst-magnitude of the two balances below
  double quality_vs_update = 0.0;
  double split_vs_update = 0.0;
  // Closed-form ratio relation between the two accuracies, LHS - RHS, kept in
  // its published per-frame-bit units for reference; NaN when undefined.
  double ratio_relation_gap = std::numeric_limits<double>::quiet_NaN();
};

inline StationarityDiagnostic stationarity_residual(const Scenario& sc, double beta,
                                                    double b_up_hz) {
  StationarityDiagnostic diag;
  const double B = sc.bandwidth_hz;
  if (!(beta > 0.0 && beta < 1.0)) return diag;
  if (!(b_up_hz > 0.0 && b_up_hz < B)) return diag;
  const double downlink_capacity = (B - b_up_hz) * sc.se_down;
  if (!(downlink_capacity > sc.update_min_bps() && downlink_capacity < sc.update_max_bps())) {
    return diag;  // update rate pinned at a bound
  }
  const double m_update = downlink_capacity;
  const double budget =
      b_up_hz * sc.se_up - sc.feature_bits * beta * sc.n_frames;
  if (!(budget > 0.0)) return diag;
  const double depth = budget / (sc.pixels * beta * sc.n_frames);

  const double map_cloud = sc.cloud_model.value(depth);
  const double map_edge = sc.edge_model.value(m_update);
  const double cloud_slope = sc.cloud_model.derivative(depth);
  const double edge_slope = sc.edge_model.derivative(m_update);

  const double den = (1.0 - beta) * map_cloud + beta * map_edge;
  const double d_cloud = beta * map_edge * map_edge / (den * den);
  const double d_edge = (1.0 - beta) * map_cloud * map_cloud / (den * den);
  const double d_split = map_cloud * map_edge * (map_cloud - map_edge) / (den * den);

  // Accuracy bought per marginal Hz through each use of the band.
  const double v_quality = d_cloud * cloud_slope * sc.se_up / (sc.pixels * beta * sc.n_frames);
  const double v_update = d_edge * edge_slope * sc.se_down;
  const double v_split =
      d_split * sc.se_up / (sc.n_frames * (sc.feature_bits + sc.pixels * depth));

  auto normalized = [](double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return (a - b) / scale;
  };
  diag.quality_vs_update = normalized(v_quality, v_update);
  diag.split_vs_update = normalized(v_split, v_update);
  diag.residual = std::fabs(diag.quality_vs_update) >= std::fabs(diag.split_vs_update)
                      ? diag.quality_vs_update
                      : diag.split_vs_update;
  if (map_cloud > map_edge && edge_slope > 0.0) {
    const double inner = sc.n_frames * (sc.feature_bits + depth) * map_cloud /
                             (map_cloud - map_edge) -
                         (map_edge / edge_slope) * (sc.se_up / sc.se_down);
    if (inner >= 0.0) {
      diag.ratio_relation_gap = map_cloud / map_edge -
                                std::sqrt(inner) * std::sqrt(cloud_slope / (beta * sc.n_frames));
    }
  }
  diag.applicable = true;
  return diag;
}

inline StationarityDiagnostic stationarity_residual(const Scenario& sc,
                                                    const AllocationPlan& plan) {
  return stationarity_residual(sc, plan.beta, plan.b_up_hz);
}

}  // namespace evoplan
