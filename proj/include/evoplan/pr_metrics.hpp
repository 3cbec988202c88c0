#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evoplan/errors.hpp"

namespace evoplan {

// One recall-precision pair at a single IoU threshold.
struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
};

/// Precision-recall curve sampled over K IoU thresholds.
///
/// Points are kept sorted by recall; the implicit anchor point below the
/// first threshold has recall 0 and the first point's precision.
class PRCurve {
 public:
  explicit PRCurve(std::vector<PRPoint> points) : points_(std::move(points)) {
    if (points_.empty()) {
      throw InvalidInputError("PRCurve: needs at least one point");
    }
    for (const PRPoint& p : points_) {
      if (!(p.recall >= 0.0 && p.recall <= 1.0) ||
          !(p.precision >= 0.0 && p.precision <= 1.0)) {
        throw InvalidInputError("PRCurve: recall/precision must lie in [0,1]");
      }
    }
    std::stable_sort(points_.begin(), points_.end(),
                     [](const PRPoint& a, const PRPoint& b) { return a.recall < b.recall; });
  }

  const std::vector<PRPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<PRPoint> points_;
};

// Fraction of frames analysed by the cloud model; the remainder runs on the edge.
struct FusionWeights {
  double beta = 0.0;
};

namespace detail {

inline void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidInputError(std::string(name) + " must lie in [0,1]");
  }
}

// Weighted harmonic combination shared by precision and recall fusion.
// A zero value with nonzero weight drives the combination to its limit 0.
inline double fuse_harmonic(double cloud, double edge, double beta) {
  if (beta <= 0.0) return edge;
  if (beta >= 1.0) return cloud;
  if (cloud <= 0.0 || edge <= 0.0) return 0.0;
  return 1.0 / (beta / cloud + (1.0 - beta) / edge);
}

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace detail

/// Area under the precision-recall curve by trapezoid summation, with the
/// anchor (r, p) = (0, p_1) extending the first point flat to recall 0.
/// Ties in recall contribute zero-width trapezoids.
inline double map_from_curve(const PRCurve& curve) {
  const auto& pts = curve.points();
  double prev_r = 0.0;
  double prev_p = pts.front().precision;
  double area = 0.0;
  for (const PRPoint& p : pts) {
    area += (p.recall - prev_r) * (p.precision + prev_p) / 2.0;
    prev_r = p.recall;
    prev_p = p.precision;
  }
  return detail::clamp01(area);
}

/// Precision of the pooled cloud+edge detections given the task split.
inline double fuse_precision(double p_cloud, double p_edge, FusionWeights w) {
  detail::check_fraction(p_cloud, "p_cloud");
  detail::check_fraction(p_edge, "p_edge");
  detail::check_fraction(w.beta, "beta");
  return detail::fuse_harmonic(p_cloud, p_edge, w.beta);
}

/// Recall of the pooled cloud+edge detections; same combination rule as precision.
inline double fuse_recall(double r_cloud, double r_edge, FusionWeights w) {
  detail::check_fraction(r_cloud, "r_cloud");
  detail::check_fraction(r_edge, "r_edge");
  detail::check_fraction(w.beta, "beta");
  return detail::fuse_harmonic(r_cloud, r_edge, w.beta);
}

/// Joint mAP of the two models: fuse the curves pointwise across the shared
/// IoU grid, then take the area under the fused curve.
inline double joint_map_exact(const PRCurve& cloud, const PRCurve& edge, FusionWeights w) {
  if (cloud.size() != edge.size()) {
    throw InvalidInputError("joint_map_exact: curves must share the same IoU grid size");
  }
  detail::check_fraction(w.beta, "beta");
  std::vector<PRPoint> fused;
  fused.reserve(cloud.size());
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    fused.push_back({detail::fuse_harmonic(cloud.points()[k].recall, edge.points()[k].recall, w.beta),
                     detail::fuse_harmonic(cloud.points()[k].precision, edge.points()[k].precision, w.beta)});
  }
  return map_from_curve(PRCurve(std::move(fused)));
}

/// Closed-form lower bound on the joint mAP in terms of the two models'
/// own mAP values:  m_c * m_e / ((1-beta) * m_c + beta * m_e).
inline double joint_map_lower_bound(double map_cloud, double map_edge, FusionWeights w) {
  detail::check_fraction(map_cloud, "map_cloud");
  detail::check_fraction(map_edge, "map_edge");
  detail::check_fraction(w.beta, "beta");
  if (w.beta <= 0.0) return map_edge;
  if (w.beta >= 1.0) return map_cloud;
  const double den = (1.0 - w.beta) * map_cloud + w.beta * map_edge;
  if (den <= 0.0) return 0.0;
  return detail::clamp01(map_cloud * map_edge / den);
}

/// Pointwise capacity gap (p_c - p_e)(r_c - r_e) at threshold index k (1-based).
/// Non-negative at every k exactly when the cloud curve dominates the edge curve.
inline double delta_gap(const PRCurve& cloud, const PRCurve& edge, std::size_t k) {
  if (k < 1 || k > cloud.size() || k > edge.size()) {
    throw InvalidInputError("delta_gap: index out of range");
  }
  const PRPoint& c = cloud.points()[k - 1];
  const PRPoint& e = edge.points()[k - 1];
  return (c.precision - e.precision) * (c.recall - e.recall);
}

/// Reads a curve from two-column text: one "recall precision" pair per line,
/// '#' starts a comment, blank lines are skipped. Commas are accepted as
/// separators.
inline PRCurve load_pr_curve(std::istream& in, const std::string& origin = "<stream>") {
  std::vector<PRPoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    double r, p;
    if (!(ls >> r)) continue;  // blank or comment-only line
    if (!(ls >> p)) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected two numeric columns");
    }
    double extra;
    if (ls >> extra) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": more than two columns");
    }
    pts.push_back({r, p});
  }
  if (pts.empty()) {
    throw ParseError(origin + ": no recall-precision pairs found");
  }
  return PRCurve(std::move(pts));
}

inline PRCurve load_pr_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return load_pr_curve(in, path);
}

}  // namespace evoplan
