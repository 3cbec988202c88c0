#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evoplan/errors.hpp"

namespace evoplan {

// (x, mAP) breakpoint used by the table-backed response models.
struct Breakpoint {
  double x = 0.0;
  double map = 0.0;
};

namespace detail {

// Validates a breakpoint table: strictly increasing x, mAP in [0,1],
// non-decreasing, and concave (secant slopes non-increasing).
inline void check_table(const std::vector<Breakpoint>& pts, const char* what) {
  if (pts.size() < 2) {
    throw InvalidInputError(std::string(what) + ": table needs at least two breakpoints");
  }
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].map >= 0.0 && pts[i].map <= 1.0)) {
      throw InvalidInputError(std::string(what) + ": mAP values must lie in [0,1]");
    }
    if (i == 0) continue;
    const double dx = pts[i].x - pts[i - 1].x;
    const double dy = pts[i].map - pts[i - 1].map;
    if (!(dx > 0.0)) {
      throw InvalidInputError(std::string(what) + ": breakpoint abscissae must strictly increase");
    }
    if (dy < 0.0) {
      throw InvalidInputError(std::string(what) + ": table must be non-decreasing");
    }
    const double slope = dy / dx;
    if (slope > prev_slope + 1e-12) {
      throw InvalidInputError(std::string(what) + ": table must be concave (slopes non-increasing)");
    }
    prev_slope = slope;
  }
}

// Piecewise-linear evaluation, clamped flat outside the table span.
inline double table_value(const std::vector<Breakpoint>& pts, double x) {
  if (x <= pts.front().x) return pts.front().map;
  if (x >= pts.back().x) return pts.back().map;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (x <= pts[i].x) {
      const double t = (x - pts[i - 1].x) / (pts[i].x - pts[i - 1].x);
      return pts[i - 1].map + t * (pts[i].map - pts[i - 1].map);
    }
  }
  return pts.back().map;
}

// Segment slope at x; one-sided (right) at breakpoints, zero beyond the span.
inline double table_slope(const std::vector<Breakpoint>& pts, double x) {
  if (x < pts.front().x || x >= pts.back().x) return 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (x < pts[i].x) {
      return (pts[i].map - pts[i - 1].map) / (pts[i].x - pts[i - 1].x);
    }
  }
  return 0.0;
}

}  // namespace detail

/// Cloud-model accuracy response: mAP as a function of the residual-data
/// quantization depth (bits per pixel) riding on top of the feature stream.
///
/// Two interchangeable shapes:
///  - closed form: floor + (ceiling - floor) * (1 - exp(-rate * b))
///  - breakpoint table starting at b = 0, validated monotone and concave.
class CloudResponseModel {
 public:
  static CloudResponseModel closed_form(double map_feature_only, double map_ceiling, double rate) {
    if (!(map_feature_only >= 0.0 && map_feature_only <= map_ceiling && map_ceiling <= 1.0)) {
      throw InvalidInputError("CloudResponseModel: need 0 <= map_feature_only <= map_ceiling <= 1");
    }
    if (!(rate > 0.0)) {
      throw InvalidInputError("CloudResponseModel: rate must be positive");
    }
    CloudResponseModel m;
    m.floor_ = map_feature_only;
    m.ceiling_ = map_ceiling;
    m.rate_ = rate;
    return m;
  }

  static CloudResponseModel from_table(std::vector<Breakpoint> pts) {
    detail::check_table(pts, "CloudResponseModel");
    if (pts.front().x != 0.0) {
      throw InvalidInputError("CloudResponseModel: table must start at 0 bits/pixel");
    }
    CloudResponseModel m;
    m.floor_ = pts.front().map;
    m.ceiling_ = pts.back().map;
    m.table_ = std::move(pts);
    return m;
  }

  /// mAP at the given residual quantization depth; value(0) is the
  /// feature-only accuracy.
  double value(double bits_per_pixel) const {
    if (bits_per_pixel < 0.0) {
      throw InvalidInputError("CloudResponseModel: bits/pixel must be non-negative");
    }
    if (is_table()) return detail::table_value(table_, bits_per_pixel);
    return floor_ + (ceiling_ - floor_) * (1.0 - std::exp(-rate_ * bits_per_pixel));
  }

  /// Slope d(mAP)/d(bits per pixel); analytic for the closed form, segment
  /// secant for tables. Never negative.
  double derivative(double bits_per_pixel) const {
    if (bits_per_pixel < 0.0) {
      throw InvalidInputError("CloudResponseModel: bits/pixel must be non-negative");
    }
    if (is_table()) return detail::table_slope(table_, bits_per_pixel);
    return rate_ * (ceiling_ - floor_) * std::exp(-rate_ * bits_per_pixel);
  }

  double map_feature_only() const { return floor_; }
  double map_ceiling() const { return ceiling_; }
  bool is_table() const { return !table_.empty(); }

 private:
  CloudResponseModel() = default;
  double floor_ = 0.0;
  double ceiling_ = 0.0;
  double rate_ = 1.0;
  std::vector<Breakpoint> table_;
};

/// Edge-model accuracy response: mAP as a function of the model-update rate
/// (bits per second). Flat at map_baseline below update_min, saturating at
/// map_max from update_max onward.
class EdgeResponseModel {
 public:
  static EdgeResponseModel closed_form(double map_baseline, double map_max, double update_min,
                                       double update_max, double rate) {
    if (!(map_baseline >= 0.0 && map_baseline <= map_max && map_max <= 1.0)) {
      throw InvalidInputError("EdgeResponseModel: need 0 <= map_baseline <= map_max <= 1");
    }
    if (!(update_min > 0.0 && update_min < update_max)) {
      throw InvalidInputError("EdgeResponseModel: need 0 < update_min < update_max");
    }
    if (!(rate > 0.0)) {
      throw InvalidInputError("EdgeResponseModel: rate must be positive");
    }
    EdgeResponseModel m;
    m.baseline_ = map_baseline;
    m.max_ = map_max;
    m.m_min_ = update_min;
    m.m_max_ = update_max;
    m.rate_ = rate;
    return m;
  }

  /// Table abscissae span [update_min, update_max]; the first breakpoint
  /// defines map_baseline, the last defines map_max.
  static EdgeResponseModel from_table(std::vector<Breakpoint> pts) {
    detail::check_table(pts, "EdgeResponseModel");
    if (!(pts.front().x > 0.0)) {
      throw InvalidInputError("EdgeResponseModel: minimum update rate must be positive");
    }
    EdgeResponseModel m;
    m.baseline_ = pts.front().map;
    m.max_ = pts.back().map;
    m.m_min_ = pts.front().x;
    m.m_max_ = pts.back().x;
    m.table_ = std::move(pts);
    return m;
  }

  double value(double update_bps) const {
    if (update_bps < m_min_) return baseline_;
    if (update_bps >= m_max_) return max_;
    if (is_table()) return detail::table_value(table_, update_bps);
    const double t = (update_bps - m_min_) / (m_max_ - m_min_);
    return baseline_ + (max_ - baseline_) * (1.0 - std::exp(-rate_ * t)) / (1.0 - std::exp(-rate_));
  }

  double derivative(double update_bps) const {
    if (update_bps < m_min_ || update_bps >= m_max_) return 0.0;
    if (is_table()) return detail::table_slope(table_, update_bps);
    const double t = (update_bps - m_min_) / (m_max_ - m_min_);
    return (max_ - baseline_) * rate_ * std::exp(-rate_ * t) /
           ((m_max_ - m_min_) * (1.0 - std::exp(-rate_)));
  }

  double map_baseline() const { return baseline_; }
  double map_max() const { return max_; }
  double update_min() const { return m_min_; }
  double update_max() const { return m_max_; }
  bool is_table() const { return !table_.empty(); }

 private:
  EdgeResponseModel() = default;
  double baseline_ = 0.0;
  double max_ = 0.0;
  double m_min_ = 1.0;
  double m_max_ = 2.0;
  double rate_ = 1.0;
  std::vector<Breakpoint> table_;
};

/// Two-column text loader shared by both table modes: "x map" per line,
/// '#' comments and blank lines allowed.
inline std::vector<Breakpoint> load_breakpoint_table(std::istream& in,
                                                     const std::string& origin = "<stream>") {
  std::vector<Breakpoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x)) continue;
    if (!(ls >> y)) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected two numeric columns");
    }
    pts.push_back({x, y});
  }
  return pts;
}

inline std::vector<Breakpoint> load_breakpoint_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return load_breakpoint_table(in, path);
}

}  // namespace evoplan
