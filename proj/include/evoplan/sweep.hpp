#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "evoplan/allocator.hpp"
#include "evoplan/errors.hpp"
#include "evoplan/oracle.hpp"
#include "evoplan/scenario_io.hpp"

namespace evoplan {

enum class SweepAxis { bandwidth, frames_per_second, se_up, se_down, model_config };

inline SweepAxis parse_axis(const std::string& name) {
  if (name == "bandwidth") return SweepAxis::bandwidth;
  if (name == "frames_per_second") return SweepAxis::frames_per_second;
  if (name == "se_up") return SweepAxis::se_up;
  if (name == "se_down") return SweepAxis::se_down;
  if (name == "model_config") return SweepAxis::model_config;
  throw InvalidInputError("unknown sweep axis '" + name +
                          "' (expected bandwidth, frames_per_second, se_up, se_down, model_config)");
}

inline const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::bandwidth: return "bandwidth";
    case SweepAxis::frames_per_second: return "frames_per_second";
    case SweepAxis::se_up: return "se_up";
    case SweepAxis::se_down: return "se_down";
    case SweepAxis::model_config: return "model_config";
  }
  return "?";
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::bandwidth;
  std::vector<double> values;
  bool with_oracle = false;
};

/// One sweep point: the scenario actually run, the plans produced, and any
/// per-point failure notes. Wall time is informational and never serialized.
struct RunRecord {
  double axis_value = 0.0;
  Scenario scenario;
  std::optional<AllocationPlan> joint;
  std::optional<AllocationPlan> cloud_only;
  std::optional<AllocationPlan> edge_only;
  std::optional<AllocationPlan> oracle;
  std::string note;
  double wall_ms = 0.0;
};

namespace detail {

inline void check_sweep_values(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInputError("sweep: value list must be non-empty");
  if (values.size() < 2) return;
  const bool ascending = values[1] > values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool ok = ascending ? values[i] > values[i - 1] : values[i] < values[i - 1];
    if (!ok) throw InvalidInputError("sweep: values must be strictly monotone");
  }
}

inline Scenario apply_axis(const LoadedConfig& cfg, SweepAxis axis, double value,
                           std::string& note) {
  Scenario sc = cfg.scenario;
  switch (axis) {
    case SweepAxis::bandwidth: sc.bandwidth_hz = value; break;
    case SweepAxis::frames_per_second: sc.n_frames = value; break;
    case SweepAxis::se_up: sc.se_up = value; break;
    case SweepAxis::se_down: sc.se_down = value; break;
    case SweepAxis::model_config: {
      const int id = static_cast<int>(std::llround(value));
      const auto it = cfg.model_configs.find(id);
      if (it == cfg.model_configs.end()) {
        note = "model_config " + std::to_string(id) + " not defined in config";
      } else {
        sc.cloud_model = it->second.cloud;
        sc.edge_model = it->second.edge;
      }
      break;
    }
  }
  return sc;
}

}  // namespace detail

/// Runs the solver, both baselines, and optionally the exhaustive oracle at
/// every axis value. Per-point failures are recorded in the note field and
/// the sweep continues. Records come back ordered by axis value.
inline std::vector<RunRecord> run_sweep(const LoadedConfig& cfg, const SweepSpec& spec,
                                        const SolverSettings& settings = {},
                                        const OracleGrid& oracle_grid = {}) {
  detail::check_sweep_values(spec.values);
  std::vector<RunRecord> records;
  records.reserve(spec.values.size());
  for (double value : spec.values) {
    RunRecord rec;
    rec.axis_value = value;
    rec.scenario = detail::apply_axis(cfg, spec.axis, value, rec.note);
    const auto started = std::chrono::steady_clock::now();
    if (rec.note.empty()) {
      auto attempt = [&rec](const char* label, auto&& fn) -> std::optional<AllocationPlan> {
        try {
          return fn();
        } catch (const Error& e) {
          if (!rec.note.empty()) rec.note += "; ";
          rec.note += std::string(label) + ": " + e.what();
          return std::nullopt;
        }
      };
      rec.joint = attempt("solve", [&] { return solve(rec.scenario, settings); });
      rec.cloud_only = attempt("cloud-only", [&] { return solve_cloud_only(rec.scenario); });
      rec.edge_only = attempt("edge-only", [&] { return solve_edge_only(rec.scenario); });
      if (spec.with_oracle) {
        rec.oracle = attempt("oracle", [&] { return exhaustive_search(rec.scenario, oracle_grid); });
      }
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            started)
                      .count();
    records.push_back(std::move(rec));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.axis_value < b.axis_value; });
  return records;
}

/// Fixed-decimal formatting with six significant digits; values needing more
/// than six integer digits keep their full integer part.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0.000000";
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(v))));
  const int precision = std::clamp(5 - magnitude, 0, 17);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

/// Writes the sweep as CSV. Header and column order are part of the file
/// contract; plans that failed (or an oracle that was not run) leave their
/// columns empty.
inline void emit_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  if (records.empty()) throw InvalidInputError("emit_csv: no records");
  out << "axis,map_joint,map_cloud_only,map_edge_only,map_oracle,beta,b_up_hz,b_down_hz,"
         "m_update_bps,rate_feature_bps,rate_data_bps,avg_bits_per_pixel\n";
  for (const RunRecord& rec : records) {
    out << format_number(rec.axis_value) << ',';
    out << (rec.joint ? format_number(rec.joint->map_joint) : "") << ',';
    out << (rec.cloud_only ? format_number(rec.cloud_only->map_joint) : "") << ',';
    out << (rec.edge_only ? format_number(rec.edge_only->map_joint) : "") << ',';
    out << (rec.oracle ? format_number(rec.oracle->map_joint) : "") << ',';
    if (rec.joint) {
      const AllocationPlan& p = *rec.joint;
      out << format_number(p.beta) << ',' << format_number(p.b_up_hz) << ','
          << format_number(p.b_down_hz) << ',' << format_number(p.m_update_bps) << ','
          << format_number(p.rate_feature_bps) << ',' << format_number(p.rate_data_bps) << ','
          << format_number(p.quant.avg_bits);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

inline void emit_csv_file(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit_csv: cannot open '" + path + "' for writing");
  emit_csv(records, out);
  if (!out) throw Error("emit_csv: write to '" + path + "' failed");
}

namespace detail {

struct PlotSeries {
  const char* label;
  const char* color;
  std::vector<std::pair<double, double>> points;
};

}  // namespace detail

/// Optional static chart of the accuracy columns against the sweep axis,
/// written as a self-contained SVG.
inline void emit_plot(const std::vector<RunRecord>& records, const std::string& path) {
  if (records.empty()) throw InvalidInputError("emit_plot: no records");
  std::vector<detail::PlotSeries> series = {
      {"joint", "#1f77b4", {}},
      {"cloud-only", "#d62728", {}},
      {"edge-only", "#2ca02c", {}},
      {"oracle", "#7f7f7f", {}},
  };
  for (const RunRecord& rec : records) {
    if (rec.joint) series[0].points.emplace_back(rec.axis_value, rec.joint->map_joint);
    if (rec.cloud_only) series[1].points.emplace_back(rec.axis_value, rec.cloud_only->map_joint);
    if (rec.edge_only) series[2].points.emplace_back(rec.axis_value, rec.edge_only->map_joint);
    if (rec.oracle) series[3].points.emplace_back(rec.axis_value, rec.oracle->map_joint);
  }
  double x_min = records.front().axis_value, x_max = records.back().axis_value;
  double y_min = 1.0, y_max = 0.0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (y_min > y_max) {  // nothing plottable
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1e-6;
  const double pad_y = 0.05 * (y_max - y_min);
  y_min -= pad_y;
  y_max += pad_y;

  const double W = 640, H = 420, L = 70, R = 20, T = 20, Bm = 50;
  auto px = [&](double x) { return L + (x - x_min) / (x_max - x_min) * (W - L - R); };
  auto py = [&](double y) { return H - Bm - (y - y_min) / (y_max - y_min) * (H - T - Bm); };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit_plot: cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << coord(L) << "\" y1=\"" << coord(H - Bm) << "\" x2=\"" << coord(W - R)
      << "\" y2=\"" << coord(H - Bm) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << coord(L) << "\" y1=\"" << coord(T) << "\" x2=\"" << coord(L)
      << "\" y2=\"" << coord(H - Bm) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << coord(L) << "\" y=\"" << coord(H - Bm + 16) << "\">"
      << format_number(x_min) << "</text>\n";
  out << "<text x=\"" << coord(W - R - 60) << "\" y=\"" << coord(H - Bm + 16) << "\">"
      << format_number(x_max) << "</text>\n";
  out << "<text x=\"4\" y=\"" << coord(H - Bm) << "\">" << format_number(y_min) << "</text>\n";
  out << "<text x=\"4\" y=\"" << coord(T + 10) << "\">" << format_number(y_max) << "</text>\n";
  out << "<text x=\"" << coord(W / 2 - 20) << "\" y=\"" << coord(H - 12) << "\">mAP vs axis"
      << "</text>\n";
  double legend_y = T + 10;
  for (const auto& s : series) {
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) out << coord(px(x)) << ',' << coord(py(y)) << ' ';
    out << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      out << "<circle cx=\"" << coord(px(x)) << "\" cy=\"" << coord(py(y))
          << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    out << "<text x=\"" << coord(L + 12) << "\" y=\"" << coord(legend_y) << "\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
    legend_y += 14;
  }
  out << "</svg>\n";
  if (!out) throw Error("emit_plot: write to '" + path + "' failed");
}

}  // namespace evoplan
