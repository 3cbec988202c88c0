#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evoplan/errors.hpp"
#include "evoplan/scenario.hpp"

namespace evoplan {

// Alternative (cloud, edge) model pair selectable through the model_config
// sweep axis.
struct ModelPair {
  CloudResponseModel cloud = Scenario::default_cloud_model();
  EdgeResponseModel edge = Scenario::default_edge_model();
};

struct LoadedConfig {
  Scenario scenario;
  std::map<int, ModelPair> model_configs;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": expected a number, got '" + text + "'");
  }
  if (trim(text.substr(used)) != "") {
    throw ParseError(where + ": trailing characters after number in '" + text + "'");
  }
  return v;
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& where) {
  std::string body = text;
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream in(body);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, where));
  if (out.empty()) throw ParseError(where + ": expected a list of numbers");
  return out;
}

// Parameters of one response-model pair as they appear in a config; built
// into actual models once m bounds and the base directory are known.
struct ModelParams {
  double cloud_map_feature_only = kDefaultCloudFeatureOnly;
  double cloud_map_ceiling = kDefaultCloudCeiling;
  double cloud_rate = kDefaultCloudRate;
  std::string cloud_table;
  double edge_map_baseline = kDefaultEdgeBaseline;
  double edge_map_max = kDefaultEdgeMax;
  double edge_rate = kDefaultEdgeRate;
  std::string edge_table;

  // Returns true when `leaf` (e.g. "cloud.rate") belongs to this struct.
  bool apply(const std::string& leaf, const std::string& value, const std::string& where) {
    if (leaf == "cloud.map_feature_only") cloud_map_feature_only = parse_number(value, where);
    else if (leaf == "cloud.map_ceiling") cloud_map_ceiling = parse_number(value, where);
    else if (leaf == "cloud.rate") cloud_rate = parse_number(value, where);
    else if (leaf == "cloud.table") cloud_table = value;
    else if (leaf == "edge.map_baseline") edge_map_baseline = parse_number(value, where);
    else if (leaf == "edge.map_max") edge_map_max = parse_number(value, where);
    else if (leaf == "edge.rate") edge_rate = parse_number(value, where);
    else if (leaf == "edge.table") edge_table = value;
    else return false;
    return true;
  }

  ModelPair build(double m_min, double m_max, const std::filesystem::path& base_dir) const {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path fp(p);
      return fp.is_absolute() ? fp.string() : (base_dir / fp).string();
    };
    ModelPair pair;
    if (!cloud_table.empty()) {
      pair.cloud = CloudResponseModel::from_table(load_breakpoint_table_file(resolve(cloud_table)));
    } else {
      pair.cloud = CloudResponseModel::closed_form(cloud_map_feature_only, cloud_map_ceiling, cloud_rate);
    }
    if (!edge_table.empty()) {
      pair.edge = EdgeResponseModel::from_table(load_breakpoint_table_file(resolve(edge_table)));
    } else {
      pair.edge = EdgeResponseModel::closed_form(edge_map_baseline, edge_map_max, m_min, m_max, edge_rate);
    }
    return pair;
  }
};

}  // namespace detail

/// Parses flat `key = value` configuration text. Missing keys fall back to
/// the stock parameter set (10 frames/s of 1e7-pixel frames, 860-bit
/// features, 10 MHz shared band at 2.55 / 5 bit/s/Hz, update rates between
/// 230 kbit/s and 23 Mbit/s). '#' starts a comment. Alternative model pairs
/// for the model_config sweep axis use keys `model_config.<id>.cloud.*` /
/// `model_config.<id>.edge.*`.
inline LoadedConfig load_config_stream(std::istream& in, const std::string& origin,
                                       const std::filesystem::path& base_dir) {
  double n_frames = 10.0;
  double pixels = 1e7;
  double raw_bits = 24.0;
  double feature_bits = 860.0;
  double bandwidth_hz = 10e6;
  double se_up = 2.55;
  double se_down = 5.0;
  double m_min_bps = kDefaultUpdateMinBps;
  double m_max_bps = kDefaultUpdateMaxBps;
  std::vector<double> ladder_levels{0.125, 0.25, 0.5, 1.0, 2.0};
  detail::ModelParams base_models;
  struct AltOverride {
    std::string leaf;
    std::string value;
    std::string where;
  };
  std::map<int, std::vector<AltOverride>> alt_overrides;
  std::map<std::string, int> seen;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      throw ParseError(where + ": expected 'key = value'");
    }
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(where + ": expected 'key = value'");
    }
    if (auto [it, inserted] = seen.emplace(key, lineno); !inserted) {
      throw ParseError(where + ": duplicate key '" + key + "' (first on line " +
                       std::to_string(it->second) + ")");
    }

    if (key == "n_frames") n_frames = detail::parse_number(value, where);
    else if (key == "pixels") pixels = detail::parse_number(value, where);
    else if (key == "raw_bits") raw_bits = detail::parse_number(value, where);
    else if (key == "feature_bits") feature_bits = detail::parse_number(value, where);
    else if (key == "bandwidth_hz") bandwidth_hz = detail::parse_number(value, where);
    else if (key == "se_up") se_up = detail::parse_number(value, where);
    else if (key == "se_down") se_down = detail::parse_number(value, where);
    else if (key == "m_min_bps") m_min_bps = detail::parse_number(value, where);
    else if (key == "m_max_bps") m_max_bps = detail::parse_number(value, where);
    else if (key == "ladder") ladder_levels = detail::parse_number_list(value, where);
    else if (base_models.apply(key, value, where)) {
      // handled
    } else if (key.rfind("model_config.", 0) == 0) {
      const std::string rest = key.substr(13);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) {
        throw ParseError(where + ": expected model_config.<id>.<model key>");
      }
      int id = 0;
      try {
        id = std::stoi(rest.substr(0, dot));
      } catch (const std::exception&) {
        throw ParseError(where + ": model_config id must be an integer");
      }
      alt_overrides[id].push_back({rest.substr(dot + 1), value, where});
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }

  if (!(m_min_bps < m_max_bps)) {
    throw InvalidInputError(origin + ": m_min_bps (" + std::to_string(m_min_bps) +
                            ") must be below m_max_bps (" + std::to_string(m_max_bps) + ")");
  }

  LoadedConfig cfg;
  const ModelPair base_pair = base_models.build(m_min_bps, m_max_bps, base_dir);
  cfg.scenario.n_frames = n_frames;
  cfg.scenario.pixels = pixels;
  cfg.scenario.raw_bits = raw_bits;
  cfg.scenario.feature_bits = feature_bits;
  cfg.scenario.bandwidth_hz = bandwidth_hz;
  cfg.scenario.se_up = se_up;
  cfg.scenario.se_down = se_down;
  cfg.scenario.ladder = QuantizationLadder(ladder_levels);
  cfg.scenario.cloud_model = base_pair.cloud;
  cfg.scenario.edge_model = base_pair.edge;
  cfg.scenario.validate();
  for (const auto& [id, overrides] : alt_overrides) {
    detail::ModelParams params = base_models;
    for (const auto& o : overrides) {
      if (!params.apply(o.leaf, o.value, o.where)) {
        throw ParseError(o.where + ": unknown model key '" + o.leaf + "'");
      }
    }
    cfg.model_configs.emplace(id, params.build(m_min_bps, m_max_bps, base_dir));
  }
  return cfg;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return load_config_stream(in, path, std::filesystem::path(path).parent_path());
}

/// Config text straight from a string; table paths resolve against base_dir.
inline LoadedConfig load_config_string(const std::string& text,
                                       const std::string& origin = "<inline>",
                                       const std::filesystem::path& base_dir = {}) {
  std::istringstream in(text);
  return load_config_stream(in, origin, base_dir);
}

inline Scenario load_scenario(const std::string& path) { return load_config(path).scenario; }

}  // namespace evoplan
