#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "effort/bench.hpp"
#include "effort/error.hpp"

namespace effort {

bool RunConfig::wants(std::string_view metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

namespace {

ParamValue param_value(const nlohmann::json& v, const std::string& kind, const std::string& name) {
  if (v.is_number()) {
    return v.get<double>();
  }
  if (v.is_string()) {
    return v.get<std::string>();
  }
  throw ConfigError(fmt::format("{}: grid value for '{}' must be a number or string, got {}", kind,
                                name, v.dump()));
}

} // namespace

nlohmann::ordered_json grid_to_json(const HyperGrid& grid) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, values] : grid.axes) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : values) {
      if (const auto* d = std::get_if<double>(&v)) {
        arr.push_back(*d);
      } else {
        arr.push_back(std::get<std::string>(v));
      }
    }
    j[name] = std::move(arr);
  }
  return j;
}

RunConfig parse_config(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config: top level must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    static const std::vector<std::string> known{"datasets", "learners", "seed", "inner_folds",
                                                "metrics"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  RunConfig cfg;
  try {
    if (!doc.contains("seed") || !doc.at("seed").is_number_unsigned()) {
      throw ConfigError("config: 'seed' (unsigned 64-bit integer) is required");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& id : doc.at("datasets")) {
      cfg.datasets.push_back(id.get<std::string>());
    }
    if (cfg.datasets.empty()) {
      throw ConfigError("config: 'datasets' is empty");
    }
    cfg.inner_folds = doc.value("inner_folds", 5);
    if (cfg.inner_folds < 2) {
      throw ConfigError("config: 'inner_folds' must be at least 2");
    }
    if (doc.contains("metrics")) {
      cfg.metrics.clear();
      for (const auto& m : doc.at("metrics")) {
        const auto name = m.get<std::string>();
        if (name != "RMSE" && name != "MMRE") {
          throw ConfigError("config: unknown metric '" + name + "'");
        }
        cfg.metrics.push_back(name);
      }
    }
    if (!cfg.wants("RMSE")) {
      throw ConfigError("config: 'metrics' must include RMSE (ranking uses it)");
    }

    for (const auto& l : doc.at("learners")) {
      const auto name = l.at("kind").get<std::string>();
      const auto kind = parse_kind(name);
      if (!kind) {
        throw ConfigError("config: unknown learner kind '" + name + "'");
      }
      LearnerEntry entry{*kind, default_grid(*kind)};
      if (l.contains("grid")) {
        for (const auto& [param, values] : l.at("grid").items()) {
          auto it = std::find_if(entry.grid.axes.begin(), entry.grid.axes.end(),
                                 [&](const auto& axis) { return axis.first == param; });
          if (it == entry.grid.axes.end()) {
            throw ConfigError(fmt::format("config: {} has no parameter '{}'", name, param));
          }
          if (!values.is_array() || values.empty()) {
            throw ConfigError(fmt::format("config: {} grid '{}' must be a nonempty array", name, param));
          }
          it->second.clear();
          for (const auto& v : values) {
            it->second.push_back(param_value(v, name, param));
          }
        }
      }
      for (const auto& spec : entry.grid.enumerate()) {
        validate_spec(spec);
      }
      if (std::any_of(cfg.learners.begin(), cfg.learners.end(),
                      [&](const LearnerEntry& e) { return e.kind == *kind; })) {
        throw ConfigError("config: learner '" + name + "' listed twice");
      }
      cfg.learners.push_back(std::move(entry));
    }
    if (cfg.learners.empty()) {
      throw ConfigError("config: 'learners' is empty");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  nlohmann::ordered_json canon;
  canon["datasets"] = cfg.datasets;
  auto learners = nlohmann::ordered_json::array();
  for (const auto& e : cfg.learners) {
    learners.push_back({{"kind", std::string(kind_name(e.kind))}, {"grid", grid_to_json(e.grid)}});
  }
  canon["learners"] = std::move(learners);
  canon["seed"] = cfg.seed;
  canon["inner_folds"] = cfg.inner_folds;
  canon["metrics"] = cfg.metrics;
  cfg.canonical = canon.dump();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

void validate_config(const RunConfig& config, const Registry& registry) {
  for (const auto& id : config.datasets) {
    registry.at(id);
  }
}

} // namespace effort
