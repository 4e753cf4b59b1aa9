#include "effort/registry.hpp"

#include "json.hpp"

#include "effort/error.hpp"

#ifndef EFFORT_DEFAULT_REGISTRY
#define EFFORT_DEFAULT_REGISTRY "data/registry.json"
#endif

namespace effort {

namespace {

PrintedValue printed(const nlohmann::json& v) {
  if (v.is_string()) {
    return PrintedValue::parse(v.get<std::string>());
  }
  if (v.is_number()) {
    return PrintedValue::parse(v.dump());
  }
  throw ConfigError("registry: expected a number or numeric string, got " + v.dump());
}

std::vector<std::string> strings(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key)) {
    for (const auto& v : j.at(key)) {
      out.push_back(v.get<std::string>());
    }
  }
  return out;
}

} // namespace

Registry Registry::load(const std::filesystem::path& registry_json) {
  return parse(read_file(registry_json), registry_json.parent_path());
}

Registry Registry::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("registry: ") + e.what());
  }
  if (!doc.is_array()) {
    throw ConfigError("registry: top level must be an array");
  }
  Registry reg;
  try {
    for (const auto& j : doc) {
      RegistryEntry e;
      e.id = j.at("id").get<std::string>();
      e.title = j.value("title", "");
      e.path = base_dir / j.at("path").get<std::string>();
      e.format = j.at("format").get<std::string>();
      e.target = j.at("target").get<std::string>();
      e.schema = strings(j, "schema");
      e.drop_rows_missing = strings(j, "drop_rows_missing");
      if (j.contains("sha256") && !j.at("sha256").is_null()) {
        e.sha256 = j.at("sha256").get<std::string>();
      }
      if (e.format != "arff" && e.format != "csv") {
        throw ConfigError("registry: dataset '" + e.id + "' has unknown format '" + e.format + "'");
      }
      const auto& prof = j.at("expected_profile");
      std::vector<std::string> columns = e.schema;
      columns.push_back(e.target);
      for (const auto& name : columns) {
        if (!prof.contains(name)) {
          throw ConfigError("registry: dataset '" + e.id + "' has no expected profile for '" +
                            name + "'");
        }
        const auto& c = prof.at(name);
        e.expected_profile.columns.push_back(ExpectedColumn{
            name, printed(c.at("min")), printed(c.at("max")), printed(c.at("mean")),
            printed(c.at("std"))});
      }
      if (j.contains("waivers")) {
        for (const auto& w : j.at("waivers")) {
          e.waivers.push_back(Waiver{w.at("column").get<std::string>(),
                                     w.at("stat").get<std::string>(),
                                     w.at("reason").get<std::string>()});
        }
      }
      if (reg.find(e.id)) {
        throw ConfigError("registry: duplicate dataset id '" + e.id + "'");
      }
      reg.entries_.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("registry: ") + e.what());
  }
  return reg;
}

const RegistryEntry* Registry::find(std::string_view id) const {
  for (const auto& e : entries_) {
    if (e.id == id) {
      return &e;
    }
  }
  return nullptr;
}

const RegistryEntry& Registry::at(std::string_view id) const {
  if (const auto* e = find(id)) {
    return *e;
  }
  std::string known;
  for (const auto& e : entries_) {
    known += (known.empty() ? "" : ", ") + e.id;
  }
  throw ConfigError("unknown dataset '" + std::string(id) + "'; known ids: " + known);
}

std::vector<std::string> Registry::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    out.push_back(e.id);
  }
  return out;
}

Dataset load_dataset(const RegistryEntry& entry) {
  if (!entry.vendored()) {
    throw DataError("dataset '" + entry.id + "' is not vendored: expected file '" +
                    entry.path.string() + "'");
  }
  LoadOptions options;
  options.id = entry.id;
  options.target = entry.target;
  options.columns = entry.schema;
  options.drop_rows_missing = entry.drop_rows_missing;
  Dataset d = entry.format == "arff" ? load_arff(entry.path, options)
                                     : load_csv(entry.path, entry.target, options);
  if (entry.sha256 && *entry.sha256 != d.source_checksum) {
    throw DataError("dataset '" + entry.id + "': checksum mismatch (expected " + *entry.sha256 +
                    ", file has " + d.source_checksum + ")");
  }
  d = select_schema(d, entry.schema);
  d.validate();
  return d;
}

std::filesystem::path default_registry_path() { return EFFORT_DEFAULT_REGISTRY; }

} // namespace effort
