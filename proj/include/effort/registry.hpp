#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "effort/dataset.hpp"

namespace effort {

// One entry of data/registry.json.
struct RegistryEntry {
  std::string id;
  std::string title;                 // table caption the expected profile comes from
  std::filesystem::path path;        // resolved against the registry file's directory
  std::string format;                // "arff" | "csv"
  std::string target;
  std::vector<std::string> schema;   // feature columns, in table order
  std::vector<std::string> drop_rows_missing;
  std::optional<std::string> sha256; // expected checksum of the vendored bytes
  ExpectedProfile expected_profile;  // features in schema order, then target
  std::vector<Waiver> waivers;

  bool vendored() const { return std::filesystem::exists(path); }
};

class Registry {
public:
  static Registry load(const std::filesystem::path& registry_json);
  static Registry parse(std::string_view json_text, const std::filesystem::path& base_dir);

  const std::vector<RegistryEntry>& entries() const { return entries_; }
  const RegistryEntry* find(std::string_view id) const;
  const RegistryEntry& at(std::string_view id) const; // throws ConfigError listing known ids
  std::vector<std::string> ids() const;

private:
  std::vector<RegistryEntry> entries_;
};

/// Loads, verifies the checksum, applies the schema and validates the dataset.
/// Throws DataError when the file is absent or does not match its checksum.
Dataset load_dataset(const RegistryEntry& entry);

/// Registry path compiled into the binaries (the repository's data/registry.json).
std::filesystem::path default_registry_path();

} // namespace effort
