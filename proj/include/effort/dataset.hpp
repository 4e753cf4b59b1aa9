#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "effort/numerics.hpp"

namespace effort {

struct FeatureColumn {
  std::string name;
  std::vector<double> values;
  // Nominal ARFF attributes are stored as their declared-order level index.
  bool nominal = false;
  std::vector<std::string> levels;

  friend bool operator==(const FeatureColumn& a, const FeatureColumn& b) {
    return a.name == b.name && a.values == b.values;
  }
};

struct Dataset {
  std::string id;
  std::vector<FeatureColumn> features;
  FeatureColumn target;
  std::string source_checksum; // sha256 of the ingested file bytes
  std::size_t dropped_rows = 0;

  std::size_t rows() const { return target.values.size(); }
  std::size_t cols() const { return features.size(); }
  std::vector<std::string> feature_names() const;
  const FeatureColumn* find(std::string_view name) const;

  Matrix design() const;
  Vector response() const;

  /// Throws DataError when a structural invariant is broken.
  void validate() const;

  // Content equality: names and values. Provenance is ignored.
  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.features == b.features && a.target == b.target;
  }
};

struct LoadOptions {
  /// Target column; defaults to the last declared column.
  std::optional<std::string> target;
  /// Columns whose missing values drop the row instead of failing the load.
  std::vector<std::string> drop_rows_missing;
  /// When set, only these columns (plus target) are ingested, so missing
  /// values in other columns never matter.
  std::optional<std::vector<std::string>> columns;
  std::string id;
};

Dataset load_arff(const std::filesystem::path& path, const LoadOptions& options = {});
Dataset load_csv(const std::filesystem::path& path, const std::string& target_name,
                 const LoadOptions& options = {});

Dataset parse_arff(std::string_view text, const LoadOptions& options = {});
Dataset parse_csv(std::string_view text, const std::string& target_name,
                  const LoadOptions& options = {});

/// Writes features then target, full round-trip precision.
std::string to_csv(const Dataset& d);
void write_csv(const Dataset& d, const std::filesystem::path& path);

/// Restricts to the named feature columns in the listed order. The target
/// may appear in the list; it is skipped.
Dataset select_schema(const Dataset& d, const std::vector<std::string>& schema);

// ---------------------------------------------------------------------------
// Profiles

struct ColumnProfile {
  std::string name;
  double min = 0;
  double max = 0;
  double mean = 0;
  double std_dev = 0; // sample, divisor n - 1
};

struct ProfileStats {
  std::vector<ColumnProfile> columns; // features in order, then target

  const ColumnProfile* find(std::string_view name) const;
};

ColumnProfile profile_column(const std::string& name, const std::vector<double>& values);
ProfileStats compute_profile(const Dataset& d);

/// A value as printed in a table: the number plus how many decimals were shown.
struct PrintedValue {
  double value = 0;
  int decimals = 0;

  static PrintedValue parse(std::string_view text);
  double last_unit() const;
};

struct ExpectedColumn {
  std::string name;
  PrintedValue min, max, mean, std_dev;
};

struct ExpectedProfile {
  std::vector<ExpectedColumn> columns;
};

struct Waiver {
  std::string column;
  std::string stat; // min | max | mean | std
  std::string reason;
};

struct CellCheck {
  std::string column;
  std::string stat;
  double computed = 0;
  PrintedValue expected;
  bool pass = false;
  std::optional<std::string> waiver; // set when a failing cell is waived
};

struct ValidationReport {
  std::vector<CellCheck> cells;

  std::size_t failures() const;       // failing and not waived
  std::size_t waived() const;
  bool ok() const { return failures() == 0; }
};

/// A cell passes when |computed - expected| <= max(tolerance * |expected|,
/// one unit in the last printed decimal of expected).
bool cell_matches(double computed, const PrintedValue& expected, double tolerance);

ValidationReport validate_profile(const ProfileStats& stats, const ExpectedProfile& expected,
                                  double tolerance, const std::vector<Waiver>& waivers = {});

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

} // namespace effort
