#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "effort/evaluation.hpp"
#include "effort/registry.hpp"

namespace effort {

// CLI exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitComputation = 4,
  kExitVerification = 5,
};

// ---------------------------------------------------------------------------
// Run configuration

struct LearnerEntry {
  LearnerKind kind;
  HyperGrid grid;
};

struct RunConfig {
  std::vector<std::string> datasets;
  std::vector<LearnerEntry> learners;
  std::uint64_t seed = 0;
  int inner_folds = 5;
  std::vector<std::string> metrics{"RMSE", "MMRE"};
  std::string canonical; // canonical JSON of the parsed config, hashed into reports

  bool wants(std::string_view metric) const;
};

/// Parses and validates everything that does not need the registry. Throws ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
/// Checks dataset ids against the registry. Throws ConfigError.
void validate_config(const RunConfig& config, const Registry& registry);

nlohmann::ordered_json grid_to_json(const HyperGrid& grid);

// ---------------------------------------------------------------------------
// Benchmark run

struct CellResult {
  std::string learner;
  std::string dataset;
  std::vector<PredictionRecord> records;
  std::optional<MetricValue> rmse;
  std::optional<MetricValue> mmre;
  std::optional<MetricValue> mae;
  std::optional<std::string> error;      // fold failure
  std::optional<std::string> mmre_error; // metric undefined (zero actual)
};

struct DatasetInfo {
  std::string id;
  std::string sha256;
  std::size_t rows = 0;
  std::vector<std::string> schema;
};

struct BenchReport {
  RunConfig config;
  std::vector<DatasetInfo> datasets;
  std::vector<CellResult> cells; // learner-major, config order
  std::optional<SummaryTable> rmse;
  std::optional<SummaryTable> mmre;
  std::optional<SummaryTable> mae;

  bool complete() const;
  std::vector<const CellResult*> failures() const;
};

/// Loads every dataset first (DataError before any computation), then runs
/// LOOCV with nested tuning for every (learner, dataset) pair. Fold failures
/// are recorded per cell rather than thrown.
using ProgressFn = std::function<void(const CellResult&)>;

BenchReport run_benchmark(const RunConfig& config, const Registry& registry, int jobs,
                          const ProgressFn& progress = {});

// Same as run_benchmark for already loaded datasets (config order).
BenchReport run_benchmark(const RunConfig& config, const std::vector<Dataset>& datasets, int jobs,
                          const ProgressFn& progress = {});

nlohmann::ordered_json report_to_json(const BenchReport& report);
std::string report_markdown(const SummaryTable& table, const std::string& metric);
std::string chart_csv(const BenchReport& report);

struct ReportPaths {
  std::filesystem::path json, markdown, chart, failures;
};
ReportPaths write_report(const BenchReport& report, const std::filesystem::path& out_dir);

/// Formatting shared by every human-readable output: four decimals.
std::string format_value(double v);

// ---------------------------------------------------------------------------
// Published results table (RMSE of nine learners on eight datasets)

struct PublishedTable {
  std::vector<std::string> learners;    // table row labels
  std::vector<std::string> datasets;    // column labels as printed
  std::vector<std::string> dataset_ids; // registry ids, same order
  std::vector<std::vector<PrintedValue>> cells;
  std::vector<PrintedValue> printed_avg;
  std::vector<int> printed_rank;
};

const PublishedTable& published_rmse_table();

struct PublishedRowCheck {
  std::string learner;
  double recomputed_avg = 0;
  double printed_avg = 0;
  int recomputed_rank = 0;
  int printed_rank = 0;
  bool avg_ok = false;
  bool rank_ok = false;
  std::vector<std::string> differing_cells; // vs. the embedded transcription
};

struct TableVerdict {
  std::vector<PublishedRowCheck> rows;
  bool ok() const;
};

/// Recomputes Avg and Rank from the per-dataset cells. Avg tolerance 0.01.
TableVerdict verify_published(const PublishedTable& table);
std::string render_verdict(const TableVerdict& verdict);

/// Builds a report document whose RMSE cells are the published ones.
nlohmann::ordered_json published_as_report();

// ---------------------------------------------------------------------------
// Comparison of a run against the published table (informational)

struct CellComparison {
  std::string learner;
  std::string dataset;
  double ours = 0;
  double published = 0;
  double ratio = 0;
  bool flagged = false; // deviates by more than 3x either way
};

struct DatasetAgreement {
  std::string dataset;
  std::string our_best;
  std::string published_best;
  bool agree = false;
};

struct Comparison {
  std::vector<CellComparison> cells;
  std::vector<DatasetAgreement> agreement;
  std::vector<std::string> not_compared; // published datasets absent from the report
};

Comparison compare_report(const nlohmann::json& report, const PublishedTable& table);
std::string render_comparison(const Comparison& c);

} // namespace effort
