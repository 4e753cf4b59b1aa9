#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "effort/dataset.hpp"
#include "effort/learners.hpp"

namespace effort {

struct PredictionRecord {
  std::size_t fold_index = 0;
  double predicted = 0; // P_i
  double actual = 0;    // A_i
  Params chosen_params;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct Fold {
  std::vector<std::size_t> train;
  std::size_t test = 0;
};

/// Leave-one-out plan: fold i holds out row i and trains on the rest.
class FoldPlan {
public:
  explicit FoldPlan(std::size_t rows) : rows_(rows) {}
  std::size_t size() const { return rows_; }
  Fold fold(std::size_t i) const;

private:
  std::size_t rows_;
};

struct MetricValue {
  std::string name;
  double value = 0;
  std::size_t n = 0;
};

/// Pooled root mean squared error over every record.
MetricValue rmse(std::span<const PredictionRecord> records);
/// Mean magnitude of relative error; throws MetricError on a zero actual.
MetricValue mmre(std::span<const PredictionRecord> records);
/// Mean over folds of each fold's absolute error (per-fold RMSE on one row).
MetricValue mean_fold_error(std::span<const PredictionRecord> records);

using LearnerPlan = std::variant<LearnerSpec, HyperGrid>;

struct LoocvOptions {
  int inner_folds = 5;
  int jobs = 1; // OpenMP threads for the fold loop; 1 runs the serial path
};

/// One record per row, in fold order. Fold i draws its randomness from
/// split_rng(base, [dataset.id, kind, i]) so the result is independent of
/// scheduling.
std::vector<PredictionRecord> loocv_run(const Dataset& dataset, const LearnerPlan& plan,
                                        const RngStream& base, const LoocvOptions& options = {});

/// Reference implementation: the same folds in a plain loop, no threading.
std::vector<PredictionRecord> loocv_run_serial(const Dataset& dataset, const LearnerPlan& plan,
                                               const RngStream& base, int inner_folds = 5);

/// Row -> fold id for inner tuning: a seeded permutation dealt round-robin
/// into k folds. k is clamped to the row count.
std::vector<std::size_t> inner_fold_assignment(std::size_t rows, std::size_t k, RngStream rng);

/// Inner folds actually used for `rows` training rows (LOOCV below 10 rows).
std::size_t effective_inner_folds(std::size_t rows, int inner_folds);

struct TuneResult {
  LearnerSpec best;
  std::size_t best_index = 0;
  std::vector<double> scores; // inner CV RMSE per candidate, grid order
};

TuneResult tune_detailed(const Matrix& X, const Vector& y, const HyperGrid& grid, int inner_folds,
                         const RngStream& rng);
LearnerSpec tune(const Matrix& X, const Vector& y, const HyperGrid& grid, int inner_folds,
                 const RngStream& rng);

// ---------------------------------------------------------------------------
// Aggregation over (learner x dataset)

struct SummaryTable {
  std::vector<std::string> learners;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> cells; // [learner][dataset]
  std::vector<double> averages;
  std::vector<int> ranks; // competition ranking, 1 = smallest average
};

using CellMap = std::map<std::pair<std::string, std::string>, double>;

/// Throws Error when a (learner, dataset) cell is missing.
SummaryTable aggregate(const std::vector<std::string>& learners,
                       const std::vector<std::string>& datasets, const CellMap& cells);

std::vector<int> competition_ranks(const std::vector<double>& values);

} // namespace effort
