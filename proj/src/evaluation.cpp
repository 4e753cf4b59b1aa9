#include "effort/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "effort/error.hpp"

namespace effort {

Fold FoldPlan::fold(std::size_t i) const {
  Fold f;
  f.test = i;
  f.train.reserve(rows_ - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (r != i) {
      f.train.push_back(r);
    }
  }
  return f;
}

namespace {

void require_records(std::span<const PredictionRecord> records, const char* metric) {
  if (records.empty()) {
    throw MetricError(std::string(metric) + ": no prediction records");
  }
}

} // namespace

MetricValue rmse(std::span<const PredictionRecord> records) {
  require_records(records, "RMSE");
  double ss = 0;
  for (const auto& r : records) {
    const double e = r.predicted - r.actual;
    ss += e * e;
  }
  return {"RMSE", std::sqrt(ss / static_cast<double>(records.size())), records.size()};
}

MetricValue mmre(std::span<const PredictionRecord> records) {
  require_records(records, "MMRE");
  double sum = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (r.actual == 0.0) {
      throw MetricError(fmt::format("MMRE undefined: record {} (fold {}) has actual value 0", k,
                                    r.fold_index));
    }
    sum += std::abs(r.predicted - r.actual) / r.actual;
  }
  return {"MMRE", sum / static_cast<double>(records.size()), records.size()};
}

MetricValue mean_fold_error(std::span<const PredictionRecord> records) {
  require_records(records, "MAE");
  double sum = 0;
  for (const auto& r : records) {
    sum += std::abs(r.predicted - r.actual);
  }
  return {"MAE", sum / static_cast<double>(records.size()), records.size()};
}

std::size_t effective_inner_folds(std::size_t rows, int inner_folds) {
  if (rows < 10 || rows < static_cast<std::size_t>(std::max(inner_folds, 2))) {
    return rows;
  }
  return static_cast<std::size_t>(std::max(inner_folds, 2));
}

std::vector<std::size_t> inner_fold_assignment(std::size_t rows, std::size_t k, RngStream rng) {
  k = std::clamp<std::size_t>(k, 1, std::max<std::size_t>(rows, 1));
  const auto perm = permutation(rows, rng);
  std::vector<std::size_t> fold(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    fold[perm[j]] = j % k;
  }
  return fold;
}

TuneResult tune_detailed(const Matrix& X, const Vector& y, const HyperGrid& grid, int inner_folds,
                         const RngStream& rng) {
  const auto candidates = grid.enumerate();
  if (candidates.empty()) {
    throw ConfigError("tune: empty grid");
  }
  TuneResult result;
  result.scores.assign(candidates.size(), std::numeric_limits<double>::infinity());
  if (candidates.size() == 1) {
    result.best = candidates.front();
    result.scores.front() = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  const auto n = static_cast<std::size_t>(X.rows());
  const auto k = effective_inner_folds(n, inner_folds);
  const auto fold_of = inner_fold_assignment(n, k, rng.split({"folds"}));
  std::vector<std::vector<std::size_t>> train(k), test(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? test[f] : train[f]).push_back(i);
    }
  }

  // Candidates that coincide once resolved against the columns share one
  // stream and one score.
  std::vector<LearnerSpec> resolved;
  for (const auto& c : candidates) {
    resolved.push_back(resolve_columns(c, static_cast<std::size_t>(X.cols())));
  }
  std::optional<std::string> last_error;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto first = static_cast<std::size_t>(
        std::find(resolved.begin(), resolved.end(), resolved[c]) - resolved.begin());
    if (first < c) {
      result.scores[c] = result.scores[first];
      continue;
    }
    double sse = 0;
    try {
      for (std::size_t f = 0; f < k; ++f) {
        const auto model =
            fit(candidates[c], select_rows(X, train[f]), select_rows(y, train[f]),
                rng.split({"candidate", static_cast<std::int64_t>(c), static_cast<std::int64_t>(f)}));
        for (auto i : test[f]) {
          const auto row = X.row(static_cast<Eigen::Index>(i));
          const double e =
              model.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))) -
              y[static_cast<Eigen::Index>(i)];
          sse += e * e;
        }
      }
      result.scores[c] = std::sqrt(sse / static_cast<double>(n));
    } catch (const ComputationError& e) {
      last_error = e.what(); // candidate is skipped
    }
  }
  std::size_t best = candidates.size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (std::isfinite(result.scores[c]) && (best == candidates.size() || result.scores[c] < result.scores[best])) {
      best = c;
    }
  }
  if (best == candidates.size()) {
    throw ComputationError("tune: every candidate failed" +
                           (last_error ? ": " + *last_error : std::string()));
  }
  result.best_index = best;
  result.best = candidates[best];
  return result;
}

LearnerSpec tune(const Matrix& X, const Vector& y, const HyperGrid& grid, int inner_folds,
                 const RngStream& rng) {
  return tune_detailed(X, y, grid, inner_folds, rng).best;
}

namespace {

LearnerKind plan_kind(const LearnerPlan& plan) {
  return std::visit([](const auto& p) { return p.kind; }, plan);
}

struct FoldContext {
  const Dataset& dataset;
  const LearnerPlan& plan;
  const RngStream& base;
  int inner_folds;
  Matrix X;
  Vector y;
};

PredictionRecord run_fold(const FoldContext& ctx, std::size_t i) {
  const auto fold = FoldPlan(ctx.dataset.rows()).fold(i);
  const Matrix Xtr = select_rows(ctx.X, fold.train);
  const Vector ytr = select_rows(ctx.y, fold.train);
  const auto kind = plan_kind(ctx.plan);
  const RngStream fold_rng =
      ctx.base.split({ctx.dataset.id, std::string(kind_name(kind)), static_cast<std::int64_t>(i)});

  LearnerSpec spec;
  if (const auto* s = std::get_if<LearnerSpec>(&ctx.plan)) {
    spec = *s;
  } else {
    const auto& grid = std::get<HyperGrid>(ctx.plan);
    spec = grid.size() > 1 ? tune(Xtr, ytr, grid, ctx.inner_folds, fold_rng.split({"tune"}))
                           : grid.enumerate().front();
  }
  const auto model = fit(spec, Xtr, ytr, fold_rng.split({"fit"}));
  const auto row = ctx.X.row(static_cast<Eigen::Index>(i));
  const double p =
      model.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  if (!std::isfinite(p)) {
    throw ComputationError("non-finite prediction");
  }
  return PredictionRecord{i, p, ctx.y[static_cast<Eigen::Index>(i)], spec.params};
}

FoldContext make_context(const Dataset& dataset, const LearnerPlan& plan, const RngStream& base,
                         int inner_folds) {
  if (dataset.rows() < 3) {
    throw DataError(fmt::format("loocv: dataset '{}' has {} rows, at least 3 required", dataset.id,
                                dataset.rows()));
  }
  if (const auto* s = std::get_if<LearnerSpec>(&plan)) {
    validate_spec(*s);
  }
  return FoldContext{dataset, plan, base, inner_folds, dataset.design(), dataset.response()};
}

[[noreturn]] void rethrow_fold(std::size_t i, const std::string& what) {
  throw ComputationError(fmt::format("fold {}: {}", i, what));
}

} // namespace

std::vector<PredictionRecord> loocv_run_serial(const Dataset& dataset, const LearnerPlan& plan,
                                               const RngStream& base, int inner_folds) {
  const auto ctx = make_context(dataset, plan, base, inner_folds);
  std::vector<PredictionRecord> records;
  records.reserve(dataset.rows());
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    try {
      records.push_back(run_fold(ctx, i));
    } catch (const std::exception& e) {
      rethrow_fold(i, e.what());
    }
  }
  return records;
}

std::vector<PredictionRecord> loocv_run(const Dataset& dataset, const LearnerPlan& plan,
                                        const RngStream& base, const LoocvOptions& options) {
  if (options.jobs <= 1) {
    return loocv_run_serial(dataset, plan, base, options.inner_folds);
  }
  const auto ctx = make_context(dataset, plan, base, options.inner_folds);
  const auto n = static_cast<std::ptrdiff_t>(dataset.rows());
  std::vector<PredictionRecord> records(dataset.rows());
  std::vector<std::optional<std::string>> errors(dataset.rows());

#pragma omp parallel for schedule(dynamic, 1) num_threads(options.jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      records[k] = run_fold(ctx, k);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) {
      rethrow_fold(i, *errors[i]);
    }
  }
  return records;
}

std::vector<int> competition_ranks(const std::vector<double>& values) {
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int smaller = 0;
    for (double v : values) {
      smaller += v < values[i] ? 1 : 0;
    }
    ranks[i] = smaller + 1;
  }
  return ranks;
}

SummaryTable aggregate(const std::vector<std::string>& learners,
                       const std::vector<std::string>& datasets, const CellMap& cells) {
  SummaryTable t{learners, datasets, {}, {}, {}};
  for (const auto& l : learners) {
    std::vector<double> row;
    double sum = 0;
    for (const auto& d : datasets) {
      const auto it = cells.find({l, d});
      if (it == cells.end()) {
        throw Error(fmt::format("aggregate: missing cell ({}, {})", l, d));
      }
      row.push_back(it->second);
      sum += it->second;
    }
    t.averages.push_back(datasets.empty() ? 0.0 : sum / static_cast<double>(datasets.size()));
    t.cells.push_back(std::move(row));
  }
  t.ranks = competition_ranks(t.averages);
  return t;
}

} // namespace effort
