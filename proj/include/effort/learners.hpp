#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "effort/numerics.hpp"

namespace effort {

enum class LearnerKind { ELM, LM, CART, RF, PLS, GP, LRBS, BGLM, MARS, MeanBaseline };

/// The nine benchmarked kinds, in results-table row order.
std::span<const LearnerKind> benchmark_kinds();
std::string_view kind_name(LearnerKind kind);
std::optional<LearnerKind> parse_kind(std::string_view name);
bool is_stochastic(LearnerKind kind);

// A hyperparameter value is a number or one of a few symbols ("inf" for an
// unbounded depth, "third" / "sqrt" / "all" for the RF feature fraction).
using ParamValue = std::variant<double, std::string>;
using Params = std::map<std::string, ParamValue>;

std::string to_string(const ParamValue& v);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::LM;
  Params params;
  std::string seed_label;

  friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;
};

/// Throws ConfigError when params are not exactly the declared set of the
/// kind or a value is out of range.
void validate_spec(const LearnerSpec& spec);

struct HyperGrid {
  LearnerKind kind = LearnerKind::LM;
  // Axes in document order; the last axis varies fastest.
  std::vector<std::pair<std::string, std::vector<ParamValue>>> axes;

  std::size_t size() const;
  std::vector<LearnerSpec> enumerate() const;
};

HyperGrid default_grid(LearnerKind kind);

/// Replaces column-relative symbols (RF mtry) by their value for `cols`.
LearnerSpec resolve_columns(const LearnerSpec& spec, std::size_t cols);

/// Names of the parameters a kind declares.
std::vector<std::string> declared_params(LearnerKind kind);

// ---------------------------------------------------------------------------
// Fitted models. Each concrete model works on standardized (or, for trees,
// raw) feature rows; FittedModel applies the training scaler first.

class Model {
public:
  virtual ~Model() = default;
  virtual double predict_transformed(std::span<const double> z) const = 0;
};

struct FitNotes {
  bool converged = true;              // BGLM evidence iterations
  bool clamped = false;               // PLS components clamped to rank cap
  bool fallback_intercept = false;    // MARS: no subset had a finite GCV
  int components = 0;                 // PLS components used
  double alpha = 0, beta = 0;         // BGLM precisions
  double jitter = 0;                  // GP diagonal jitter
  std::vector<std::size_t> selected;  // LRBS surviving features
  double gcv_forward = 0;             // MARS GCV of the full forward model
  double gcv_selected = 0;            // MARS GCV of the returned model
};

class FittedModel {
public:
  FittedModel(LearnerKind kind, Scaler scaler, std::shared_ptr<const Model> model,
              FitNotes notes = {});

  LearnerKind kind() const { return kind_; }
  std::size_t feature_count() const { return static_cast<std::size_t>(scaler_.size()); }
  const Scaler& scaler() const { return scaler_; }
  const FitNotes& notes() const { return notes_; }

  /// Throws DimensionError on a row of the wrong arity.
  double predict(std::span<const double> row) const;
  Vector predict(const Matrix& X) const;

  template <class T>
  const T* as() const {
    return dynamic_cast<const T*>(model_.get());
  }

  /// For linear kinds: intercept and slopes in original feature units.
  std::optional<std::pair<double, Vector>> affine_coefficients() const;

private:
  LearnerKind kind_;
  Scaler scaler_;
  std::shared_ptr<const Model> model_;
  FitNotes notes_;
};

struct LinearModel final : Model {
  double intercept = 0;
  Vector coef; // on standardized features
  double predict_transformed(std::span<const double> z) const override;
};

struct ConstantModel final : Model {
  double value = 0;
  double predict_transformed(std::span<const double>) const override { return value; }
};

struct ElmModel final : Model {
  Matrix input_weights; // features x hidden
  Vector bias;
  Vector output_weights;
  double intercept = 0;
  double predict_transformed(std::span<const double> z) const override;
};

struct GpModel final : Model {
  Matrix train; // standardized training inputs
  Vector weights;
  double signal_var = 0;
  double length_scale = 1;
  double prior_mean = 0;
  double predict_transformed(std::span<const double> z) const override;
};

struct Tree {
  struct Node {
    int feature = -1; // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0; // mean of the node's rows
    std::size_t count = 0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
  std::size_t leaves() const;
};

struct CartModel final : Model {
  Tree tree;
  double predict_transformed(std::span<const double> x) const override { return tree.predict(x); }
};

struct ForestModel final : Model {
  std::vector<Tree> trees;
  double predict_transformed(std::span<const double> x) const override;
};

struct MarsModel final : Model {
  struct Basis {
    int feature = -1; // -1 is the intercept
    double knot = 0;  // standardized units
    double raw_knot = 0;
    int sign = 1;     // +1: max(0, z - knot), -1: max(0, knot - z)
    double eval(std::span<const double> z) const;
  };
  std::vector<Basis> basis;
  Vector coef;
  std::vector<Basis> forward_basis; // before the backward pass
  double predict_transformed(std::span<const double> z) const override;
};

// ---------------------------------------------------------------------------
// Fitting

/// Dispatches on spec.kind; data-relative grid values are resolved against X
/// and y here. Requires X.rows() == y.size() >= 2.
FittedModel fit(const LearnerSpec& spec, const Matrix& X, const Vector& y, RngStream rng);

FittedModel fit_mean(const Matrix& X, const Vector& y);
FittedModel fit_lm(const Matrix& X, const Vector& y);
FittedModel fit_lrbs(const Matrix& X, const Vector& y, int criterion_folds);

struct BglmOptions {
  std::optional<double> fixed_alpha;
  std::optional<double> fixed_beta;
  double alpha_floor = 1e-10;
  int max_iterations = 500;
  double tolerance = 1e-10;
};
FittedModel fit_bglm(const Matrix& X, const Vector& y, const BglmOptions& options = {});

FittedModel fit_pls(const Matrix& X, const Vector& y, int n_components);
FittedModel fit_elm(const Matrix& X, const Vector& y, int hidden_width, double ridge,
                    RngStream rng);

struct GpOptions {
  std::optional<double> signal_var; // default: sample variance of y
  std::optional<double> prior_mean; // default: mean of y
};
/// length_scale is in standardized feature units, noise_var in target units squared.
FittedModel fit_gp(const Matrix& X, const Vector& y, double length_scale, double noise_var,
                   const GpOptions& options = {});

FittedModel fit_cart(const Matrix& X, const Vector& y, std::size_t min_leaf,
                     std::optional<std::size_t> max_depth = std::nullopt);

struct ForestOptions {
  std::size_t n_trees = 500;
  std::size_t mtry = 1;
  std::size_t min_leaf = 1;
  std::optional<std::size_t> max_depth;
  bool bootstrap = true; // disabled only by tests
};
FittedModel fit_rf(const Matrix& X, const Vector& y, const ForestOptions& options, RngStream rng);

FittedModel fit_mars(const Matrix& X, const Vector& y, int max_terms, double gcv_penalty);

/// GCV = (sse / n) / (1 - C / n)^2 with C = m + penalty * (m - 1) / 2;
/// +inf when n - C <= 0.
double mars_gcv(double sse, std::size_t n, std::size_t m, double penalty);

/// Grows one regression tree on the given rows. Exposed for the forest and tests.
struct TreeGrowth {
  std::size_t min_leaf = 1;
  std::optional<std::size_t> max_depth;
  std::size_t mtry = 0; // 0: all features at every node
};
Tree grow_tree(const Matrix& X, const Vector& y, std::span<const std::size_t> rows,
               const TreeGrowth& growth, RngStream* rng);

} // namespace effort
