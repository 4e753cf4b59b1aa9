#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "effort/error.hpp"
#include "effort/learners.hpp"

namespace effort {

namespace {

constexpr std::array kBenchmarkKinds = {
    LearnerKind::ELM,  LearnerKind::LM,   LearnerKind::CART,
    LearnerKind::RF,   LearnerKind::PLS,  LearnerKind::GP,
    LearnerKind::LRBS, LearnerKind::BGLM, LearnerKind::MARS,
};

struct ParamRule {
  const char* name;
  bool integer;
  double min;
  bool min_exclusive;
  std::vector<std::string> symbols;
};

std::vector<ParamRule> rules(LearnerKind kind) {
  switch (kind) {
  case LearnerKind::ELM:
    return {{"hidden_width", true, 0, false, {}}, {"ridge", false, 0, false, {}}};
  case LearnerKind::PLS:
    return {{"n_components", true, 1, false, {}}};
  case LearnerKind::GP:
    return {{"length_scale", false, 0, true, {}}, {"noise_var", false, 0, false, {}}};
  case LearnerKind::CART:
    return {{"min_leaf", true, 1, false, {}}, {"max_depth", true, 1, false, {"inf"}}};
  case LearnerKind::RF:
    return {{"n_trees", true, 1, false, {}},
            {"mtry", true, 1, false, {"third", "sqrt", "all"}},
            {"min_leaf", true, 1, false, {}}};
  case LearnerKind::MARS:
    return {{"max_terms", true, 1, false, {}}, {"gcv_penalty", false, 0, false, {}}};
  case LearnerKind::LRBS:
    return {{"criterion_folds", true, 2, false, {}}};
  case LearnerKind::LM:
  case LearnerKind::BGLM:
  case LearnerKind::MeanBaseline:
    return {};
  }
  return {};
}

double number(const Params& p, const std::string& key) { return std::get<double>(p.at(key)); }

std::size_t count(const Params& p, const std::string& key) {
  return static_cast<std::size_t>(number(p, key));
}

} // namespace

std::span<const LearnerKind> benchmark_kinds() { return kBenchmarkKinds; }

std::string_view kind_name(LearnerKind kind) {
  switch (kind) {
  case LearnerKind::ELM: return "ELM";
  case LearnerKind::LM: return "LM";
  case LearnerKind::CART: return "CART";
  case LearnerKind::RF: return "RF";
  case LearnerKind::PLS: return "PLS";
  case LearnerKind::GP: return "GP";
  case LearnerKind::LRBS: return "LRBS";
  case LearnerKind::BGLM: return "BGLM";
  case LearnerKind::MARS: return "MARS";
  case LearnerKind::MeanBaseline: return "MEAN";
  }
  return "?";
}

std::optional<LearnerKind> parse_kind(std::string_view name) {
  for (auto k : kBenchmarkKinds) {
    if (kind_name(k) == name) {
      return k;
    }
  }
  if (name == "MEAN") {
    return LearnerKind::MeanBaseline;
  }
  return std::nullopt;
}

bool is_stochastic(LearnerKind kind) { return kind == LearnerKind::ELM || kind == LearnerKind::RF; }

std::string to_string(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    return *s;
  }
  return fmt::format("{}", std::get<double>(v));
}

std::vector<std::string> declared_params(LearnerKind kind) {
  std::vector<std::string> names;
  for (const auto& r : rules(kind)) {
    names.emplace_back(r.name);
  }
  return names;
}

void validate_spec(const LearnerSpec& spec) {
  const auto rs = rules(spec.kind);
  const auto kind = std::string(kind_name(spec.kind));
  for (const auto& [key, _] : spec.params) {
    bool known = false;
    for (const auto& r : rs) {
      known = known || key == r.name;
    }
    if (!known) {
      throw ConfigError(fmt::format("{}: unknown parameter '{}'", kind, key));
    }
  }
  for (const auto& r : rs) {
    const auto it = spec.params.find(r.name);
    if (it == spec.params.end()) {
      throw ConfigError(fmt::format("{}: missing parameter '{}'", kind, r.name));
    }
    if (const auto* s = std::get_if<std::string>(&it->second)) {
      if (std::find(r.symbols.begin(), r.symbols.end(), *s) == r.symbols.end()) {
        throw ConfigError(fmt::format("{}: '{}' is not a valid value for '{}'", kind, *s, r.name));
      }
      continue;
    }
    const double v = std::get<double>(it->second);
    const bool below = r.min_exclusive ? v <= r.min : v < r.min;
    if (!std::isfinite(v) || below || (r.integer && v != std::floor(v))) {
      throw ConfigError(fmt::format("{}: value {} out of range for '{}'", kind, v, r.name));
    }
  }
}

std::size_t HyperGrid::size() const {
  std::size_t n = 1;
  for (const auto& [_, values] : axes) {
    n *= values.size();
  }
  return n;
}

std::vector<LearnerSpec> HyperGrid::enumerate() const {
  std::vector<LearnerSpec> out{LearnerSpec{kind, {}, {}}};
  for (const auto& [name, values] : axes) {
    std::vector<LearnerSpec> next;
    next.reserve(out.size() * values.size());
    for (const auto& base : out) {
      for (const auto& v : values) {
        auto s = base;
        s.params[name] = v;
        next.push_back(std::move(s));
      }
    }
    out = std::move(next);
  }
  return out;
}

HyperGrid default_grid(LearnerKind kind) {
  using V = std::vector<ParamValue>;
  HyperGrid g{kind, {}};
  switch (kind) {
  case LearnerKind::ELM:
    g.axes = {{"hidden_width", V{5.0, 10.0, 20.0, 40.0}}, {"ridge", V{0.0, 1e-4, 1e-2, 1.0}}};
    break;
  case LearnerKind::PLS:
    g.axes = {{"n_components", V{1.0, 2.0, 3.0, 4.0}}};
    break;
  case LearnerKind::GP:
    g.axes = {{"length_scale", V{0.5, 1.0, 2.0, 4.0}}, {"noise_var", V{1e-4, 1e-2, 1e-1}}};
    break;
  case LearnerKind::CART:
    g.axes = {{"min_leaf", V{2.0, 5.0, 10.0}}, {"max_depth", V{3.0, 6.0, std::string("inf")}}};
    break;
  case LearnerKind::RF:
    g.axes = {{"n_trees", V{500.0}},
              {"mtry", V{std::string("third"), std::string("sqrt"), std::string("all")}},
              {"min_leaf", V{2.0, 5.0}}};
    break;
  case LearnerKind::MARS:
    g.axes = {{"max_terms", V{11.0, 21.0}}, {"gcv_penalty", V{3.0}}};
    break;
  case LearnerKind::LRBS:
    g.axes = {{"criterion_folds", V{5.0}}};
    break;
  case LearnerKind::LM:
  case LearnerKind::BGLM:
  case LearnerKind::MeanBaseline:
    break;
  }
  return g;
}

// --- FittedModel -------------------------------------------------------------

FittedModel::FittedModel(LearnerKind kind, Scaler scaler, std::shared_ptr<const Model> model,
                         FitNotes notes)
    : kind_(kind), scaler_(std::move(scaler)), model_(std::move(model)), notes_(std::move(notes)) {}

double FittedModel::predict(std::span<const double> row) const {
  if (row.size() != feature_count()) {
    throw DimensionError(fmt::format("{}: row has {} values, model was trained on {} features",
                                     kind_name(kind_), row.size(), feature_count()));
  }
  std::vector<double> z(row.size());
  scaler_.apply_row(row, z);
  return model_->predict_transformed(z);
}

Vector FittedModel::predict(const Matrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto r = X.row(i);
    out[i] = predict(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }
  return out;
}

std::optional<std::pair<double, Vector>> FittedModel::affine_coefficients() const {
  const auto* lin = as<LinearModel>();
  if (!lin) {
    if (const auto* c = as<ConstantModel>()) {
      return std::pair{c->value, Vector::Zero(scaler_.size()).eval()};
    }
    return std::nullopt;
  }
  Vector slopes = lin->coef.array() / scaler_.scale.array();
  const double intercept = lin->intercept - slopes.dot(scaler_.mean);
  return std::pair{intercept, slopes};
}

double LinearModel::predict_transformed(std::span<const double> z) const {
  double v = intercept;
  for (std::size_t j = 0; j < z.size(); ++j) {
    v += coef[static_cast<Eigen::Index>(j)] * z[j];
  }
  return v;
}

// --- dispatch ------------------------------------------------------------------

LearnerSpec resolve_columns(const LearnerSpec& spec, std::size_t cols) {
  LearnerSpec out = spec;
  if (spec.kind != LearnerKind::RF) {
    return out;
  }
  auto& m = out.params.at("mtry");
  if (const auto* s = std::get_if<std::string>(&m)) {
    const double c = static_cast<double>(cols);
    if (*s == "third") {
      m = std::ceil(c / 3.0);
    } else if (*s == "sqrt") {
      m = std::ceil(std::sqrt(c));
    } else {
      m = c;
    }
  }
  return out;
}

FittedModel fit(const LearnerSpec& spec, const Matrix& X, const Vector& y, RngStream rng) {
  if (X.rows() != y.size()) {
    throw DimensionError(fmt::format("fit: X has {} rows, y has {}", X.rows(), y.size()));
  }
  if (y.size() < 2) {
    throw DimensionError("fit: at least 2 training rows required");
  }
  validate_spec(spec);
  if (!spec.seed_label.empty()) {
    rng = rng.split({spec.seed_label});
  }
  const auto& p = spec.params;
  const auto cols = static_cast<std::size_t>(X.cols());
  auto depth = [&](const char* key) -> std::optional<std::size_t> {
    if (std::holds_alternative<std::string>(p.at(key))) {
      return std::nullopt;
    }
    return count(p, key);
  };

  switch (spec.kind) {
  case LearnerKind::MeanBaseline:
    return fit_mean(X, y);
  case LearnerKind::LM:
    return fit_lm(X, y);
  case LearnerKind::BGLM:
    return fit_bglm(X, y);
  case LearnerKind::LRBS:
    return fit_lrbs(X, y, static_cast<int>(count(p, "criterion_folds")));
  case LearnerKind::PLS:
    return fit_pls(X, y, static_cast<int>(count(p, "n_components")));
  case LearnerKind::ELM:
    return fit_elm(X, y, static_cast<int>(count(p, "hidden_width")), number(p, "ridge"), rng);
  case LearnerKind::GP: {
    // Grid values are relative: length scale to sqrt(cols), noise to var(y).
    const double ls = number(p, "length_scale") * std::sqrt(static_cast<double>(std::max<std::size_t>(cols, 1)));
    const double nv = number(p, "noise_var") * sample_variance(y);
    return fit_gp(X, y, ls, nv);
  }
  case LearnerKind::CART:
    return fit_cart(X, y, count(p, "min_leaf"), depth("max_depth"));
  case LearnerKind::RF: {
    ForestOptions fo;
    fo.n_trees = count(p, "n_trees");
    fo.min_leaf = count(p, "min_leaf");
    fo.mtry = count(resolve_columns(spec, cols).params, "mtry");
    fo.mtry = std::clamp<std::size_t>(fo.mtry, 1, std::max<std::size_t>(cols, 1));
    return fit_rf(X, y, fo, rng);
  }
  case LearnerKind::MARS:
    return fit_mars(X, y, static_cast<int>(count(p, "max_terms")), number(p, "gcv_penalty"));
  }
  throw ConfigError("fit: unhandled learner kind");
}

} // namespace effort
