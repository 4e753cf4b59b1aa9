#include <cmath>

#include "effort/error.hpp"
#include "effort/learners.hpp"

namespace effort {

double GpModel::predict_transformed(std::span<const double> z) const {
  double out = prior_mean;
  const double inv = 1.0 / (2.0 * length_scale * length_scale);
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    double d2 = 0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double d = train(i, static_cast<Eigen::Index>(j)) - z[j];
      d2 += d * d;
    }
    out += weights[i] * signal_var * std::exp(-d2 * inv);
  }
  return out;
}

FittedModel fit_gp(const Matrix& X, const Vector& y, double length_scale, double noise_var,
                   const GpOptions& options) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw DimensionError("gp: X and y must have the same, nonzero row count");
  }
  if (!(length_scale > 0) || !(noise_var >= 0)) {
    throw ConfigError("gp: length_scale must be > 0 and noise_var >= 0");
  }
  auto scaler = fit_scaler(X);
  const Matrix Z = scaler.apply(X);
  const auto n = Z.rows();

  auto model = std::make_shared<GpModel>();
  model->prior_mean = options.prior_mean.value_or(mean(y));
  model->signal_var = options.signal_var.value_or(sample_variance(y));
  model->length_scale = length_scale;
  model->train = Z;
  model->weights = Vector::Zero(n);
  FitNotes notes;
  if (model->signal_var <= 0) {
    // Zero prior variance: the posterior is the prior mean.
    return FittedModel(LearnerKind::GP, std::move(scaler), std::move(model), notes);
  }

  Matrix K(n, n);
  const double inv = 1.0 / (2.0 * length_scale * length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = model->signal_var;
    for (Eigen::Index k = 0; k < i; ++k) {
      const double v = model->signal_var * std::exp(-(Z.row(i) - Z.row(k)).squaredNorm() * inv);
      K(i, k) = v;
      K(k, i) = v;
    }
  }
  const Vector yc = y.array() - model->prior_mean;
  double jitter = 1e-10 * K.trace() / static_cast<double>(n);
  for (int attempt = 0;; ++attempt) {
    Matrix A = K;
    A.diagonal().array() += noise_var + jitter;
    try {
      model->weights = cholesky_solve(A, yc);
      break;
    } catch (const DefinitenessError&) {
      if (attempt == 3) {
        throw DefinitenessError("gp: kernel matrix not positive definite after jitter escalation");
      }
      jitter *= 10;
    }
  }
  notes.jitter = jitter;
  return FittedModel(LearnerKind::GP, std::move(scaler), std::move(model), std::move(notes));
}

} // namespace effort
