#include <cmath>

#include "effort/error.hpp"
#include "effort/learners.hpp"

namespace effort {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

double ElmModel::predict_transformed(std::span<const double> z) const {
  double out = intercept;
  for (Eigen::Index h = 0; h < input_weights.cols(); ++h) {
    double a = bias[h];
    for (std::size_t j = 0; j < z.size(); ++j) {
      a += input_weights(static_cast<Eigen::Index>(j), h) * z[j];
    }
    out += output_weights[h] * sigmoid(a);
  }
  return out;
}

FittedModel fit_elm(const Matrix& X, const Vector& y, int hidden_width, double ridge,
                    RngStream rng) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw DimensionError("elm: X and y must have the same, nonzero row count");
  }
  if (hidden_width < 0 || ridge < 0) {
    throw ConfigError("elm: hidden_width and ridge must be nonnegative");
  }
  auto scaler = fit_scaler(X);
  const Matrix Z = scaler.apply(X);
  const auto width = static_cast<Eigen::Index>(hidden_width);

  auto model = std::make_shared<ElmModel>();
  model->input_weights.resize(Z.cols(), width);
  model->bias.resize(width);
  for (Eigen::Index h = 0; h < width; ++h) {
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      model->input_weights(j, h) = rng.next_uniform(-1.0, 1.0);
    }
  }
  for (Eigen::Index h = 0; h < width; ++h) {
    model->bias[h] = rng.next_uniform(-1.0, 1.0);
  }

  const double ybar = mean(y);
  model->output_weights = Vector::Zero(width);
  model->intercept = ybar;
  if (width > 0) {
    Matrix H = ((Z * model->input_weights).rowwise() + model->bias.transpose())
                   .unaryExpr([](double a) { return sigmoid(a); });
    // Centering leaves the intercept out of the ridge penalty.
    const Eigen::RowVectorXd hbar = H.colwise().mean();
    H.rowwise() -= hbar;
    const Vector yc = y.array() - ybar;
    Vector beta;
    if (ridge > 0) {
      Matrix A(H.rows() + width, width);
      A.topRows(H.rows()) = H;
      A.bottomRows(width) = Matrix::Identity(width, width) * std::sqrt(ridge);
      Vector b = Vector::Zero(H.rows() + width);
      b.head(H.rows()) = yc;
      beta = least_squares(A, b);
    } else {
      beta = least_squares(H, yc);
    }
    model->output_weights = beta;
    model->intercept = ybar - hbar.dot(beta);
  }
  return FittedModel(LearnerKind::ELM, std::move(scaler), std::move(model));
}

} // namespace effort
