#include <algorithm>
#include <cmath>
#include <limits>

#include "effort/error.hpp"
#include "effort/learners.hpp"

namespace effort {

namespace {

Matrix with_intercept(const Matrix& Z) {
  Matrix A(Z.rows(), Z.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(Z.cols()) = Z;
  return A;
}

std::shared_ptr<LinearModel> linear(double intercept, Vector coef) {
  auto m = std::make_shared<LinearModel>();
  m->intercept = intercept;
  m->coef = std::move(coef);
  return m;
}

void require_rows(const Matrix& X, const Vector& y, Eigen::Index min_rows, const char* who) {
  if (X.rows() != y.size()) {
    throw DimensionError(std::string(who) + ": X and y row counts differ");
  }
  if (X.rows() < min_rows) {
    throw DimensionError(std::string(who) + ": needs at least " + std::to_string(min_rows) +
                         " rows");
  }
}

// Pooled k-fold CV RMSE of OLS restricted to `subset`; row i is in fold i % k.
double cv_rmse(const Matrix& X, const Vector& y, const std::vector<std::size_t>& subset, int k) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto folds = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(k), n));
  const Matrix Xs = select_cols(X, subset);
  double sse = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      (i % folds == f ? test : train).push_back(i);
    }
    const auto model = fit_lm(select_rows(Xs, train), select_rows(y, train));
    for (auto i : test) {
      const auto r = Xs.row(static_cast<Eigen::Index>(i));
      const double e = model.predict(std::span<const double>(r.data(), subset.size())) -
                       y[static_cast<Eigen::Index>(i)];
      sse += e * e;
    }
  }
  return std::sqrt(sse / static_cast<double>(n));
}

} // namespace

FittedModel fit_mean(const Matrix& X, const Vector& y) {
  require_rows(X, y, 1, "mean");
  auto m = std::make_shared<ConstantModel>();
  m->value = mean(y);
  return FittedModel(LearnerKind::MeanBaseline, identity_scaler(X.cols()), std::move(m));
}

FittedModel fit_lm(const Matrix& X, const Vector& y) {
  require_rows(X, y, 1, "lm");
  auto scaler = fit_scaler(X);
  const Matrix Z = scaler.apply(X);
  const Vector beta = least_squares(with_intercept(Z), y);
  return FittedModel(LearnerKind::LM, std::move(scaler),
                     linear(beta[0], beta.tail(Z.cols()).eval()));
}

FittedModel fit_lrbs(const Matrix& X, const Vector& y, int criterion_folds) {
  require_rows(X, y, 3, "lrbs");
  if (criterion_folds < 2) {
    throw ConfigError("lrbs: criterion_folds must be at least 2");
  }
  std::vector<std::size_t> active(static_cast<std::size_t>(X.cols()));
  for (std::size_t j = 0; j < active.size(); ++j) {
    active[j] = j;
  }
  // Ties go to the smaller model; the slack absorbs round-off on exact fits.
  const double scale = std::abs(mean(y)) + std::sqrt(sample_variance(y));
  double current = cv_rmse(X, y, active, criterion_folds);
  while (!active.empty()) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_pos = 0;
    for (std::size_t pos = 0; pos < active.size(); ++pos) {
      auto trial = active;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      const double c = cv_rmse(X, y, trial, criterion_folds);
      if (c < best) {
        best = c;
        best_pos = pos;
      }
    }
    if (best > current + 1e-9 * current + 1e-12 * scale) {
      break;
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_pos));
    current = best;
  }

  auto scaler = fit_scaler(X);
  const Matrix Z = select_cols(scaler.apply(X), active);
  const Vector beta = least_squares(with_intercept(Z), y);
  Vector coef = Vector::Zero(X.cols());
  for (std::size_t k = 0; k < active.size(); ++k) {
    coef[static_cast<Eigen::Index>(active[k])] = beta[static_cast<Eigen::Index>(k) + 1];
  }
  FitNotes notes;
  notes.selected = active;
  return FittedModel(LearnerKind::LRBS, std::move(scaler), linear(beta[0], std::move(coef)),
                     std::move(notes));
}

FittedModel fit_bglm(const Matrix& X, const Vector& y, const BglmOptions& options) {
  require_rows(X, y, 2, "bglm");
  auto scaler = fit_scaler(X);
  const Matrix Z = scaler.apply(X);
  const double ybar = mean(y);
  const Vector yc = y.array() - ybar;
  const auto n = static_cast<double>(y.size());
  const double yvar = yc.squaredNorm() / n;

  FitNotes notes;
  if (yvar == 0.0 || Z.cols() == 0) {
    notes.alpha = options.fixed_alpha.value_or(0);
    notes.beta = options.fixed_beta.value_or(0);
    return FittedModel(LearnerKind::BGLM, std::move(scaler),
                       linear(ybar, Vector::Zero(Z.cols())), std::move(notes));
  }

  const Eigen::MatrixXd gram = Z.transpose() * Z;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::VectorXd proj = V.transpose() * (Z.transpose() * yc);

  // Posterior mean m = V diag(beta / (beta * lambda + alpha)) V^T Z^T yc.
  auto posterior = [&](double alpha, double beta) -> Vector {
    Eigen::VectorXd d = proj.array() * beta / (beta * lambda.array() + alpha);
    return V * d;
  };

  const double cap = 1e12;
  double alpha = options.fixed_alpha.value_or(1.0);
  double beta = options.fixed_beta.value_or(1.0 / yvar);
  Vector m = posterior(alpha, beta);
  notes.converged = options.fixed_alpha && options.fixed_beta;
  if (!notes.converged) {
    for (int it = 0; it < options.max_iterations; ++it) {
      const double gamma = (beta * lambda.array() / (beta * lambda.array() + alpha)).sum();
      double next_alpha = alpha;
      double next_beta = beta;
      if (!options.fixed_alpha) {
        const double mm = m.squaredNorm();
        next_alpha = mm > 0 ? gamma / mm : cap;
        next_alpha = std::clamp(next_alpha, options.alpha_floor, cap);
      }
      if (!options.fixed_beta) {
        const double rss = (yc - Z * m).squaredNorm();
        const double dof = std::max(n - gamma, 1e-12);
        next_beta = rss > 0 ? dof / rss : cap / yvar;
        next_beta = std::min(next_beta, cap / yvar);
      }
      const bool done = std::abs(next_alpha - alpha) <= options.tolerance * std::abs(alpha) &&
                        std::abs(next_beta - beta) <= options.tolerance * std::abs(beta);
      alpha = next_alpha;
      beta = next_beta;
      m = posterior(alpha, beta);
      if (done) {
        notes.converged = true;
        break;
      }
    }
  }
  notes.alpha = alpha;
  notes.beta = beta;
  return FittedModel(LearnerKind::BGLM, std::move(scaler), linear(ybar, std::move(m)),
                     std::move(notes));
}

FittedModel fit_pls(const Matrix& X, const Vector& y, int n_components) {
  require_rows(X, y, 2, "pls");
  if (n_components < 1) {
    throw ConfigError("pls: n_components must be at least 1");
  }
  auto scaler = fit_scaler(X);
  Eigen::MatrixXd E = scaler.apply(X);
  const double ybar = mean(y);
  Eigen::VectorXd f = y.array() - ybar;

  const auto p = E.cols();
  const auto cap = std::min<Eigen::Index>(E.rows() - 1, p);
  FitNotes notes;
  Eigen::Index a = n_components;
  if (a > cap) {
    a = cap;
    notes.clamped = true;
  }

  Eigen::MatrixXd W(p, a), P(p, a);
  Eigen::VectorXd q(a);
  Eigen::Index used = 0;
  const double scale = f.norm() + 1.0;
  for (Eigen::Index k = 0; k < a; ++k) {
    Eigen::VectorXd w = E.transpose() * f;
    const double wn = w.norm();
    if (wn <= 1e-12 * scale * (E.norm() + 1.0)) {
      break; // no covariance left with the residual target
    }
    w /= wn;
    const Eigen::VectorXd t = E * w;
    const double tt = t.squaredNorm();
    if (tt <= 0.0) {
      break;
    }
    P.col(k) = E.transpose() * t / tt;
    q[k] = f.dot(t) / tt;
    W.col(k) = w;
    E -= t * P.col(k).transpose();
    f -= q[k] * t;
    ++used;
  }
  notes.components = static_cast<int>(used);

  Vector coef = Vector::Zero(p);
  if (used > 0) {
    const Eigen::MatrixXd Wu = W.leftCols(used);
    const Eigen::MatrixXd PtW = P.leftCols(used).transpose() * Wu;
    coef = Wu * PtW.lu().solve(q.head(used));
  }
  return FittedModel(LearnerKind::PLS, std::move(scaler), linear(ybar, std::move(coef)),
                     std::move(notes));
}

} // namespace effort
