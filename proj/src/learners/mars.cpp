#include <algorithm>
#include <cmath>
#include <limits>

#include "effort/error.hpp"
#include "effort/learners.hpp"

namespace effort {

double mars_gcv(double sse, std::size_t n, std::size_t m, double penalty) {
  const double nn = static_cast<double>(n);
  const double c = static_cast<double>(m) + penalty * (static_cast<double>(m) - 1.0) / 2.0;
  if (nn - c <= 0) {
    return std::numeric_limits<double>::infinity();
  }
  const double d = 1.0 - c / nn;
  return (sse / nn) / (d * d);
}

double MarsModel::Basis::eval(std::span<const double> z) const {
  if (feature < 0) {
    return 1.0;
  }
  const double x = z[static_cast<std::size_t>(feature)];
  return std::max(0.0, sign > 0 ? x - knot : knot - x);
}

double MarsModel::predict_transformed(std::span<const double> z) const {
  double out = 0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    out += coef[static_cast<Eigen::Index>(k)] * basis[k].eval(z);
  }
  return out;
}

namespace {

using Basis = MarsModel::Basis;

Eigen::VectorXd column(const Matrix& Z, const Basis& b) {
  Eigen::VectorXd v(Z.rows());
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    if (b.feature < 0) {
      v[i] = 1.0;
    } else {
      const double x = Z(i, b.feature);
      v[i] = std::max(0.0, b.sign > 0 ? x - b.knot : b.knot - x);
    }
  }
  return v;
}

// Orthonormal basis (columns of q) of the terms added so far, with the running residual.
class Orthogonal {
public:
  Orthogonal(Eigen::Index n, Eigen::Index capacity, const Eigen::VectorXd& y)
      : q_(n, capacity), residual_(y) {}

  void add(const Eigen::VectorXd& v) {
    Eigen::VectorXd u = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < m_; ++k) {
        u -= q_.col(k).dot(u) * q_.col(k);
      }
    }
    u.normalize();
    residual_ -= u.dot(residual_) * u;
    q_.col(m_++) = u;
  }

  Eigen::Index size() const { return m_; }
  const Eigen::MatrixXd& q() const { return q_; }
  const Eigen::VectorXd& residual() const { return residual_; }

private:
  Eigen::MatrixXd q_;
  Eigen::Index m_ = 0;
  Eigen::VectorXd residual_;
};

struct Candidate {
  double reduction = 0;
  std::vector<Basis> add;
};

// Rows of one feature grouped by distinct value, ascending.
struct SortedFeature {
  std::vector<double> knots;
  std::vector<std::size_t> start; // group g is rows[start[g], start[g+1])
  std::vector<Eigen::Index> rows;
};

SortedFeature sort_feature(const Matrix& Z, Eigen::Index j) {
  SortedFeature s;
  s.rows.resize(static_cast<std::size_t>(Z.rows()));
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    s.rows[static_cast<std::size_t>(i)] = i;
  }
  std::stable_sort(s.rows.begin(), s.rows.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return Z(a, j) < Z(b, j); });
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    const double x = Z(s.rows[k], j);
    if (s.knots.empty() || x != s.knots.back()) {
      s.knots.push_back(x);
      s.start.push_back(k);
    }
  }
  s.start.push_back(s.rows.size());
  return s;
}

// Per-knot projections of one hinge direction: q^T h, ||h||^2 and r.h.
struct HingeSweep {
  Eigen::MatrixXd proj; // knots x m
  std::vector<double> norm2, dot_r;
};

// Sweeps the knots of one feature, accumulating sums shifted to the current
// knot so ||h||^2 is a sum of nonnegative terms. sign +1: max(0, x - t),
// supported above t; sign -1: max(0, t - x), supported below t.
HingeSweep sweep(const SortedFeature& f, const Eigen::MatrixXd& Q, Eigen::Index m,
                 const Eigen::VectorXd& r, int sign) {
  const auto K = f.knots.size();
  HingeSweep out;
  out.proj.resize(static_cast<Eigen::Index>(K), m);
  out.norm2.assign(K, 0.0);
  out.dot_r.assign(K, 0.0);
  Eigen::RowVectorXd sum_q = Eigen::RowVectorXd::Zero(m);
  Eigen::RowVectorXd proj = Eigen::RowVectorXd::Zero(m);
  double count = 0, s1 = 0, s2 = 0, sum_r = 0, dr = 0;
  auto absorb = [&](std::size_t g) {
    for (std::size_t k = f.start[g]; k < f.start[g + 1]; ++k) {
      const auto i = f.rows[k];
      sum_q += Q.row(i).head(m);
      count += 1;
      sum_r += r[i];
    }
  };
  auto shift = [&](double delta) {
    s2 += 2 * delta * s1 + delta * delta * count;
    s1 += delta * count;
    proj += delta * sum_q;
    dr += delta * sum_r;
  };
  auto store = [&](std::size_t g) {
    out.proj.row(static_cast<Eigen::Index>(g)) = proj;
    out.norm2[g] = s2;
    out.dot_r[g] = dr;
  };
  if (K == 0) {
    return out;
  }
  if (sign > 0) {
    store(K - 1);
    for (std::size_t g = K - 1; g-- > 0;) {
      absorb(g + 1);
      shift(f.knots[g + 1] - f.knots[g]);
      store(g);
    }
  } else {
    store(0);
    for (std::size_t g = 1; g < K; ++g) {
      absorb(g - 1);
      shift(f.knots[g] - f.knots[g - 1]);
      store(g);
    }
  }
  return out;
}

double sse_of(const Eigen::MatrixXd& B, const std::vector<std::size_t>& subset, const Vector& y,
              Vector* coef) {
  Matrix A(B.rows(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k) {
    A.col(static_cast<Eigen::Index>(k)) = B.col(static_cast<Eigen::Index>(subset[k]));
  }
  const Vector c = least_squares(A, y);
  if (coef) {
    *coef = c;
  }
  return (y - A * c).squaredNorm();
}

// SSE of subsets that always contain the intercept (column 0), from the
// centered Gram matrix of the remaining columns.
class GramSse {
public:
  GramSse(const Eigen::MatrixXd& B, const Vector& y) {
    const Eigen::Index M = B.cols() - 1;
    Eigen::MatrixXd C = B.rightCols(M);
    C.rowwise() -= C.colwise().mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    gram_ = C.transpose() * C;
    cy_ = C.transpose() * yc;
    syy_ = yc.squaredNorm();
  }

  double operator()(const std::vector<std::size_t>& subset) const {
    const auto k = static_cast<Eigen::Index>(subset.size()) - 1;
    if (k <= 0) {
      return syy_;
    }
    Eigen::MatrixXd G(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = static_cast<Eigen::Index>(subset[static_cast<std::size_t>(a) + 1]) - 1;
      b[a] = cy_[ia];
      for (Eigen::Index c = 0; c < k; ++c) {
        G(a, c) = gram_(ia, static_cast<Eigen::Index>(subset[static_cast<std::size_t>(c) + 1]) - 1);
      }
    }
    const Eigen::VectorXd coef = G.completeOrthogonalDecomposition().solve(b);
    return std::max(0.0, syy_ - b.dot(coef));
  }

private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd cy_;
  double syy_ = 0;
};

} // namespace

FittedModel fit_mars(const Matrix& X, const Vector& y, int max_terms, double gcv_penalty) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw DimensionError("mars: X and y must have the same, nonzero row count");
  }
  if (max_terms < 1 || gcv_penalty < 0) {
    throw ConfigError("mars: max_terms must be >= 1 and gcv_penalty >= 0");
  }
  auto scaler = fit_scaler(X);
  const Matrix Z = scaler.apply(X);
  const auto n = Z.rows();

  std::vector<Basis> terms{Basis{}};
  Orthogonal ortho(n, max_terms, y);
  ortho.add(Eigen::VectorXd::Ones(n));
  // Variation at round-off level of a constant target is not fit.
  const double sst = ortho.residual().squaredNorm();
  const bool flat = sst <= 1e-24 * y.squaredNorm();

  std::vector<SortedFeature> features;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    features.push_back(sort_feature(Z, j));
  }

  // Forward pass: greedy mirrored hinge pairs. For a hinge h with projection
  // p = Q^T h, the part outside the current span has norm ||h||^2 - ||p||^2
  // and, since the residual is orthogonal to the span, the same product with it.
  while (static_cast<int>(terms.size()) < max_terms && sst > 0 && !flat) {
    const bool pair = max_terms - static_cast<int>(terms.size()) >= 2;
    const Eigen::VectorXd& r = ortho.residual();
    const Eigen::Index m = ortho.size();
    Candidate best;
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      const auto& f = features[static_cast<std::size_t>(j)];
      const HingeSweep up = sweep(f, ortho.q(), m, r, +1);
      const HingeSweep down = sweep(f, ortho.q(), m, r, -1);
      for (std::size_t g = 0; g < f.knots.size(); ++g) {
        const double t = f.knots[g];
        const auto pu = up.proj.row(static_cast<Eigen::Index>(g));
        const auto pv = down.proj.row(static_cast<Eigen::Index>(g));
        const double nu = up.norm2[g] - pu.squaredNorm();
        const bool u_ok = nu > 1e-10 * up.norm2[g] && nu > 0;
        const double gain_u = u_ok ? up.dot_r[g] * up.dot_r[g] / nu : 0.0;
        double nv = down.norm2[g] - pv.squaredNorm();
        double rv = down.dot_r[g];
        const Basis hi{static_cast<int>(j), t, 0, +1};
        const Basis lo{static_cast<int>(j), t, 0, -1};

        if (pair) {
          if (u_ok) {
            // The two hinges have disjoint support, so their outside parts
            // overlap only through the projections.
            const double uv = -pu.dot(pv);
            nv -= uv * uv / nu;
            rv -= (uv / nu) * up.dot_r[g];
          }
          const bool v_ok = nv > 1e-10 * down.norm2[g] && nv > 0;
          const double gain_v = v_ok ? rv * rv / nv : 0.0;
          Candidate c{gain_u + gain_v, {}};
          if (u_ok) {
            c.add.push_back(hi);
          }
          if (v_ok) {
            c.add.push_back(lo);
          }
          if (!c.add.empty() && c.reduction > best.reduction) {
            best = std::move(c);
          }
        } else {
          const bool v_ok = nv > 1e-10 * down.norm2[g] && nv > 0;
          const double gain_v = v_ok ? rv * rv / nv : 0.0;
          if (u_ok && gain_u > best.reduction) {
            best = Candidate{gain_u, {hi}};
          }
          if (v_ok && gain_v > best.reduction) {
            best = Candidate{gain_v, {lo}};
          }
        }
      }
    }
    if (best.add.empty() || best.reduction <= 1e-10 * sst) {
      break;
    }
    for (auto b : best.add) {
      ortho.add(column(Z, b));
      terms.push_back(b);
    }
  }
  for (auto& b : terms) {
    if (b.feature >= 0) {
      const auto j = static_cast<Eigen::Index>(b.feature);
      b.raw_knot = b.knot * scaler.scale[j] + scaler.mean[j];
    }
  }

  // Backward pass: drop terms one at a time, keep the subset with least GCV.
  Eigen::MatrixXd B(n, static_cast<Eigen::Index>(terms.size()));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    B.col(static_cast<Eigen::Index>(k)) = column(Z, terms[k]);
  }
  const auto nn = static_cast<std::size_t>(n);
  const GramSse gram_sse(B, y);
  std::vector<std::size_t> current(terms.size());
  for (std::size_t k = 0; k < current.size(); ++k) {
    current[k] = k;
  }
  const std::vector<std::size_t> full = current;
  std::vector<std::size_t> best_subset = current;
  double best_gcv = mars_gcv(gram_sse(current), nn, current.size(), gcv_penalty);
  while (current.size() > 1) {
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_trial;
    for (std::size_t pos = 1; pos < current.size(); ++pos) {
      auto trial = current;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      const double s = gram_sse(trial);
      if (s < best_sse) {
        best_sse = s;
        best_trial = std::move(trial);
      }
    }
    current = std::move(best_trial);
    const double g = mars_gcv(best_sse, nn, current.size(), gcv_penalty);
    if (g < best_gcv) {
      best_gcv = g;
      best_subset = current;
    }
  }

  FitNotes notes;
  notes.gcv_forward = mars_gcv(sse_of(B, full, y, nullptr), nn, full.size(), gcv_penalty);
  auto model = std::make_shared<MarsModel>();
  double selected_sse = sse_of(B, best_subset, y, &model->coef);
  notes.gcv_selected = mars_gcv(selected_sse, nn, best_subset.size(), gcv_penalty);
  if (notes.gcv_selected > notes.gcv_forward) {
    // Round-off in the Gram scores preferred a subset that is not better.
    best_subset = full;
    selected_sse = sse_of(B, best_subset, y, &model->coef);
    notes.gcv_selected = notes.gcv_forward;
  }
  if (!std::isfinite(notes.gcv_selected)) {
    notes.fallback_intercept = true;
    best_subset = {0};
    selected_sse = sse_of(B, best_subset, y, &model->coef);
    notes.gcv_selected = mars_gcv(selected_sse, nn, 1, gcv_penalty);
  }

  model->forward_basis = terms;
  for (auto k : best_subset) {
    model->basis.push_back(terms[k]);
  }
  return FittedModel(LearnerKind::MARS, std::move(scaler), std::move(model), std::move(notes));
}

} // namespace effort
