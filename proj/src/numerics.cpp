#include "effort/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "effort/error.hpp"

namespace effort {

Vector least_squares(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) {
    throw DimensionError("least_squares: A has " + std::to_string(A.rows()) + " rows but b has " +
                         std::to_string(b.size()) + " entries");
  }
  if (A.rows() < 1) {
    throw DimensionError("least_squares: empty system");
  }
  if (A.cols() == 0) {
    return Vector(0);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cutoff =
      static_cast<double>(std::max(A.rows(), A.cols())) * std::numeric_limits<double>::epsilon();
  svd.setThreshold(cutoff);
  Vector x = svd.solve(b);
  // One step of iterative refinement.
  const Vector r = b - A * x;
  x += svd.solve(r);
  return x;
}

Vector cholesky_solve(const Matrix& A, const Vector& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw DimensionError("cholesky_solve: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw DefinitenessError("cholesky_solve: matrix is not positive definite");
  }
  Vector x = llt.solve(b);
  const Vector r = b - A * x;
  x += llt.solve(r);
  return x;
}

Matrix Scaler::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) {
    throw DimensionError("scaler: expected " + std::to_string(mean.size()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    out.col(j) = (X.col(j).array() - mean[j]) / scale[j];
  }
  return out;
}

void Scaler::apply_row(std::span<const double> row, std::span<double> out) const {
  if (static_cast<Eigen::Index>(row.size()) != mean.size() || out.size() != row.size()) {
    throw DimensionError("scaler: row has " + std::to_string(row.size()) + " values, expected " +
                         std::to_string(mean.size()));
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = (row[j] - mean[static_cast<Eigen::Index>(j)]) / scale[static_cast<Eigen::Index>(j)];
  }
}

Scaler fit_scaler(const Matrix& X) {
  Scaler s;
  s.mean = Vector::Zero(X.cols());
  s.scale = Vector::Ones(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Vector col = X.col(j);
    s.mean[j] = mean(col);
    const double sd = std::sqrt(sample_variance(col));
    if (sd > 0.0 && std::isfinite(sd)) {
      s.scale[j] = sd;
    }
  }
  return s;
}

Matrix apply_scaler(const Scaler& s, const Matrix& X) { return s.apply(X); }

Scaler identity_scaler(Eigen::Index cols) {
  return Scaler{Vector::Zero(cols), Vector::Ones(cols)};
}

Matrix select_rows(const Matrix& X, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Vector select_rows(const Vector& y, std::span<const std::size_t> rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  }
  return out;
}

Matrix select_cols(const Matrix& X, std::span<const std::size_t> cols) {
  Matrix out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

double mean(const Vector& v) {
  if (v.size() == 0) {
    return 0.0;
  }
  return v.sum() / static_cast<double>(v.size());
}

double sample_variance(const Vector& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean(v);
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

// --- RngStream -------------------------------------------------------------

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t label_hash(const RngLabel& label) {
  if (const auto* s = std::get_if<std::string>(&label)) {
    return splitmix64_mix(fnv1a(*s) ^ 0x5354524EULL); // "STRN"
  }
  return splitmix64_mix(static_cast<std::uint64_t>(std::get<std::int64_t>(label)) ^ 0x494E5447ULL);
}

} // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), key_(splitmix64_mix(seed + kGolden)) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGolden);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

std::uint64_t RngStream::next_below(std::uint64_t n) {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return x % n;
}

RngStream RngStream::split(std::span<const RngLabel> labels) const {
  std::uint64_t h = splitmix64_mix(key_ ^ 0x53504C4954ULL); // "SPLIT"
  for (const auto& label : labels) {
    h = splitmix64_mix(h * kGolden + label_hash(label));
  }
  h = splitmix64_mix(h + static_cast<std::uint64_t>(labels.size()));
  return RngStream(seed_, h);
}

RngStream RngStream::split(std::initializer_list<RngLabel> labels) const {
  return split(std::span<const RngLabel>(labels.begin(), labels.size()));
}

std::vector<std::size_t> permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = i;
  }
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

} // namespace effort
