#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace effort {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Minimizes ||A x - b||. Rank-deficient systems get the minimum-norm
/// solution; singular values below max(rows, cols) * eps * sigma_max count as zero.
Vector least_squares(const Matrix& A, const Vector& b);

/// Solves A x = b for symmetric positive definite A. Throws DefinitenessError.
Vector cholesky_solve(const Matrix& A, const Vector& b);

struct Scaler {
  Vector mean;
  Vector scale; // sample std, 1 where the column is constant

  Matrix apply(const Matrix& X) const;
  void apply_row(std::span<const double> row, std::span<double> out) const;
  Eigen::Index size() const { return mean.size(); }
};

Scaler fit_scaler(const Matrix& X);
Matrix apply_scaler(const Scaler& s, const Matrix& X);

/// Identity scaler (mean 0, scale 1) for learners that work on raw features.
Scaler identity_scaler(Eigen::Index cols);

Matrix select_rows(const Matrix& X, std::span<const std::size_t> rows);
Vector select_rows(const Vector& y, std::span<const std::size_t> rows);
Matrix select_cols(const Matrix& X, std::span<const std::size_t> cols);

double mean(const Vector& v);
/// Sample variance (divisor n - 1); 0 for fewer than two values.
double sample_variance(const Vector& v);

// ---------------------------------------------------------------------------
// Random streams
//
// RngStream is a counter-based generator: the n-th output of a stream with
// key k is splitmix64_mix(k + (n + 1) * 0x9E3779B97F4A7C15). Splitting hashes
// a label sequence into a fresh key, so children depend only on the parent key
// and the labels, never on how much of the parent was consumed or on the
// order in which siblings were created.
// ---------------------------------------------------------------------------

using RngLabel = std::variant<std::string, std::int64_t>;

class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit();
  double next_uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  RngStream split(std::span<const RngLabel> labels) const;
  RngStream split(std::initializer_list<RngLabel> labels) const;

  friend bool operator==(const RngStream&, const RngStream&) = default;

private:
  RngStream(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline RngStream split_rng(const RngStream& base, std::initializer_list<RngLabel> labels) {
  return base.split(labels);
}

std::uint64_t splitmix64_mix(std::uint64_t x);

/// Random permutation of 0..n-1 (Fisher-Yates driven by the stream).
std::vector<std::size_t> permutation(std::size_t n, RngStream& rng);

} // namespace effort
