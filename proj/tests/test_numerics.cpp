#include "doctest.h"

#include <cmath>
#include <set>

#include "effort/error.hpp"
#include "effort/numerics.hpp"

using namespace effort;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Random matrix with prescribed singular values: U diag(s) V^T.
Matrix conditioned(Eigen::Index rows, Eigen::Index cols, double cond, RngStream& rng) {
  auto gauss = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.next_uniform(-1, 1);
    return m;
  };
  Eigen::HouseholderQR<Matrix> qu(gauss(rows, rows)), qv(gauss(cols, cols));
  Matrix U = qu.householderQ();
  Matrix V = qv.householderQ();
  Eigen::Index k = std::min(rows, cols);
  Matrix S = Matrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < k; ++i)
    S(i, i) = std::pow(cond, -static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(k - 1, 1)));
  return U * S * V.transpose();
}

} // namespace

TEST_CASE("least_squares: identity") {
  Vector x = least_squares(Matrix::Identity(3, 3), vec({1, 2, 3}));
  CHECK(x.isApprox(vec({1, 2, 3}), 1e-14));
}

TEST_CASE("least_squares: overdetermined line fit") {
  Matrix A = mat({{1, 0}, {1, 1}, {1, 2}});
  Vector x = least_squares(A, vec({0, 1, 1}));
  CHECK(x(0) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(x(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("least_squares: rank deficient gives minimum norm") {
  // Oracle: A = s u v^T with v = [1,1]/sqrt2, so A^+ b = A^T b / ||A||_F^2 = [5,5]/10.
  Matrix A = mat({{1, 1}, {2, 2}});
  Vector x = least_squares(A, vec({1, 2}));
  Vector oracle = A.transpose() * vec({1, 2}) / A.squaredNorm();
  CHECK(std::abs(x(0) - oracle(0)) < 1e-12);
  CHECK(std::abs(x(1) - oracle(1)) < 1e-12);
  CHECK(std::abs(x(0) - 0.5) < 1e-12);
  CHECK((A * x - vec({1, 2})).norm() < 1e-12);
}

TEST_CASE("least_squares: dimension mismatch") {
  CHECK_THROWS_AS(least_squares(Matrix::Identity(3, 3), vec({1, 2})), DimensionError);
}

TEST_CASE("least_squares: residual orthogonality") {
  RngStream rng(7);
  for (double cond : {1.0, 1e2, 1e4, 1e6, 1e8}) {
    for (auto [r, c] : {std::pair{20, 5}, std::pair{50, 12}, std::pair{8, 8}}) {
      Matrix A = conditioned(r, c, cond, rng);
      Vector b(r);
      for (Eigen::Index i = 0; i < r; ++i) b(i) = rng.next_uniform(-10, 10);
      Vector x = least_squares(A, b);
      double lhs = (A.transpose() * (b - A * x)).norm();
      CAPTURE(cond);
      CHECK(lhs <= 1e-8 * ((A.transpose() * b).norm() + 1));
    }
  }
}

TEST_CASE("least_squares: square nonsingular matches direct solve") {
  RngStream rng(11);
  for (double cond : {1.0, 1e3, 1e6}) {
    Matrix A = conditioned(10, 10, cond, rng);
    Vector b(10);
    for (int i = 0; i < 10; ++i) b(i) = rng.next_uniform(-1, 1);
    Vector x = least_squares(A, b);
    Vector direct = A.fullPivLu().solve(b);
    // Relative agreement is limited by cond * eps for both solvers.
    CHECK((x - direct).norm() <= 1e-10 * std::max(1.0, cond / 1e3) * direct.norm());
  }
}

TEST_CASE("cholesky_solve: examples") {
  CHECK(cholesky_solve(Matrix::Identity(2, 2), vec({3, 4})).isApprox(vec({3, 4})));
  Vector x = cholesky_solve(mat({{4, 2}, {2, 3}}), vec({2, 1}));
  CHECK(std::abs(x(0) - 0.5) < 1e-14);
  CHECK(std::abs(x(1)) < 1e-14);
  CHECK_THROWS_AS(cholesky_solve(mat({{1, 2}, {2, 1}}), vec({1, 1})), DefinitenessError);
  CHECK_THROWS_AS(cholesky_solve(mat({{1, 0}, {0, 1}}), vec({1, 1, 1})), DimensionError);
}

TEST_CASE("cholesky_solve: multiply back") {
  RngStream rng(3);
  auto spd = [&](double cond) {
    Matrix Q = conditioned(12, 12, 1.0, rng);
    Vector d(12);
    for (int i = 0; i < 12; ++i) d(i) = std::pow(cond, -i / 11.0);
    Matrix A = Q * d.asDiagonal() * Q.transpose();
    return Matrix((A + A.transpose()) * 0.5);
  };
  auto uniform = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_uniform(-1, 1);
    return v;
  };
  // Right-hand sides in the range of A with a unit-scale solution.
  for (double cond : {1.0, 1e4, 1e6, 1e8}) {
    Matrix A = spd(cond);
    Vector b = A * uniform(12);
    Vector x = cholesky_solve(A, b);
    CAPTURE(cond);
    CHECK((A * x - b).norm() <= 1e-10 * b.norm());
  }
  // Arbitrary right-hand sides: the rounding floor eps * ||A|| * ||x|| stays below the bound here.
  for (double cond : {1.0, 1e4, 1e6}) {
    Matrix A = spd(cond);
    Vector b = uniform(12);
    Vector x = cholesky_solve(A, b);
    CAPTURE(cond);
    CHECK((A * x - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("scaler: examples") {
  Matrix X = mat({{1, 7}, {2, 7}, {3, 7}});
  Scaler s = fit_scaler(X);
  Matrix Z = apply_scaler(s, X);
  CHECK(Z(0, 0) == doctest::Approx(-1));
  CHECK(Z(1, 0) == doctest::Approx(0));
  CHECK(Z(2, 0) == doctest::Approx(1));
  CHECK(s.scale(1) == 1.0);
  for (int i = 0; i < 3; ++i) CHECK(Z(i, 1) == 0.0);

  // Unseen rows use training statistics.
  Matrix unseen = mat({{10, 0}});
  Matrix zu = apply_scaler(s, unseen);
  CHECK(zu(0, 0) == doctest::Approx(8));
  CHECK(zu(0, 1) == doctest::Approx(-7));

  std::vector<double> out(2);
  std::vector<double> row{10, 0};
  s.apply_row(row, out);
  CHECK(out[0] == zu(0, 0));
  CHECK(out[1] == zu(0, 1));
}

TEST_CASE("scaler: standardized columns") {
  RngStream rng(5);
  Matrix X(30, 4);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 4; ++j) X(i, j) = rng.next_uniform(-100, 100) * (j + 1);
  Matrix Z = apply_scaler(fit_scaler(X), X);
  for (int j = 0; j < 4; ++j) {
    Vector c = Z.col(j);
    CHECK(std::abs(mean(c)) < 1e-12);
    CHECK(std::abs(sample_variance(c) - 1) < 1e-12);
  }
  Scaler s = fit_scaler(X);
  for (int j = 0; j < s.size(); ++j) CHECK(s.scale(j) > 0);
}

TEST_CASE("statistics helpers") {
  CHECK(mean(vec({1, 2, 3, 6})) == 3);
  CHECK(sample_variance(vec({0, 2})) == doctest::Approx(2));
  CHECK(sample_variance(vec({5})) == 0);
  Matrix X = mat({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  std::vector<std::size_t> rows{2, 0};
  std::vector<std::size_t> cols{2};
  Matrix R = select_rows(X, rows);
  CHECK(R(0, 0) == 7);
  CHECK(R(1, 2) == 3);
  Matrix C = select_cols(X, cols);
  CHECK(C.cols() == 1);
  CHECK(C(1, 0) == 6);
  Vector y = select_rows(vec({10, 20, 30}), rows);
  CHECK(y(0) == 30);
  CHECK(y(1) == 10);
}

TEST_CASE("rng: splitmix64 reference output") {
  // The stream key is the first output of the reference SplitMix64 seeded with the seed.
  CHECK(splitmix64_mix(0x9E3779B97F4A7C15ull) == 0xE220A8397B1DCDAFull);
  CHECK(RngStream(0).key() == 0xE220A8397B1DCDAFull);
  RngStream s(0);
  CHECK(s.next_u64() == splitmix64_mix(0xE220A8397B1DCDAFull + 0x9E3779B97F4A7C15ull));
}

TEST_CASE("rng: split determinism and pinned fixtures") {
  RngStream s(20190101);
  auto a1 = split_rng(s, {std::string("a")});
  auto a2 = split_rng(s, {std::string("a")});
  CHECK(a1 == a2);
  auto b = split_rng(s, {std::string("b")});
  std::uint64_t fa = a1.next_u64();
  std::uint64_t fb = b.next_u64();
  CHECK(fa != fb);
  CHECK(fa == 1096900069210057041ull);
  CHECK(fb == 7770082432885865994ull);
  CHECK(a2.next_u64() == fa);

  RngStream r(42);
  CHECK(r.next_u64() == 6332618229526065668ull);
  CHECK(r.next_u64() == 17630415256238047317ull);

  auto p = split_rng(s, {std::string("folds")});
  CHECK(permutation(6, p) == std::vector<std::size_t>{0, 1, 5, 4, 2, 3});
}

TEST_CASE("rng: split order and consumption independence") {
  RngStream s(99);
  auto first_x = s.split({std::string("x"), std::int64_t{3}});
  auto first_y = s.split({std::string("y")});
  RngStream t(99);
  for (int i = 0; i < 17; ++i) t.next_u64();
  auto second_y = t.split({std::string("y")});
  auto second_x = t.split({std::string("x"), std::int64_t{3}});
  CHECK(first_x.next_u64() == second_x.next_u64());
  CHECK(first_y.next_u64() == second_y.next_u64());

  // Label sequences are not concatenation-ambiguous.
  auto ab = s.split({std::string("a"), std::string("b")});
  auto a_b = s.split({std::string("a")}).split({std::string("b")});
  auto joined = s.split({std::string("ab")});
  CHECK(ab.next_u64() != joined.next_u64());
  (void)a_b;
  auto i3 = s.split({std::int64_t{3}});
  auto s3 = s.split({std::string("3")});
  CHECK(i3.next_u64() != s3.next_u64());
}

TEST_CASE("rng: ranges") {
  RngStream s(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    double u = s.next_unit();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    double v = s.next_uniform(-1, 1);
    CHECK_UNARY(v >= -1.0);
    CHECK_UNARY(v < 1.0);
    auto k = s.next_below(7);
    CHECK_UNARY(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
  auto p = permutation(50, s);
  std::set<std::size_t> uniq(p.begin(), p.end());
  CHECK(uniq.size() == 50);
  CHECK(*uniq.rbegin() == 49);
}
