#include <algorithm>
#include <cmath>
#include <numeric>

#include "effort/error.hpp"
#include "effort/learners.hpp"

namespace effort {

double Tree::predict(std::span<const double> x) const {
  int id = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

std::size_t Tree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

double ForestModel::predict_transformed(std::span<const double> x) const {
  double sum = 0;
  for (const auto& t : trees) {
    sum += t.predict(x);
  }
  return sum / static_cast<double>(trees.size());
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0;
  double gain = 0;
};

// Row indices of X sorted by each column, shared by every tree of a forest.
using ColumnOrder = std::vector<std::vector<std::size_t>>;

ColumnOrder sort_columns(const Matrix& X) {
  ColumnOrder order(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(X.rows()));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
      return X(static_cast<Eigen::Index>(a), f) < X(static_cast<Eigen::Index>(b), f);
    });
  }
  return order;
}

// Grows a tree over the distinct rows of a sample, each weighted by its
// multiplicity. Every node keeps, per feature, its samples in sorted order;
// children inherit them by a stable partition.
class TreeBuilder {
public:
  TreeBuilder(const Matrix& X, const Vector& y, const ColumnOrder& order,
              std::span<const std::size_t> rows, const TreeGrowth& growth, RngStream* rng)
      : growth_(growth), rng_(rng), p_(static_cast<std::size_t>(X.cols())) {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<std::size_t> count(n, 0);
    for (auto r : rows) {
      ++count[r];
    }
    std::vector<std::size_t> slot(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
      if (count[r] > 0) {
        slot[r] = y_.size();
        y_.push_back(y[static_cast<Eigen::Index>(r)]);
        w_.push_back(static_cast<double>(count[r]));
        wy_.push_back(w_.back() * y_.back());
        members_.push_back(r);
      }
    }
    const std::size_t m = y_.size();
    x_.resize(p_);
    order_.resize(p_);
    for (std::size_t f = 0; f < p_; ++f) {
      x_[f].resize(m);
      for (std::size_t k = 0; k < m; ++k) {
        x_[f][k] = X(static_cast<Eigen::Index>(members_[k]), static_cast<Eigen::Index>(f));
      }
      order_[f].reserve(m);
      for (auto r : order[f]) {
        if (count[r] > 0) {
          order_[f].push_back(slot[r]);
        }
      }
    }
    left_flag_.assign(m, 0);
    scratch_.resize(m);
  }

  Tree build() {
    Tree t;
    if (!y_.empty()) {
      grow(t, 0, y_.size(), 0);
    }
    return t;
  }

private:
  int grow(Tree& t, std::size_t begin, std::size_t end, std::size_t depth) {
    const auto id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    const auto& seg = order_[0];
    double sum = 0, weight = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto k = seg[i];
      sum += w_[k] * y_[k];
      weight += w_[k];
    }
    const double node_mean = sum / weight;
    const auto node_count = static_cast<std::size_t>(weight);
    t.nodes.back().value = node_mean;
    t.nodes.back().count = node_count;

    const bool depth_stop = growth_.max_depth && depth >= *growth_.max_depth;
    if (depth_stop || node_count < 2 * growth_.min_leaf) {
      return id;
    }
    const Split s = best_split(begin, end, node_mean, weight);
    if (s.feature < 0) {
      return id;
    }
    const auto& xs = x_[static_cast<std::size_t>(s.feature)];
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto k = seg[i];
      left_flag_[k] = xs[k] <= s.threshold ? 1 : 0;
      n_left += left_flag_[k];
    }
    for (auto& o : order_) {
      std::size_t l = begin, r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto k = o[i];
        const std::size_t go_left = left_flag_[k];
        o[l] = k;
        scratch_[r] = k;
        l += go_left;
        r += 1 - go_left;
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                o.begin() + static_cast<std::ptrdiff_t>(l));
    }
    t.nodes[static_cast<std::size_t>(id)].feature = s.feature;
    t.nodes[static_cast<std::size_t>(id)].threshold = s.threshold;
    const std::size_t mid = begin + n_left;
    const int l = grow(t, begin, mid, depth + 1);
    t.nodes[static_cast<std::size_t>(id)].left = l;
    const int r = grow(t, mid, end, depth + 1);
    t.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  void candidate_features(std::vector<std::size_t>& out) {
    out.resize(p_);
    std::iota(out.begin(), out.end(), 0);
    if (growth_.mtry == 0 || growth_.mtry >= p_ || rng_ == nullptr) {
      return;
    }
    for (std::size_t i = 0; i < growth_.mtry; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_->next_below(p_ - i));
      std::swap(out[i], out[j]);
    }
    out.resize(growth_.mtry);
    std::sort(out.begin(), out.end());
  }

  Split best_split(std::size_t begin, std::size_t end, double node_mean, double n) {
    double node_sse = 0, total_wy = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto k = order_[0][i];
      const double d = y_[k] - node_mean;
      node_sse += w_[k] * d * d;
      total_wy += wy_[k];
    }
    candidate_features(features_);
    Split best;
    if (node_sse <= 0) {
      return best;
    }
    // Reductions at round-off level on a (near-)pure node are not splits.
    const double min_gain = 1e-12 * node_sse;
    const auto min_leaf = static_cast<double>(growth_.min_leaf);
    const double total = total_wy - node_mean * n;
    // Reduction = l^2/nl + r^2/nr - (l+r)^2/n = (nr*l - nl*r)^2 / (n*nl*nr),
    // compared against the bar without dividing.
    double bar = min_gain;
    for (auto f : features_) {
      const auto& o = order_[f];
      const auto& xs = x_[f];
      double left_wy = 0, nl = 0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const auto k = o[i];
        left_wy += wy_[k];
        nl += w_[k];
        const double xk = xs[k];
        const double xn = xs[o[i + 1]];
        if (xk == xn) {
          continue;
        }
        const double nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) {
          continue;
        }
        const double left = left_wy - node_mean * nl;
        const double right = total - left;
        const double d = nr * left - nl * right;
        const double num = d * d;
        const double den = n * nl * nr;
        // Earlier (lower feature, lower threshold) splits keep round-off ties.
        if (num > bar * den) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (xk + xn);
          best.gain = num / den;
          bar = best.gain + min_gain;
        }
      }
    }
    return best;
  }

  TreeGrowth growth_;
  RngStream* rng_;
  std::size_t p_;
  std::vector<double> y_, w_, wy_;
  std::vector<std::size_t> members_;
  std::vector<std::vector<double>> x_;          // [feature][sample]
  std::vector<std::vector<std::size_t>> order_; // [feature] samples, node segments sorted
  std::vector<unsigned char> left_flag_;
  std::vector<std::size_t> scratch_;
  std::vector<std::size_t> features_;
};

Tree grow_sorted(const Matrix& X, const Vector& y, const ColumnOrder& order,
                 std::span<const std::size_t> rows, const TreeGrowth& growth, RngStream* rng) {
  if (rows.empty()) {
    throw DimensionError("tree: no rows");
  }
  if (growth.min_leaf < 1) {
    throw ConfigError("tree: min_leaf must be at least 1");
  }
  return TreeBuilder(X, y, order, rows, growth, rng).build();
}

} // namespace

Tree grow_tree(const Matrix& X, const Vector& y, std::span<const std::size_t> rows,
               const TreeGrowth& growth, RngStream* rng) {
  return grow_sorted(X, y, sort_columns(X), rows, growth, rng);
}

FittedModel fit_cart(const Matrix& X, const Vector& y, std::size_t min_leaf,
                     std::optional<std::size_t> max_depth) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw DimensionError("cart: X and y must have the same, nonzero row count");
  }
  std::vector<std::size_t> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  auto model = std::make_shared<CartModel>();
  model->tree = grow_tree(X, y, rows, TreeGrowth{min_leaf, max_depth, 0}, nullptr);
  return FittedModel(LearnerKind::CART, identity_scaler(X.cols()), std::move(model));
}

FittedModel fit_rf(const Matrix& X, const Vector& y, const ForestOptions& options,
                   RngStream rng) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw DimensionError("rf: X and y must have the same, nonzero row count");
  }
  if (options.n_trees < 1 || options.mtry < 1 ||
      options.mtry > static_cast<std::size_t>(X.cols())) {
    throw ConfigError("rf: need n_trees >= 1 and 1 <= mtry <= cols");
  }
  const auto n = static_cast<std::size_t>(X.rows());
  auto model = std::make_shared<ForestModel>();
  model->trees.reserve(options.n_trees);
  const TreeGrowth growth{options.min_leaf, options.max_depth, options.mtry};
  const ColumnOrder order = sort_columns(X);
  std::vector<std::size_t> rows(n);
  for (std::size_t t = 0; t < options.n_trees; ++t) {
    RngStream tree_rng = rng.split({static_cast<std::int64_t>(t)});
    if (options.bootstrap) {
      for (auto& r : rows) {
        r = static_cast<std::size_t>(tree_rng.next_below(n));
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    model->trees.push_back(grow_sorted(X, y, order, rows, growth, &tree_rng));
  }
  return FittedModel(LearnerKind::RF, identity_scaler(X.cols()), std::move(model));
}

} // namespace effort
