#include "ladder/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ladder/error.hpp"

namespace ladder {

namespace {

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// One boosting tree fitted to (residual, hessian) rows. The columns are
// presorted once per training and shared across all trees; node membership
// is tracked per row and refined level by level.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& X, std::size_t feature_count,
              const std::vector<std::vector<int>>& sorted_idx, const GbtHyper& hyper)
      : X_(X), f_count_(feature_count), sorted_idx_(sorted_idx), hyper_(hyper) {}

  RegressionTree fit(const std::vector<double>& residual,
                     const std::vector<double>& hessian, double leaf_factor) const {
    const std::size_t n = residual.size();
    RegressionTree tree;
    tree.nodes.push_back(TreeNode{});
    std::vector<int> node_of_row(n, 0);

    std::vector<int> frontier = {0};
    for (int depth = 0; depth < hyper_.max_depth && !frontier.empty(); ++depth) {
      const auto best = find_splits(frontier, node_of_row, residual);
      std::vector<int> next;
      for (std::size_t fi = 0; fi < frontier.size(); ++fi) {
        const int node_id = frontier[fi];
        const SplitChoice& choice = best[fi];
        if (choice.feature < 0) continue;
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = choice.feature;
        node.threshold = choice.threshold;
        node.gain = choice.gain;
        node.left = static_cast<int>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        next.push_back(node.left);
        next.push_back(node.right);
      }
      if (next.empty()) break;
      for (std::size_t row = 0; row < n; ++row) {
        const TreeNode& node =
            tree.nodes[static_cast<std::size_t>(node_of_row[row])];
        if (node.feature < 0) continue;
        node_of_row[row] = value(row, node.feature) <= node.threshold ? node.left
                                                                      : node.right;
      }
      frontier = std::move(next);
    }

    // Newton leaf values: factor * sum(residual) / sum(hessian).
    std::vector<double> sum_r(tree.nodes.size(), 0.0);
    std::vector<double> sum_h(tree.nodes.size(), 0.0);
    for (std::size_t row = 0; row < n; ++row) {
      sum_r[static_cast<std::size_t>(node_of_row[row])] += residual[row];
      sum_h[static_cast<std::size_t>(node_of_row[row])] += hessian[row];
    }
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      TreeNode& node = tree.nodes[id];
      if (node.feature >= 0) continue;
      node.value = leaf_factor * sum_r[id] / std::max(sum_h[id], 1e-12);
    }
    return tree;
  }

 private:
  double value(std::size_t row, int feature) const {
    return X_[row * f_count_ + static_cast<std::size_t>(feature)];
  }

  // Best split per frontier node, found in a single pass per feature over
  // the presorted column with per-node running statistics.
  std::vector<SplitChoice> find_splits(const std::vector<int>& frontier,
                                       const std::vector<int>& node_of_row,
                                       const std::vector<double>& residual) const {
    std::vector<int> slot_of_node;  // node id -> frontier slot (+1), 0 = absent
    int max_id = 0;
    for (int id : frontier) max_id = std::max(max_id, id);
    slot_of_node.assign(static_cast<std::size_t>(max_id) + 1, 0);
    for (std::size_t fi = 0; fi < frontier.size(); ++fi) {
      slot_of_node[static_cast<std::size_t>(frontier[fi])] = static_cast<int>(fi) + 1;
    }

    const std::size_t slots = frontier.size();
    std::vector<double> total_sum(slots, 0.0);
    std::vector<int> total_cnt(slots, 0);
    for (std::size_t row = 0; row < node_of_row.size(); ++row) {
      const int node_id = node_of_row[row];
      if (node_id > max_id) continue;
      const int slot = slot_of_node[static_cast<std::size_t>(node_id)];
      if (slot == 0) continue;
      total_sum[static_cast<std::size_t>(slot - 1)] += residual[row];
      total_cnt[static_cast<std::size_t>(slot - 1)]++;
    }

    std::vector<SplitChoice> best(slots);
    std::vector<double> left_sum(slots);
    std::vector<int> left_cnt(slots);
    std::vector<double> prev_val(slots);
    std::vector<int> prev_row(slots);

    for (int f = 0; f < static_cast<int>(f_count_); ++f) {
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_cnt.begin(), left_cnt.end(), 0);
      std::fill(prev_row.begin(), prev_row.end(), -1);
      for (const int row : sorted_idx_[static_cast<std::size_t>(f)]) {
        const int node_id = node_of_row[static_cast<std::size_t>(row)];
        if (node_id > max_id) continue;
        const int slot1 = slot_of_node[static_cast<std::size_t>(node_id)];
        if (slot1 == 0) continue;
        const std::size_t s = static_cast<std::size_t>(slot1 - 1);
        const double v = value(static_cast<std::size_t>(row), f);
        if (prev_row[s] >= 0 && v > prev_val[s]) {
          // Candidate boundary between the previous value and this one.
          const int cnt_l = left_cnt[s];
          const int cnt_r = total_cnt[s] - cnt_l;
          if (cnt_l >= hyper_.min_leaf && cnt_r >= hyper_.min_leaf) {
            const double sum_l = left_sum[s];
            const double sum_r = total_sum[s] - sum_l;
            const double gain = sum_l * sum_l / cnt_l + sum_r * sum_r / cnt_r -
                                total_sum[s] * total_sum[s] / total_cnt[s];
            if (gain > best[s].gain) {
              best[s] = SplitChoice{gain, f, 0.5 * (prev_val[s] + v)};
            }
          }
        }
        left_sum[s] += residual[static_cast<std::size_t>(row)];
        left_cnt[s]++;
        prev_val[s] = v;
        prev_row[s] = row;
      }
    }
    return best;
  }

  const std::vector<double>& X_;
  std::size_t f_count_;
  const std::vector<std::vector<int>>& sorted_idx_;
  const GbtHyper& hyper_;
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
  int id = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                     : node.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

GbtClassifier GbtClassifier::train(const std::vector<double>& X,
                                   std::size_t feature_count,
                                   const std::vector<int>& labels, int class_count,
                                   const GbtHyper& hyper) {
  const std::size_t n = labels.size();
  if (n == 0 || feature_count == 0 || X.size() != n * feature_count) {
    throw Error(Errc::bad_params, "training matrix shape mismatch");
  }
  if (class_count < 2) {
    throw Error(Errc::bad_params, "classifier needs at least two classes");
  }

  GbtClassifier model;
  model.class_count_ = class_count;
  model.feature_count_ = feature_count;
  model.learning_rate_ = hyper.learning_rate;

  // Smoothed log priors keep absent classes finite.
  std::vector<int> class_counts(static_cast<std::size_t>(class_count), 0);
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw Error(Errc::bad_params, "label out of range");
    class_counts[static_cast<std::size_t>(y)]++;
  }
  model.base_scores_.resize(static_cast<std::size_t>(class_count));
  for (int c = 0; c < class_count; ++c) {
    model.base_scores_[static_cast<std::size_t>(c)] =
        std::log((class_counts[static_cast<std::size_t>(c)] + 1.0) /
                 (static_cast<double>(n) + class_count));
  }

  std::vector<std::vector<int>> sorted_idx(feature_count);
  for (std::size_t f = 0; f < feature_count; ++f) {
    std::vector<int>& order = sorted_idx[f];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return X[static_cast<std::size_t>(a) * feature_count + f] <
             X[static_cast<std::size_t>(b) * feature_count + f];
    });
  }
  const TreeBuilder builder(X, feature_count, sorted_idx, hyper);

  std::vector<double> score(n * static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < class_count; ++c) {
      score[i * class_count + static_cast<std::size_t>(c)] =
          model.base_scores_[static_cast<std::size_t>(c)];
    }
  }

  const double leaf_factor = (class_count - 1.0) / class_count;
  std::vector<double> prob(n * static_cast<std::size_t>(class_count));
  model.rounds_.reserve(static_cast<std::size_t>(hyper.rounds));
  for (int round = 0; round < hyper.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      double max_s = score[i * class_count];
      for (int c = 1; c < class_count; ++c) {
        max_s = std::max(max_s, score[i * class_count + static_cast<std::size_t>(c)]);
      }
      double denom = 0.0;
      for (int c = 0; c < class_count; ++c) {
        const double e =
            std::exp(score[i * class_count + static_cast<std::size_t>(c)] - max_s);
        prob[i * class_count + static_cast<std::size_t>(c)] = e;
        denom += e;
      }
      for (int c = 0; c < class_count; ++c) {
        prob[i * class_count + static_cast<std::size_t>(c)] /= denom;
      }
    }

    std::vector<RegressionTree> trees(static_cast<std::size_t>(class_count));
#pragma omp parallel for
    for (int c = 0; c < class_count; ++c) {
      std::vector<double> residual(n), hessian(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob[i * class_count + static_cast<std::size_t>(c)];
        residual[i] = (labels[i] == c ? 1.0 : 0.0) - p;
        hessian[i] = p * (1.0 - p);
      }
      trees[static_cast<std::size_t>(c)] = builder.fit(residual, hessian, leaf_factor);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> row(X.data() + i * feature_count, feature_count);
      for (int c = 0; c < class_count; ++c) {
        score[i * class_count + static_cast<std::size_t>(c)] +=
            hyper.learning_rate * trees[static_cast<std::size_t>(c)].predict(row);
      }
    }
    model.rounds_.push_back(std::move(trees));
  }
  return model;
}

std::vector<double> GbtClassifier::scores(std::span<const double> x) const {
  std::vector<double> out = base_scores_;
  for (const auto& trees : rounds_) {
    for (int c = 0; c < class_count_; ++c) {
      out[static_cast<std::size_t>(c)] +=
          learning_rate_ * trees[static_cast<std::size_t>(c)].predict(x);
    }
  }
  return out;
}

int GbtClassifier::predict(std::span<const double> x) const {
  const std::vector<double> s = scores(x);
  int best = 0;
  for (int c = 1; c < class_count_; ++c) {
    if (s[static_cast<std::size_t>(c)] > s[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

std::vector<double> GbtClassifier::feature_gains() const {
  std::vector<double> gains(feature_count_, 0.0);
  for (const auto& trees : rounds_) {
    for (const RegressionTree& tree : trees) {
      for (const TreeNode& node : tree.nodes) {
        if (node.feature >= 0) gains[static_cast<std::size_t>(node.feature)] += node.gain;
      }
    }
  }
  return gains;
}

GbtClassifier GbtClassifier::assemble(int class_count, std::size_t feature_count,
                                      double learning_rate,
                                      std::vector<double> base_scores,
                                      std::vector<std::vector<RegressionTree>> rounds) {
  GbtClassifier model;
  model.class_count_ = class_count;
  model.feature_count_ = feature_count;
  model.learning_rate_ = learning_rate;
  model.base_scores_ = std::move(base_scores);
  model.rounds_ = std::move(rounds);
  return model;
}

}  // namespace ladder
