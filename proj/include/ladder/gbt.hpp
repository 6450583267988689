#ifndef LADDER_GBT_HPP
#define LADDER_GBT_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace ladder {

struct GbtHyper {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 5;
};

// Binary split node; feature < 0 marks a leaf carrying `value`. `gain` keeps
// the squared-error reduction of the split for feature importances.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double gain = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
};

// Multi-class gradient boosting with softmax cross-entropy: each round fits
// one depth-limited regression tree per class on the residual y_c - p_c,
// with Newton leaf values. Exact greedy splits over presorted columns;
// training is deterministic.
class GbtClassifier {
 public:
  // X is row-major n x feature_count, labels are 0-based class ids.
  static GbtClassifier train(const std::vector<double>& X, std::size_t feature_count,
                             const std::vector<int>& labels, int class_count,
                             const GbtHyper& hyper);

  std::vector<double> scores(std::span<const double> x) const;
  int predict(std::span<const double> x) const;  // argmax, tie -> lower class

  int class_count() const { return class_count_; }
  std::size_t feature_count() const { return feature_count_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<double>& base_scores() const { return base_scores_; }
  const std::vector<std::vector<RegressionTree>>& rounds() const { return rounds_; }

  // Total split gain attributed to each feature across all trees.
  std::vector<double> feature_gains() const;

  // For deserialization.
  static GbtClassifier assemble(int class_count, std::size_t feature_count,
                                double learning_rate, std::vector<double> base_scores,
                                std::vector<std::vector<RegressionTree>> rounds);

 private:
  GbtClassifier() = default;

  int class_count_ = 0;
  std::size_t feature_count_ = 0;
  double learning_rate_ = 0.0;
  std::vector<double> base_scores_;
  std::vector<std::vector<RegressionTree>> rounds_;  // [round][class]
};

}  // namespace ladder

#endif  // LADDER_GBT_HPP
