#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "xplain/explanation.hpp"

namespace xplain {

/// Binary classification tree with axis-aligned `x[f] <= threshold` splits.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  DecisionTree() = default;
  DecisionTree(std::vector<Node> nodes, bool degenerate);

  int predict(std::span<const double> x) const;
  int depth() const;
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Set when training saw a single class.
  bool degenerate() const { return degenerate_; }

  /// Both directions of every split condition, in node order.
  ConditionVocabulary vocabulary() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<Node> nodes_{Node{}};
  bool degenerate_ = false;
};

struct TreeParams {
  int max_depth = 7;
  int min_leaf = 1;
};

/// Greedy CART on Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct values; ties go to the lowest feature index, then the
/// lowest threshold. Rows of `data` are feature vectors of equal length.
DecisionTree train_cart(const std::vector<std::vector<double>>& data, std::span<const int> labels,
                        TreeParams params = {});

struct TracedPrediction {
  Trace trace;
  int label = 0;
};

/// Conditions along the evaluation path of `x`, root first, plus the leaf label.
TracedPrediction extract_trace(const DecisionTree& tree, std::span<const double> x);

// "# xplain-tree v1 nodes=<n> depth=<d>" then one node per line:
// "<id> <feature> <threshold> <left> <right> <label>". Thresholds use
// shortest round-trip formatting.
void write_tree(std::ostream& out, const DecisionTree& tree);
DecisionTree read_tree(std::istream& in);

}  // namespace xplain
