#include "xplain/decision_tree.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "xplain/error.hpp"
#include "xplain/format.hpp"

namespace xplain {

DecisionTree::DecisionTree(std::vector<Node> nodes, bool degenerate)
    : nodes_(std::move(nodes)), degenerate_(degenerate) {
  if (nodes_.empty()) throw InputError("decision tree needs at least one node");
  const auto n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    if (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n) {
      throw InputError("decision tree: child index out of range");
    }
  }
}

int DecisionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(i)].label;
}

int DecisionTree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    deepest = std::max(deepest, level[i]);
    if (!node.is_leaf()) {
      level[static_cast<std::size_t>(node.left)] = level[i] + 1;
      level[static_cast<std::size_t>(node.right)] = level[i] + 1;
    }
  }
  return deepest;
}

ConditionVocabulary DecisionTree::vocabulary() const {
  std::vector<Condition> conditions;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    Condition le(node.feature, node.threshold, Direction::LessEqual);
    Condition gt(node.feature, node.threshold, Direction::Greater);
    // The same split can recur in different subtrees.
    if (std::find(conditions.begin(), conditions.end(), le) == conditions.end()) {
      conditions.push_back(le);
      conditions.push_back(gt);
    }
  }
  return ConditionVocabulary(std::move(conditions));
}

namespace {

double gini(std::size_t ones, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(ones) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

class CartBuilder {
 public:
  CartBuilder(const std::vector<std::vector<double>>& data, std::span<const int> labels,
              TreeParams params)
      : data_(data), labels_(labels), params_(params) {}

  std::vector<DecisionTree::Node> build() {
    std::vector<std::size_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t ones = 0;
    for (auto r : rows) ones += labels_[r] == 1;
    nodes_[static_cast<std::size_t>(id)].label = 2 * ones > rows.size() ? 1 : 0;

    const bool pure = ones == 0 || ones == rows.size();
    if (pure || depth >= params_.max_depth ||
        rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) {
      return id;
    }
    const Split best = find_split(rows);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (data_[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(r);
    }
    const int l = grow(left, depth + 1);
    const int rr = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows) const {
    Split best;
    double best_impurity = std::numeric_limits<double>::infinity();
    const std::size_t n = rows.size();
    const std::size_t width = data_[rows.front()].size();
    std::size_t total_ones = 0;
    for (auto r : rows) total_ones += labels_[r] == 1;

    std::vector<std::size_t> order = rows;
    for (std::size_t f = 0; f < width; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return data_[a][f] < data_[b][f]; });
      std::size_t left_ones = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_ones += labels_[order[i]] == 1;
        const double lo = data_[order[i]][f];
        const double hi = data_[order[i + 1]][f];
        if (!(lo < hi)) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < static_cast<std::size_t>(params_.min_leaf) ||
            n_right < static_cast<std::size_t>(params_.min_leaf)) {
          continue;
        }
        // Thresholds carry the same 6-digit quantization as trace conditions,
        // so path conditions reproduce the split exactly.
        const double threshold = quantize_threshold(lo + (hi - lo) / 2.0);
        if (!(lo <= threshold && threshold < hi)) continue;
        const double impurity =
            (static_cast<double>(n_left) * gini(left_ones, n_left) +
             static_cast<double>(n_right) * gini(total_ones - left_ones, n_right)) /
            static_cast<double>(n);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best = {static_cast<int>(f), threshold, impurity};
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& data_;
  std::span<const int> labels_;
  TreeParams params_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

DecisionTree train_cart(const std::vector<std::vector<double>>& data, std::span<const int> labels,
                        TreeParams params) {
  if (data.empty()) throw InputError("train_cart: no data");
  if (data.size() != labels.size()) throw InputError("train_cart: data/label count mismatch");
  if (params.max_depth < 0 || params.min_leaf < 1) throw InputError("train_cart: bad parameters");
  const auto width = data.front().size();
  for (const auto& row : data) {
    if (row.size() != width) throw InputError("train_cart: ragged rows");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw InputError("train_cart: labels must be 0 or 1");
  }
  const bool single_class =
      std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); });
  return DecisionTree(CartBuilder(data, labels, params).build(), single_class);
}

TracedPrediction extract_trace(const DecisionTree& tree, std::span<const double> x) {
  TracedPrediction out;
  const auto& nodes = tree.nodes();
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(node.feature) >= x.size()) {
      throw InputError("extract_trace: instance has too few features");
    }
    const bool left = x[static_cast<std::size_t>(node.feature)] <= node.threshold;
    out.trace.conditions.emplace_back(node.feature, node.threshold,
                                      left ? Direction::LessEqual : Direction::Greater);
    i = left ? node.left : node.right;
  }
  out.label = nodes[static_cast<std::size_t>(i)].label;
  return out;
}

void write_tree(std::ostream& out, const DecisionTree& tree) {
  out << "# xplain-tree v1 nodes=" << tree.size() << " depth=" << tree.depth()
      << " degenerate=" << (tree.degenerate() ? 1 : 0) << '\n';
  const auto& nodes = tree.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    out << i << ' ' << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' '
        << n.right << ' ' << n.label << '\n';
  }
}

DecisionTree read_tree(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# xplain-tree v1 ", 0) != 0) {
    throw InputError("tree: missing or unsupported header");
  }
  const bool degenerate = line.find("degenerate=1") != std::string::npos;
  std::vector<DecisionTree::Node> nodes;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::size_t id = 0;
    DecisionTree::Node n;
    std::string threshold;
    if (!(fields >> id >> n.feature >> threshold >> n.left >> n.right >> n.label) ||
        id != nodes.size()) {
      throw InputError("tree: malformed node line '" + line + "'");
    }
    n.threshold = parse_double(threshold, "threshold");
    nodes.push_back(n);
  }
  return DecisionTree(std::move(nodes), degenerate);
}

}  // namespace xplain
