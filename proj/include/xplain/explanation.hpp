#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace xplain {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Explanation variants
// ---------------------------------------------------------------------------

/// 0-1 mask over features.
struct Relevance {
  std::vector<int> mask;
  friend bool operator==(const Relevance&, const Relevance&) = default;
};

/// Signed per-feature weights in [-1, 1].
struct Importance {
  std::vector<double> weights;
  friend bool operator==(const Importance&, const Importance&) = default;
};

/// Rank vector: `positions[i]` is the rank of feature i, a permutation of 0..d-1.
struct Ranking {
  std::vector<int> positions;
  friend bool operator==(const Ranking&, const Ranking&) = default;
};

enum class Direction { LessEqual, Greater };

/// One decision-path test, `x[feature] <= threshold` or `x[feature] > threshold`.
/// Thresholds are quantized to 6 significant digits so that set membership is
/// stable under float noise.
struct Condition {
  int feature = 0;
  double threshold = 0.0;
  Direction direction = Direction::LessEqual;

  Condition() = default;
  Condition(int feature, double threshold, Direction direction);

  bool holds(std::span<const double> x) const;
  friend auto operator<=>(const Condition&, const Condition&) = default;
};

double quantize_threshold(double value);

/// Ordered root-to-leaf conditions.
struct Trace {
  std::vector<Condition> conditions;
  friend bool operator==(const Trace&, const Trace&) = default;
};

using Explanation = std::variant<Relevance, Importance, Ranking, Trace>;

enum class Variant { Relevance = 0, Importance = 1, Ranking = 2, Trace = 3 };

Variant variant_of(const Explanation& e);
std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

/// Throws InputError when the payload breaks its variant's invariants.
void validate(const Explanation& e);

/// Fixed ordering of trace conditions used to embed traces as 0-1 vectors.
class ConditionVocabulary {
 public:
  ConditionVocabulary() = default;
  explicit ConditionVocabulary(std::vector<Condition> conditions);

  std::size_t size() const { return conditions_.size(); }
  const std::vector<Condition>& conditions() const { return conditions_; }
  /// Throws InputError if `c` is not in the vocabulary.
  std::size_t index_of(const Condition& c) const;
  bool contains(const Condition& c) const { return index_.contains(c); }

 private:
  std::vector<Condition> conditions_;
  std::map<Condition, std::size_t> index_;
};

/// Real-vector embedding used by RBF/linear explanation kernels.
/// Ranking -> position/(d-1); Trace -> membership over `vocabulary`.
Eigen::VectorXd vectorize(const Explanation& e, const ConditionVocabulary* vocabulary = nullptr);

/// Variant-preserving random edit with `strength` elementary changes:
/// distinct bit flips, ternary weight changes, adjacent transpositions, or
/// condition swaps drawn from `vocabulary` (traces only).
Explanation perturb(const Explanation& e, Rng& rng, int strength,
                    const ConditionVocabulary* vocabulary = nullptr);

// ---------------------------------------------------------------------------
// Similarities shared by kernels and reward oracles
// ---------------------------------------------------------------------------

/// |a ∩ b| / |a ∪ b|, 1 for two empty sets. Inputs need not be sorted.
template <class T>
double jaccard(std::vector<T> a, std::vector<T> b);

/// Fraction of concordant pairs between two permutations of the same items.
double kendall_similarity(std::span<const int> a, std::span<const int> b);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const Condition> a, std::span<const Condition> b);

// ---------------------------------------------------------------------------
// Ground-truth reward oracles
// ---------------------------------------------------------------------------

/// A candidate answer: explanation plus predicted label in {0, 1}.
struct Arm {
  Explanation explanation;
  int label = 0;
  friend bool operator==(const Arm&, const Arm&) = default;
};

enum class RewardKind { Cosine, Jaccard, Kendall, Lcs, Hamming };

std::string reward_name(RewardKind k);
RewardKind parse_reward(const std::string& name);

double reward_cosine_signed(const Arm& truth, const Arm& predicted);
double reward_jaccard_signed(const Arm& truth, const Arm& predicted);
double reward_kendall_signed(const Arm& truth, const Arm& predicted);
double reward_lcs_signed(const Arm& truth, const Arm& predicted);
double reward_hamming_signed(const Arm& truth, const Arm& predicted);

double signed_reward(RewardKind kind, const Arm& truth, const Arm& predicted);

/// Noise-free reward function f(x, z, y) backed by a ground-truth map
/// context id -> (z*, y*).
class RewardOracle {
 public:
  RewardOracle(RewardKind kind, std::vector<Arm> ground_truth)
      : kind_(kind), truth_(std::move(ground_truth)) {}

  RewardKind kind() const { return kind_; }
  std::size_t size() const { return truth_.size(); }
  const Arm& truth(std::size_t context) const { return truth_.at(context); }
  double operator()(std::size_t context, const Arm& arm) const {
    return signed_reward(kind_, truth(context), arm);
  }

 private:
  RewardKind kind_;
  std::vector<Arm> truth_;
};

// Line-delimited ground-truth map: "<context id> <label> <variant> <payload...>".
// Trace payload items are "feature:threshold:le|gt".
void write_ground_truth(std::ostream& out, std::span<const Arm> truth);
std::vector<Arm> read_ground_truth(std::istream& in);

}  // namespace xplain

#include "xplain/detail/jaccard.ipp"
