#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xplain/explanation.hpp"
#include "xplain/gp.hpp"
#include "xplain/kernel.hpp"

namespace xplain {

// ---------------------------------------------------------------------------
// Exploration schedule
// ---------------------------------------------------------------------------

class BetaSchedule {
 public:
  enum class Kind { Constant, LogGrowth, Theorem };

  static BetaSchedule constant(double beta);
  /// β_t = a + b·ln(1 + t)
  static BetaSchedule log_growth(double a, double b);
  /// β_t = 2ω² + 300·γ_t·ln³(t/δ), ln clamped at 0 for t ≤ δ. `gamma` is a
  /// surrogate for the information gain; rounds past its end reuse the last
  /// entry, an empty list means γ_t = 0.
  static BetaSchedule theorem(double omega, double delta, std::vector<double> gamma);

  /// t ≥ 1. Non-integer t is accepted for the closed-form schedules.
  double value(double t) const;
  Kind kind() const { return kind_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::LogGrowth;
  double a_ = 1.0;
  double b_ = 0.2;
  std::vector<double> gamma_;
};

// ---------------------------------------------------------------------------
// Arms and selection
// ---------------------------------------------------------------------------

/// Finite, nonempty list of candidate arms for one context. All explanations
/// share one variant; labels are 0 or 1.
class ArmPool {
 public:
  explicit ArmPool(std::vector<Arm> arms);

  std::size_t size() const { return arms_.size(); }
  const Arm& operator[](std::size_t i) const { return arms_[i]; }
  const std::vector<Arm>& arms() const { return arms_; }
  auto begin() const { return arms_.begin(); }
  auto end() const { return arms_.end(); }

 private:
  std::vector<Arm> arms_;
};

struct Selection {
  std::size_t index = 0;
  double score = 0.0;
};

/// argmax over the pool of μ(x, z, y) + √β·σ(x, z, y); the lowest index wins
/// ties. `arm_triples[i]` must be the triple (context, pool[i]).
Selection select_arm_ucb(const GpPosterior& gp, std::span<const Triple> arm_triples, double beta);

/// Convenience overload that builds the triples itself.
Selection select_arm_ucb(const GpPosterior& gp, const Eigen::VectorXd& context,
                         const ArmPool& pool, double beta,
                         const ConditionVocabulary* vocabulary = nullptr);

std::size_t select_arm_random(const ArmPool& pool, Rng& rng);

/// Pool maximum of the noise-free reward minus the chosen arm's reward.
double instantaneous_regret(const RewardOracle& oracle, std::size_t context, const ArmPool& pool,
                            std::size_t chosen);

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

/// Everything an episode needs about the data: contexts, ground truth and the
/// explanation candidates the arm pool is built from.
struct Task {
  std::vector<Eigen::VectorXd> contexts;
  RewardOracle oracle;
  Variant variant = Variant::Relevance;
  /// Distinct ground-truth explanations in order of first occurrence.
  std::vector<Explanation> candidates;
  std::optional<ConditionVocabulary> vocabulary;

  const ConditionVocabulary* vocab() const { return vocabulary ? &*vocabulary : nullptr; }
};

/// Collects the distinct ground-truth explanations of `oracle` in order.
std::vector<Explanation> distinct_explanations(const RewardOracle& oracle);

struct PoolParams {
  int perturbations = 8;
  int max_strength = 3;
};

/// Candidates of `task` plus `params.perturbations` perturbations of the
/// context's ground truth (strength uniform in [1, max_strength]),
/// deduplicated, crossed with labels {0, 1}. Explanations that the task's
/// reward cannot score (zero vectors under cosine) are dropped.
ArmPool build_arm_pool(const Task& task, std::size_t context, Rng& rng, const PoolParams& params);

enum class Strategy { Ucb, Random };
enum class Sampling { WithReplacement, WithoutReplacement };

std::string strategy_name(Strategy s);
std::string sampling_name(Sampling s);

struct EpisodeSettings {
  KernelExpr kernel = sum_kernel();
  Strategy strategy = Strategy::Ucb;
  BetaSchedule beta = BetaSchedule::log_growth(1.0, 0.2);
  long rounds = 200;
  /// Variance of the Gaussian reward noise; may be 0.
  double sigma2 = 0.01;
  /// Noise variance assumed by the GP. Defaults to sigma2, or 1e-6 when
  /// sigma2 is 0.
  std::optional<double> gp_sigma2;
  PoolParams pool;
  Sampling sampling = Sampling::WithReplacement;

  double effective_gp_sigma2() const;
};

struct RoundRecord {
  long t = 0;
  std::size_t context = 0;
  Arm chosen;
  double noise = 0.0;
  double reward = 0.0;       // f_t, noisy
  double true_reward = 0.0;  // f(x_t, ẑ_t, ŷ_t)
  double best_reward = 0.0;
  double regret = 0.0;
  double cumulative_regret = 0.0;
  bool label_correct = false;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

/// Per-round records; cumulative regret is the running sum in round order.
class RegretLedger {
 public:
  void append(RoundRecord record);
  const std::vector<RoundRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const RoundRecord& operator[](std::size_t i) const { return records_[i]; }
  double total_regret() const { return records_.empty() ? 0.0 : records_.back().cumulative_regret; }
  /// Mean instantaneous regret over rounds [first, last], 1-based inclusive.
  double mean_regret(long first, long last) const;

  friend bool operator==(const RegretLedger&, const RegretLedger&) = default;

 private:
  std::vector<RoundRecord> records_;
};

/// Runs the contextual GP-UCB loop (or the random baseline) for
/// `settings.rounds` rounds. Deterministic given `seed`. Throws ConfigError
/// when sampling without replacement exhausts the contexts.
RegretLedger run_episode(const Task& task, const EpisodeSettings& settings, std::uint64_t seed);

}  // namespace xplain
