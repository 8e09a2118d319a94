#include "xplain/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "xplain/error.hpp"
#include "xplain/format.hpp"

namespace xplain {

// ---------------------------------------------------------------------------
// BetaSchedule

BetaSchedule BetaSchedule::constant(double beta) {
  if (!(beta >= 0.0)) throw InputError("constant beta must be nonnegative");
  BetaSchedule s;
  s.kind_ = Kind::Constant;
  s.a_ = beta;
  s.b_ = 0.0;
  return s;
}

BetaSchedule BetaSchedule::log_growth(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw InputError("log-growth beta needs a, b >= 0");
  BetaSchedule s;
  s.kind_ = Kind::LogGrowth;
  s.a_ = a;
  s.b_ = b;
  return s;
}

BetaSchedule BetaSchedule::theorem(double omega, double delta, std::vector<double> gamma) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("theorem beta needs delta in (0, 1)");
  if (!std::isfinite(omega)) throw InputError("theorem beta needs a finite omega");
  for (double g : gamma) {
    if (!(g >= 0.0)) throw InputError("theorem beta needs gamma_t >= 0");
  }
  BetaSchedule s;
  s.kind_ = Kind::Theorem;
  s.a_ = omega;
  s.b_ = delta;
  s.gamma_ = std::move(gamma);
  return s;
}

double BetaSchedule::value(double t) const {
  if (!(t >= 1.0)) throw InputError("beta schedule: t must be >= 1");
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::LogGrowth: return a_ + b_ * std::log(1.0 + t);
    case Kind::Theorem: {
      double gamma = 0.0;
      if (!gamma_.empty()) {
        const auto idx = std::min(static_cast<std::size_t>(t) - 1, gamma_.size() - 1);
        gamma = gamma_[idx];
      }
      const double l = std::max(0.0, std::log(t / b_));
      return 2.0 * a_ * a_ + 300.0 * gamma * l * l * l;
    }
  }
  return 0.0;
}

std::string BetaSchedule::describe() const {
  switch (kind_) {
    case Kind::Constant: return "constant " + format_double(a_);
    case Kind::LogGrowth: return "log " + format_double(a_) + " " + format_double(b_);
    case Kind::Theorem: {
      std::string s = "theorem " + format_double(a_) + " " + format_double(b_);
      for (double g : gamma_) s += " " + format_double(g);
      return s;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Arms

ArmPool::ArmPool(std::vector<Arm> arms) : arms_(std::move(arms)) {
  if (arms_.empty()) throw InputError("arm pool must be nonempty");
  const auto v = variant_of(arms_.front().explanation);
  for (const auto& a : arms_) {
    if (variant_of(a.explanation) != v) throw InputError("arm pool mixes explanation variants");
    if (a.label != 0 && a.label != 1) throw InputError("arm labels must be 0 or 1");
  }
}

Selection select_arm_ucb(const GpPosterior& gp, std::span<const Triple> arm_triples, double beta) {
  if (arm_triples.empty()) throw InputError("select_arm_ucb: empty pool");
  if (!(beta >= 0.0)) throw InputError("select_arm_ucb: beta must be nonnegative");
  const double scale = std::sqrt(beta);
  Selection best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < arm_triples.size(); ++i) {
    const auto p = gp.predict(arm_triples[i]);
    const double score = p.mean + scale * std::sqrt(p.variance);
    if (score > best.score) best = {i, score};
  }
  return best;
}

Selection select_arm_ucb(const GpPosterior& gp, const Eigen::VectorXd& context,
                         const ArmPool& pool, double beta, const ConditionVocabulary* vocabulary) {
  std::vector<Triple> triples;
  triples.reserve(pool.size());
  for (const auto& arm : pool) triples.push_back(make_triple(context, arm.explanation, arm.label, vocabulary));
  return select_arm_ucb(gp, triples, beta);
}

std::size_t select_arm_random(const ArmPool& pool, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pick(rng);
}

double instantaneous_regret(const RewardOracle& oracle, std::size_t context, const ArmPool& pool,
                            std::size_t chosen) {
  if (chosen >= pool.size()) throw InputError("instantaneous_regret: chosen arm not in pool");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& arm : pool) best = std::max(best, oracle(context, arm));
  return best - oracle(context, pool[chosen]);
}

// ---------------------------------------------------------------------------
// Pools

std::vector<Explanation> distinct_explanations(const RewardOracle& oracle) {
  std::vector<Explanation> out;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    const auto& z = oracle.truth(i).explanation;
    if (std::find(out.begin(), out.end(), z) == out.end()) out.push_back(z);
  }
  return out;
}

namespace {

bool scorable(RewardKind kind, const Explanation& e) {
  if (kind != RewardKind::Cosine) return true;
  if (const auto* r = std::get_if<Relevance>(&e)) {
    return std::any_of(r->mask.begin(), r->mask.end(), [](int b) { return b != 0; });
  }
  if (const auto* w = std::get_if<Importance>(&e)) {
    return std::any_of(w->weights.begin(), w->weights.end(), [](double v) { return v != 0.0; });
  }
  return false;
}

}  // namespace

ArmPool build_arm_pool(const Task& task, std::size_t context, Rng& rng, const PoolParams& params) {
  if (params.perturbations < 0 || params.max_strength < 1) {
    throw InputError("pool parameters: perturbations >= 0 and max_strength >= 1 required");
  }
  const RewardKind kind = task.oracle.kind();
  std::vector<Explanation> explanations;
  for (const auto& z : task.candidates) {
    if (scorable(kind, z)) explanations.push_back(z);
  }
  const auto& truth = task.oracle.truth(context).explanation;
  std::uniform_int_distribution<int> strength(1, params.max_strength);
  for (int i = 0; i < params.perturbations; ++i) {
    Explanation z = perturb(truth, rng, strength(rng), task.vocab());
    if (!scorable(kind, z)) continue;
    if (std::find(explanations.begin(), explanations.end(), z) == explanations.end()) {
      explanations.push_back(std::move(z));
    }
  }
  std::vector<Arm> arms;
  arms.reserve(2 * explanations.size());
  for (auto& z : explanations) {
    arms.push_back({z, 0});
    arms.push_back({std::move(z), 1});
  }
  return ArmPool(std::move(arms));
}

// ---------------------------------------------------------------------------
// Ledger and episodes

std::string strategy_name(Strategy s) { return s == Strategy::Ucb ? "ucb" : "random"; }

std::string sampling_name(Sampling s) {
  return s == Sampling::WithReplacement ? "with-replacement" : "without-replacement";
}

double EpisodeSettings::effective_gp_sigma2() const {
  if (gp_sigma2) return *gp_sigma2;
  return sigma2 > 0.0 ? sigma2 : 1e-6;
}

void RegretLedger::append(RoundRecord record) {
  if (record.regret < 0.0) throw InternalError("negative instantaneous regret");
  record.cumulative_regret = total_regret() + record.regret;
  records_.push_back(std::move(record));
}

double RegretLedger::mean_regret(long first, long last) const {
  if (first < 1 || last < first || static_cast<std::size_t>(last) > records_.size()) {
    throw InputError("mean_regret: round range out of bounds");
  }
  double sum = 0.0;
  for (long t = first; t <= last; ++t) sum += records_[static_cast<std::size_t>(t - 1)].regret;
  return sum / static_cast<double>(last - first + 1);
}

namespace {

// Independent generator per purpose so that UCB and Random episodes with the
// same seed see the same contexts, pools and noise.
Rng stream(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose};
  return Rng(seq);
}

}  // namespace

RegretLedger run_episode(const Task& task, const EpisodeSettings& settings, std::uint64_t seed) {
  if (settings.rounds < 1) throw ConfigError("rounds", "must be at least 1");
  if (!(settings.sigma2 >= 0.0)) throw ConfigError("sigma2", "must be nonnegative");
  if (task.contexts.empty() || task.contexts.size() != task.oracle.size()) {
    throw InputError("task: contexts and ground truth must be nonempty and aligned");
  }

  Rng context_rng = stream(seed, 1);
  Rng pool_rng = stream(seed, 2);
  Rng noise_rng = stream(seed, 3);
  Rng choice_rng = stream(seed, 4);

  const auto rounds = static_cast<std::size_t>(settings.rounds);
  std::vector<std::size_t> order;
  if (settings.sampling == Sampling::WithoutReplacement) {
    if (rounds > task.contexts.size()) {
      throw ConfigError("rounds", std::to_string(rounds) + " rounds exhaust the " +
                                      std::to_string(task.contexts.size()) +
                                      " contexts available without replacement");
    }
    order.resize(task.contexts.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), context_rng);
    order.resize(rounds);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, task.contexts.size() - 1);
    order.reserve(rounds);
    for (std::size_t t = 0; t < rounds; ++t) order.push_back(pick(context_rng));
  }

  const double noise_sd = std::sqrt(settings.sigma2);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  GpPosterior gp(settings.kernel, settings.effective_gp_sigma2());
  RegretLedger ledger;
  std::vector<Triple> arm_triples;
  std::vector<double> truths;

  for (std::size_t t = 1; t <= rounds; ++t) {
    const std::size_t ctx = order[t - 1];
    const ArmPool pool = build_arm_pool(task, ctx, pool_rng, settings.pool);

    truths.clear();
    for (const auto& arm : pool) truths.push_back(task.oracle(ctx, arm));
    const double best = *std::max_element(truths.begin(), truths.end());

    std::size_t chosen = 0;
    if (settings.strategy == Strategy::Ucb) {
      arm_triples.clear();
      for (const auto& arm : pool) {
        arm_triples.push_back(make_triple(task.contexts[ctx], arm.explanation, arm.label, task.vocab()));
      }
      chosen = select_arm_ucb(gp, arm_triples, settings.beta.value(static_cast<double>(t))).index;
    } else {
      chosen = select_arm_random(pool, choice_rng);
    }

    RoundRecord rec;
    rec.t = static_cast<long>(t);
    rec.context = ctx;
    rec.chosen = pool[chosen];
    rec.noise = noise_sd * standard_normal(noise_rng);
    rec.true_reward = truths[chosen];
    rec.reward = rec.true_reward + rec.noise;
    rec.best_reward = best;
    rec.regret = best - rec.true_reward;
    rec.label_correct = rec.chosen.label == task.oracle.truth(ctx).label;

    if (settings.strategy == Strategy::Ucb) {
      gp = std::move(gp).append_observation(arm_triples[chosen], rec.reward);
    }
    ledger.append(std::move(rec));
  }
  return ledger;
}

}  // namespace xplain
