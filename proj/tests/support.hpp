#pragma once

// Generators and reference implementations shared by the unit and acceptance
// tests. The oracles here deliberately avoid the library's solvers.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "xplain/colors.hpp"
#include "xplain/explanation.hpp"
#include "xplain/gp.hpp"
#include "xplain/kernel.hpp"

namespace xplain::testing {

inline Eigen::VectorXd random_vector(Rng& rng, int d, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = u(rng);
  return v;
}

inline int random_label(Rng& rng) { return std::uniform_int_distribution<int>(0, 1)(rng); }

inline Relevance random_relevance(Rng& rng, int d) {
  std::bernoulli_distribution bit(0.4);
  Relevance r;
  for (int i = 0; i < d; ++i) r.mask.push_back(bit(rng) ? 1 : 0);
  return r;
}

inline Importance random_importance(Rng& rng, int d) {
  std::uniform_int_distribution<int> w(-1, 1);
  Importance m;
  for (int i = 0; i < d; ++i) m.weights.push_back(w(rng));
  return m;
}

inline Ranking random_ranking(Rng& rng, int d) {
  Ranking r;
  r.positions.resize(static_cast<std::size_t>(d));
  std::iota(r.positions.begin(), r.positions.end(), 0);
  std::shuffle(r.positions.begin(), r.positions.end(), rng);
  return r;
}

/// Vocabulary of `n` distinct conditions over 4 features.
inline ConditionVocabulary condition_vocabulary(int n) {
  std::vector<Condition> c;
  for (int i = 0; i < n; ++i) {
    c.emplace_back(i % 4, 0.25 * (i / 4) - 1.0, i % 2 ? Direction::Greater : Direction::LessEqual);
  }
  return ConditionVocabulary(std::move(c));
}

/// Random subsequence of `vocab` in random order, length in [0, max_len].
inline Trace random_trace(Rng& rng, const ConditionVocabulary& vocab, int max_len) {
  auto all = vocab.conditions();
  std::shuffle(all.begin(), all.end(), rng);
  const int len = std::uniform_int_distribution<int>(0, std::min<int>(max_len, static_cast<int>(all.size())))(rng);
  Trace t;
  t.conditions.assign(all.begin(), all.begin() + len);
  return t;
}

/// Colors-like triple: one-hot grid instance, 25-pixel explanation.
inline Triple colors_triple(Rng& rng, Variant variant) {
  std::uniform_int_distribution<int> colour(0, colors::kPalette - 1);
  colors::Grid g{};
  for (auto& p : g) p = static_cast<std::uint8_t>(colour(rng));
  Explanation z = variant == Variant::Importance ? Explanation(random_importance(rng, colors::kPixels))
                                                 : Explanation(random_relevance(rng, colors::kPixels));
  return make_triple(colors::features(g), std::move(z), random_label(rng));
}

inline std::vector<Triple> colors_triples(Rng& rng, int n, Variant variant) {
  std::vector<Triple> out;
  for (int i = 0; i < n; ++i) out.push_back(colors_triple(rng, variant));
  return out;
}

/// Posterior by explicit inversion of K + σ²I (full-pivot LU), no Cholesky.
struct DenseOracle {
  KernelExpr kernel;
  std::vector<Triple> triples;
  Eigen::MatrixXd inverse;
  Eigen::VectorXd rewards;

  DenseOracle(KernelExpr k, std::vector<Triple> data, const std::vector<double>& f, double sigma2)
      : kernel(std::move(k)), triples(std::move(data)) {
    const auto n = static_cast<Eigen::Index>(triples.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(triples[i], triples[j]);
    }
    K += sigma2 * Eigen::MatrixXd::Identity(n, n);
    inverse = K.fullPivLu().inverse();
    rewards = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  }

  Eigen::VectorXd cross(const Triple& q) const {
    Eigen::VectorXd k(static_cast<Eigen::Index>(triples.size()));
    for (std::size_t i = 0; i < triples.size(); ++i) k[static_cast<Eigen::Index>(i)] = kernel(triples[i], q);
    return k;
  }
  double mean(const Triple& q) const { return cross(q).dot(inverse * rewards); }
  double variance(const Triple& q) const {
    const Eigen::VectorXd k = cross(q);
    return kernel(q, q) - k.dot(inverse * k);
  }
};

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Kendall distance between rank vectors as the number of adjacent swaps
/// bubble sort needs: list the features in `a`'s rank order, replace each by
/// its rank under `b`, then sort.
inline long discordant_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> seq(a.size());
  for (std::size_t f = 0; f < a.size(); ++f) seq[static_cast<std::size_t>(a[f])] = b[f];
  long swaps = 0;
  for (std::size_t pass = 0; pass < seq.size(); ++pass) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      if (seq[i] > seq[i + 1]) {
        std::swap(seq[i], seq[i + 1]);
        ++swaps;
      }
    }
  }
  return swaps;
}

/// Longest common subsequence by enumerating every subsequence of `a`
/// (2^|a| masks) and testing it greedily against `b`.
inline std::size_t lcs_bruteforce(const std::vector<Condition>& a, const std::vector<Condition>& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::size_t len = 0, j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      while (j < b.size() && !(b[j] == a[i])) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

}  // namespace xplain::testing
