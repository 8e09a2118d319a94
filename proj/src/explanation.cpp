#include "xplain/explanation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "xplain/error.hpp"
#include "xplain/format.hpp"

namespace xplain {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double label_sign(const Arm& truth, const Arm& predicted) {
  return truth.label == predicted.label ? 1.0 : -1.0;
}

std::vector<int> active_features(const Relevance& r) {
  std::vector<int> out;
  for (std::size_t i = 0; i < r.mask.size(); ++i) {
    if (r.mask[i] != 0) out.push_back(static_cast<int>(i));
  }
  return out;
}

Eigen::VectorXd dense_vector(const Explanation& e, const char* who) {
  if (const auto* r = std::get_if<Relevance>(&e)) return vectorize(*r);
  if (const auto* w = std::get_if<Importance>(&e)) return vectorize(*w);
  throw InputError(std::string(who) + ": expected a relevance or importance explanation");
}

std::vector<int> distinct_positions(std::size_t d, int count, Rng& rng) {
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(count), d);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

// ---------------------------------------------------------------------------

double quantize_threshold(double value) {
  if (!std::isfinite(value)) throw InputError("condition threshold must be finite");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  const double q = std::strtod(buf, nullptr);
  return q == 0.0 ? 0.0 : q;
}

Condition::Condition(int feature_, double threshold_, Direction direction_)
    : feature(feature_), threshold(quantize_threshold(threshold_)), direction(direction_) {
  if (feature < 0) throw InputError("condition feature index must be nonnegative");
}

bool Condition::holds(std::span<const double> x) const {
  if (static_cast<std::size_t>(feature) >= x.size()) {
    throw InputError("condition feature index out of range");
  }
  const double v = x[static_cast<std::size_t>(feature)];
  return direction == Direction::LessEqual ? v <= threshold : v > threshold;
}

Variant variant_of(const Explanation& e) { return static_cast<Variant>(e.index()); }

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Relevance: return "relevance";
    case Variant::Importance: return "importance";
    case Variant::Ranking: return "ranking";
    case Variant::Trace: return "trace";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (auto v : {Variant::Relevance, Variant::Importance, Variant::Ranking, Variant::Trace}) {
    if (variant_name(v) == name) return v;
  }
  throw InputError("unknown explanation variant '" + name + "'");
}

void validate(const Explanation& e) {
  std::visit(overloaded{
                 [](const Relevance& r) {
                   for (int b : r.mask) {
                     if (b != 0 && b != 1) throw InputError("relevance entries must be 0 or 1");
                   }
                 },
                 [](const Importance& w) {
                   for (double v : w.weights) {
                     if (!(v >= -1.0 && v <= 1.0)) {
                       throw InputError("importance entries must lie in [-1, 1]");
                     }
                   }
                 },
                 [](const Ranking& r) {
                   std::vector<int> sorted = r.positions;
                   std::sort(sorted.begin(), sorted.end());
                   for (std::size_t i = 0; i < sorted.size(); ++i) {
                     if (sorted[i] != static_cast<int>(i)) {
                       throw InputError("ranking must be a permutation of 0..d-1");
                     }
                   }
                 },
                 [](const Trace& t) {
                   std::set<Condition> seen(t.conditions.begin(), t.conditions.end());
                   if (seen.size() != t.conditions.size()) {
                     throw InputError("trace conditions must be unique");
                   }
                 },
             },
             e);
}

ConditionVocabulary::ConditionVocabulary(std::vector<Condition> conditions)
    : conditions_(std::move(conditions)) {
  for (std::size_t i = 0; i < conditions_.size(); ++i) {
    if (!index_.emplace(conditions_[i], i).second) {
      throw InputError("duplicate condition in vocabulary");
    }
  }
}

std::size_t ConditionVocabulary::index_of(const Condition& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) throw InputError("trace condition outside the vocabulary");
  return it->second;
}

Eigen::VectorXd vectorize(const Explanation& e, const ConditionVocabulary* vocabulary) {
  return std::visit(
      overloaded{
          [](const Relevance& r) -> Eigen::VectorXd {
            Eigen::VectorXd v(static_cast<Eigen::Index>(r.mask.size()));
            for (std::size_t i = 0; i < r.mask.size(); ++i) v[static_cast<Eigen::Index>(i)] = r.mask[i];
            return v;
          },
          [](const Importance& w) -> Eigen::VectorXd {
            return Eigen::Map<const Eigen::VectorXd>(w.weights.data(),
                                                     static_cast<Eigen::Index>(w.weights.size()));
          },
          [](const Ranking& r) -> Eigen::VectorXd {
            const auto d = static_cast<Eigen::Index>(r.positions.size());
            Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
            if (d < 2) return v;
            for (Eigen::Index i = 0; i < d; ++i) {
              v[i] = static_cast<double>(r.positions[static_cast<std::size_t>(i)]) /
                     static_cast<double>(d - 1);
            }
            return v;
          },
          [vocabulary](const Trace& t) -> Eigen::VectorXd {
            if (vocabulary == nullptr) {
              if (t.conditions.empty()) return Eigen::VectorXd{};
              throw InputError("vectorizing a trace needs a condition vocabulary");
            }
            Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary->size()));
            for (const auto& c : t.conditions) {
              v[static_cast<Eigen::Index>(vocabulary->index_of(c))] = 1.0;
            }
            return v;
          },
      },
      e);
}

Explanation perturb(const Explanation& e, Rng& rng, int strength,
                    const ConditionVocabulary* vocabulary) {
  if (strength <= 0) return e;
  return std::visit(
      overloaded{
          [&](const Relevance& r) -> Explanation {
            Relevance out = r;
            for (int i : distinct_positions(out.mask.size(), strength, rng)) {
              out.mask[static_cast<std::size_t>(i)] ^= 1;
            }
            return out;
          },
          [&](const Importance& w) -> Explanation {
            Importance out = w;
            for (int i : distinct_positions(out.weights.size(), strength, rng)) {
              auto& v = out.weights[static_cast<std::size_t>(i)];
              std::vector<double> options;
              for (double c : {-1.0, 0.0, 1.0}) {
                if (c != v) options.push_back(c);
              }
              std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
              v = options[pick(rng)];
            }
            return out;
          },
          [&](const Ranking& r) -> Explanation {
            Ranking out = r;
            const auto d = out.positions.size();
            if (d < 2) return out;
            std::uniform_int_distribution<int> pick(0, static_cast<int>(d) - 2);
            for (int s = 0; s < strength; ++s) {
              const int p = pick(rng);
              // swap the features holding ranks p and p+1
              auto a = std::find(out.positions.begin(), out.positions.end(), p);
              auto b = std::find(out.positions.begin(), out.positions.end(), p + 1);
              std::iter_swap(a, b);
            }
            return out;
          },
          [&](const Trace& t) -> Explanation {
            Trace out = t;
            if (vocabulary == nullptr) throw InputError("perturbing a trace needs a vocabulary");
            for (int s = 0; s < strength; ++s) {
              std::vector<Condition> spare;
              for (const auto& c : vocabulary->conditions()) {
                if (std::find(out.conditions.begin(), out.conditions.end(), c) ==
                    out.conditions.end()) {
                  spare.push_back(c);
                }
              }
              if (spare.empty()) break;
              std::uniform_int_distribution<std::size_t> pick_new(0, spare.size() - 1);
              const Condition replacement = spare[pick_new(rng)];
              if (out.conditions.empty()) {
                out.conditions.push_back(replacement);
              } else {
                std::uniform_int_distribution<std::size_t> pick_slot(0, out.conditions.size() - 1);
                out.conditions[pick_slot(rng)] = replacement;
              }
            }
            return out;
          },
      },
      e);
}

double kendall_similarity(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("kendall: rankings differ in length");
  if (a.size() < 2) throw InputError("kendall: need at least two items");
  {
    std::vector<int> sa(a.begin(), a.end());
    std::vector<int> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb || std::adjacent_find(sa.begin(), sa.end()) != sa.end()) {
      throw InputError("kendall: inputs are not permutations of the same items");
    }
  }
  const std::size_t n = a.size();
  std::size_t discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((a[i] < a[j]) != (b[i] < b[j])) ++discordant;
    }
  }
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  return 1.0 - static_cast<double>(discordant) / pairs;
}

std::size_t lcs_length(std::span<const Condition> a, std::span<const Condition> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ---------------------------------------------------------------------------

std::string reward_name(RewardKind k) {
  switch (k) {
    case RewardKind::Cosine: return "cosine";
    case RewardKind::Jaccard: return "jaccard";
    case RewardKind::Kendall: return "kendall";
    case RewardKind::Lcs: return "lcs";
    case RewardKind::Hamming: return "hamming";
  }
  return "?";
}

RewardKind parse_reward(const std::string& name) {
  for (auto k : {RewardKind::Cosine, RewardKind::Jaccard, RewardKind::Kendall, RewardKind::Lcs,
                 RewardKind::Hamming}) {
    if (reward_name(k) == name) return k;
  }
  throw InputError("unknown reward kind '" + name + "'");
}

double reward_cosine_signed(const Arm& truth, const Arm& predicted) {
  const Eigen::VectorXd u = dense_vector(truth.explanation, "cosine reward");
  const Eigen::VectorXd v = dense_vector(predicted.explanation, "cosine reward");
  if (u.size() != v.size()) throw InputError("cosine reward: dimension mismatch");
  const double nu = u.squaredNorm();
  const double nv = v.squaredNorm();
  if (nu == 0.0 || nv == 0.0) throw InputError("cosine reward: zero-norm explanation");
  const double cosine = u == v ? 1.0 : std::clamp(u.dot(v) / std::sqrt(nu * nv), -1.0, 1.0);
  return cosine * label_sign(truth, predicted);
}

double reward_jaccard_signed(const Arm& truth, const Arm& predicted) {
  const double sim = std::visit(
      overloaded{
          [](const Relevance& a, const Relevance& b) {
            return jaccard(active_features(a), active_features(b));
          },
          [](const Trace& a, const Trace& b) { return jaccard(a.conditions, b.conditions); },
          [](const auto&, const auto&) -> double {
            throw InputError("jaccard reward: needs two relevance or two trace explanations");
          },
      },
      truth.explanation, predicted.explanation);
  return sim * label_sign(truth, predicted);
}

double reward_kendall_signed(const Arm& truth, const Arm& predicted) {
  const auto* a = std::get_if<Ranking>(&truth.explanation);
  const auto* b = std::get_if<Ranking>(&predicted.explanation);
  if (a == nullptr || b == nullptr) throw InputError("kendall reward: needs rankings");
  return kendall_similarity(a->positions, b->positions) * label_sign(truth, predicted);
}

double reward_lcs_signed(const Arm& truth, const Arm& predicted) {
  const auto* a = std::get_if<Trace>(&truth.explanation);
  const auto* b = std::get_if<Trace>(&predicted.explanation);
  if (a == nullptr || b == nullptr) throw InputError("lcs reward: needs traces");
  if (a->conditions.empty()) throw InputError("lcs reward: empty ground-truth trace");
  const double ratio = static_cast<double>(lcs_length(a->conditions, b->conditions)) /
                       static_cast<double>(a->conditions.size());
  return ratio * label_sign(truth, predicted);
}

double reward_hamming_signed(const Arm& truth, const Arm& predicted) {
  const auto* a = std::get_if<Relevance>(&truth.explanation);
  const auto* b = std::get_if<Relevance>(&predicted.explanation);
  if (a == nullptr || b == nullptr) throw InputError("hamming reward: needs relevance masks");
  if (a->mask.size() != b->mask.size() || a->mask.empty()) {
    throw InputError("hamming reward: dimension mismatch");
  }
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a->mask.size(); ++i) differing += a->mask[i] != b->mask[i];
  const double sim = 1.0 - static_cast<double>(differing) / static_cast<double>(a->mask.size());
  return sim * label_sign(truth, predicted);
}

double signed_reward(RewardKind kind, const Arm& truth, const Arm& predicted) {
  switch (kind) {
    case RewardKind::Cosine: return reward_cosine_signed(truth, predicted);
    case RewardKind::Jaccard: return reward_jaccard_signed(truth, predicted);
    case RewardKind::Kendall: return reward_kendall_signed(truth, predicted);
    case RewardKind::Lcs: return reward_lcs_signed(truth, predicted);
    case RewardKind::Hamming: return reward_hamming_signed(truth, predicted);
  }
  throw InputError("unknown reward kind");
}

// ---------------------------------------------------------------------------
// Ground-truth serialization

namespace {

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
  if (items.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::string payload(const Explanation& e) {
  return std::visit(
      overloaded{
          [](const Relevance& r) { return join(r.mask, [](int v) { return std::to_string(v); }); },
          [](const Importance& w) { return join(w.weights, [](double v) { return format_double(v); }); },
          [](const Ranking& r) { return join(r.positions, [](int v) { return std::to_string(v); }); },
          [](const Trace& t) {
            return join(t.conditions, [](const Condition& c) {
              return std::to_string(c.feature) + ":" + format_double(c.threshold) + ":" +
                     (c.direction == Direction::LessEqual ? "le" : "gt");
            });
          },
      },
      e);
}

Explanation parse_payload(Variant v, std::string_view text) {
  std::vector<std::string_view> items;
  if (text != "-") items = split(text, ',');
  switch (v) {
    case Variant::Relevance: {
      Relevance r;
      for (auto s : items) r.mask.push_back(static_cast<int>(parse_long(s, "relevance entry")));
      return r;
    }
    case Variant::Importance: {
      Importance w;
      for (auto s : items) w.weights.push_back(parse_double(s, "importance entry"));
      return w;
    }
    case Variant::Ranking: {
      Ranking r;
      for (auto s : items) r.positions.push_back(static_cast<int>(parse_long(s, "rank")));
      return r;
    }
    case Variant::Trace: {
      Trace t;
      for (auto s : items) {
        const auto parts = split(s, ':');
        if (parts.size() != 3 || (parts[2] != "le" && parts[2] != "gt")) {
          throw InputError("malformed trace condition '" + std::string(s) + "'");
        }
        t.conditions.emplace_back(static_cast<int>(parse_long(parts[0], "feature")),
                                  parse_double(parts[1], "threshold"),
                                  parts[2] == "le" ? Direction::LessEqual : Direction::Greater);
      }
      return t;
    }
  }
  throw InputError("unknown variant");
}

}  // namespace

void write_ground_truth(std::ostream& out, std::span<const Arm> truth) {
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i << ' ' << truth[i].label << ' ' << variant_name(variant_of(truth[i].explanation))
        << ' ' << payload(truth[i].explanation) << '\n';
  }
}

std::vector<Arm> read_ground_truth(std::istream& in) {
  std::vector<Arm> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::size_t id = 0;
    int label = 0;
    std::string variant, body;
    if (!(fields >> id >> label >> variant >> body) || id != out.size()) {
      throw InputError("ground truth line " + std::to_string(lineno) + ": malformed record");
    }
    Arm arm{parse_payload(parse_variant(variant), body), label};
    validate(arm.explanation);
    out.push_back(std::move(arm));
  }
  return out;
}

}  // namespace xplain
