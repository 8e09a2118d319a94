#include "xplain/colors.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "xplain/error.hpp"

namespace xplain::colors {

namespace {

template <std::size_t N>
bool all_equal(const Grid& g, const std::array<int, N>& idx) {
  return std::all_of(idx.begin(), idx.end(), [&](int p) { return g[p] == g[idx[0]]; });
}

template <std::size_t N>
bool pairwise_distinct(const Grid& g, const std::array<int, N>& idx) {
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      if (g[idx[i]] == g[idx[j]]) return false;
    }
  }
  return true;
}

Grid positive_grid(Rng& rng) {
  std::uniform_int_distribution<int> colour(0, kPalette - 1);
  Grid g{};
  for (auto& p : g) p = static_cast<std::uint8_t>(colour(rng));
  const auto corner = static_cast<std::uint8_t>(colour(rng));
  for (int p : kCorners) g[p] = corner;
  std::array<std::uint8_t, kPalette> palette{};
  for (int c = 0; c < kPalette; ++c) palette[c] = static_cast<std::uint8_t>(c);
  std::shuffle(palette.begin(), palette.end(), rng);
  for (std::size_t i = 0; i < kTopMiddle.size(); ++i) g[kTopMiddle[i]] = palette[i];
  return g;
}

Grid negative_grid(Rng& rng) {
  std::uniform_int_distribution<int> colour(0, kPalette - 1);
  while (true) {
    Grid g{};
    for (auto& p : g) p = static_cast<std::uint8_t>(colour(rng));
    if (joint_label(g) == 0) return g;
  }
}

void attach_explanations(Instance& inst, Rule rule) {
  inst.relevance = colors_relevance(rule);
  inst.importance = colors_importance(inst, rule);
}

}  // namespace

bool satisfies(const Grid& grid, Rule rule) {
  return rule == Rule::A ? all_equal(grid, kCorners) : pairwise_distinct(grid, kTopMiddle);
}

std::optional<int> joint_label(const Grid& grid) {
  const bool a = satisfies(grid, Rule::A);
  const bool b = satisfies(grid, Rule::B);
  if (a != b) return std::nullopt;
  return a ? 1 : 0;
}

std::vector<Instance> gen_colors(std::size_t n, Rule rule, std::uint64_t seed) {
  if (n == 0) throw InputError("gen_colors: n must be at least 1");
  Rng rng(seed);
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.label = i % 2 == 0 ? 1 : 0;
    inst.grid = inst.label == 1 ? positive_grid(rng) : negative_grid(rng);
    attach_explanations(inst, rule);
    out.push_back(std::move(inst));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

Eigen::VectorXd features(const Grid& grid, Encoding encoding) {
  if (encoding == Encoding::Integer) {
    Eigen::VectorXd v(kPixels);
    for (int p = 0; p < kPixels; ++p) v[p] = grid[p];
    return v;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kPixels * kPalette);
  for (int p = 0; p < kPixels; ++p) v[p * kPalette + grid[p]] = 1.0;
  return v;
}

Relevance colors_relevance(Rule rule) {
  Relevance r;
  r.mask.assign(kPixels, 0);
  if (rule == Rule::A) {
    for (int p : kCorners) r.mask[p] = 1;
  } else {
    for (int p : kTopMiddle) r.mask[p] = 1;
  }
  return r;
}

Importance colors_importance(const Instance& instance, Rule rule) {
  Importance w;
  w.weights.assign(kPixels, 0.0);
  const auto& g = instance.grid;
  auto weigh = [&](auto const& pixels, bool support_when_repeated) {
    for (int p : pixels) {
      const auto repeats = std::count_if(pixels.begin(), pixels.end(),
                                         [&](int q) { return q != p && g[q] == g[p]; });
      const bool supports_rule = support_when_repeated ? repeats > 0 : repeats == 0;
      w.weights[p] = supports_rule == (instance.label == 1) ? 1.0 : -1.0;
    }
  };
  if (rule == Rule::A) {
    weigh(kCorners, true);
  } else {
    weigh(kTopMiddle, false);
  }
  return w;
}

Rule parse_rule(char c) {
  if (c == 'A' || c == 'a') return Rule::A;
  if (c == 'B' || c == 'b') return Rule::B;
  throw InputError(std::string("unknown Colors rule '") + c + "'");
}

char rule_name(Rule rule) { return rule == Rule::A ? 'A' : 'B'; }

void write_dataset(std::ostream& out, const std::vector<Instance>& data, std::uint64_t seed,
                   Rule rule) {
  out << "# xplain-colors v1 seed=" << seed << " rule=" << rule_name(rule)
      << " palette=" << kPalette << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ' ' << data[i].label << ' ';
    for (auto p : data[i].grid) out << static_cast<int>(p);
    out << '\n';
  }
}

std::vector<Instance> read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# xplain-colors v1 ", 0) != 0) {
    throw InputError("colors dataset: missing or unsupported header");
  }
  const auto rule_at = line.find("rule=");
  if (rule_at == std::string::npos || rule_at + 5 >= line.size()) {
    throw InputError("colors dataset: header lacks rule");
  }
  const Rule rule = parse_rule(line[rule_at + 5]);

  std::vector<Instance> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t id = 0;
    Instance inst;
    std::string pixels;
    if (!(fields >> id >> inst.label >> pixels) || pixels.size() != kPixels) {
      throw InputError("colors dataset line " + std::to_string(lineno) + ": malformed");
    }
    for (int p = 0; p < kPixels; ++p) {
      const int c = pixels[p] - '0';
      if (c < 0 || c >= kPalette) {
        throw InputError("colors dataset line " + std::to_string(lineno) + ": bad colour");
      }
      inst.grid[p] = static_cast<std::uint8_t>(c);
    }
    if (joint_label(inst.grid) != inst.label) {
      throw InputError("colors dataset line " + std::to_string(lineno) +
                       ": label inconsistent with the rules");
    }
    attach_explanations(inst, rule);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace xplain::colors
