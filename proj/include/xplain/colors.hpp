#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "xplain/explanation.hpp"

namespace xplain::colors {

inline constexpr int kSide = 5;
inline constexpr int kPixels = kSide * kSide;
inline constexpr int kPalette = 4;

/// Rule A: the four corners share a colour. Rule B: the three top-middle
/// pixels are pairwise distinct.
enum class Rule { A, B };

inline constexpr std::array<int, 4> kCorners{0, 4, 20, 24};
inline constexpr std::array<int, 3> kTopMiddle{1, 2, 3};

using Grid = std::array<std::uint8_t, kPixels>;

enum class Encoding { OneHot, Integer };

struct Instance {
  Grid grid{};
  int label = 0;
  Relevance relevance;
  Importance importance;
};

bool satisfies(const Grid& grid, Rule rule);

/// 1 if both rules hold, 0 if neither, nullopt for grids the generator rejects.
std::optional<int> joint_label(const Grid& grid);

/// Exactly `n` instances, alternating positive/negative before a final
/// shuffle, so the counts differ by at most one. Positives are drawn
/// uniformly from the grids satisfying both rules; negatives by rejection
/// until neither rule holds. Explanations are attached for `rule`.
std::vector<Instance> gen_colors(std::size_t n, Rule rule, std::uint64_t seed);

/// One-hot: index 4·pixel + colour (100 entries). Integer: raw palette index.
Eigen::VectorXd features(const Grid& grid, Encoding encoding = Encoding::OneHot);

/// Rule pixels marked 1 (4 corners for A, 3 top-middle for B).
Relevance colors_relevance(Rule rule);

/// A corner supports rule A when its colour recurs in another corner; a
/// top-middle pixel supports rule B when its colour is unique among the three.
/// Rule pixels weighted +1 when they support the instance's label, -1 when
/// they conflict with it, 0 elsewhere.
Importance colors_importance(const Instance& instance, Rule rule);

// One header line "# xplain-colors v1 seed=<s> rule=<A|B> palette=4", then
// "<id> <label> <25 palette digits>" per instance.
void write_dataset(std::ostream& out, const std::vector<Instance>& data, std::uint64_t seed,
                   Rule rule);
std::vector<Instance> read_dataset(std::istream& in);

Rule parse_rule(char c);
char rule_name(Rule rule);

}  // namespace xplain::colors
