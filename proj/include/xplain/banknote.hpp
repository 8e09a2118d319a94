#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

namespace xplain::banknote {

inline constexpr std::size_t kFeatures = 4;
inline constexpr std::size_t kCanonicalRows = 1372;

using Features = std::array<double, kFeatures>;

/// Per-feature affine map to zero mean and unit (population) variance.
struct Standardizer {
  Features mean{};
  Features scale{};

  static Standardizer fit(const std::vector<Features>& raw);
  Features apply(const Features& raw) const;
};

struct Dataset {
  std::vector<Features> raw;
  std::vector<Features> standardized;
  std::vector<int> labels;
  Standardizer transform;

  std::size_t size() const { return labels.size(); }
  std::size_t count(int label) const;
};

/// Reads the UCI "banknote authentication" format: four floats and an
/// integer class per line, comma separated, no header. Throws IngestionError
/// naming the offending line on arity or parse errors, on an empty file,
/// and when `expected_rows` is set and differs from the row count.
Dataset load_banknote(const std::filesystem::path& path,
                      std::optional<std::size_t> expected_rows = kCanonicalRows);

}  // namespace xplain::banknote
