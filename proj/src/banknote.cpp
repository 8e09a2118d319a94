#include "xplain/banknote.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "xplain/error.hpp"
#include "xplain/format.hpp"

namespace xplain::banknote {

Standardizer Standardizer::fit(const std::vector<Features>& raw) {
  if (raw.empty()) throw InputError("standardizer: no rows");
  Standardizer s;
  const double n = static_cast<double>(raw.size());
  for (std::size_t f = 0; f < kFeatures; ++f) {
    double sum = 0.0;
    for (const auto& row : raw) sum += row[f];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& row : raw) ss += (row[f] - mean) * (row[f] - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[f] = mean;
    s.scale[f] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Features Standardizer::apply(const Features& raw) const {
  Features out{};
  for (std::size_t f = 0; f < kFeatures; ++f) out[f] = (raw[f] - mean[f]) / scale[f];
  return out;
}

std::size_t Dataset::count(int label) const {
  std::size_t n = 0;
  for (int l : labels) n += l == label;
  return n;
}

Dataset load_banknote(const std::filesystem::path& path, std::optional<std::size_t> expected_rows) {
  std::ifstream in(path);
  if (!in) throw IngestionError("banknote: cannot open " + path.string());

  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != kFeatures + 1) {
      throw IngestionError(where + ": expected " + std::to_string(kFeatures + 1) + " fields, got " +
                           std::to_string(fields.size()));
    }
    Features row{};
    try {
      for (std::size_t f = 0; f < kFeatures; ++f) row[f] = parse_double(fields[f], "feature");
      const long label = parse_long(fields[kFeatures], "class");
      if (label != 0 && label != 1) throw InputError("class must be 0 or 1");
      data.labels.push_back(static_cast<int>(label));
    } catch (const InputError& e) {
      throw IngestionError(where + ": " + e.what());
    }
    data.raw.push_back(row);
  }
  if (data.raw.empty()) throw IngestionError("banknote: " + path.string() + " has no rows");
  if (expected_rows && data.raw.size() != *expected_rows) {
    throw IngestionError("banknote: " + path.string() + " has " + std::to_string(data.raw.size()) +
                         " rows, expected " + std::to_string(*expected_rows));
  }

  data.transform = Standardizer::fit(data.raw);
  data.standardized.reserve(data.raw.size());
  for (const auto& row : data.raw) data.standardized.push_back(data.transform.apply(row));
  return data;
}

}  // namespace xplain::banknote
