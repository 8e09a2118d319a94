#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xplain/bandit.hpp"
#include "xplain/colors.hpp"
#include "xplain/decision_tree.hpp"

namespace xplain {

enum class DatasetKind { ColorsA, ColorsB, Banknote };

std::string dataset_name(DatasetKind d);

struct NamedKernel {
  std::string name;
  std::string expression;
  KernelExpr kernel;
};

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::ColorsA;
  Variant explanation = Variant::Relevance;
  RewardKind reward = RewardKind::Cosine;
  std::vector<NamedKernel> kernels;
  std::vector<Strategy> strategies{Strategy::Ucb};
  BetaSchedule beta = BetaSchedule::log_growth(1.0, 0.2);
  long rounds = 200;
  double sigma2 = 0.01;
  std::optional<double> gp_sigma2;
  std::vector<std::uint64_t> seeds;
  PoolParams pool;
  Sampling sampling = Sampling::WithReplacement;

  std::size_t colors_pool = 100;
  colors::Encoding colors_encoding = colors::Encoding::OneHot;

  std::filesystem::path banknote_path;
  TreeParams tree;

  std::filesystem::path output = "results";
  unsigned threads = 0;  // 0: hardware concurrency

  /// Resolved configuration in the input format, defaults included.
  std::string echo() const;
  EpisodeSettings episode_settings(Strategy strategy, const KernelExpr& kernel) const;
};

/// Flat "key = value" lines, '#' comments, and an optional "[kernels]"
/// section of "NAME = expression" lines. Unknown keys, bad values, T < 1 and
/// invalid kernel expressions raise ConfigError naming the key.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Path of the Banknote CSV: the config value, else $XPLAIN_BANKNOTE, else
/// data/data_banknote_authentication.txt.
std::filesystem::path resolve_banknote_path(const ExperimentConfig& config);

/// `config.output`, re-rooted under $XPLAIN_OUTPUT_ROOT when that is set and
/// the configured path is relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

/// Builds the task for one episode. Colors regenerates its instance pool
/// from `seed`; Banknote reuses `tree` for every seed.
class TaskFactory {
 public:
  explicit TaskFactory(const ExperimentConfig& config);
  Task make(std::uint64_t seed) const;
  const std::optional<DecisionTree>& tree() const { return tree_; }

 private:
  const ExperimentConfig* config_;
  std::optional<Task> shared_;
  std::optional<DecisionTree> tree_;
};

struct CellLedgers {
  Strategy strategy = Strategy::Ucb;
  std::string kernel;
  std::vector<std::uint64_t> seeds;
  std::vector<RegretLedger> ledgers;
};

/// Mean and population standard deviation of cumulative regret per round.
struct AggregateCurve {
  std::string strategy;
  std::string kernel;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::string label() const { return strategy + ":" + kernel; }
};

AggregateCurve aggregate(std::string strategy, std::string kernel,
                         const std::vector<RegretLedger>& ledgers);

struct GridResult {
  std::vector<CellLedgers> cells;
  std::vector<AggregateCurve> curves;
  std::optional<DecisionTree> tree;
};

/// Every (strategy, kernel, seed) episode; cells run concurrently. Episode
/// failures are rethrown as std::runtime_error naming the cell and seed.
GridResult run_grid(const ExperimentConfig& config);

/// Writes ledgers/<strategy>_<kernel>_seed<k>.csv (run,t,reward,true_reward,
/// regret,cum_regret,label_correct) and aggregate.csv (t, then mean/std per
/// cell). Numbers use shortest round-trip formatting.
void emit_csv(const GridResult& result, const std::filesystem::path& directory);

/// Static SVG of cumulative regret: one polyline and ±1 std band per curve.
void emit_plot(const std::vector<AggregateCurve>& curves, const std::filesystem::path& file,
               const std::string& title);
std::string render_svg(const std::vector<AggregateCurve>& curves, const std::string& title);

std::vector<AggregateCurve> read_aggregate_csv(const std::filesystem::path& file);

/// run_grid, emit_csv, emit_plot and the echoed config into one directory.
GridResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory);

}  // namespace xplain
