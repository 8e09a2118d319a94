#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <thread>

#include "xplain/banknote.hpp"
#include "xplain/error.hpp"
#include "xplain/experiment.hpp"

namespace xplain {

namespace {

std::uint64_t colors_seed(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xC0u};
  return Rng(seq)();
}

Task colors_task(const ExperimentConfig& config, std::uint64_t seed) {
  const auto rule = config.dataset == DatasetKind::ColorsA ? colors::Rule::A : colors::Rule::B;
  const auto data = colors::gen_colors(config.colors_pool, rule, colors_seed(seed));
  std::vector<Eigen::VectorXd> contexts;
  std::vector<Arm> truth;
  contexts.reserve(data.size());
  truth.reserve(data.size());
  for (const auto& inst : data) {
    contexts.push_back(colors::features(inst.grid, config.colors_encoding));
    if (config.explanation == Variant::Importance) {
      truth.push_back({inst.importance, inst.label});
    } else {
      truth.push_back({inst.relevance, inst.label});
    }
  }
  RewardOracle oracle(config.reward, std::move(truth));
  auto candidates = distinct_explanations(oracle);
  return Task{std::move(contexts), std::move(oracle), config.explanation, std::move(candidates), std::nullopt};
}

}  // namespace

TaskFactory::TaskFactory(const ExperimentConfig& config) : config_(&config) {
  if (config.dataset != DatasetKind::Banknote) return;

  const auto data = banknote::load_banknote(resolve_banknote_path(config));
  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (const auto& r : data.standardized) rows.emplace_back(r.begin(), r.end());
  tree_ = train_cart(rows, data.labels, config.tree);

  std::vector<Eigen::VectorXd> contexts;
  std::vector<Arm> truth;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    contexts.push_back(Eigen::Map<const Eigen::VectorXd>(rows[i].data(), static_cast<Eigen::Index>(rows[i].size())));
    truth.push_back({extract_trace(*tree_, rows[i]).trace, data.labels[i]});
  }
  RewardOracle oracle(config.reward, std::move(truth));
  auto candidates = distinct_explanations(oracle);
  shared_ = Task{std::move(contexts), std::move(oracle), Variant::Trace, std::move(candidates),
                 tree_->vocabulary()};
}

Task TaskFactory::make(std::uint64_t seed) const {
  if (shared_) return *shared_;
  return colors_task(*config_, seed);
}

AggregateCurve aggregate(std::string strategy, std::string kernel,
                         const std::vector<RegretLedger>& ledgers) {
  if (ledgers.empty()) throw InputError("aggregate: no ledgers");
  const std::size_t rounds = ledgers.front().size();
  for (const auto& l : ledgers) {
    if (l.size() != rounds) throw InputError("aggregate: ledgers differ in length");
  }
  AggregateCurve curve{std::move(strategy), std::move(kernel), {}, {}};
  curve.mean.resize(rounds);
  curve.stddev.resize(rounds);
  const double n = static_cast<double>(ledgers.size());
  for (std::size_t t = 0; t < rounds; ++t) {
    double sum = 0.0;
    for (const auto& l : ledgers) sum += l[t].cumulative_regret;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& l : ledgers) ss += (l[t].cumulative_regret - mean) * (l[t].cumulative_regret - mean);
    curve.mean[t] = mean;
    curve.stddev[t] = std::sqrt(ss / n);
  }
  return curve;
}

GridResult run_grid(const ExperimentConfig& config) {
  if (config.kernels.empty() || config.strategies.empty() || config.seeds.empty()) {
    throw ConfigError("", "grid needs at least one kernel, strategy and seed");
  }
  const TaskFactory factory(config);

  GridResult result;
  result.tree = factory.tree();
  for (auto s : config.strategies) {
    for (const auto& k : config.kernels) {
      result.cells.push_back({s, k.name, config.seeds, std::vector<RegretLedger>(config.seeds.size())});
    }
  }

  struct Job {
    std::size_t cell;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    for (std::size_t s = 0; s < config.seeds.size(); ++s) jobs.push_back({c, s});
  }
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      auto& cell = result.cells[jobs[j].cell];
      const std::size_t ki = jobs[j].cell % config.kernels.size();
      try {
        const std::uint64_t seed = config.seeds[jobs[j].seed];
        const Task task = factory.make(seed);
        cell.ledgers[jobs[j].seed] =
            run_episode(task, config.episode_settings(cell.strategy, config.kernels[ki].kernel), seed);
      } catch (...) {
        failures[j] = std::current_exception();
      }
    }
  };

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!failures[j]) continue;
    const auto& cell = result.cells[jobs[j].cell];
    const std::string where = "cell " + strategy_name(cell.strategy) + ":" + cell.kernel + " seed " +
                              std::to_string(config.seeds[jobs[j].seed]) + ": ";
    try {
      std::rethrow_exception(failures[j]);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), where + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }

  for (const auto& cell : result.cells) {
    result.curves.push_back(aggregate(strategy_name(cell.strategy), cell.kernel, cell.ledgers));
  }
  return result;
}

GridResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create " + directory.string() + ": " + ec.message());
  {
    std::ofstream out(directory / "config.txt", std::ios::binary);
    out << config.echo();
    if (!out) throw std::runtime_error("cannot write " + (directory / "config.txt").string());
  }

  GridResult result = run_grid(config);
  emit_csv(result, directory);
  emit_plot(result.curves, directory / "regret.svg",
            dataset_name(config.dataset) + " " + variant_name(config.explanation) + " (" +
                reward_name(config.reward) + ")");
  if (result.tree) {
    std::ofstream out(directory / "tree.txt", std::ios::binary);
    write_tree(out, *result.tree);
    if (!out) throw std::runtime_error("cannot write " + (directory / "tree.txt").string());
  }
  return result;
}

}  // namespace xplain
