// Command-line front end: run experiment grids, generate Colors data, train
// the Banknote tree and re-plot aggregate curves.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "xplain/banknote.hpp"
#include "xplain/colors.hpp"
#include "xplain/decision_tree.hpp"
#include "xplain/error.hpp"
#include "xplain/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int cmd_run(const std::string& config_path, const std::string& output_override) {
  auto config = xplain::parse_config_file(config_path);
  if (!output_override.empty()) config.output = output_override;
  const auto dir = xplain::resolve_output_dir(config);
  std::cout << config.echo() << '\n';
  const auto result = xplain::run_experiment(config, dir);
  for (const auto& c : result.curves) {
    std::cout << c.label() << ": final cumulative regret " << c.mean.back() << " +- " << c.stddev.back()
              << '\n';
  }
  std::cout << "wrote " << dir.string() << '\n';
  return kOk;
}

int cmd_gen_colors(std::size_t n, const std::string& rule, std::uint64_t seed, const std::string& out,
                   const std::string& explanation) {
  if (rule.size() != 1) throw xplain::ConfigError("rule", "expected A or B");
  const auto r = xplain::colors::parse_rule(rule[0]);
  const auto data = xplain::colors::gen_colors(n, r, seed);
  std::ofstream file(out, std::ios::binary);
  xplain::colors::write_dataset(file, data, seed, r);
  if (!file) throw std::runtime_error("cannot write " + out);

  std::vector<xplain::Arm> truth;
  for (const auto& inst : data) {
    if (explanation == "importance") truth.push_back({inst.importance, inst.label});
    else truth.push_back({inst.relevance, inst.label});
  }
  std::ofstream gt(out + ".truth", std::ios::binary);
  xplain::write_ground_truth(gt, truth);
  if (!gt) throw std::runtime_error("cannot write " + out + ".truth");
  std::cout << "wrote " << n << " instances to " << out << '\n';
  return kOk;
}

int cmd_train_tree(const std::string& data_path, int depth, int min_leaf, const std::string& out) {
  const auto data = xplain::banknote::load_banknote(data_path, std::nullopt);
  std::vector<std::vector<double>> rows;
  for (const auto& r : data.standardized) rows.emplace_back(r.begin(), r.end());
  const auto tree = xplain::train_cart(rows, data.labels, {depth, min_leaf});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) correct += tree.predict(rows[i]) == data.labels[i];
  std::ofstream file(out, std::ios::binary);
  xplain::write_tree(file, tree);
  if (!file) throw std::runtime_error("cannot write " + out);
  std::cout << data.size() << " rows (" << data.count(0) << " class 0, " << data.count(1)
            << " class 1), depth " << tree.depth() << ", " << tree.size() << " nodes, training accuracy "
            << static_cast<double>(correct) / static_cast<double>(rows.size()) << '\n';
  return kOk;
}

int cmd_plot(const std::string& csv, const std::string& out, const std::string& title) {
  const auto curves = xplain::read_aggregate_csv(csv);
  xplain::emit_plot(curves, out, title.empty() ? std::filesystem::path(csv).stem().string() : title);
  std::cout << "wrote " << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GP contextual bandits over predictions and explanations"};
  app.require_subcommand(1);

  std::string config_path, output;
  auto* run = app.add_subcommand("run", "Run the strategy x kernel x seed grid of a config");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--output", output, "Output directory (overrides the config)");

  std::size_t n = 0;
  std::string rule, out, explanation = "relevance";
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-colors", "Generate a Colors dataset and its ground truth");
  gen->add_option("--n", n, "Number of instances")->required()->check(CLI::PositiveNumber);
  gen->add_option("--rule", rule, "Rule A or B")->required();
  gen->add_option("--seed", seed, "Random seed")->required();
  gen->add_option("--out", out, "Dataset file; ground truth goes to <out>.truth")->required();
  gen->add_option("--explanation", explanation, "relevance or importance")
      ->check(CLI::IsMember({"relevance", "importance"}));

  std::string data_path;
  int depth = 7, min_leaf = 1;
  auto* train = app.add_subcommand("train-tree", "Train the Banknote CART tree");
  train->add_option("--data", data_path, "Banknote CSV")->required();
  train->add_option("--depth", depth, "Maximum depth")->check(CLI::Range(5, 10));
  train->add_option("--min-leaf", min_leaf, "Minimum rows per leaf")->check(CLI::PositiveNumber);
  train->add_option("--out", out, "Tree file")->required();

  std::string csv, title;
  auto* plot = app.add_subcommand("plot", "Render an aggregate CSV as SVG");
  plot->add_option("aggregate", csv, "aggregate.csv from a run")->required();
  plot->add_option("--out", out, "SVG file")->required();
  plot->add_option("--title", title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, output);
    if (*gen) return cmd_gen_colors(n, rule, seed, out, explanation);
    if (*train) return cmd_train_tree(data_path, depth, min_leaf, out);
    if (*plot) return cmd_plot(csv, out, title);
  } catch (const xplain::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const xplain::InputError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
