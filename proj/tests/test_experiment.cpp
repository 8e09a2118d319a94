#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "xplain/error.hpp"
#include "xplain/experiment.hpp"
#include "xplain/format.hpp"

namespace xplain {
namespace {

namespace fs = std::filesystem;

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_key(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "xplain-test-experiment" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    for (auto f : split(line, ',')) row.emplace_back(f);
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentConfig small_grid(long rounds, std::string seeds) {
  auto c = parse("dataset = colors-A\nstrategy = ucb, random\nrounds = " + std::to_string(rounds) +
                 "\nseeds = " + seeds + "\ncolors.pool = 30\n");
  return c;
}

TEST(Config, MinimalDefaults) {
  const auto c = parse("dataset = colors-B\n");
  EXPECT_EQ(c.dataset, DatasetKind::ColorsB);
  EXPECT_EQ(c.explanation, Variant::Relevance);
  EXPECT_EQ(c.reward, RewardKind::Cosine);
  EXPECT_EQ(c.rounds, 200);
  EXPECT_EQ(c.sigma2, 0.01);
  ASSERT_EQ(c.seeds.size(), 10u);
  EXPECT_EQ(c.seeds.front(), 0u);
  EXPECT_EQ(c.seeds.back(), 9u);
  ASSERT_EQ(c.kernels.size(), 2u);
  EXPECT_EQ(c.kernels[0].name, "PROD");
  EXPECT_EQ(c.kernels[1].name, "SUM");
  EXPECT_EQ(c.colors_pool, 100u);
  EXPECT_EQ(c.sampling, Sampling::WithReplacement);
}

TEST(Config, BanknoteDefaultsToTraces) {
  const auto c = parse("dataset = banknote\nbanknote.depth = 6\n");
  EXPECT_EQ(c.explanation, Variant::Trace);
  EXPECT_EQ(c.reward, RewardKind::Jaccard);
  EXPECT_EQ(c.tree.max_depth, 6);
}

TEST(Config, ParsesEveryKey) {
  const auto c = parse(
      "# comment\n"
      "dataset = colors-A\n"
      "explanation = importance\n"
      "reward = cosine\n"
      "strategy = random\n"
      "beta = theorem 1 0.1 0.5 0.75\n"
      "rounds = 7\n"
      "sigma2 = 0\n"
      "gp.sigma2 = 0.001\n"
      "seeds = 3, 5-6\n"
      "pool.perturbations = 4\n"
      "pool.max_strength = 2\n"
      "sampling = without-replacement\n"
      "colors.pool = 40\n"
      "colors.encoding = integer\n"
      "output = out/x\n"
      "threads = 2\n"
      "kernels = MINE\n"
      "[kernels]\n"
      "MINE = product(rbf@instance[gamma=0.5], rbf@label)\n");
  EXPECT_EQ(c.explanation, Variant::Importance);
  EXPECT_EQ(c.strategies, std::vector<Strategy>{Strategy::Random});
  EXPECT_EQ(c.beta.kind(), BetaSchedule::Kind::Theorem);
  EXPECT_NEAR(c.beta.value(1), 2.0 + 150.0 * std::pow(std::log(10.0), 3), 1e-9);
  EXPECT_EQ(c.rounds, 7);
  EXPECT_EQ(c.gp_sigma2, 0.001);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 5, 6}));
  EXPECT_EQ(c.pool.perturbations, 4);
  EXPECT_EQ(c.pool.max_strength, 2);
  EXPECT_EQ(c.colors_encoding, colors::Encoding::Integer);
  EXPECT_EQ(c.output, fs::path("out/x"));
  EXPECT_EQ(c.threads, 2u);
  ASSERT_EQ(c.kernels.size(), 1u);
  EXPECT_EQ(c.kernels[0].kernel.to_string(), parse_kernel(c.kernels[0].expression).to_string());
  const auto s = c.episode_settings(Strategy::Ucb, c.kernels[0].kernel);
  EXPECT_EQ(s.rounds, 7);
  EXPECT_EQ(s.sampling, Sampling::WithoutReplacement);
  EXPECT_EQ(s.effective_gp_sigma2(), 0.001);
}

TEST(Config, KernelSectionDefinesTheGrid) {
  const auto c = parse("dataset = colors-A\n[kernels]\nA = rbf@instance\nB-2 = sum(rbf@instance, rbf@explanation)\n");
  ASSERT_EQ(c.kernels.size(), 2u);
  EXPECT_EQ(c.kernels[1].name, "B-2");
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(error_key("dataset = colors-A\nstrategy = ucb, randum\n"), "strategy");
  EXPECT_EQ(error_key("dataset = colors-A\nround = 5\n"), "round");
  EXPECT_EQ(error_key("dataset = colors-A\nrounds = 0\n"), "rounds");
  EXPECT_EQ(error_key("dataset = colors-A\nrounds = -3\n"), "rounds");
  EXPECT_EQ(error_key("dataset = colors-A\nrounds = 1\nrounds = 2\n"), "rounds");
  EXPECT_EQ(error_key("rounds = 5\n"), "dataset");
  EXPECT_EQ(error_key("dataset = colors-C\n"), "dataset");
  EXPECT_EQ(error_key("dataset = colors-A\nexplanation = trace\n"), "explanation");
  EXPECT_EQ(error_key("dataset = colors-A\nreward = kendall\n"), "reward");
  EXPECT_EQ(error_key("dataset = colors-A\nsigma2 = -1\n"), "sigma2");
  EXPECT_EQ(error_key("dataset = colors-A\nseeds = 1, 1\n"), "seeds");
  EXPECT_EQ(error_key("dataset = colors-A\nbeta = log 1\n"), "beta");
  EXPECT_EQ(error_key("dataset = colors-A\nkernels = NOPE\n"), "kernels");
  EXPECT_EQ(error_key("dataset = colors-A\n[kernels]\nK = product(rbf@instance, rbf@instance)\n"), "kernels.K");
  EXPECT_EQ(error_key("dataset = colors-A\n[kernels]\nK = rbf@nowhere\n"), "kernels.K");
  EXPECT_EQ(error_key("dataset = colors-A\nsampling = without-replacement\ncolors.pool = 10\nrounds = 11\n"),
            "rounds");
  EXPECT_EQ(error_key("dataset = banknote\nbanknote.depth = 12\n"), "banknote.depth");
}

TEST(Config, EchoReparsesToTheSameConfig) {
  const auto c = parse("dataset = colors-B\nexplanation = importance\nbeta = log 0.5 0.3\nseeds = 1-3\n"
                       "[kernels]\nK = product(sum(rbf@instance, rbf@explanation[gamma=0.2]), rbf@label)\n");
  const auto again = parse(c.echo());
  EXPECT_EQ(again.echo(), c.echo());
  EXPECT_EQ(again.seeds, c.seeds);
  EXPECT_EQ(again.beta.describe(), c.beta.describe());
}

TEST(Config, OutputRootOverride) {
  auto c = parse("dataset = colors-A\noutput = runs/a\n");
  ::unsetenv("XPLAIN_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir(c), fs::path("runs/a"));
  ::setenv("XPLAIN_OUTPUT_ROOT", "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/root/runs/a"));
  c.output = "/abs/path";
  EXPECT_EQ(resolve_output_dir(c), fs::path("/abs/path"));
  ::unsetenv("XPLAIN_OUTPUT_ROOT");
}

TEST(Config, BanknotePathResolution) {
  auto c = parse("dataset = banknote\n");
  ::unsetenv("XPLAIN_BANKNOTE");
  EXPECT_EQ(resolve_banknote_path(c), fs::path("data/data_banknote_authentication.txt"));
  ::setenv("XPLAIN_BANKNOTE", "/x/bn.txt", 1);
  EXPECT_EQ(resolve_banknote_path(c), fs::path("/x/bn.txt"));
  c.banknote_path = "/y/bn.txt";
  EXPECT_EQ(resolve_banknote_path(c), fs::path("/y/bn.txt"));
  ::unsetenv("XPLAIN_BANKNOTE");
}

TEST(Aggregate, MeanAndPopulationStd) {
  RegretLedger a, b;
  for (double r : {0.5, 0.5}) {
    RoundRecord rec;
    rec.regret = r;
    a.append(rec);
  }
  for (double r : {0.0, 1.0}) {
    RoundRecord rec;
    rec.regret = r;
    b.append(rec);
  }
  const auto curve = aggregate("ucb", "K", {a, b});
  EXPECT_EQ(curve.mean, (std::vector<double>{0.25, 1.0}));
  EXPECT_EQ(curve.stddev, (std::vector<double>{0.25, 0.0}));
  EXPECT_EQ(curve.label(), "ucb:K");
  EXPECT_THROW(aggregate("ucb", "K", {}), InputError);
  EXPECT_THROW(aggregate("ucb", "K", {a, RegretLedger{}}), InputError);
}

TEST(Grid, ShapeAndSingleSeedStd) {
  const auto config = small_grid(5, "4");
  const auto result = run_grid(config);
  ASSERT_EQ(result.cells.size(), 4u);
  ASSERT_EQ(result.curves.size(), 4u);
  EXPECT_EQ(result.curves[0].label(), "ucb:PROD");
  EXPECT_EQ(result.curves[3].label(), "random:SUM");
  for (const auto& curve : result.curves) {
    ASSERT_EQ(curve.mean.size(), 5u);
    for (double s : curve.stddev) EXPECT_EQ(s, 0.0);
  }
}

TEST(Grid, IndependentOfThreadCount) {
  auto config = small_grid(8, "0-3");
  config.threads = 1;
  const auto serial = run_grid(config);
  config.threads = 5;
  const auto parallel = run_grid(config);
  for (std::size_t c = 0; c < serial.cells.size(); ++c) {
    ASSERT_EQ(serial.cells[c].ledgers, parallel.cells[c].ledgers);
  }
}

TEST(Grid, RandomBaselineIgnoresKernel) {
  const auto result = run_grid(small_grid(10, "0-2"));
  EXPECT_EQ(result.cells[2].ledgers, result.cells[3].ledgers);
}

TEST(Grid, EpisodeFailureNamesCellAndSeed) {
  auto config = small_grid(5, "2");
  config.sampling = Sampling::WithoutReplacement;
  config.colors_pool = 3;
  try {
    run_grid(config);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "rounds");
    EXPECT_NE(std::string(e.what()).find("ucb:PROD seed 2"), std::string::npos) << e.what();
  }
}

TEST(Grid, MissingBanknoteFileIsIngestionError) {
  auto config = parse("dataset = banknote\nbanknote.path = /nonexistent/bn.txt\n");
  EXPECT_THROW(run_grid(config), IngestionError);
}

TEST(Csv, AggregateMatchesLedgers) {
  const auto config = small_grid(6, "0-2");
  const auto result = run_grid(config);
  const auto dir = fresh_dir("csv");
  emit_csv(result, dir);

  const auto agg = read_csv(dir / "aggregate.csv");
  ASSERT_EQ(agg.size(), 7u);
  ASSERT_EQ(agg[0].size(), 9u);
  EXPECT_EQ(agg[0][0], "t");
  EXPECT_EQ(agg[0][1], "ucb_PROD_mean");
  EXPECT_EQ(agg[0][2], "ucb_PROD_std");
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    const auto& cell = result.cells[c];
    std::vector<std::vector<std::vector<std::string>>> runs;
    for (auto seed : cell.seeds) {
      const auto name = strategy_name(cell.strategy) + "_" + cell.kernel + "_seed" + std::to_string(seed) + ".csv";
      runs.push_back(read_csv(dir / "ledgers" / name));
      const auto& rows = runs.back();
      ASSERT_EQ(rows.size(), 7u) << name;
      EXPECT_EQ(rows[0], (std::vector<std::string>{"run", "t", "reward", "true_reward", "regret", "cum_regret",
                                                   "label_correct"}));
      double running = 0;
      for (std::size_t t = 1; t < rows.size(); ++t) {
        running += parse_double(rows[t][4]);
        ASSERT_NEAR(parse_double(rows[t][5]), running, 1e-12);
      }
    }
    for (std::size_t t = 1; t <= 6; ++t) {
      double mean = 0, ss = 0;
      for (const auto& r : runs) mean += parse_double(r[t][5]);
      mean /= static_cast<double>(runs.size());
      for (const auto& r : runs) ss += std::pow(parse_double(r[t][5]) - mean, 2);
      const double sd = std::sqrt(ss / static_cast<double>(runs.size()));
      EXPECT_NEAR(parse_double(agg[t][1 + 2 * c]), mean, 1e-12);
      EXPECT_NEAR(parse_double(agg[t][2 + 2 * c]), sd, 1e-12);
    }
  }
}

TEST(Csv, SingleRunRowCountsAndByteStability) {
  auto config = small_grid(3, "0");
  config.strategies = {Strategy::Ucb};
  config.kernels.erase(config.kernels.begin() + 1, config.kernels.end());
  const auto a = fresh_dir("rows-a");
  const auto b = fresh_dir("rows-b");
  emit_csv(run_grid(config), a);
  emit_csv(run_grid(config), b);
  EXPECT_EQ(read_csv(a / "aggregate.csv").size(), 4u);
  EXPECT_EQ(read_csv(a / "ledgers" / "ucb_PROD_seed0.csv").size(), 4u);
  EXPECT_EQ(slurp(a / "aggregate.csv"), slurp(b / "aggregate.csv"));
  EXPECT_EQ(slurp(a / "ledgers" / "ucb_PROD_seed0.csv"), slurp(b / "ledgers" / "ucb_PROD_seed0.csv"));
}

TEST(Csv, ReadAggregateRoundTrip) {
  const auto result = run_grid(small_grid(4, "0-1"));
  const auto dir = fresh_dir("roundtrip");
  emit_csv(result, dir);
  const auto curves = read_aggregate_csv(dir / "aggregate.csv");
  ASSERT_EQ(curves.size(), result.curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    EXPECT_EQ(curves[i].label(), result.curves[i].label());
    EXPECT_EQ(curves[i].mean, result.curves[i].mean);
    EXPECT_EQ(curves[i].stddev, result.curves[i].stddev);
  }
  std::ofstream(dir / "bad.csv") << "t,ucb_K_mean,ucb_K_std\n1,0.5\n";
  EXPECT_THROW(read_aggregate_csv(dir / "bad.csv"), IngestionError);
  EXPECT_THROW(read_aggregate_csv(dir / "absent.csv"), IngestionError);
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

TEST(Svg, OneCurveOneLineOneBand) {
  const AggregateCurve curve{"ucb", "SUM", {0.5, 0.9, 1.2}, {0.1, 0.2, 0.1}};
  const auto svg = render_svg({curve}, "demo");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(occurrences(svg, "<polyline"), 1u);
  EXPECT_EQ(occurrences(svg, "<polygon"), 1u);
  EXPECT_NE(svg.find("ucb:SUM"), std::string::npos);
  EXPECT_NE(svg.find("demo"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, ZeroCurveIsFinite) {
  const AggregateCurve flat{"random", "PROD", {0, 0, 0}, {0, 0, 0}};
  const auto svg = render_svg({flat}, "flat");
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  EXPECT_EQ(occurrences(render_svg({flat, flat}, "two"), "<polyline"), 2u);
}

TEST(Experiment, WritesAllArtifacts) {
  const auto dir = fresh_dir("full");
  run_experiment(small_grid(4, "0"), dir);
  for (const char* f : {"config.txt", "aggregate.csv", "regret.svg"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_TRUE(fs::exists(dir / "ledgers" / "random_SUM_seed0.csv"));
  EXPECT_EQ(parse(slurp(dir / "config.txt")).rounds, 4);
}

}  // namespace
}  // namespace xplain
