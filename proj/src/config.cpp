#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "xplain/error.hpp"
#include "xplain/experiment.hpp"
#include "xplain/format.hpp"

namespace xplain {

std::string dataset_name(DatasetKind d) {
  switch (d) {
    case DatasetKind::ColorsA: return "colors-A";
    case DatasetKind::ColorsB: return "colors-B";
    case DatasetKind::Banknote: return "banknote";
  }
  return "?";
}

namespace {

const std::map<std::string, std::string, std::less<>>& builtin_kernels() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"PROD", prod_kernel().to_string()},
      {"SUM", sum_kernel().to_string()},
  };
  return table;
}

std::vector<std::string> list_items(std::string_view value) {
  std::vector<std::string> out;
  for (auto item : split(value, ',')) {
    item = trim(item);
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(std::string_view value) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : list_items(value)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      const long s = parse_long(item, "seed");
      if (s < 0) throw InputError("seeds must be nonnegative");
      seeds.push_back(static_cast<std::uint64_t>(s));
      continue;
    }
    const long lo = parse_long(std::string_view(item).substr(0, dash), "seed");
    const long hi = parse_long(std::string_view(item).substr(dash + 1), "seed");
    if (lo < 0 || hi < lo) throw InputError("bad seed range '" + item + "'");
    for (long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw InputError("at least one seed is required");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw InputError("duplicate seed");
  return seeds;
}

BetaSchedule parse_beta(std::string_view value) {
  std::istringstream words{std::string(value)};
  std::string kind;
  words >> kind;
  std::vector<double> args;
  for (std::string w; words >> w;) args.push_back(parse_double(w, "beta parameter"));
  if (kind == "constant" && args.size() == 1) return BetaSchedule::constant(args[0]);
  if (kind == "log" && args.size() == 2) return BetaSchedule::log_growth(args[0], args[1]);
  if (kind == "theorem" && args.size() >= 2) {
    return BetaSchedule::theorem(args[0], args[1], {args.begin() + 2, args.end()});
  }
  throw InputError("expected 'constant <b>', 'log <a> <b>' or 'theorem <omega> <delta> [gamma...]'");
}

std::string describe_seeds(const std::vector<std::uint64_t>& seeds) {
  // Collapse consecutive runs so the echo stays readable for "0-9".
  std::string out;
  for (std::size_t i = 0; i < seeds.size();) {
    std::size_t j = i;
    while (j + 1 < seeds.size() && seeds[j + 1] == seeds[j] + 1) ++j;
    if (!out.empty()) out += ", ";
    out += std::to_string(seeds[i]);
    if (j > i) out += "-" + std::to_string(seeds[j]);
    i = j + 1;
  }
  return out;
}

bool compatible(RewardKind reward, Variant variant) {
  switch (reward) {
    case RewardKind::Cosine: return variant == Variant::Relevance || variant == Variant::Importance;
    case RewardKind::Hamming: return variant == Variant::Relevance;
    case RewardKind::Jaccard: return variant == Variant::Relevance || variant == Variant::Trace;
    case RewardKind::Lcs: return variant == Variant::Trace;
    case RewardKind::Kendall: return variant == Variant::Ranking;
  }
  return false;
}

RewardKind default_reward(Variant v) {
  switch (v) {
    case Variant::Relevance:
    case Variant::Importance: return RewardKind::Cosine;
    case Variant::Ranking: return RewardKind::Kendall;
    case Variant::Trace: return RewardKind::Jaccard;
  }
  return RewardKind::Cosine;
}

template <class F>
auto with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, std::string>> custom;
  bool in_kernels = false;

  std::string raw;
  long lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[kernels]") {
        in_kernels = true;
        continue;
      }
      throw ConfigError(std::string(line), "unknown section");
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    if (in_kernels) {
      for (const auto& [name, _] : custom) {
        if (name == key) throw ConfigError("kernels." + key, "defined twice");
      }
      custom.emplace_back(std::move(key), std::move(value));
      continue;
    }
    if (values.contains(key)) throw ConfigError(key, "given twice");
    values.emplace(std::move(key), std::move(value));
  }

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"dataset",
       [&](const std::string& v) {
         if (v == "colors-A") c.dataset = DatasetKind::ColorsA;
         else if (v == "colors-B") c.dataset = DatasetKind::ColorsB;
         else if (v == "banknote") c.dataset = DatasetKind::Banknote;
         else throw InputError("unknown dataset '" + v + "' (colors-A, colors-B, banknote)");
       }},
      {"explanation", [&](const std::string& v) { c.explanation = parse_variant(v); }},
      {"reward", [&](const std::string& v) { c.reward = parse_reward(v); }},
      {"strategy",
       [&](const std::string& v) {
         c.strategies.clear();
         for (const auto& s : list_items(v)) {
           if (s == "ucb") c.strategies.push_back(Strategy::Ucb);
           else if (s == "random") c.strategies.push_back(Strategy::Random);
           else throw InputError("unknown strategy '" + s + "' (ucb, random)");
         }
         if (c.strategies.empty()) throw InputError("at least one strategy is required");
       }},
      {"kernels", [](const std::string&) {}},  // resolved below, after [kernels]
      {"beta", [&](const std::string& v) { c.beta = parse_beta(v); }},
      {"rounds",
       [&](const std::string& v) {
         c.rounds = parse_long(v, "rounds");
         if (c.rounds < 1) throw InputError("must be at least 1");
       }},
      {"sigma2",
       [&](const std::string& v) {
         c.sigma2 = parse_double(v, "sigma2");
         if (!(c.sigma2 >= 0.0)) throw InputError("must be nonnegative");
       }},
      {"gp.sigma2",
       [&](const std::string& v) {
         c.gp_sigma2 = parse_double(v, "gp.sigma2");
         if (!(*c.gp_sigma2 > 0.0)) throw InputError("must be positive");
       }},
      {"seeds", [&](const std::string& v) { c.seeds = parse_seeds(v); }},
      {"pool.perturbations",
       [&](const std::string& v) {
         const long n = parse_long(v, "pool.perturbations");
         if (n < 0 || n > 10000) throw InputError("must be in [0, 10000]");
         c.pool.perturbations = static_cast<int>(n);
       }},
      {"pool.max_strength",
       [&](const std::string& v) {
         const long n = parse_long(v, "pool.max_strength");
         if (n < 1 || n > 100) throw InputError("must be in [1, 100]");
         c.pool.max_strength = static_cast<int>(n);
       }},
      {"sampling",
       [&](const std::string& v) {
         if (v == sampling_name(Sampling::WithReplacement)) c.sampling = Sampling::WithReplacement;
         else if (v == sampling_name(Sampling::WithoutReplacement)) c.sampling = Sampling::WithoutReplacement;
         else throw InputError("unknown sampling '" + v + "'");
       }},
      {"colors.pool",
       [&](const std::string& v) {
         const long n = parse_long(v, "colors.pool");
         if (n < 1) throw InputError("must be at least 1");
         c.colors_pool = static_cast<std::size_t>(n);
       }},
      {"colors.encoding",
       [&](const std::string& v) {
         if (v == "onehot") c.colors_encoding = colors::Encoding::OneHot;
         else if (v == "integer") c.colors_encoding = colors::Encoding::Integer;
         else throw InputError("unknown encoding '" + v + "' (onehot, integer)");
       }},
      {"banknote.path", [&](const std::string& v) { c.banknote_path = v; }},
      {"banknote.depth",
       [&](const std::string& v) {
         const long d = parse_long(v, "banknote.depth");
         if (d < 5 || d > 10) throw InputError("must be in [5, 10]");
         c.tree.max_depth = static_cast<int>(d);
       }},
      {"banknote.min_leaf",
       [&](const std::string& v) {
         const long n = parse_long(v, "banknote.min_leaf");
         if (n < 1) throw InputError("must be at least 1");
         c.tree.min_leaf = static_cast<int>(n);
       }},
      {"output",
       [&](const std::string& v) {
         if (v.empty()) throw InputError("must not be empty");
         c.output = v;
       }},
      {"threads",
       [&](const std::string& v) {
         const long n = parse_long(v, "threads");
         if (n < 0 || n > 1024) throw InputError("must be in [0, 1024]");
         c.threads = static_cast<unsigned>(n);
       }},
  };

  if (!values.contains("dataset")) throw ConfigError("dataset", "missing");
  for (const auto& [key, value] : values) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    with_key(key, [&] { it->second(value); });
  }

  const bool colors = c.dataset != DatasetKind::Banknote;
  if (!values.contains("explanation")) c.explanation = colors ? Variant::Relevance : Variant::Trace;
  if (!values.contains("reward")) c.reward = default_reward(c.explanation);
  if (colors && c.explanation != Variant::Relevance && c.explanation != Variant::Importance) {
    throw ConfigError("explanation", "colors supports relevance and importance");
  }
  if (!colors && c.explanation != Variant::Trace) {
    throw ConfigError("explanation", "banknote supports trace");
  }
  if (!compatible(c.reward, c.explanation)) {
    throw ConfigError("reward", reward_name(c.reward) + " cannot score " +
                                    variant_name(c.explanation) + " explanations");
  }
  if (c.seeds.empty()) c.seeds = parse_seeds("0-9");
  if (colors && c.sampling == Sampling::WithoutReplacement &&
      static_cast<std::size_t>(c.rounds) > c.colors_pool) {
    throw ConfigError("rounds", "exceeds colors.pool under sampling without replacement");
  }

  // Kernel list: explicit names, else every [kernels] entry, else PROD and SUM.
  std::vector<std::string> names;
  if (values.contains("kernels")) {
    names = list_items(values.at("kernels"));
    if (names.empty()) throw ConfigError("kernels", "at least one kernel is required");
  } else if (!custom.empty()) {
    for (const auto& [name, _] : custom) names.push_back(name);
  } else {
    names = {"PROD", "SUM"};
  }
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) throw ConfigError("kernels", "duplicate kernel '" + name + "'");
    const auto own = std::find_if(custom.begin(), custom.end(),
                                  [&](const auto& kv) { return kv.first == name; });
    std::string expression;
    if (own != custom.end()) {
      expression = own->second;
    } else if (const auto b = builtin_kernels().find(name); b != builtin_kernels().end()) {
      expression = b->second;
    } else {
      throw ConfigError("kernels", "unknown kernel '" + name + "'");
    }
    const std::string key = own != custom.end() ? "kernels." + name : "kernels";
    KernelExpr k = with_key(key, [&] { return parse_kernel(expression); });
    if (name.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-") !=
        std::string::npos) {
      throw ConfigError(key, "kernel names use letters, digits and '-'");
    }
    c.kernels.push_back({name, k.to_string(), std::move(k)});
  }
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config " + path.string());
  return parse_config(in);
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  out << "dataset = " << dataset_name(dataset) << '\n'
      << "explanation = " << variant_name(explanation) << '\n'
      << "reward = " << reward_name(reward) << '\n'
      << "strategy = ";
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    out << (i ? ", " : "") << strategy_name(strategies[i]);
  }
  out << '\n' << "kernels = ";
  for (std::size_t i = 0; i < kernels.size(); ++i) out << (i ? ", " : "") << kernels[i].name;
  out << '\n'
      << "beta = " << beta.describe() << '\n'
      << "rounds = " << rounds << '\n'
      << "sigma2 = " << format_double(sigma2) << '\n';
  if (gp_sigma2) out << "gp.sigma2 = " << format_double(*gp_sigma2) << '\n';
  out << "seeds = " << describe_seeds(seeds) << '\n'
      << "pool.perturbations = " << pool.perturbations << '\n'
      << "pool.max_strength = " << pool.max_strength << '\n'
      << "sampling = " << sampling_name(sampling) << '\n';
  if (dataset == DatasetKind::Banknote) {
    if (!banknote_path.empty()) out << "banknote.path = " << banknote_path.string() << '\n';
    out << "banknote.depth = " << tree.max_depth << '\n'
        << "banknote.min_leaf = " << tree.min_leaf << '\n';
  } else {
    out << "colors.pool = " << colors_pool << '\n'
        << "colors.encoding = "
        << (colors_encoding == colors::Encoding::OneHot ? "onehot" : "integer") << '\n';
  }
  out << "output = " << output.string() << '\n' << "threads = " << threads << '\n';
  out << "\n[kernels]\n";
  for (const auto& k : kernels) out << k.name << " = " << k.expression << '\n';
  return out.str();
}

EpisodeSettings ExperimentConfig::episode_settings(Strategy strategy, const KernelExpr& kernel) const {
  EpisodeSettings s;
  s.kernel = kernel;
  s.strategy = strategy;
  s.beta = beta;
  s.rounds = rounds;
  s.sigma2 = sigma2;
  s.gp_sigma2 = gp_sigma2;
  s.pool = pool;
  s.sampling = sampling;
  return s;
}

std::filesystem::path resolve_banknote_path(const ExperimentConfig& config) {
  if (!config.banknote_path.empty()) return config.banknote_path;
  if (const char* env = std::getenv("XPLAIN_BANKNOTE"); env && *env) return env;
  return "data/data_banknote_authentication.txt";
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (config.output.is_relative()) {
    if (const char* env = std::getenv("XPLAIN_OUTPUT_ROOT"); env && *env) {
      return std::filesystem::path(env) / config.output;
    }
  }
  return config.output;
}

}  // namespace xplain
