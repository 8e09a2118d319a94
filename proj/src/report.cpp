#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xplain/error.hpp"
#include "xplain/experiment.hpp"
#include "xplain/format.hpp"

namespace xplain {

namespace {

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

void make_dirs(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::string column_stem(const AggregateCurve& c) { return c.strategy + "_" + c.kernel; }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Fixed two-decimal coordinates keep the SVG small and diff-friendly.
std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void emit_csv(const GridResult& result, const std::filesystem::path& directory) {
  make_dirs(directory / "ledgers");
  for (const auto& cell : result.cells) {
    for (std::size_t i = 0; i < cell.ledgers.size(); ++i) {
      std::string text = "run,t,reward,true_reward,regret,cum_regret,label_correct\n";
      for (const auto& r : cell.ledgers[i].records()) {
        text += std::to_string(cell.seeds[i]) + ',' + std::to_string(r.t) + ',' + format_double(r.reward) +
                ',' + format_double(r.true_reward) + ',' + format_double(r.regret) + ',' +
                format_double(r.cumulative_regret) + ',' + (r.label_correct ? '1' : '0') + '\n';
      }
      write_file(directory / "ledgers" /
                     (strategy_name(cell.strategy) + "_" + cell.kernel + "_seed" +
                      std::to_string(cell.seeds[i]) + ".csv"),
                 text);
    }
  }

  std::string text = "t";
  std::size_t rounds = 0;
  for (const auto& c : result.curves) {
    text += "," + column_stem(c) + "_mean," + column_stem(c) + "_std";
    rounds = std::max(rounds, c.mean.size());
  }
  text += '\n';
  for (std::size_t t = 0; t < rounds; ++t) {
    text += std::to_string(t + 1);
    for (const auto& c : result.curves) {
      if (c.mean.size() != rounds) throw InputError("emit_csv: curves differ in length");
      text += ',' + format_double(c.mean[t]) + ',' + format_double(c.stddev[t]);
    }
    text += '\n';
  }
  write_file(directory / "aggregate.csv", text);
}

std::vector<AggregateCurve> read_aggregate_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestionError("cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(file.string() + ": empty file");
  const auto header = split(line, ',');
  if (header.empty() || trim(header[0]) != "t" || header.size() % 2 != 1 || header.size() < 3) {
    throw IngestionError(file.string() + ":1: expected 't' followed by mean/std column pairs");
  }
  std::vector<AggregateCurve> curves;
  for (std::size_t i = 1; i < header.size(); i += 2) {
    const std::string mean(trim(header[i]));
    const std::string sd(trim(header[i + 1]));
    const auto stem = mean.size() > 5 ? mean.substr(0, mean.size() - 5) : std::string();
    const auto cut = stem.find('_');
    if (!mean.ends_with("_mean") || sd != stem + "_std" || cut == std::string::npos) {
      throw IngestionError(file.string() + ":1: bad column pair '" + mean + "," + sd + "'");
    }
    curves.push_back({stem.substr(0, cut), stem.substr(cut + 1), {}, {}});
  }
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    const auto where = file.string() + ":" + std::to_string(lineno);
    if (fields.size() != header.size()) throw IngestionError(where + ": wrong number of fields");
    try {
      if (parse_long(trim(fields[0]), "t") != static_cast<long>(curves.front().mean.size()) + 1) {
        throw InputError("rounds must count up from 1");
      }
      for (std::size_t c = 0; c < curves.size(); ++c) {
        curves[c].mean.push_back(parse_double(trim(fields[1 + 2 * c]), "mean"));
        curves[c].stddev.push_back(parse_double(trim(fields[2 + 2 * c]), "std"));
      }
    } catch (const InputError& e) {
      throw IngestionError(where + ": " + e.what());
    }
  }
  return curves;
}

std::string render_svg(const std::vector<AggregateCurve>& curves, const std::string& title) {
  if (curves.empty()) throw InputError("render_svg: no curves");
  constexpr double width = 760, height = 460;
  constexpr double left = 70, right = 190, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;

  std::size_t rounds = 0;
  double ymax = 0.0;
  for (const auto& c : curves) {
    if (c.mean.size() != c.stddev.size()) throw InputError("render_svg: mean/std length mismatch");
    rounds = std::max(rounds, c.mean.size());
    for (std::size_t t = 0; t < c.mean.size(); ++t) ymax = std::max(ymax, c.mean[t] + c.stddev[t]);
  }
  const double xmax = rounds > 0 ? static_cast<double>(rounds) : 1.0;
  if (!(ymax > 0.0)) ymax = 1.0;
  auto px = [&](double t) { return left + pw * t / xmax; };
  auto py = [&](double v) { return top + ph * (1.0 - std::clamp(v, 0.0, ymax) / ymax); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << coord(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";

  // Axes, ticks and gridlines.
  svg << "<g stroke=\"#333\" stroke-width=\"1\">\n"
      << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top + ph) << "\" x2=\"" << coord(left + pw)
      << "\" y2=\"" << coord(top + ph) << "\"/>\n"
      << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top) << "\" x2=\"" << coord(left)
      << "\" y2=\"" << coord(top + ph) << "\"/>\n"
      << "</g>\n<g fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double tx = xmax * i / 5.0, ty = ymax * i / 5.0;
    svg << "<text x=\"" << coord(px(tx)) << "\" y=\"" << coord(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(tx) << "</text>\n"
        << "<text x=\"" << coord(left - 8) << "\" y=\"" << coord(py(ty) + 4) << "\" text-anchor=\"end\">"
        << tick_label(ty) << "</text>\n"
        << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(py(ty)) << "\" x2=\"" << coord(left + pw)
        << "\" y2=\"" << coord(py(ty)) << "\" stroke=\"#ddd\"/>\n";
  }
  svg << "<text x=\"" << coord(left + pw / 2) << "\" y=\"" << coord(height - 10)
      << "\" text-anchor=\"middle\">round</text>\n"
      << "<text transform=\"translate(18 " << coord(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">cumulative regret</text>\n</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* colour = kPalette[i % std::size(kPalette)];
    // Cumulative regret is 0 before the first round.
    std::string upper = coord(px(0)) + "," + coord(py(0));
    std::string lower;
    std::string line = upper;
    for (std::size_t t = 0; t < c.mean.size(); ++t) {
      const double x = px(static_cast<double>(t + 1));
      upper += " " + coord(x) + "," + coord(py(c.mean[t] + c.stddev[t]));
      lower = " " + coord(x) + "," + coord(py(c.mean[t] - c.stddev[t])) + lower;
      line += " " + coord(x) + "," + coord(py(c.mean[t]));
    }
    svg << "<polygon class=\"band\" points=\"" << upper << lower << "\" fill=\"" << colour
        << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n"
        << "<polyline class=\"mean\" points=\"" << line << "\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    svg << "<line x1=\"" << coord(left + pw + 16) << "\" y1=\"" << coord(ly) << "\" x2=\""
        << coord(left + pw + 40) << "\" y2=\"" << coord(ly) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << coord(left + pw + 46) << "\" y=\"" << coord(ly + 4) << "\">"
        << xml_escape(c.label()) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<AggregateCurve>& curves, const std::filesystem::path& file,
               const std::string& title) {
  const std::string svg = render_svg(curves, title);
  if (file.has_parent_path()) make_dirs(file.parent_path());
  write_file(file, svg);
}

}  // namespace xplain
