#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "softlspi/bench.hpp"
#include "softlspi/errors.hpp"

namespace softlspi {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 250.0;  // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_chart(const SweepTable& table, const std::string& title) {
  if (table.empty()) throw ConfigError("render_chart: empty table");
  const std::vector<SummaryRow> summary = summarize(table);

  std::map<std::string, std::vector<const SummaryRow*>> series;
  std::vector<std::string> order;
  for (const SummaryRow& row : summary) {
    const std::string label = series_label(row);
    if (!series.contains(label)) order.push_back(label);
    series[label].push_back(&row);
  }

  std::set<double> gammas;
  for (const SummaryRow& row : summary) gammas.insert(row.gamma);
  double x_lo = *gammas.begin(), x_hi = *gammas.rbegin();
  if (x_hi - x_lo < 1e-9) {
    x_lo -= 0.05;
    x_hi += 0.05;
  } else {
    const double pad = 0.05 * (x_hi - x_lo);
    x_lo -= pad;
    x_hi += pad;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double g) { return kLeft + (g - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double s) { return kTop + (1.0 - std::clamp(s, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double s = i / 5.0;
    svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(py(s)) << "\" x2=\"" << kLeft << "\" y2=\""
        << num(py(s)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(s) + 4) << "\" text-anchor=\"end\">"
        << num(s) << "</text>\n";
  }
  for (const double g : gammas) {
    svg << "<line x1=\"" << num(px(g)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(px(g))
        << "\" y2=\"" << num(kTop + plot_h + 4) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(px(g)) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << num(g) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">discount factor gamma</text>\n";
  svg << "<text transform=\"translate(16," << num(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">fraction of successful trajectories</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    const std::string& label = order[s];
    const char* color = kPalette[s % std::size(kPalette)];
    auto rows = series[label];
    std::sort(rows.begin(), rows.end(),
              [](const SummaryRow* a, const SummaryRow* b) { return a->gamma < b->gamma; });
    svg << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    std::string points;
    for (const SummaryRow* r : rows) {
      if (r->count == 0) continue;
      points += num(px(r->gamma)) + "," + num(py(r->mean)) + " ";
    }
    if (!points.empty())
      svg << "<polyline fill=\"none\" points=\"" << points << "\"/>\n";
    for (const SummaryRow* r : rows) {
      if (r->count == 0) continue;
      const double x = px(r->gamma);
      const double lo = py(r->mean - r->std), hi = py(r->mean + r->std);
      svg << "<line class=\"errorbar\" x1=\"" << num(x) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(x)
          << "\" y2=\"" << num(hi) << "\"/>\n";
      svg << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(x + 4)
          << "\" y2=\"" << num(lo) << "\"/>\n";
      svg << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(hi) << "\" x2=\"" << num(x + 4)
          << "\" y2=\"" << num(hi) << "\"/>\n";
      svg << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(py(r->mean))
          << "\" r=\"3.5\"/>\n";
    }
    svg << "</g>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
    const double lx = kLeft + plot_w + 14;
    svg << "<g class=\"legend\"><line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(lx + 18) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/><text x=\"" << num(lx + 24) << "\" y=\"" << num(ly + 4)
        << "\" font-size=\"10\">" << escape(label) << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_chart(const SweepTable& table, const std::filesystem::path& path,
                  const std::string& title) {
  const std::string svg = render_chart(table, title);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << svg;
}

}  // namespace softlspi
