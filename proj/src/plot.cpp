#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "r2margin/io.hpp"

namespace r2margin {

namespace {

constexpr double kLeft = 80.0;
constexpr double kPlotWidth = 520.0;
constexpr double kPlotHeight = 300.0;
constexpr double kPanelTop = 50.0;
constexpr double kPanelHeight = 400.0;
constexpr double kLegendX = kLeft + kPlotWidth + 30.0;
constexpr double kWidth = kLegendX + 150.0;

constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"};
constexpr const char* kDashes[] = {"none", "8 4", "2 3", "10 3 2 3"};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string px(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<RejectionRecord>& records, bool restricted_axis) {
  if (records.empty()) throw InputFormatError("render_svg: no data rows to plot");

  std::map<long, std::map<std::string, std::vector<const RejectionRecord*>>> panels;
  std::set<long> sample_sizes;
  std::set<double> variances;
  double x_min = records.front().delta;
  double x_max = records.front().delta;
  for (const auto& r : records) {
    panels[r.k][r.scenario_id].push_back(&r);
    sample_sizes.insert(r.n);
    variances.insert(r.sigma2);
    x_min = std::min(x_min, r.delta);
    x_max = std::max(x_max, r.delta);
  }
  if (x_max - x_min < 1e-9) {
    x_min -= 0.005;
    x_max += 0.005;
  }
  const double y_max = restricted_axis ? 0.2 : 1.0;

  auto color_of = [&](long n) {
    const auto pos = std::distance(sample_sizes.begin(), sample_sizes.find(n));
    return kPalette[pos % std::size(kPalette)];
  };
  auto dash_of = [&](double s2) {
    const auto pos = std::distance(variances.begin(), variances.find(s2));
    return kDashes[pos % std::size(kDashes)];
  };

  const double height = kPanelTop + kPanelHeight * static_cast<double>(panels.size());
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\"" << px(height)
      << "\" viewBox=\"0 0 " << px(kWidth) << ' ' << px(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << px(kLeft) << "\" y=\"24\" font-size=\"15\">Rejection rate of H0: P² ≥ Δ"
      << (restricted_axis ? " (restricted vertical axis)" : "") << "</text>\n";

  int panel_index = 0;
  for (const auto& [k, series] : panels) {
    const double top = kPanelTop + kPanelHeight * panel_index;
    const double bottom = top + kPlotHeight;
    const double alpha = series.begin()->second.front()->alpha;
    auto x_px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * kPlotWidth; };
    auto y_px = [&](double y) { return bottom - y / y_max * kPlotHeight; };

    svg << "<g class=\"panel\" data-k=\"" << k << "\">\n";
    svg << "<text x=\"" << px(kLeft) << "\" y=\"" << px(top - 8) << "\" font-weight=\"bold\">K = " << k
        << "</text>\n";
    svg << "<clipPath id=\"clip-k" << k << "\"><rect x=\"" << px(kLeft) << "\" y=\"" << px(top) << "\" width=\""
        << px(kPlotWidth) << "\" height=\"" << px(kPlotHeight) << "\"/></clipPath>\n";
    svg << "<rect class=\"frame\" x=\"" << px(kLeft) << "\" y=\"" << px(top) << "\" width=\"" << px(kPlotWidth)
        << "\" height=\"" << px(kPlotHeight) << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int t = 0; t <= 4; ++t) {
      const double xv = x_min + (x_max - x_min) * t / 4.0;
      const double yv = y_max * t / 4.0;
      svg << "<text class=\"tick\" x=\"" << px(x_px(xv)) << "\" y=\"" << px(bottom + 16)
          << "\" text-anchor=\"middle\">" << num(std::round(xv * 1e4) / 1e4) << "</text>\n";
      svg << "<text class=\"tick\" x=\"" << px(kLeft - 6) << "\" y=\"" << px(y_px(yv) + 4)
          << "\" text-anchor=\"end\">" << num(std::round(yv * 1e4) / 1e4) << "</text>\n";
    }
    svg << "<text x=\"" << px(kLeft + kPlotWidth / 2) << "\" y=\"" << px(bottom + 36)
        << "\" text-anchor=\"middle\">Δ</text>\n";
    svg << "<text transform=\"translate(" << px(kLeft - 48) << ',' << px(top + kPlotHeight / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">rejection rate</text>\n";

    // Data coordinates are kept verbatim; only the transform depends on the axis range.
    svg << "<g clip-path=\"url(#clip-k" << k << ")\">\n";
    svg << "<g transform=\"translate(" << px(kLeft) << ',' << px(bottom) << ") scale("
        << num(kPlotWidth / (x_max - x_min)) << ',' << num(-kPlotHeight / y_max) << ") translate(" << num(-x_min)
        << ",0)\">\n";
    for (const auto& [id, rows] : series) {
      auto sorted = rows;
      std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->delta < b->delta; });
      svg << "<polyline class=\"series\" data-scenario=\"" << id << "\" fill=\"none\" stroke=\""
          << color_of(sorted.front()->n) << "\" stroke-width=\"1.6\" stroke-dasharray=\""
          << dash_of(sorted.front()->sigma2) << "\" vector-effect=\"non-scaling-stroke\" points=\"";
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        svg << (i ? " " : "") << num(sorted[i]->delta) << ',' << num(sorted[i]->rejection_rate);
      }
      svg << "\"/>\n";
    }
    svg << "</g>\n</g>\n";
    svg << "<line class=\"reference\" x1=\"" << px(kLeft) << "\" y1=\"" << px(y_px(alpha)) << "\" x2=\""
        << px(kLeft + kPlotWidth) << "\" y2=\"" << px(y_px(alpha)) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg << "</g>\n";
    ++panel_index;
  }

  svg << "<g class=\"legend\">\n";
  double y = kPanelTop + 10;
  svg << "<text x=\"" << px(kLegendX) << "\" y=\"" << px(y) << "\" font-weight=\"bold\">N</text>\n";
  for (long n : sample_sizes) {
    y += 18;
    svg << "<line x1=\"" << px(kLegendX) << "\" y1=\"" << px(y - 4) << "\" x2=\"" << px(kLegendX + 28) << "\" y2=\""
        << px(y - 4) << "\" stroke=\"" << color_of(n) << "\" stroke-width=\"2\"/>";
    svg << "<text x=\"" << px(kLegendX + 36) << "\" y=\"" << px(y) << "\">" << n << "</text>\n";
  }
  y += 30;
  svg << "<text x=\"" << px(kLegendX) << "\" y=\"" << px(y) << "\" font-weight=\"bold\">σ²</text>\n";
  for (double s2 : variances) {
    y += 18;
    svg << "<line x1=\"" << px(kLegendX) << "\" y1=\"" << px(y - 4) << "\" x2=\"" << px(kLegendX + 28) << "\" y2=\""
        << px(y - 4) << "\" stroke=\"#333\" stroke-width=\"2\" stroke-dasharray=\"" << dash_of(s2) << "\"/>";
    svg << "<text x=\"" << px(kLegendX + 36) << "\" y=\"" << px(y) << "\">" << num(s2) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace r2margin
