#include "breathfair/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace breathfair {

std::string xml_escape(const std::string& text)
{
   std::string out;
   for (char c : text) {
      switch (c) {
      case '&':
         out += "&amp;";
         break;
      case '<':
         out += "&lt;";
         break;
      case '>':
         out += "&gt;";
         break;
      case '"':
         out += "&quot;";
         break;
      default:
         out += c;
      }
   }
   return out;
}

namespace {

std::string num(double v)
{
   char buf[32];
   std::snprintf(buf, sizeof buf, "%.2f", v);
   return buf;
}

std::string colour(const ChartBar& b)
{
   if (b.sex == "female") return "#c0392b";
   if (b.sex == "male") return "#2e5d9f";
   return "#555555";
}

constexpr double kPanelWidth = 260.0;
constexpr double kPanelHeight = 220.0;
constexpr double kMarginTop = 56.0;
constexpr double kMarginLeft = 48.0;
constexpr double kPlotTop = 28.0;
constexpr double kPlotBottom = 40.0;

} // namespace

std::string render_bar_chart(const std::string& title, const std::vector<ChartPanel>& panels)
{
   const double width = kMarginLeft + kPanelWidth * static_cast<double>(std::max<std::size_t>(1, panels.size())) + 16.0;
   const double height = kMarginTop + kPanelHeight + 40.0;
   std::ostringstream svg;
   svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"#ffffff\"/>\n"
       << "<text x=\"" << num(width / 2) << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" << xml_escape(title)
       << "</text>\n";

   for (std::size_t p = 0; p < panels.size(); ++p) {
      const auto& panel = panels[p];
      const double x0 = kMarginLeft + kPanelWidth * static_cast<double>(p);
      const double y0 = kMarginTop;
      const double plot_h = kPanelHeight - kPlotTop - kPlotBottom;
      const double base = y0 + kPlotTop + plot_h;

      double top = 0.0;
      for (const auto& b : panel.bars) top = std::max(top, b.value + b.error);
      top = top > 0.0 ? std::ceil(top * 10.0) / 10.0 : 1.0;
      const auto y_of = [&](double v) { return base - plot_h * std::clamp(v / top, 0.0, 1.0); };

      svg << "<g class=\"panel\" data-title=\"" << xml_escape(panel.title) << "\">\n"
          << "<text x=\"" << num(x0 + kPanelWidth / 2 - 20) << "\" y=\"" << num(y0 + 14) << "\" font-size=\"13\" text-anchor=\"middle\">"
          << xml_escape(panel.title) << "</text>\n"
          << "<line x1=\"" << num(x0) << "\" y1=\"" << num(base) << "\" x2=\"" << num(x0 + kPanelWidth - 40) << "\" y2=\""
          << num(base) << "\" stroke=\"#000000\"/>\n"
          << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0 + kPlotTop) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(base)
          << "\" stroke=\"#000000\"/>\n";
      for (int t = 0; t <= 4; ++t) {
         const double v = top * t / 4.0;
         svg << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(y_of(v) + 4) << "\" font-size=\"10\" text-anchor=\"end\">"
             << num(v) << "</text>\n";
      }

      const double slot = (kPanelWidth - 60) / static_cast<double>(std::max<std::size_t>(1, panel.bars.size()));
      for (std::size_t i = 0; i < panel.bars.size(); ++i) {
         const auto& b = panel.bars[i];
         const double bx = x0 + 10 + slot * static_cast<double>(i);
         const double bw = slot * 0.7;
         const double top_y = y_of(b.value);
         const double cx = bx + bw / 2;
         svg << "<g class=\"bar-group\" data-sex=\"" << xml_escape(b.sex) << "\" data-phase=\"" << xml_escape(b.phase)
             << "\">\n"
             << "<rect x=\"" << num(bx) << "\" y=\"" << num(top_y) << "\" width=\"" << num(bw) << "\" height=\""
             << num(base - top_y) << "\" fill=\"" << colour(b) << "\" fill-opacity=\"" << (b.phase == "before" ? "0.45" : "1.0")
             << "\"/>\n"
             << "<line class=\"error-bar\" x1=\"" << num(cx) << "\" y1=\"" << num(y_of(b.value - b.error)) << "\" x2=\""
             << num(cx) << "\" y2=\"" << num(y_of(b.value + b.error)) << "\" stroke=\"#000000\"/>\n"
             << "<text x=\"" << num(cx) << "\" y=\"" << num(base + 14) << "\" font-size=\"10\" text-anchor=\"middle\">"
             << xml_escape(b.sex == "all" ? b.phase : b.sex.substr(0, 1) + " " + b.phase) << "</text>\n"
             << "<text x=\"" << num(cx) << "\" y=\"" << num(top_y - 4) << "\" font-size=\"9\" text-anchor=\"middle\">"
             << num(b.value * 100.0) << "%</text>\n"
             << "</g>\n";
      }
      svg << "</g>\n";
   }

   svg << "<text x=\"" << num(kMarginLeft) << "\" y=\"" << num(height - 10)
       << "\" font-size=\"10\">faded = before mitigation, solid = after; whiskers = +-1 standard error</text>\n"
       << "</svg>\n";
   return svg.str();
}

} // namespace breathfair
