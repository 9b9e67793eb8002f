#pragma once

#include <string>
#include <vector>

namespace breathfair {

struct ChartBar
{
   std::string sex;   // "female", "male" or "all"
   std::string phase; // "before" or "after"
   double value = 0.0;
   double error = 0.0;
};

struct ChartPanel
{
   std::string title;
   std::vector<ChartBar> bars;
};

/// Self-contained SVG (inline styles, no scripts): one panel per metric, bars with
/// +-error whiskers. Each bar is a <g class="bar-group" data-sex=.. data-phase=..>.
std::string render_bar_chart(const std::string& title, const std::vector<ChartPanel>& panels);

std::string xml_escape(const std::string& text);

} // namespace breathfair
