#include "breathfair/experiment.hpp"
#include "breathfair/svg_chart.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace breathfair {

namespace {

using nlohmann::json;

void write_text(const fs::path& path, const std::string& text)
{
   std::ofstream file(path, std::ios::binary);
   if (!file) throw IoError("cannot open " + path.string() + " for writing");
   file << text;
   if (!file) throw IoError("write failed: " + path.string());
}

std::string format_value(const json& v)
{
   if (!v.is_number()) return "";
   char buf[40];
   std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
   return buf;
}

const json* find_metric(const json& list, const std::string& name)
{
   for (const auto& m : list) {
      if (m.at("metric") == name) return &m;
   }
   return nullptr;
}

ChartBar bar(const json& list, const std::string& metric, const std::string& sex, const std::string& phase)
{
   const json* m = find_metric(list, metric);
   if (!m) throw DataError("report has no aggregate for metric " + metric);
   return {sex, phase, m->at(phase).at("mean").get<double>(), m->at(phase).at("stderr").get<double>()};
}

std::vector<ChartPanel> panels_for(const json& list, const std::string& per_sex, const std::string& per_sex_title,
                                   const std::string& ratio, const std::string& ratio_title, const std::string& diff,
                                   const std::string& diff_title)
{
   ChartPanel a{per_sex_title, {}};
   for (const std::string sex : {"female", "male"}) {
      for (const std::string phase : {"before", "after"}) a.bars.push_back(bar(list, per_sex + "." + sex, sex, phase));
   }
   ChartPanel b{ratio_title, {bar(list, ratio, "all", "before"), bar(list, ratio, "all", "after")}};
   ChartPanel c{diff_title, {bar(list, diff, "all", "before"), bar(list, diff, "all", "after")}};
   return {a, b, c};
}

} // namespace

std::string metrics_csv(const json& report)
{
   std::ostringstream out;
   out << "run,constraint,phase,metric,value\n";
   const auto& constraints = report.at("config").at("constraints");
   for (const auto& run : report.at("runs")) {
      const auto idx = run.at("index").get<int>();
      for (const auto& c : constraints) {
         const auto cname = c.get<std::string>();
         const auto& after = run.at("after");
         if (!after.contains(cname)) continue;
         for (const std::string phase : {"before", "after"}) {
            const auto& snap = phase == "before" ? run.at("before") : after.at(cname);
            for (const auto& name : metric_names()) {
               out << idx << ',' << cname << ',' << phase << ',' << name << ',' << format_value(snap.at(name)) << '\n';
            }
         }
      }
   }
   return out.str();
}

void emit_outputs(const json& report, const fs::path& dir)
{
   std::error_code ec;
   fs::create_directories(dir / "figures", ec);
   if (ec) throw IoError("cannot create " + (dir / "figures").string() + ": " + ec.message());

   write_text(dir / "report.json", report.dump(2) + "\n");
   write_text(dir / "metrics.csv", metrics_csv(report));

   const auto& agg = report.at("aggregate");
   if (agg.contains("demographic_parity") && !agg.at("demographic_parity").empty()) {
      const auto panels = panels_for(agg.at("demographic_parity"), "selection_rate", "Selection rate", "dp_ratio",
                                     "Demographic parity ratio", "dp_difference", "Demographic parity difference");
      write_text(dir / "figures" / "demographic_parity.svg",
                 render_bar_chart("Demographic parity before and after mitigation", panels));
   }
   if (agg.contains("equalized_odds") && !agg.at("equalized_odds").empty()) {
      const auto panels = panels_for(agg.at("equalized_odds"), "fnr", "False negative rate", "eo_ratio",
                                     "Equalized odds ratio", "eo_difference", "Equalized odds difference");
      write_text(dir / "figures" / "equalized_odds.svg",
                 render_bar_chart("Equalized odds before and after mitigation", panels));
   }
}

} // namespace breathfair
