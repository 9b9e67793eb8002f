#include "breathfair/experiment.hpp"
#include "breathfair/svg_chart.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace bf = breathfair;
using nlohmann::json;

namespace {

std::string slurp(const bf::fs::path& p)
{
   std::ifstream f(p, std::ios::binary);
   std::stringstream ss;
   ss << f.rdbuf();
   return ss.str();
}

// Minimal XML well-formedness check: balanced tags, quoted attributes, no stray '<' or '&'.
bool well_formed(const std::string& xml, std::string& why)
{
   std::vector<std::string> stack;
   std::size_t i = 0;
   const std::regex attr_re(R"(^\s*[A-Za-z_:][-A-Za-z0-9_:.]*\s*=\s*("[^"<]*"|'[^'<]*'))");
   int roots = 0;
   while (i < xml.size()) {
      if (xml[i] == '&') {
         const auto semi = xml.find(';', i);
         const auto ent = xml.substr(i, semi == std::string::npos ? 0 : semi - i + 1);
         if (!std::regex_match(ent, std::regex(R"(&(amp|lt|gt|quot|apos|#[0-9]+|#x[0-9a-fA-F]+);)"))) {
            why = "bad entity at " + std::to_string(i);
            return false;
         }
         i = semi + 1;
         continue;
      }
      if (xml[i] != '<') {
         ++i;
         continue;
      }
      if (xml.compare(i, 5, "<?xml") == 0) {
         i = xml.find("?>", i) + 2;
         continue;
      }
      if (xml.compare(i, 4, "<!--") == 0) {
         i = xml.find("-->", i) + 3;
         continue;
      }
      const auto end = xml.find('>', i);
      if (end == std::string::npos) {
         why = "unterminated tag";
         return false;
      }
      std::string tag = xml.substr(i + 1, end - i - 1);
      i = end + 1;
      if (!tag.empty() && tag[0] == '/') {
         const auto name = tag.substr(1);
         if (stack.empty() || stack.back() != name) {
            why = "mismatched </" + name + ">";
            return false;
         }
         stack.pop_back();
         continue;
      }
      const bool self_close = !tag.empty() && tag.back() == '/';
      if (self_close) tag.pop_back();
      std::size_t k = 0;
      while (k < tag.size() && !std::isspace(static_cast<unsigned char>(tag[k]))) ++k;
      const auto name = tag.substr(0, k);
      std::string rest = tag.substr(k);
      std::smatch m;
      while (std::regex_search(rest, m, attr_re)) rest = m.suffix();
      if (rest.find_first_not_of(" \t\r\n") != std::string::npos) {
         why = "bad attributes in <" + name + ">: " + rest;
         return false;
      }
      if (stack.empty()) ++roots;
      if (!self_close) stack.push_back(name);
   }
   if (!stack.empty()) why = "unclosed <" + stack.back() + ">";
   if (roots != 1) why = "expected one root element";
   return stack.empty() && roots == 1;
}

bf::ExperimentConfig small_config(int runs)
{
   bf::ExperimentConfig cfg;
   cfg.runs = runs;
   cfg.master_seed = 7;
   return cfg;
}

} // namespace

TEST_CASE("config parsing rejects unknown keys and fills defaults")
{
   const auto cfg = bf::parse_config(json::parse(R"({"runs": 5, "data_source": {"kind": "synthetic", "synthetic": {"bias": 0.5}}})"));
   CHECK(cfg.runs == 5);
   CHECK(cfg.data_source.synthetic.bias == 0.5);
   CHECK(cfg.tree_params == bf::TreeParams{bf::Criterion::gini, 3, 4});
   CHECK(cfg.constraints.size() == 2);
   CHECK_THROWS_AS(bf::parse_config(json::parse(R"({"runz": 5})")), bf::ConfigError);
   CHECK_THROWS_AS(bf::parse_config(json::parse(R"({"tree_params": {"criterion": "gini", "depth": 3}})")), bf::ConfigError);
   CHECK_THROWS_AS(bf::parse_config(json::parse(R"({"runs": 1})")), bf::ConfigError);
   CHECK_THROWS_AS(bf::parse_config(json::parse(R"({"constraints": ["parity"]})")), bf::ConfigError);
   CHECK_THROWS_AS(bf::parse_config(json::parse(R"({"data_source": {"kind": "feature_csv"}})")), bf::ConfigError);
   const auto echo = bf::config_to_json(cfg);
   CHECK(bf::config_to_json(bf::parse_config(echo)) == echo);
}

TEST_CASE("synthetic cohort size and determinism")
{
   const bf::SyntheticSpec spec;
   const auto a = bf::generate_synthetic(spec, 3);
   CHECK(spec.patient_count() == 90);
   CHECK(a.size() == 630);
   std::set<std::string> ids;
   for (const auto& i : a) ids.insert(i.patient_id);
   CHECK(ids.size() == 90);
   CHECK(bf::generate_synthetic(spec, 3) == a);
   CHECK_FALSE(bf::generate_synthetic(spec, 4) == a);
}

TEST_CASE("unbiased cohort has no systematic selection gap")
{
   auto cfg = small_config(10);
   cfg.data_source.synthetic.bias = 0.0;
   cfg.constraints = {bf::Constraint::demographic_parity};
   const auto rep = bf::run_experiment(cfg);
   double gap = 0.0;
   for (const auto& r : rep.runs) gap += r.before.at("selection_rate.female") - r.before.at("selection_rate.male");
   CHECK(std::fabs(gap / 10.0) <= 0.05);
}

TEST_CASE("biased default cohort has a baseline dp gap of at least 0.15")
{
   const auto rep = bf::run_experiment(bf::ExperimentConfig{});
   double dp = 0.0;
   for (const auto& r : rep.runs) dp += r.before.at("dp_difference");
   CHECK(dp / rep.runs.size() >= 0.15);
   for (const auto& [c, list] : rep.aggregate) {
      for (const auto& m : list) {
         if (m.metric == "dp_difference" || m.metric == "eo_difference") CHECK(m.after.mean < m.before.mean);
         if (m.metric == "accuracy") CHECK(m.after.mean >= m.before.mean - 0.10);
      }
   }
}

TEST_CASE("two runs: structure, determinism and outputs")
{
   const auto cfg = small_config(2);
   const auto a = bf::report_to_json(bf::run_experiment(cfg));
   const auto b = bf::report_to_json(bf::run_experiment(cfg));
   CHECK(a.dump() == b.dump());
   CHECK(a.at("runs").size() == 2);
   for (const char* c : {"demographic_parity", "equalized_odds"}) {
      CHECK(a.at("headline").contains(c));
      CHECK(a.at("headline").at(c).at("p").is_number());
   }
   CHECK(a.at("headline").at("demographic_parity").at("metric") == "dp_difference");
   CHECK(a.at("headline").at("equalized_odds").at("metric") == "eo_difference");
   CHECK(a.at("polarity").at("positive_class") == "covid");

   const auto dir = bf::fs::temp_directory_path() / "breathfair_test_outputs";
   bf::fs::remove_all(dir);
   bf::emit_outputs(a, dir);
   const auto csv = slurp(dir / "metrics.csv");
   const auto lines = std::count(csv.begin(), csv.end(), '\n');
   CHECK(lines == 1 + 2 * 2 * 2 * static_cast<long>(bf::metric_names().size()));
   CHECK(bf::metric_names().size() == 13);

   for (const char* fig : {"demographic_parity.svg", "equalized_odds.svg"}) {
      CAPTURE(fig);
      const auto svg = slurp(dir / "figures" / fig);
      std::string why;
      CHECK_MESSAGE(well_formed(svg, why), why);
      std::map<std::string, int> groups;
      const std::regex g_re(R"re(<g class="bar-group" data-sex="([a-z]+)" data-phase="([a-z]+)")re");
      for (auto it = std::sregex_iterator(svg.begin(), svg.end(), g_re); it != std::sregex_iterator(); ++it) {
         groups[(*it)[1].str() + "/" + (*it)[2].str()] += 1;
      }
      CHECK(groups["female/before"] == 1);
      CHECK(groups["female/after"] == 1);
      CHECK(groups["male/before"] == 1);
      CHECK(groups["male/after"] == 1);
   }
}

TEST_CASE("a single constraint emits a single figure")
{
   auto cfg = small_config(2);
   cfg.constraints = {bf::Constraint::equalized_odds};
   const auto j = bf::report_to_json(bf::run_experiment(cfg));
   const auto dir = bf::fs::temp_directory_path() / "breathfair_test_one_figure";
   bf::fs::remove_all(dir);
   bf::emit_outputs(j, dir);
   CHECK_FALSE(bf::fs::exists(dir / "figures" / "demographic_parity.svg"));
   CHECK(bf::fs::exists(dir / "figures" / "equalized_odds.svg"));
   const auto csv = slurp(dir / "metrics.csv");
   CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 13);
}

TEST_CASE("failed runs carry the run index")
{
   std::vector<bf::Instance> tiny = bf::generate_synthetic({}, 1);
   tiny.resize(14);
   try {
      bf::run_experiment(small_config(2), tiny);
      FAIL("tiny cohort accepted");
   }
   catch (const bf::RunFailure& e) {
      CHECK(e.run_index() == 0);
   }
}

TEST_CASE("svg escaping")
{
   CHECK(bf::xml_escape("a<b & \"c\"") == "a&lt;b &amp; &quot;c&quot;");
   std::string why;
   const auto svg = bf::render_bar_chart("x < y & z", {{"p", {{"female", "before", 0.5, 0.1}, {"male", "after", 0.2, 0.0}}}});
   CHECK_MESSAGE(well_formed(svg, why), why);
}
