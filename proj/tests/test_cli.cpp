#include "breathfair/experiment.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bf = breathfair;

namespace {

const bf::fs::path kScratch = bf::fs::temp_directory_path() / "breathfair_cli_test";

int run(const std::string& args)
{
   const std::string cmd = std::string("\"") + BREATHFAIR_CLI_PATH + "\" " + args + " > \"" +
                           (kScratch / "stdout.txt").string() + "\" 2> \"" + (kScratch / "stderr.txt").string() + "\"";
   const int status = std::system(cmd.c_str());
   return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string text(const bf::fs::path& p)
{
   std::ifstream f(p);
   std::stringstream ss;
   ss << f.rdbuf();
   return ss.str();
}

void write(const bf::fs::path& p, const std::string& s)
{
   std::ofstream f(p);
   f << s;
}

struct Scratch
{
   Scratch()
   {
      bf::fs::remove_all(kScratch);
      bf::fs::create_directories(kScratch);
   }
};

std::string q(const bf::fs::path& p)
{
   return "\"" + p.string() + "\"";
}

} // namespace

TEST_CASE_FIXTURE(Scratch, "synth, train and experiment succeed")
{
   const auto csv = kScratch / "syn.csv";
   REQUIRE(run("synth -o " + q(csv) + " --seed 3") == 0);
   CHECK(bf::read_feature_csv(csv).size() == 630);

   REQUIRE(run("train " + q(csv) + " --params entropy,2,5 -o " + q(kScratch / "tree.json")) == 0);
   const auto out = nlohmann::json::parse(text(kScratch / "stdout.txt"));
   CHECK(out.at("params").at("criterion") == "entropy");
   CHECK(out.at("test_accuracy").get<double>() > 0.5);
   const auto tree = bf::tree_from_json(nlohmann::json::parse(text(kScratch / "tree.json")));
   CHECK(tree.leaf_count() == out.at("leaves").get<std::size_t>());

   write(kScratch / "cfg.json", "{\"runs\": 2, \"data_source\": {\"kind\": \"feature_csv\", \"path\": " +
                                     nlohmann::json(csv.string()).dump() + "}}");
   REQUIRE(run("experiment -c " + q(kScratch / "cfg.json") + " -o " + q(kScratch / "out")) == 0);
   CHECK(text(kScratch / "stdout.txt").find("demographic_parity: dp_difference") != std::string::npos);
   CHECK(bf::fs::exists(kScratch / "out" / "figures" / "equalized_odds.svg"));

   bf::fs::remove(kScratch / "out" / "metrics.csv");
   REQUIRE(run("report " + q(kScratch / "out")) == 0);
   CHECK(bf::fs::exists(kScratch / "out" / "metrics.csv"));
}

TEST_CASE_FIXTURE(Scratch, "config errors exit with 2")
{
   CHECK(run("") == 2);
   CHECK(run("train") == 2);
   CHECK(run("train x.csv --grid --params gini,3,4") == 2);
   write(kScratch / "bad.json", R"({"runs": 3, "colour": "red"})");
   CHECK(run("experiment -c " + q(kScratch / "bad.json")) == 2);
   CHECK(text(kScratch / "stderr.txt").find("colour") != std::string::npos);
   write(kScratch / "syntax.json", "{runs: 3");
   CHECK(run("experiment -c " + q(kScratch / "syntax.json")) == 2);
}

TEST_CASE_FIXTURE(Scratch, "data errors exit with 3")
{
   CHECK(run("train " + q(kScratch / "missing.csv")) == 3);
   write(kScratch / "broken.csv", "patient_id,segment_index\nx,1\n");
   CHECK(run("train " + q(kScratch / "broken.csv")) == 3);
   CHECK(run("report " + q(kScratch / "nowhere")) == 3);
}

TEST_CASE_FIXTURE(Scratch, "a failing run exits with 4 and names the run")
{
   // two patients per label: the split works but the 5 out-of-fold folds cannot be filled
   auto all = bf::generate_synthetic({}, 1);
   std::vector<bf::Instance> tiny;
   std::map<std::string, int> per_label;
   std::set<std::string> kept;
   for (const auto& i : all) {
      const auto key = std::string(bf::to_string(i.label));
      if (!kept.count(i.patient_id)) {
         if (per_label[key] == 2) continue;
         per_label[key] += 1;
         kept.insert(i.patient_id);
      }
      tiny.push_back(i);
   }
   REQUIRE(tiny.size() == 28);
   bf::write_feature_csv(kScratch / "tiny.csv", tiny);
   write(kScratch / "cfg.json", "{\"runs\": 2, \"data_source\": {\"kind\": \"feature_csv\", \"path\": " +
                                     nlohmann::json((kScratch / "tiny.csv").string()).dump() + "}}");
   CHECK(run("experiment -c " + q(kScratch / "cfg.json") + " -o " + q(kScratch / "out")) == 4);
   CHECK(text(kScratch / "stderr.txt").find("run 0") != std::string::npos);
}
