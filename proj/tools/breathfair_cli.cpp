// Command-line front end: featurize, synth, train, experiment, report.

#include "breathfair/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace bf = breathfair;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

bf::TreeParams parse_params(const std::string& text)
{
   std::stringstream ss(text);
   std::string crit;
   std::string leaf;
   std::string split;
   if (!std::getline(ss, crit, ',') || !std::getline(ss, leaf, ',') || !std::getline(ss, split)) {
      throw bf::ConfigError("--params expects criterion,min_samples_leaf,min_samples_split");
   }
   const auto c = bf::parse_criterion(crit);
   if (!c) throw bf::ConfigError("criterion must be gini or entropy");
   bf::TreeParams p;
   p.criterion = *c;
   try {
      p.min_samples_leaf = std::stoi(leaf);
      p.min_samples_split = std::stoi(split);
   }
   catch (const std::exception&) {
      throw bf::ConfigError("--params: leaf and split sizes must be integers");
   }
   p.validate();
   return p;
}

json params_json(const bf::TreeParams& p)
{
   return {{"criterion", std::string(bf::to_string(p.criterion))},
           {"min_samples_leaf", p.min_samples_leaf},
           {"min_samples_split", p.min_samples_split}};
}

void print_headline(const json& report)
{
   for (const auto& [name, h] : report.at("headline").items()) {
      std::cout << name << ": " << h.at("metric").get<std::string>() << " " << h.at("mean_before") << " -> "
                << h.at("mean_after");
      if (h.at("pct_improvement").is_number()) std::cout << " (" << h.at("pct_improvement") << "% improvement)";
      std::cout << ", Welch t=" << h.at("t") << " df=" << h.at("df") << " p=" << h.at("p") << ", accuracy "
                << h.at("accuracy_before") << " -> " << h.at("accuracy_after") << '\n';
   }
}

} // namespace

int main(int argc, char** argv)
{
   CLI::App app{"Fairness-aware COPD vs COVID-19 breathing classifier pipeline"};
   app.require_subcommand(1);

   auto* featurize = app.add_subcommand("featurize", "MFCC feature cache from a corpus directory (metadata.csv + audio/)");
   std::string corpus_dir;
   std::string features_out = "features.csv";
   int sample_rate = bf::kCanonicalSampleRate;
   double min_seconds = bf::kMinRecordingSeconds;
   unsigned threads = 0;
   featurize->add_option("corpus", corpus_dir, "Corpus directory")->required();
   featurize->add_option("-o,--output", features_out, "Feature CSV to write");
   featurize->add_option("--sample-rate", sample_rate, "Analysis sample rate");
   featurize->add_option("--min-seconds", min_seconds, "Minimum recording length");
   featurize->add_option("--threads", threads, "Worker threads (0 = all cores)");

   auto* synth = app.add_subcommand("synth", "Write a synthetic biased cohort as a feature CSV");
   std::string synth_out = "features.csv";
   bf::SyntheticSpec synth_spec;
   std::uint64_t synth_seed = 1;
   synth->add_option("-o,--output", synth_out, "Feature CSV to write");
   synth->add_option("--bias", synth_spec.bias, "Female feature shift, in class-separation units");
   synth->add_option("--noise", synth_spec.noise, "Per-coefficient noise standard deviation");
   synth->add_option("--seed", synth_seed, "Generator seed");

   auto* train = app.add_subcommand("train", "Fit one tree on a grouped train/test split and report accuracy");
   std::string train_csv;
   bool use_grid = false;
   std::string params_text = "gini,3,4";
   std::uint64_t train_seed = 1;
   double test_fraction = 0.3;
   std::string tree_out;
   train->add_option("features", train_csv, "Feature CSV")->required();
   auto* grid_flag = train->add_flag("--grid", use_grid, "Select parameters by 5-fold grid search");
   train->add_option("--params", params_text, "criterion,min_samples_leaf,min_samples_split")->excludes(grid_flag);
   train->add_option("--seed", train_seed, "Seed for balancing, splitting and folds");
   train->add_option("--test-fraction", test_fraction, "Share of patients held out");
   train->add_option("-o,--output", tree_out, "Write the fitted tree as JSON");

   auto* experiment = app.add_subcommand("experiment", "Repeated before/after mitigation runs with Welch tests");
   std::string config_path;
   std::string out_dir;
   experiment->add_option("-c,--config", config_path, "Experiment config JSON")->required();
   experiment->add_option("-o,--output", out_dir, "Output directory (overrides output_dir)");

   auto* report = app.add_subcommand("report", "Re-emit metrics.csv and figures from report.json");
   std::string report_dir;
   report->add_option("dir", report_dir, "Directory holding report.json")->required();

   try {
      app.parse(argc, argv);
   }
   catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kExitConfig;
   }

   try {
      if (*featurize) {
         const auto result = bf::featurize_corpus(corpus_dir, {}, sample_rate, min_seconds, threads);
         bf::write_feature_csv(bf::fs::path(features_out), result.instances);
         std::cout << "wrote " << result.instances.size() << " instances to " << features_out << " ("
                   << result.rejected << " files rejected, " << result.zero_filtered_patients
                   << " patients dropped by the zero filter)\n";
      }
      else if (*synth) {
         const auto instances = bf::generate_synthetic(synth_spec, synth_seed);
         bf::write_feature_csv(bf::fs::path(synth_out), instances);
         std::cout << "wrote " << instances.size() << " instances (" << synth_spec.patient_count() << " patients) to "
                   << synth_out << '\n';
      }
      else if (*train) {
         const auto instances = bf::read_feature_csv(bf::fs::path(train_csv));
         bf::Rng rng(bf::derive_seed(train_seed, 0));
         const auto balanced = bf::balance_classes(instances, rng);
         bf::SplitSpec split;
         split.test_fraction = test_fraction;
         split.seed = bf::derive_seed(train_seed, 1);
         const auto [tr, te] = bf::split_train_test(balanced.instances, split);

         json out;
         bf::TreeParams params;
         if (use_grid) {
            const auto gs = bf::grid_search_cv(tr, bf::ParamGrid{}, split.group_by_patient, bf::derive_seed(train_seed, 2));
            params = gs.best;
            json cells = json::array();
            for (const auto& c : gs.cells) cells.push_back({{"params", params_json(c.params)}, {"cv_accuracy", c.mean_accuracy}});
            out["grid"] = cells;
            out["cv_accuracy"] = gs.best_accuracy;
         }
         else {
            params = parse_params(params_text);
         }
         const auto tree = bf::fit_tree(tr, params);
         int hits = 0;
         for (const auto& inst : te) hits += bf::predict_label(tree, inst) == inst.label_bit() ? 1 : 0;
         out["params"] = params_json(params);
         out["n_train"] = tr.size();
         out["n_test"] = te.size();
         out["test_accuracy"] = te.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(te.size());
         out["leaves"] = tree.leaf_count();
         out["depth"] = tree.depth();
         if (!tree_out.empty()) {
            std::ofstream f(tree_out);
            if (!f) throw bf::IoError("cannot open " + tree_out + " for writing");
            f << bf::tree_to_json(tree).dump(2) << '\n';
         }
         std::cout << out.dump(2) << '\n';
      }
      else if (*experiment) {
         auto cfg = bf::load_config(config_path);
         if (!out_dir.empty()) cfg.output_dir = out_dir;
         const auto result = bf::run_experiment(cfg);
         const json j = bf::report_to_json(result);
         bf::emit_outputs(j, cfg.output_dir);
         print_headline(j);
         std::cout << "outputs written to " << cfg.output_dir << '\n';
      }
      else if (*report) {
         const bf::fs::path dir(report_dir);
         std::ifstream f(dir / "report.json");
         if (!f) throw bf::DataError("cannot open " + (dir / "report.json").string());
         json j;
         try {
            f >> j;
         }
         catch (const json::exception& e) {
            throw bf::DataError(std::string("report.json is not valid JSON: ") + e.what());
         }
         bf::emit_outputs(j, dir);
         print_headline(j);
      }
   }
   catch (const bf::RunFailure& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitRuntime;
   }
   catch (const bf::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
   }
   catch (const bf::DataError& e) {
      std::cerr << "data error: " << e.what() << '\n';
      return kExitData;
   }
   catch (const nlohmann::json::exception& e) {
      std::cerr << "data error: " << e.what() << '\n';
      return kExitData;
   }
   catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitRuntime;
   }
   return 0;
}
