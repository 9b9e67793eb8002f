#include "breathfair/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace breathfair {

std::string_view to_string(MitigatorFit f)
{
   switch (f) {
   case MitigatorFit::train:
      return "train";
   case MitigatorFit::test:
      return "test";
   default:
      return "train_oof";
   }
}

namespace {

using nlohmann::json;

// Seed streams below a run seed.
constexpr std::uint64_t kStreamBalance = 0;
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamGrid = 2;
constexpr std::uint64_t kStreamOof = 3;
constexpr std::uint64_t kStreamPolicy = 10;
constexpr std::uint64_t kStreamCohort = 1ULL << 40;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where)
{
   if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
   for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
         throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
      }
   }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
   if (!j.contains(key)) return;
   try {
      out = j.at(key).get<T>();
   }
   catch (const json::exception&) {
      throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
   }
}

SyntheticSpec parse_synthetic(const json& j, std::optional<std::uint64_t>& seed)
{
   check_keys(j,
              {"copd_female", "copd_male", "covid_female", "covid_male", "bias", "noise", "class_separation",
               "informative_dims", "age_min", "age_max", "seed"},
              "data_source.synthetic");
   SyntheticSpec s;
   const std::string w = "data_source.synthetic";
   read(j, "copd_female", s.copd_female, w);
   read(j, "copd_male", s.copd_male, w);
   read(j, "covid_female", s.covid_female, w);
   read(j, "covid_male", s.covid_male, w);
   read(j, "bias", s.bias, w);
   read(j, "noise", s.noise, w);
   read(j, "class_separation", s.class_separation, w);
   read(j, "informative_dims", s.informative_dims, w);
   read(j, "age_min", s.age_min, w);
   read(j, "age_max", s.age_max, w);
   if (j.contains("seed")) {
      std::uint64_t v = 0;
      read(j, "seed", v, w);
      seed = v;
   }
   return s;
}

json synthetic_to_json(const SyntheticSpec& s, const std::optional<std::uint64_t>& seed)
{
   json j = {{"copd_female", s.copd_female},
             {"copd_male", s.copd_male},
             {"covid_female", s.covid_female},
             {"covid_male", s.covid_male},
             {"bias", s.bias},
             {"noise", s.noise},
             {"class_separation", s.class_separation},
             {"informative_dims", s.informative_dims},
             {"age_min", s.age_min},
             {"age_max", s.age_max}};
   if (seed) j["seed"] = *seed;
   return j;
}

std::string_view to_string(DataSourceKind k)
{
   switch (k) {
   case DataSourceKind::feature_csv:
      return "feature_csv";
   case DataSourceKind::corpus:
      return "corpus";
   default:
      return "synthetic";
   }
}

} // namespace

void ExperimentConfig::validate() const
{
   if (runs < 2) throw ConfigError("runs must be >= 2 (Welch's test needs two samples)");
   if (constraints.empty()) throw ConfigError("constraints must not be empty");
   if (std::set<Constraint>(constraints.begin(), constraints.end()).size() != constraints.size()) {
      throw ConfigError("constraints must not repeat");
   }
   if (data_source.kind == DataSourceKind::synthetic) data_source.synthetic.validate();
   else if (data_source.path.empty()) throw ConfigError("data_source.path is required for " + std::string(to_string(data_source.kind)));
   dsp.validate(sample_rate);
   if (!(min_seconds > 0.0)) throw ConfigError("audio.min_seconds must be positive");
   split.validate();
   tree_params.validate();
   if (grid.cells().empty()) throw ConfigError("grid must have at least one cell");
   for (const auto& p : grid.cells()) p.validate();
   if (grid.folds < 2) throw ConfigError("grid.folds must be >= 2");
   if (mitigator.grid_size < 1 || mitigator.fpr_grid_size < 1) throw ConfigError("mitigator grid sizes must be >= 1");
   if (mitigator.oof_folds < 2) throw ConfigError("mitigator.oof_folds must be >= 2");
}

ExperimentConfig parse_config(const json& j)
{
   check_keys(j,
              {"data_source", "dsp", "audio", "split", "model_selection", "tree_params", "grid", "constraints", "mitigator",
               "runs", "master_seed", "output_dir"},
              "");
   ExperimentConfig cfg;

   if (j.contains("data_source")) {
      const auto& d = j.at("data_source");
      check_keys(d, {"kind", "path", "synthetic"}, "data_source");
      std::string kind = "synthetic";
      read(d, "kind", kind, "data_source");
      if (kind == "synthetic") cfg.data_source.kind = DataSourceKind::synthetic;
      else if (kind == "feature_csv") cfg.data_source.kind = DataSourceKind::feature_csv;
      else if (kind == "corpus") cfg.data_source.kind = DataSourceKind::corpus;
      else throw ConfigError("data_source.kind must be synthetic, feature_csv or corpus");
      read(d, "path", cfg.data_source.path, "data_source");
      if (d.contains("synthetic")) cfg.data_source.synthetic = parse_synthetic(d.at("synthetic"), cfg.data_source.synthetic_seed);
   }

   if (j.contains("dsp")) {
      const auto& d = j.at("dsp");
      check_keys(d, {"frame_length", "hop_length", "n_mels", "n_mfcc", "fmin", "fmax", "amin", "top_db"}, "dsp");
      read(d, "frame_length", cfg.dsp.frame_length, "dsp");
      read(d, "hop_length", cfg.dsp.hop_length, "dsp");
      read(d, "n_mels", cfg.dsp.n_mels, "dsp");
      read(d, "n_mfcc", cfg.dsp.n_mfcc, "dsp");
      read(d, "fmin", cfg.dsp.fmin, "dsp");
      read(d, "fmax", cfg.dsp.fmax, "dsp");
      read(d, "amin", cfg.dsp.amin, "dsp");
      read(d, "top_db", cfg.dsp.top_db, "dsp");
      if (cfg.dsp.n_mfcc != kMfccCount) throw ConfigError("dsp.n_mfcc must be 40: instances carry 40 MFCC summaries");
   }

   if (j.contains("audio")) {
      const auto& a = j.at("audio");
      check_keys(a, {"sample_rate", "min_seconds"}, "audio");
      read(a, "sample_rate", cfg.sample_rate, "audio");
      read(a, "min_seconds", cfg.min_seconds, "audio");
   }

   if (j.contains("split")) {
      const auto& s = j.at("split");
      check_keys(s, {"test_fraction", "group_by_patient", "stratify_by_label", "stratify_by_group"}, "split");
      read(s, "test_fraction", cfg.split.test_fraction, "split");
      read(s, "group_by_patient", cfg.split.group_by_patient, "split");
      read(s, "stratify_by_label", cfg.split.stratify_by_label, "split");
      read(s, "stratify_by_group", cfg.split.stratify_by_group, "split");
   }

   if (j.contains("model_selection")) {
      std::string mode;
      read(j, "model_selection", mode, "");
      if (mode == "fixed") cfg.grid_search = false;
      else if (mode == "grid_search") cfg.grid_search = true;
      else throw ConfigError("model_selection must be fixed or grid_search");
   }

   if (j.contains("tree_params")) {
      const auto& t = j.at("tree_params");
      check_keys(t, {"criterion", "min_samples_leaf", "min_samples_split"}, "tree_params");
      std::string crit(to_string(cfg.tree_params.criterion));
      read(t, "criterion", crit, "tree_params");
      const auto c = parse_criterion(crit);
      if (!c) throw ConfigError("tree_params.criterion must be gini or entropy");
      cfg.tree_params.criterion = *c;
      read(t, "min_samples_leaf", cfg.tree_params.min_samples_leaf, "tree_params");
      read(t, "min_samples_split", cfg.tree_params.min_samples_split, "tree_params");
   }

   if (j.contains("grid")) {
      const auto& g = j.at("grid");
      check_keys(g, {"criteria", "leaf_values", "split_values", "folds"}, "grid");
      if (g.contains("criteria")) {
         std::vector<std::string> names;
         read(g, "criteria", names, "grid");
         cfg.grid.criteria.clear();
         for (const auto& n : names) {
            const auto c = parse_criterion(n);
            if (!c) throw ConfigError("grid.criteria entries must be gini or entropy");
            cfg.grid.criteria.push_back(*c);
         }
      }
      read(g, "leaf_values", cfg.grid.leaf_values, "grid");
      read(g, "split_values", cfg.grid.split_values, "grid");
      read(g, "folds", cfg.grid.folds, "grid");
   }

   if (j.contains("constraints")) {
      std::vector<std::string> names;
      read(j, "constraints", names, "");
      cfg.constraints.clear();
      for (const auto& n : names) {
         const auto c = parse_constraint(n);
         if (!c) throw ConfigError("constraints entries must be demographic_parity or equalized_odds");
         cfg.constraints.push_back(*c);
      }
   }

   if (j.contains("mitigator")) {
      const auto& m = j.at("mitigator");
      check_keys(m, {"grid_size", "fpr_grid_size", "fit_on", "oof_folds"}, "mitigator");
      read(m, "grid_size", cfg.mitigator.grid_size, "mitigator");
      read(m, "fpr_grid_size", cfg.mitigator.fpr_grid_size, "mitigator");
      read(m, "oof_folds", cfg.mitigator.oof_folds, "mitigator");
      std::string fit(to_string(cfg.mitigator.fit_on));
      read(m, "fit_on", fit, "mitigator");
      if (fit == "train_oof") cfg.mitigator.fit_on = MitigatorFit::train_oof;
      else if (fit == "train") cfg.mitigator.fit_on = MitigatorFit::train;
      else if (fit == "test") cfg.mitigator.fit_on = MitigatorFit::test;
      else throw ConfigError("mitigator.fit_on must be train_oof, train or test");
   }

   read(j, "runs", cfg.runs, "");
   read(j, "master_seed", cfg.master_seed, "");
   read(j, "output_dir", cfg.output_dir, "");

   cfg.validate();
   return cfg;
}

ExperimentConfig load_config(const fs::path& path)
{
   std::ifstream file(path);
   if (!file) throw ConfigError("cannot open config file " + path.string());
   json j;
   try {
      file >> j;
   }
   catch (const json::exception& e) {
      throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
   }
   return parse_config(j);
}

json config_to_json(const ExperimentConfig& cfg)
{
   json source = {{"kind", std::string(to_string(cfg.data_source.kind))}};
   if (cfg.data_source.kind == DataSourceKind::synthetic) {
      source["synthetic"] = synthetic_to_json(cfg.data_source.synthetic, cfg.data_source.synthetic_seed);
   }
   else {
      source["path"] = cfg.data_source.path;
   }

   json criteria = json::array();
   for (auto c : cfg.grid.criteria) criteria.push_back(std::string(to_string(c)));
   json constraints = json::array();
   for (auto c : cfg.constraints) constraints.push_back(std::string(to_string(c)));

   return {{"data_source", source},
           {"dsp",
            {{"frame_length", cfg.dsp.frame_length},
             {"hop_length", cfg.dsp.hop_length},
             {"n_mels", cfg.dsp.n_mels},
             {"n_mfcc", cfg.dsp.n_mfcc},
             {"fmin", cfg.dsp.fmin},
             {"fmax", cfg.dsp.effective_fmax(cfg.sample_rate)},
             {"amin", cfg.dsp.amin},
             {"top_db", cfg.dsp.top_db}}},
           {"audio", {{"sample_rate", cfg.sample_rate}, {"min_seconds", cfg.min_seconds}}},
           {"split",
            {{"test_fraction", cfg.split.test_fraction},
             {"group_by_patient", cfg.split.group_by_patient},
             {"stratify_by_label", cfg.split.stratify_by_label},
             {"stratify_by_group", cfg.split.stratify_by_group}}},
           {"model_selection", cfg.grid_search ? "grid_search" : "fixed"},
           {"tree_params",
            {{"criterion", std::string(to_string(cfg.tree_params.criterion))},
             {"min_samples_leaf", cfg.tree_params.min_samples_leaf},
             {"min_samples_split", cfg.tree_params.min_samples_split}}},
           {"grid",
            {{"criteria", criteria},
             {"leaf_values", cfg.grid.leaf_values},
             {"split_values", cfg.grid.split_values},
             {"folds", cfg.grid.folds}}},
           {"constraints", constraints},
           {"mitigator",
            {{"grid_size", cfg.mitigator.grid_size},
             {"fpr_grid_size", cfg.mitigator.fpr_grid_size},
             {"fit_on", std::string(to_string(cfg.mitigator.fit_on))},
             {"oof_folds", cfg.mitigator.oof_folds}}},
           {"runs", cfg.runs},
           {"master_seed", cfg.master_seed}};
}

CorpusFeatures featurize_corpus(const fs::path& root, const DspConfig& dsp, int sample_rate, double min_seconds,
                                unsigned threads)
{
   const auto records = load_metadata(root / "metadata.csv");
   const CorpusIndex scanned = scan_corpus(root, records);
   const CorpusIndex selected = select_recordings(scanned, min_seconds);

   const auto& entries = selected.entries;
   std::vector<std::vector<Instance>> per_entry(entries.size());
   std::vector<std::exception_ptr> errors(entries.size());
   std::atomic<std::size_t> next{0};
   auto worker = [&] {
      for (std::size_t i = next++; i < entries.size(); i = next++) {
         try {
            per_entry[i] = segment_and_featurize(entries[i], dsp, sample_rate);
         }
         catch (...) {
            errors[i] = std::current_exception();
         }
      }
   };
   if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
   threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, entries.size())));
   std::vector<std::thread> pool;
   for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
   worker();
   for (auto& t : pool) t.join();
   for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
   }

   CorpusFeatures out;
   out.scanned = scanned.summary;
   out.selected = selected.summary;
   out.rejected = scanned.rejects.size();
   std::vector<Instance> all;
   for (auto& v : per_entry) all.insert(all.end(), v.begin(), v.end());

   std::set<std::string> before_ids;
   for (const auto& inst : all) before_ids.insert(inst.patient_id);
   out.instances = filter_zero(all);
   std::set<std::string> after_ids;
   for (const auto& inst : out.instances) after_ids.insert(inst.patient_id);
   out.zero_filtered_patients = before_ids.size() - after_ids.size();
   return out;
}

const std::vector<std::string>& metric_names()
{
   static const std::vector<std::string> names{
      "selection_rate.female", "selection_rate.male", "dp_ratio", "dp_difference", "tpr.female", "tpr.male",
      "fpr.female",            "fpr.male",            "fnr.female", "fnr.male",    "eo_ratio",   "eo_difference",
      "accuracy"};
   return names;
}

MetricSnapshot compute_snapshot(std::span<const int> predictions, std::span<const int> labels,
                                std::span<const std::string> groups)
{
   const auto dp = demographic_parity(predictions, groups);
   const auto eo = equalized_odds(predictions, labels, groups);
   MetricSnapshot s;
   for (const auto& g : {std::string("female"), std::string("male")}) {
      if (!dp.selection_rate.contains(g)) throw EmptyGroup("no '" + g + "' instances in the evaluated set");
      s["selection_rate." + g] = dp.selection_rate.at(g);
      s["tpr." + g] = eo.tpr.at(g);
      s["fpr." + g] = eo.fpr.at(g);
      s["fnr." + g] = eo.fnr.at(g);
   }
   s["dp_ratio"] = dp.dp_ratio;
   s["dp_difference"] = dp.dp_difference;
   s["eo_ratio"] = eo.eo_ratio;
   s["eo_difference"] = eo.eo_difference;
   s["accuracy"] = accuracy(predictions, labels);
   return s;
}

namespace {

struct Columns
{
   std::vector<int> labels;
   std::vector<std::string> groups;
};

Columns columns(const std::vector<Instance>& instances)
{
   Columns c;
   for (const auto& inst : instances) {
      c.labels.push_back(inst.label_bit());
      c.groups.emplace_back(to_string(inst.sex));
   }
   return c;
}

std::size_t patient_count(const std::vector<Instance>& instances)
{
   std::set<std::string> ids;
   for (const auto& inst : instances) ids.insert(inst.patient_id);
   return ids.size();
}

RunRecord run_once(const ExperimentConfig& cfg, const std::vector<Instance>& instances, int index)
{
   RunRecord rec;
   rec.index = index;
   rec.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index));

   Rng balance_rng(derive_seed(rec.seed, kStreamBalance));
   const auto balanced = balance_classes(instances, balance_rng);
   rec.balanced = balanced.composition;

   SplitSpec split = cfg.split;
   split.seed = derive_seed(rec.seed, kStreamSplit);
   const auto [train, test] = split_train_test(balanced.instances, split);
   rec.n_train = train.size();
   rec.n_test = test.size();
   rec.train_patients = patient_count(train);
   rec.test_patients = patient_count(test);

   if (cfg.grid_search) {
      const auto gs = grid_search_cv(train, cfg.grid, cfg.split.group_by_patient, derive_seed(rec.seed, kStreamGrid));
      rec.params = gs.best;
      rec.cv_accuracy = gs.best_accuracy;
   }
   else {
      rec.params = cfg.tree_params;
   }

   const Tree tree = fit_tree(train, rec.params);
   rec.tree_leaves = tree.leaf_count();
   const auto test_scores = predict_scores(tree, test);
   const auto test_cols = columns(test);
   std::vector<int> baseline(test_scores.size());
   for (std::size_t i = 0; i < test_scores.size(); ++i) baseline[i] = test_scores[i] > 0.5 ? 1 : 0;
   rec.before = compute_snapshot(baseline, test_cols.labels, test_cols.groups);

   GroupedSamples fit_data;
   switch (cfg.mitigator.fit_on) {
   case MitigatorFit::train_oof: {
      const auto oof = out_of_fold_scores(
         train, rec.params, {cfg.mitigator.oof_folds, cfg.split.group_by_patient, derive_seed(rec.seed, kStreamOof)});
      const auto c = columns(train);
      fit_data = group_samples(oof, c.labels, c.groups);
      break;
   }
   case MitigatorFit::train: {
      const auto c = columns(train);
      fit_data = group_samples(predict_scores(tree, train), c.labels, c.groups);
      break;
   }
   case MitigatorFit::test:
      fit_data = group_samples(test_scores, test_cols.labels, test_cols.groups);
      break;
   }

   for (auto constraint : cfg.constraints) {
      const ThresholdPolicy policy = constraint == Constraint::demographic_parity
                                        ? fit_demographic_parity(fit_data, cfg.mitigator.grid_size)
                                        : fit_equalized_odds(fit_data, cfg.mitigator.fpr_grid_size);
      const auto stream = derive_seed(rec.seed, kStreamPolicy + static_cast<std::uint64_t>(constraint));
      const auto preds = predict(policy, test_scores, test_cols.groups, stream);
      rec.after[constraint] = compute_snapshot(preds, test_cols.labels, test_cols.groups);
      rec.policies[constraint] = policy;
   }
   return rec;
}

} // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const std::vector<Instance>& instances)
{
   cfg.validate();
   if (instances.empty()) throw DataError("experiment has no instances");
   RunReport report;
   report.config = cfg;
   report.n_instances = instances.size();
   report.n_patients = patient_count(instances);
   report.composition = composition_of(instances);
   report.data_source = std::string(to_string(cfg.data_source.kind));

   for (int i = 0; i < cfg.runs; ++i) {
      try {
         report.runs.push_back(run_once(cfg, instances, i));
      }
      catch (const ConfigError&) {
         throw;
      }
      catch (const std::exception& e) {
         throw RunFailure(i, e.what());
      }
   }

   for (auto constraint : cfg.constraints) {
      std::vector<RunSamples> samples;
      for (const auto& name : metric_names()) {
         RunSamples s{name, {}, {}};
         for (const auto& run : report.runs) {
            s.before.push_back(run.before.at(name));
            s.after.push_back(run.after.at(constraint).at(name));
         }
         samples.push_back(std::move(s));
      }
      report.aggregate[constraint] = summarize_runs(samples);
   }
   return report;
}

RunReport run_experiment(const ExperimentConfig& cfg)
{
   cfg.validate();
   switch (cfg.data_source.kind) {
   case DataSourceKind::synthetic: {
      const auto seed = cfg.data_source.synthetic_seed.value_or(derive_seed(cfg.master_seed, kStreamCohort));
      return run_experiment(cfg, generate_synthetic(cfg.data_source.synthetic, seed));
   }
   case DataSourceKind::feature_csv:
      return run_experiment(cfg, read_feature_csv(fs::path(cfg.data_source.path)));
   case DataSourceKind::corpus: {
      auto features = featurize_corpus(cfg.data_source.path, cfg.dsp, cfg.sample_rate, cfg.min_seconds);
      auto report = run_experiment(cfg, features.instances);
      report.corpus = std::move(features);
      return report;
   }
   }
   throw ConfigError("unknown data source");
}

namespace {

json composition_json(const Composition& c)
{
   json j = json::object();
   for (const auto& [label, by_sex] : c) {
      json row = json::object();
      for (const auto& [sex, n] : by_sex) row[std::string(to_string(sex))] = n;
      j[std::string(to_string(label))] = row;
   }
   return j;
}

json summary_json(const CorpusSummary& c)
{
   json j = json::object();
   for (const auto& [label, by_sex] : c) {
      int total = 0;
      json row = json::object();
      for (const auto& [sex, n] : by_sex) {
         row[std::string(to_string(sex))] = n;
         total += n;
      }
      row["total"] = total;
      j[std::string(to_string(label))] = row;
   }
   return j;
}

json snapshot_json(const MetricSnapshot& s)
{
   json j = json::object();
   for (const auto& name : metric_names()) j[name] = s.at(name);
   return j;
}

json phase_json(const PhaseSummary& p)
{
   return {{"mean", p.mean}, {"std", p.std}, {"stderr", p.stderr_}};
}

// max - min of per-group mean rates; compared against the mean of per-run differences.
json aggregation_check(const std::vector<RunRecord>& runs, const char* prefix, const char* diff_metric,
                       std::optional<Constraint> constraint)
{
   double mean_diff = 0.0;
   double mean_f = 0.0;
   double mean_m = 0.0;
   for (const auto& r : runs) {
      const auto& s = constraint ? r.after.at(*constraint) : r.before;
      mean_diff += s.at(diff_metric);
      mean_f += s.at(std::string(prefix) + ".female");
      mean_m += s.at(std::string(prefix) + ".male");
   }
   const auto n = static_cast<double>(runs.size());
   mean_diff /= n;
   const double gap = std::abs(mean_f / n - mean_m / n);
   return {{"mean_of_differences", mean_diff}, {"difference_of_means", gap}, {"holds", mean_diff >= gap - 1e-12}};
}

} // namespace

json report_to_json(const RunReport& report)
{
   json runs = json::array();
   for (const auto& r : report.runs) {
      json after = json::object();
      json policies = json::object();
      for (const auto& [c, snap] : r.after) after[std::string(to_string(c))] = snapshot_json(snap);
      for (const auto& [c, pol] : r.policies) policies[std::string(to_string(c))] = policy_to_json(pol);
      json run = {{"index", r.index},
                  {"seed", r.seed},
                  {"n_train", r.n_train},
                  {"n_test", r.n_test},
                  {"train_patients", r.train_patients},
                  {"test_patients", r.test_patients},
                  {"balanced_composition", composition_json(r.balanced)},
                  {"tree_params",
                   {{"criterion", std::string(to_string(r.params.criterion))},
                    {"min_samples_leaf", r.params.min_samples_leaf},
                    {"min_samples_split", r.params.min_samples_split}}},
                  {"tree_leaves", r.tree_leaves},
                  {"before", snapshot_json(r.before)},
                  {"after", after},
                  {"policies", policies}};
      if (r.cv_accuracy) run["cv_accuracy"] = *r.cv_accuracy;
      runs.push_back(run);
   }

   json aggregate = json::object();
   json headline = json::object();
   json checks = json::object();
   checks["before"] = {{"demographic_parity", aggregation_check(report.runs, "selection_rate", "dp_difference", std::nullopt)},
                       {"equalized_odds_tpr", aggregation_check(report.runs, "tpr", "eo_difference", std::nullopt)}};
   for (const auto& [c, metrics] : report.aggregate) {
      const std::string cname(to_string(c));
      json list = json::array();
      for (const auto& m : metrics) {
         json entry = {{"metric", m.metric},
                       {"n", m.n},
                       {"before", phase_json(m.before)},
                       {"after", phase_json(m.after)},
                       {"welch",
                        {{"t", m.welch.t},
                         {"df", m.welch.df},
                         {"p", m.welch.p},
                         {"mu_before", m.welch.mu_before},
                         {"mu_after", m.welch.mu_after},
                         {"degenerate", m.welch.degenerate}}},
                       {"pct_improvement", m.pct_improvement ? json(*m.pct_improvement) : json(nullptr)}};
         list.push_back(entry);
      }
      aggregate[cname] = list;

      const std::string key = c == Constraint::demographic_parity ? "dp_difference" : "eo_difference";
      const auto it = std::find_if(metrics.begin(), metrics.end(), [&](const MetricSummary& m) { return m.metric == key; });
      const auto acc = std::find_if(metrics.begin(), metrics.end(), [](const MetricSummary& m) { return m.metric == "accuracy"; });
      headline[cname] = {{"metric", key},
                         {"mean_before", it->before.mean},
                         {"mean_after", it->after.mean},
                         {"pct_improvement", it->pct_improvement ? json(*it->pct_improvement) : json(nullptr)},
                         {"t", it->welch.t},
                         {"df", it->welch.df},
                         {"p", it->welch.p},
                         {"accuracy_before", acc->before.mean},
                         {"accuracy_after", acc->after.mean}};
      checks[cname] = {{"demographic_parity", aggregation_check(report.runs, "selection_rate", "dp_difference", c)},
                       {"equalized_odds_tpr", aggregation_check(report.runs, "tpr", "eo_difference", c)}};
   }

   json data = {{"source", report.data_source},
                {"n_instances", report.n_instances},
                {"n_patients", report.n_patients},
                {"composition", composition_json(report.composition)}};
   if (report.corpus) {
      data["corpus"] = {{"scanned_patients", summary_json(report.corpus->scanned)},
                        {"selected_patients", summary_json(report.corpus->selected)},
                        {"rejected_files", report.corpus->rejected},
                        {"zero_filtered_patients", report.corpus->zero_filtered_patients}};
   }

   return {{"format", "breathfair-run-report/1"},
           {"polarity",
            {{"positive_class", "covid"},
             {"negative_class", "copd"},
             {"label_encoding", {{"covid", 1}, {"copd", 0}}},
             {"sensitive_feature", "sex"},
             {"sex_encoding", {{"male", 1}, {"female", 0}}},
             {"baseline_threshold", "score > 0.5"}}},
           {"config", config_to_json(report.config)},
           {"data", data},
           {"runs", runs},
           {"aggregate", aggregate},
           {"headline", headline},
           {"aggregation_check", checks}};
}

} // namespace breathfair
