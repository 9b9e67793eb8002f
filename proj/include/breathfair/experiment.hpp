#pragma once

#include "breathfair/dataset.hpp"
#include "breathfair/mitigation.hpp"
#include "breathfair/stats.hpp"
#include "breathfair/tree.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace breathfair {

/// Stand-in cohort with MFCC-like features. Class means are +-class_separation on the
/// first `informative_dims` coordinates; female patients of both classes are shifted by
/// -bias * class_separation on the same coordinates.
struct SyntheticSpec
{
   int copd_female = 15;
   int copd_male = 15;
   int covid_female = 30;
   int covid_male = 30;
   double bias = 1.0;
   double noise = 1.0;
   double class_separation = 1.0;
   int informative_dims = static_cast<int>(kMfccCount);
   int age_min = 40;
   int age_max = 79;

   void validate() const;
   int patient_count() const { return copd_female + copd_male + covid_female + covid_male; }
};

/// Seven instances per patient; deterministic in `seed`.
std::vector<Instance> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

enum class MitigatorFit { train_oof, train, test };

std::string_view to_string(MitigatorFit f);

struct MitigatorConfig
{
   int grid_size = 100;
   int fpr_grid_size = 1000;
   /// Scores the policy is fitted on: out-of-fold training scores, in-sample training scores, or test scores.
   MitigatorFit fit_on = MitigatorFit::train_oof;
   int oof_folds = 5;
};

enum class DataSourceKind { synthetic, feature_csv, corpus };

struct DataSource
{
   DataSourceKind kind = DataSourceKind::synthetic;
   std::string path;
   SyntheticSpec synthetic;
   /// Cohort seed; derived from master_seed when absent.
   std::optional<std::uint64_t> synthetic_seed;
};

struct ExperimentConfig
{
   DataSource data_source;
   DspConfig dsp;
   int sample_rate = kCanonicalSampleRate;
   double min_seconds = kMinRecordingSeconds;
   SplitSpec split;
   bool grid_search = false;
   TreeParams tree_params{Criterion::gini, 3, 4};
   ParamGrid grid;
   std::vector<Constraint> constraints{Constraint::demographic_parity, Constraint::equalized_odds};
   MitigatorConfig mitigator;
   int runs = 30;
   std::uint64_t master_seed = 2024;
   std::string output_dir = "out";

   void validate() const;
};

/// Parses config JSON; unknown keys at any level throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const fs::path& path);
/// Echo of the effective configuration, without output_dir.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct CorpusFeatures
{
   std::vector<Instance> instances;
   CorpusSummary scanned;
   CorpusSummary selected;
   std::size_t rejected = 0;
   std::size_t zero_filtered_patients = 0;
};

/// metadata.csv + audio/ -> duration selection -> 7 x 2 s featurization -> zero filter.
/// Recordings are featurized in parallel; the output order follows the metadata.
CorpusFeatures featurize_corpus(const fs::path& root, const DspConfig& dsp, int sample_rate, double min_seconds,
                                unsigned threads = 0);

/// Metric names in report order.
const std::vector<std::string>& metric_names();

using MetricSnapshot = std::map<std::string, double>;

/// All fairness metrics of `predictions` for the female/male groups.
MetricSnapshot compute_snapshot(std::span<const int> predictions, std::span<const int> labels,
                                std::span<const std::string> groups);

struct RunRecord
{
   int index = 0;
   std::uint64_t seed = 0;
   std::size_t n_train = 0;
   std::size_t n_test = 0;
   std::size_t train_patients = 0;
   std::size_t test_patients = 0;
   Composition balanced;
   TreeParams params;
   std::optional<double> cv_accuracy;
   std::size_t tree_leaves = 0;
   MetricSnapshot before;
   std::map<Constraint, MetricSnapshot> after;
   std::map<Constraint, ThresholdPolicy> policies;
};

struct RunReport
{
   ExperimentConfig config;
   std::string data_source;
   std::size_t n_instances = 0;
   std::size_t n_patients = 0;
   Composition composition;
   std::optional<CorpusFeatures> corpus;
   std::vector<RunRecord> runs;
   std::map<Constraint, std::vector<MetricSummary>> aggregate;
};

/// Error raised inside run `run_index`.
class RunFailure : public Error
{
public:
   RunFailure(int run_index, const std::string& what)
      : Error("run " + std::to_string(run_index) + " failed: " + what), run_index_(run_index)
   {}
   int run_index() const { return run_index_; }

private:
   int run_index_;
};

/// Loads the data source once, then for every run: balance, split, tree, baseline
/// metrics, and per-constraint mitigation metrics. Aggregates with Welch's test.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Runs on an already loaded instance set.
RunReport run_experiment(const ExperimentConfig& cfg, const std::vector<Instance>& instances);

nlohmann::json report_to_json(const RunReport& report);

/// Writes report.json, metrics.csv and figures/*.svg under `dir`.
void emit_outputs(const nlohmann::json& report, const fs::path& dir);

/// metrics.csv body: run,constraint,phase,metric,value.
std::string metrics_csv(const nlohmann::json& report);

} // namespace breathfair
