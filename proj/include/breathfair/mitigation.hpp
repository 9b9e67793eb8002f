#pragma once

#include "breathfair/fairness.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace breathfair {

enum class Constraint { demographic_parity, equalized_odds };

std::string_view to_string(Constraint c);
std::optional<Constraint> parse_constraint(std::string_view text);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Predicts positive iff score > threshold; +inf never fires, -inf always does.
inline int apply_threshold(double threshold, double score)
{
   return score > threshold ? 1 : 0;
}

/// Randomized rule of one group. With probability p_ignore the score is ignored and
/// the prediction is 1 with probability prediction_constant. Otherwise threshold_a
/// is used with probability p and threshold_b with probability 1 - p.
struct GroupMixture
{
   double threshold_a = kInf;
   double threshold_b = kInf;
   double p = 1.0;
   double p_ignore = 0.0;
   double prediction_constant = 0.0;

   double weight_a() const { return (1.0 - p_ignore) * p; }
   double weight_b() const { return (1.0 - p_ignore) * (1.0 - p); }
};

struct PolicyDiagnostics
{
   /// DP: target selection rate. EO: target fpr.
   double target_x = 0.0;
   /// EO: target tpr (unused for DP).
   double target_y = 0.0;
   /// Expected accuracy on the fitting data.
   double objective = 0.0;
   int grid_size = 0;
};

struct ThresholdPolicy
{
   Constraint constraint = Constraint::demographic_parity;
   std::map<std::string, GroupMixture> groups;
   PolicyDiagnostics diagnostics;
};

class UnknownGroup : public DataError
{
public:
   explicit UnknownGroup(const std::string& group) : DataError("policy has no rule for group '" + group + "'") {}
};

struct GroupSamples
{
   std::vector<double> scores;
   std::vector<int> labels;
};

using GroupedSamples = std::map<std::string, GroupSamples>;

GroupedSamples group_samples(std::span<const double> scores, std::span<const int> labels,
                             std::span<const std::string> groups);

/// Deterministic threshold rule with its operating point on the fitting data.
struct RulePoint
{
   double threshold = kInf;
   double x = 0.0; // selection rate (DP) or fpr (EO)
   double y = 0.0; // accuracy (DP) or tpr (EO)
};

/// Rules at -inf, every midpoint of consecutive distinct scores, and +inf.
std::vector<double> candidate_thresholds(std::span<const double> scores);

/// (selection rate, accuracy) of every candidate rule, by ascending selection rate.
std::vector<RulePoint> selection_accuracy_points(const GroupSamples& g);

/// Upper concave envelope of points sorted by x (monotone chain; collinear points dropped).
std::vector<RulePoint> upper_hull(std::vector<RulePoint> points);

/// Point on a hull at abscissa x, realized by at most two vertices.
struct HullPoint
{
   double y = 0.0;
   double threshold_a = kInf;
   double threshold_b = kInf;
   double p = 1.0; // weight of threshold_a
};

/// Requires hull.front().x <= x <= hull.back().x. At a vertical edge the top vertex is used.
HullPoint evaluate_hull(const std::vector<RulePoint>& hull, double x);

struct CurvePoint
{
   double rate = 0.0;
   double accuracy = 0.0;
   GroupMixture mixture;
};

/// Best accuracy at each selection rate k / grid_size, k = 0..grid_size.
std::vector<CurvePoint> dp_tradeoff_curve(const GroupSamples& g, int grid_size = 100);

ThresholdPolicy fit_demographic_parity(const GroupedSamples& data, int grid_size = 100);

/// Upper ROC hull from (0,0) to (1,1); x = fpr, y = tpr.
using RocHull = std::vector<RulePoint>;

RocHull roc_convex_hull(const GroupSamples& g, const std::string& group_name = "group");

ThresholdPolicy fit_equalized_odds(const GroupedSamples& data, int fpr_grid_size = 1000);

/// One uniform per instance: golden-ratio additive recurrence from an offset keyed by `seed`.
double policy_draw(std::uint64_t seed, std::uint64_t instance_id);

/// Components in cumulative order: weight_a, weight_b, p_ignore * c, p_ignore * (1 - c).
enum class MixtureComponent { rule_a, rule_b, always_positive, always_negative };

MixtureComponent choose_component(const GroupMixture& m, double u);

int apply_policy(const ThresholdPolicy& policy, double score, const std::string& group, std::uint64_t seed,
                 std::uint64_t instance_id);

/// apply_policy over a batch; instance_id is the position in the batch.
std::vector<int> predict(const ThresholdPolicy& policy, std::span<const double> scores,
                         std::span<const std::string> groups, std::uint64_t seed);

/// Probability that the mixture predicts positive for `score`.
double positive_probability(const GroupMixture& m, double score);

struct ExpectedRates
{
   double selection_rate = 0.0;
   double tpr = 0.0;
   double fpr = 0.0;
   double accuracy = 0.0;
};

/// Exact expectations of the randomized policy on `data`. tpr/fpr are 0 when undefined.
std::map<std::string, ExpectedRates> expected_group_rates(const ThresholdPolicy& policy, const GroupedSamples& data);

nlohmann::json policy_to_json(const ThresholdPolicy& policy);
ThresholdPolicy policy_from_json(const nlohmann::json& j);

} // namespace breathfair
