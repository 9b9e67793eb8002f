#include "breathfair/mitigation.hpp"

#include "breathfair/random.hpp"

#include <algorithm>
#include <cmath>

namespace breathfair {

std::string_view to_string(Constraint c)
{
   return c == Constraint::equalized_odds ? "equalized_odds" : "demographic_parity";
}

std::optional<Constraint> parse_constraint(std::string_view text)
{
   if (text == "demographic_parity") return Constraint::demographic_parity;
   if (text == "equalized_odds") return Constraint::equalized_odds;
   return std::nullopt;
}

namespace {

constexpr double kEps = 1e-12;

const GroupMixture& mixture_for(const ThresholdPolicy& policy, const std::string& group)
{
   const auto it = policy.groups.find(group);
   if (it == policy.groups.end()) throw UnknownGroup(group);
   return it->second;
}

} // namespace

GroupedSamples group_samples(std::span<const double> scores, std::span<const int> labels,
                             std::span<const std::string> groups)
{
   if (scores.size() != labels.size() || scores.size() != groups.size()) {
      throw ConfigError("group_samples: input lengths differ");
   }
   GroupedSamples out;
   for (std::size_t i = 0; i < scores.size(); ++i) {
      auto& g = out[groups[i]];
      g.scores.push_back(scores[i]);
      g.labels.push_back(labels[i] != 0 ? 1 : 0);
   }
   return out;
}

std::vector<double> candidate_thresholds(std::span<const double> scores)
{
   std::vector<double> distinct(scores.begin(), scores.end());
   std::sort(distinct.begin(), distinct.end());
   distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
   std::vector<double> out{-kInf};
   for (std::size_t i = 0; i + 1 < distinct.size(); ++i) out.push_back(distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0);
   out.push_back(kInf);
   return out;
}

std::vector<RulePoint> selection_accuracy_points(const GroupSamples& g)
{
   const auto n = static_cast<double>(g.scores.size());
   std::vector<RulePoint> points;
   for (double t : candidate_thresholds(g.scores)) {
      long selected = 0;
      long correct = 0;
      for (std::size_t i = 0; i < g.scores.size(); ++i) {
         const int pred = apply_threshold(t, g.scores[i]);
         selected += pred;
         correct += pred == g.labels[i] ? 1 : 0;
      }
      points.push_back({t, selected / n, correct / n});
   }
   std::sort(points.begin(), points.end(), [](const RulePoint& a, const RulePoint& b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
   });
   return points;
}

std::vector<RulePoint> upper_hull(std::vector<RulePoint> points)
{
   std::stable_sort(points.begin(), points.end(), [](const RulePoint& a, const RulePoint& b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
   });
   std::vector<RulePoint> hull;
   for (const auto& p : points) {
      while (hull.size() >= 2) {
         const auto& o = hull[hull.size() - 2];
         const auto& a = hull.back();
         const double cross = (a.x - o.x) * (p.y - o.y) - (a.y - o.y) * (p.x - o.x);
         // rates are ratios of counts, so exact collinearity shows up as rounding noise
         if (cross < -kEps) break;
         hull.pop_back();
      }
      hull.push_back(p);
   }
   return hull;
}

HullPoint evaluate_hull(const std::vector<RulePoint>& hull, double x)
{
   if (hull.empty()) throw ConfigError("evaluate_hull: empty hull");
   if (x < hull.front().x - kEps || x > hull.back().x + kEps) throw ConfigError("evaluate_hull: x outside the hull");

   std::size_t i = 0;
   while (i + 1 < hull.size() && hull[i + 1].x <= x + kEps) ++i;
   const auto& v = hull[i];
   if (std::abs(v.x - x) <= kEps || i + 1 == hull.size()) return {v.y, v.threshold, v.threshold, 1.0};

   const auto& w = hull[i + 1];
   const double p = (w.x - x) / (w.x - v.x);
   return {p * v.y + (1.0 - p) * w.y, v.threshold, w.threshold, p};
}

std::vector<CurvePoint> dp_tradeoff_curve(const GroupSamples& g, int grid_size)
{
   if (g.scores.empty()) throw EmptyGroup("dp_tradeoff_curve: empty group");
   if (grid_size < 1) throw ConfigError("grid_size must be >= 1");
   const auto hull = upper_hull(selection_accuracy_points(g));
   std::vector<CurvePoint> curve;
   curve.reserve(static_cast<std::size_t>(grid_size) + 1);
   for (int k = 0; k <= grid_size; ++k) {
      const double r = static_cast<double>(k) / grid_size;
      const auto h = evaluate_hull(hull, r);
      GroupMixture m;
      m.threshold_a = h.threshold_a;
      m.threshold_b = h.threshold_b;
      m.p = h.p;
      curve.push_back({r, h.y, m});
   }
   return curve;
}

namespace {

std::map<std::string, double> group_weights(const GroupedSamples& data)
{
   double total = 0.0;
   for (const auto& [name, g] : data) total += static_cast<double>(g.scores.size());
   std::map<std::string, double> w;
   for (const auto& [name, g] : data) w[name] = static_cast<double>(g.scores.size()) / total;
   return w;
}

void require_groups(const GroupedSamples& data, const char* who)
{
   if (data.empty()) throw EmptyGroup(std::string(who) + ": no groups");
   for (const auto& [name, g] : data) {
      if (g.scores.empty()) throw EmptyGroup(std::string(who) + ": group '" + name + "' is empty");
      if (g.scores.size() != g.labels.size()) throw ConfigError(std::string(who) + ": score and label counts differ");
   }
}

} // namespace

ThresholdPolicy fit_demographic_parity(const GroupedSamples& data, int grid_size)
{
   require_groups(data, "fit_demographic_parity");
   const auto w = group_weights(data);
   std::map<std::string, std::vector<CurvePoint>> curves;
   for (const auto& [name, g] : data) curves[name] = dp_tradeoff_curve(g, grid_size);

   std::size_t best = 0;
   double best_obj = -1.0;
   for (std::size_t k = 0; k <= static_cast<std::size_t>(grid_size); ++k) {
      double obj = 0.0;
      for (const auto& [name, curve] : curves) obj += w.at(name) * curve[k].accuracy;
      if (obj > best_obj + kEps) {
         best_obj = obj;
         best = k;
      }
   }

   ThresholdPolicy policy;
   policy.constraint = Constraint::demographic_parity;
   for (const auto& [name, curve] : curves) policy.groups[name] = curve[best].mixture;
   policy.diagnostics = {curves.begin()->second[best].rate, 0.0, best_obj, grid_size};
   return policy;
}

RocHull roc_convex_hull(const GroupSamples& g, const std::string& group_name)
{
   const long pos = std::count(g.labels.begin(), g.labels.end(), 1);
   const long neg = static_cast<long>(g.labels.size()) - pos;
   if (pos == 0) throw UndefinedRate(group_name, "tpr");
   if (neg == 0) throw UndefinedRate(group_name, "fpr");

   std::vector<RulePoint> points;
   for (double t : candidate_thresholds(g.scores)) {
      long tp = 0;
      long fp = 0;
      for (std::size_t i = 0; i < g.scores.size(); ++i) {
         if (apply_threshold(t, g.scores[i]) == 1) (g.labels[i] == 1 ? tp : fp) += 1;
      }
      points.push_back({t, static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
   }
   return upper_hull(std::move(points));
}

ThresholdPolicy fit_equalized_odds(const GroupedSamples& data, int fpr_grid_size)
{
   require_groups(data, "fit_equalized_odds");
   if (fpr_grid_size < 1) throw ConfigError("fpr_grid_size must be >= 1");
   const auto w = group_weights(data);

   std::map<std::string, RocHull> hulls;
   std::map<std::string, double> base_rate;
   for (const auto& [name, g] : data) {
      hulls[name] = roc_convex_hull(g, name);
      base_rate[name] = static_cast<double>(std::count(g.labels.begin(), g.labels.end(), 1)) /
                        static_cast<double>(g.labels.size());
   }

   int best = 0;
   double best_obj = -1.0;
   double best_y = 0.0;
   for (int k = 0; k <= fpr_grid_size; ++k) {
      const double x = static_cast<double>(k) / fpr_grid_size;
      double y = kInf;
      for (const auto& [name, hull] : hulls) y = std::min(y, evaluate_hull(hull, x).y);
      double obj = 0.0;
      for (const auto& [name, pi] : base_rate) obj += w.at(name) * (y * pi + (1.0 - x) * (1.0 - pi));
      if (obj > best_obj + kEps) {
         best_obj = obj;
         best = k;
         best_y = y;
      }
   }

   const double x = static_cast<double>(best) / fpr_grid_size;
   ThresholdPolicy policy;
   policy.constraint = Constraint::equalized_odds;
   for (const auto& [name, hull] : hulls) {
      const auto h = evaluate_hull(hull, x);
      GroupMixture m;
      m.threshold_a = h.threshold_a;
      m.threshold_b = h.threshold_b;
      m.p = h.p;
      if (h.y - best_y > kEps) {
         // Pull the group down to the envelope by blending in the score-blind rule at (x, x).
         const double lambda = (best_y - x) / (h.y - x);
         m.p_ignore = 1.0 - lambda;
         m.prediction_constant = x;
      }
      policy.groups[name] = m;
   }
   policy.diagnostics = {x, best_y, best_obj, fpr_grid_size};
   return policy;
}

double policy_draw(std::uint64_t seed, std::uint64_t instance_id)
{
   // 2^64 / golden ratio
   constexpr std::uint64_t kStep = 0x9E3779B97F4A7C15ULL;
   std::uint64_t state = seed;
   const std::uint64_t x = splitmix64(state) + instance_id * kStep;
   return static_cast<double>(x >> 11) * 0x1.0p-53;
}

MixtureComponent choose_component(const GroupMixture& m, double u)
{
   double edge = m.weight_a();
   if (u < edge) return MixtureComponent::rule_a;
   edge += m.weight_b();
   if (u < edge) return MixtureComponent::rule_b;
   edge += m.p_ignore * m.prediction_constant;
   if (u < edge) return MixtureComponent::always_positive;
   return m.p_ignore > 0.0 ? MixtureComponent::always_negative : MixtureComponent::rule_b;
}

int apply_policy(const ThresholdPolicy& policy, double score, const std::string& group, std::uint64_t seed,
                 std::uint64_t instance_id)
{
   const auto& m = mixture_for(policy, group);
   switch (choose_component(m, policy_draw(seed, instance_id))) {
   case MixtureComponent::rule_a:
      return apply_threshold(m.threshold_a, score);
   case MixtureComponent::rule_b:
      return apply_threshold(m.threshold_b, score);
   case MixtureComponent::always_positive:
      return 1;
   default:
      return 0;
   }
}

std::vector<int> predict(const ThresholdPolicy& policy, std::span<const double> scores,
                         std::span<const std::string> groups, std::uint64_t seed)
{
   if (scores.size() != groups.size()) throw ConfigError("predict: score and group counts differ");
   std::vector<int> out(scores.size());
   for (std::size_t i = 0; i < scores.size(); ++i) out[i] = apply_policy(policy, scores[i], groups[i], seed, i);
   return out;
}

double positive_probability(const GroupMixture& m, double score)
{
   return m.p_ignore * m.prediction_constant + m.weight_a() * apply_threshold(m.threshold_a, score) +
          m.weight_b() * apply_threshold(m.threshold_b, score);
}

std::map<std::string, ExpectedRates> expected_group_rates(const ThresholdPolicy& policy, const GroupedSamples& data)
{
   std::map<std::string, ExpectedRates> out;
   for (const auto& [name, g] : data) {
      const auto& m = mixture_for(policy, name);
      double sel = 0.0;
      double tp = 0.0;
      double fp = 0.0;
      double correct = 0.0;
      long pos = 0;
      for (std::size_t i = 0; i < g.scores.size(); ++i) {
         const double q = positive_probability(m, g.scores[i]);
         sel += q;
         if (g.labels[i] == 1) {
            tp += q;
            correct += q;
            ++pos;
         }
         else {
            fp += q;
            correct += 1.0 - q;
         }
      }
      const auto n = static_cast<double>(g.scores.size());
      const long neg = static_cast<long>(g.scores.size()) - pos;
      ExpectedRates r;
      r.selection_rate = sel / n;
      r.tpr = pos > 0 ? tp / pos : 0.0;
      r.fpr = neg > 0 ? fp / neg : 0.0;
      r.accuracy = correct / n;
      out[name] = r;
   }
   return out;
}

namespace {

nlohmann::json threshold_json(double t)
{
   if (t == kInf) return "inf";
   if (t == -kInf) return "-inf";
   return t;
}

double threshold_value(const nlohmann::json& j)
{
   if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
      throw DataError("bad threshold '" + s + "'");
   }
   return j.get<double>();
}

} // namespace

nlohmann::json policy_to_json(const ThresholdPolicy& policy)
{
   nlohmann::json groups = nlohmann::json::object();
   for (const auto& [name, m] : policy.groups) {
      groups[name] = {{"threshold_a", threshold_json(m.threshold_a)},
                      {"threshold_b", threshold_json(m.threshold_b)},
                      {"p", m.p},
                      {"p_ignore", m.p_ignore},
                      {"prediction_constant", m.prediction_constant}};
   }
   nlohmann::json diag = {{"objective", policy.diagnostics.objective}, {"grid_size", policy.diagnostics.grid_size}};
   if (policy.constraint == Constraint::demographic_parity) {
      diag["target_selection_rate"] = policy.diagnostics.target_x;
   }
   else {
      diag["target_fpr"] = policy.diagnostics.target_x;
      diag["target_tpr"] = policy.diagnostics.target_y;
   }
   return {{"constraint", std::string(to_string(policy.constraint))}, {"groups", groups}, {"diagnostics", diag}};
}

ThresholdPolicy policy_from_json(const nlohmann::json& j)
{
   try {
      ThresholdPolicy policy;
      const auto c = parse_constraint(j.at("constraint").get<std::string>());
      if (!c) throw DataError("unknown constraint in policy JSON");
      policy.constraint = *c;
      for (const auto& [name, g] : j.at("groups").items()) {
         GroupMixture m;
         m.threshold_a = threshold_value(g.at("threshold_a"));
         m.threshold_b = threshold_value(g.at("threshold_b"));
         m.p = g.at("p").get<double>();
         m.p_ignore = g.value("p_ignore", 0.0);
         m.prediction_constant = g.value("prediction_constant", 0.0);
         policy.groups[name] = m;
      }
      const auto& d = j.at("diagnostics");
      policy.diagnostics.objective = d.value("objective", 0.0);
      policy.diagnostics.grid_size = d.value("grid_size", 0);
      if (policy.constraint == Constraint::demographic_parity) {
         policy.diagnostics.target_x = d.value("target_selection_rate", 0.0);
      }
      else {
         policy.diagnostics.target_x = d.value("target_fpr", 0.0);
         policy.diagnostics.target_y = d.value("target_tpr", 0.0);
      }
      return policy;
   }
   catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed policy JSON: ") + e.what());
   }
}

} // namespace breathfair
