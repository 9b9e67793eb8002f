#include "breathfair/fairness.hpp"

#include <algorithm>

namespace breathfair {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what)
{
   if (a != b) throw ConfigError(std::string(what) + ": input lengths differ");
}

} // namespace

double selection_rate(std::span<const int> predictions)
{
   if (predictions.empty()) throw EmptyGroup("selection_rate: empty prediction set");
   long ones = 0;
   for (int p : predictions) ones += p != 0 ? 1 : 0;
   return static_cast<double>(ones) / static_cast<double>(predictions.size());
}

double min_max_ratio(const std::map<std::string, double>& values)
{
   if (values.empty()) return 1.0;
   double lo = values.begin()->second;
   double hi = lo;
   for (const auto& [g, v] : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
   }
   return hi > 0.0 ? lo / hi : 1.0;
}

double max_minus_min(const std::map<std::string, double>& values)
{
   if (values.empty()) return 0.0;
   double lo = values.begin()->second;
   double hi = lo;
   for (const auto& [g, v] : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
   }
   return hi - lo;
}

ParityReport demographic_parity(std::span<const int> predictions, std::span<const std::string> groups)
{
   check_sizes(predictions.size(), groups.size(), "demographic_parity");
   std::map<std::string, std::pair<long, long>> counts; // ones, total
   for (std::size_t i = 0; i < predictions.size(); ++i) {
      auto& c = counts[groups[i]];
      c.first += predictions[i] != 0 ? 1 : 0;
      ++c.second;
   }
   if (counts.size() < 2) throw EmptyGroup("demographic_parity needs at least two non-empty groups");

   ParityReport r;
   for (const auto& [g, c] : counts) r.selection_rate[g] = static_cast<double>(c.first) / static_cast<double>(c.second);
   r.dp_ratio = min_max_ratio(r.selection_rate);
   r.dp_difference = max_minus_min(r.selection_rate);
   r.degenerate = std::all_of(r.selection_rate.begin(), r.selection_rate.end(), [](const auto& kv) { return kv.second == 0.0; });
   return r;
}

std::map<std::string, GroupRates> group_rates(std::span<const int> predictions, std::span<const int> labels,
                                              std::span<const std::string> groups)
{
   check_sizes(predictions.size(), labels.size(), "group_rates");
   check_sizes(predictions.size(), groups.size(), "group_rates");
   std::map<std::string, GroupRates> out;
   for (std::size_t i = 0; i < predictions.size(); ++i) {
      auto& c = out[groups[i]].confusion;
      const bool pred = predictions[i] != 0;
      const bool truth = labels[i] != 0;
      if (pred && truth) ++c.tp;
      else if (pred) ++c.fp;
      else if (truth) ++c.fn;
      else ++c.tn;
   }
   for (auto& [g, r] : out) {
      const auto& c = r.confusion;
      if (c.tp + c.fn == 0) throw UndefinedRate(g, "tpr");
      if (c.fp + c.tn == 0) throw UndefinedRate(g, "fpr");
      r.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
      r.fnr = static_cast<double>(c.fn) / static_cast<double>(c.tp + c.fn);
      r.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
      r.tnr = static_cast<double>(c.tn) / static_cast<double>(c.fp + c.tn);
   }
   return out;
}

OddsReport equalized_odds(std::span<const int> predictions, std::span<const int> labels,
                          std::span<const std::string> groups)
{
   const auto rates = group_rates(predictions, labels, groups);
   if (rates.size() < 2) throw EmptyGroup("equalized_odds needs at least two non-empty groups");
   OddsReport r;
   for (const auto& [g, gr] : rates) {
      r.tpr[g] = gr.tpr;
      r.fpr[g] = gr.fpr;
      r.fnr[g] = gr.fnr;
   }
   r.eo_ratio = std::min(min_max_ratio(r.tpr), min_max_ratio(r.fpr));
   r.eo_difference = std::max(max_minus_min(r.tpr), max_minus_min(r.fpr));
   return r;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels)
{
   check_sizes(predictions.size(), labels.size(), "accuracy");
   if (predictions.empty()) throw EmptyGroup("accuracy: empty prediction set");
   long hits = 0;
   for (std::size_t i = 0; i < predictions.size(); ++i) hits += (predictions[i] != 0) == (labels[i] != 0) ? 1 : 0;
   return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

} // namespace breathfair
