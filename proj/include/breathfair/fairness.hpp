#pragma once

#include "breathfair/error.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace breathfair {

class EmptyGroup : public DataError
{
public:
   using DataError::DataError;
};

class UndefinedRate : public DataError
{
public:
   UndefinedRate(std::string group, std::string which)
      : DataError("rate " + which + " is undefined for group '" + group + "'"), group_(std::move(group)),
        which_(std::move(which))
   {}
   const std::string& group() const { return group_; }
   const std::string& which() const { return which_; }

private:
   std::string group_;
   std::string which_;
};

/// Share of ones; throws EmptyGroup on an empty sequence.
double selection_rate(std::span<const int> predictions);

struct ParityReport
{
   std::map<std::string, double> selection_rate;
   double dp_ratio = 1.0;
   double dp_difference = 0.0;
   /// All selection rates are zero; ratio is then 1 by convention.
   bool degenerate = false;
};

/// Needs at least two groups, each non-empty.
ParityReport demographic_parity(std::span<const int> predictions, std::span<const std::string> groups);

struct GroupConfusion
{
   long tp = 0;
   long fp = 0;
   long tn = 0;
   long fn = 0;

   long size() const { return tp + fp + tn + fn; }
   friend bool operator==(const GroupConfusion&, const GroupConfusion&) = default;
};

struct GroupRates
{
   GroupConfusion confusion;
   double tpr = 0.0;
   double fpr = 0.0;
   double fnr = 0.0;
   double tnr = 0.0;
};

/// Throws UndefinedRate when a group lacks positive or negative labels.
std::map<std::string, GroupRates> group_rates(std::span<const int> predictions, std::span<const int> labels,
                                              std::span<const std::string> groups);

struct OddsReport
{
   std::map<std::string, double> tpr;
   std::map<std::string, double> fpr;
   std::map<std::string, double> fnr;
   double eo_ratio = 1.0;
   double eo_difference = 0.0;
};

OddsReport equalized_odds(std::span<const int> predictions, std::span<const int> labels,
                          std::span<const std::string> groups);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// min/max with the 0/0 := 1 convention.
double min_max_ratio(const std::map<std::string, double>& values);
double max_minus_min(const std::map<std::string, double>& values);

} // namespace breathfair
