#pragma once

// Independent reference computations used by the unit tests and the acceptance binary.
// Nothing here calls into the library code it is meant to check.

#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

/// Plain integer tallies of one group.
struct Counts
{
   long n = 0;
   long selected = 0;
   long tp = 0;
   long fp = 0;
   long tn = 0;
   long fn = 0;
};

struct FairnessTruth
{
   Counts female;
   Counts male;
   double sel_female = 0.0;
   double sel_male = 0.0;
   double dp_ratio = 1.0;
   double dp_difference = 0.0;
   bool rates_defined = false;
   double tpr_female = 0.0;
   double tpr_male = 0.0;
   double fpr_female = 0.0;
   double fpr_male = 0.0;
   double fnr_female = 0.0;
   double fnr_male = 0.0;
   double eo_ratio = 1.0;
   double eo_difference = 0.0;
   long correct = 0;
   double accuracy = 0.0;
};

/// Count loops over the raw arrays; group strings are "female" / "male".
FairnessTruth count_loop(const std::vector<int>& pred, const std::vector<int>& label,
                         const std::vector<std::string>& group);

struct Sample
{
   double score;
   int label;
};

/// Best expected accuracy at selection rate r over all randomized pairs of score-threshold rules.
double best_accuracy_at_rate(const std::vector<Sample>& g, double r);

/// Highest tpr reachable at fpr x by randomizing between two score-threshold rules.
double best_tpr_at_fpr(const std::vector<Sample>& g, double x);

struct LatticeOptimum
{
   double objective = 0.0;
   int index = 0;
};

/// Exhaustive search over k / grid of the population-weighted expected accuracy.
LatticeOptimum dp_lattice_optimum(const std::vector<std::vector<Sample>>& groups, int grid);
LatticeOptimum eo_lattice_optimum(const std::vector<std::vector<Sample>>& groups, int grid);

/// All (fpr, tpr) points of deterministic thresholds; vertices of their upper hull.
std::vector<std::pair<double, double>> brute_force_roc_hull(const std::vector<Sample>& g);

/// Reads a numeric CSV; lines starting with '#' and non-numeric header lines are skipped.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

std::string fixture_dir();

} // namespace oracle
