#pragma once

#include "breathfair/dataset.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace breathfair {

enum class Criterion { gini, entropy };

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view text);

struct TreeParams
{
   Criterion criterion = Criterion::gini;
   int min_samples_leaf = 1;
   int min_samples_split = 2;

   void validate() const;
   friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Flat node storage; node 0 is the root. Leaves have feature == -1.
struct TreeNode
{
   int feature = -1;
   double threshold = 0.0;
   int left = -1;
   int right = -1;
   int n_pos = 0;
   int n_neg = 0;

   bool is_leaf() const { return feature < 0; }
   friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree
{
   std::vector<TreeNode> nodes;

   std::size_t leaf_count() const;
   std::size_t depth() const;
   friend bool operator==(const Tree&, const Tree&) = default;
};

class EmptyTrainingSet : public DataError
{
public:
   using DataError::DataError;
};

class TooFewInstances : public DataError
{
public:
   using DataError::DataError;
};

/// Node impurity of a (n_pos, n_neg) split; entropy is in bits.
double impurity(int n_pos, int n_neg, Criterion criterion);

/// Greedy CART over rows of `x` (all rows the same width) with labels in {0, 1}.
/// Thresholds are midpoints of consecutive distinct values; x <= threshold goes left.
/// Among splits with equal impurity decrease the lower feature, then lower threshold wins.
Tree fit_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const TreeParams& params);
Tree fit_tree(const std::vector<Instance>& train, const TreeParams& params);

/// Positive fraction n_pos / (n_pos + n_neg) of the leaf reached by `features`.
double predict_score(const Tree& tree, std::span<const double> features);
double predict_score(const Tree& tree, const Instance& inst);
std::vector<double> predict_scores(const Tree& tree, const std::vector<Instance>& instances);

/// Hard label: 1 iff score > 0.5.
int predict_label(const Tree& tree, const Instance& inst);

nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);

struct ParamGrid
{
   std::vector<Criterion> criteria{Criterion::gini, Criterion::entropy};
   std::vector<int> leaf_values{2, 3, 4, 5};
   std::vector<int> split_values{2, 3, 4, 5};
   int folds = 5;

   /// Cells in iteration order: criterion, then leaf ascending, then split ascending.
   std::vector<TreeParams> cells() const;
};

struct FoldSpec
{
   int k = 5;
   bool group_by_patient = true;
   std::uint64_t seed = 0;
};

/// Fold id in [0, k) per instance. Label-stratified; patient-disjoint when grouped.
/// Throws TooFewInstances when some fold would be empty.
std::vector<int> make_folds(const std::vector<Instance>& instances, const FoldSpec& spec);

struct GridCell
{
   TreeParams params;
   double mean_accuracy = 0.0;
   std::vector<double> fold_accuracy;
};

struct GridResult
{
   TreeParams best;
   double best_accuracy = 0.0;
   std::vector<GridCell> cells;
};

/// k-fold grid search on validation accuracy; ties go to the earlier grid cell.
GridResult grid_search_cv(const std::vector<Instance>& train, const ParamGrid& grid, bool group_by_patient,
                          std::uint64_t seed);

/// Scores for every instance from a tree fitted on the other k-1 folds.
std::vector<double> out_of_fold_scores(const std::vector<Instance>& train, const TreeParams& params,
                                       const FoldSpec& spec);

} // namespace breathfair
