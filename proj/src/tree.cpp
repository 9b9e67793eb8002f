#include "breathfair/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace breathfair {

std::string_view to_string(Criterion c)
{
   return c == Criterion::entropy ? "entropy" : "gini";
}

std::optional<Criterion> parse_criterion(std::string_view text)
{
   if (text == "gini") return Criterion::gini;
   if (text == "entropy") return Criterion::entropy;
   return std::nullopt;
}

void TreeParams::validate() const
{
   if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
   if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
}

std::size_t Tree::leaf_count() const
{
   return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t Tree::depth() const
{
   if (nodes.empty()) return 0;
   std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
   std::size_t deepest = 0;
   while (!stack.empty()) {
      const auto [id, d] = stack.back();
      stack.pop_back();
      deepest = std::max(deepest, d);
      const auto& n = nodes[static_cast<std::size_t>(id)];
      if (!n.is_leaf()) {
         stack.push_back({n.left, d + 1});
         stack.push_back({n.right, d + 1});
      }
   }
   return deepest;
}

double impurity(int n_pos, int n_neg, Criterion criterion)
{
   const int n = n_pos + n_neg;
   if (n <= 0) return 0.0;
   const double p = static_cast<double>(n_pos) / n;
   const double q = static_cast<double>(n_neg) / n;
   if (criterion == Criterion::gini) return 1.0 - p * p - q * q;
   double h = 0.0;
   if (p > 0.0) h -= p * std::log2(p);
   if (q > 0.0) h -= q * std::log2(q);
   return h;
}

namespace {

// Accepted splits must beat this; equal-within-tolerance candidates keep the earlier one.
constexpr double kMinGain = 1e-12;

class Builder
{
public:
   Builder(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const TreeParams& params)
      : x_(x), y_(y), params_(params), n_features_(x.front().size())
   {}

   Tree build()
   {
      std::vector<std::size_t> rows(x_.size());
      std::iota(rows.begin(), rows.end(), 0);
      grow(rows);
      return std::move(tree_);
   }

private:
   struct Split
   {
      int feature = -1;
      double threshold = 0.0;
      double gain = 0.0;
   };

   int grow(const std::vector<std::size_t>& rows)
   {
      int pos = 0;
      for (auto r : rows) pos += y_[r];
      const int neg = static_cast<int>(rows.size()) - pos;

      const int id = static_cast<int>(tree_.nodes.size());
      tree_.nodes.push_back({-1, 0.0, -1, -1, pos, neg});

      if (static_cast<int>(rows.size()) < params_.min_samples_split || pos == 0 || neg == 0) return id;
      const Split best = best_split(rows, pos, neg);
      if (best.feature < 0) return id;

      std::vector<std::size_t> left;
      std::vector<std::size_t> right;
      for (auto r : rows) (x_[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(r);

      const int l = grow(left);
      const int r = grow(right);
      auto& node = tree_.nodes[static_cast<std::size_t>(id)];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = l;
      node.right = r;
      return id;
   }

   Split best_split(const std::vector<std::size_t>& rows, int pos, int neg) const
   {
      const int n = pos + neg;
      const double parent = impurity(pos, neg, params_.criterion);
      const int min_leaf = params_.min_samples_leaf;
      Split best;
      best.gain = kMinGain;

      std::vector<std::pair<double, int>> column(rows.size());
      for (std::size_t f = 0; f < n_features_; ++f) {
         for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_[rows[i]][f], y_[rows[i]]};
         std::sort(column.begin(), column.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

         int left_pos = 0;
         for (int i = 0; i + 1 < n; ++i) {
            left_pos += column[static_cast<std::size_t>(i)].second;
            const double v = column[static_cast<std::size_t>(i)].first;
            const double next = column[static_cast<std::size_t>(i) + 1].first;
            if (!(v < next)) continue;
            const int n_left = i + 1;
            const int n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const int left_neg = n_left - left_pos;
            const double child = (n_left * impurity(left_pos, left_neg, params_.criterion) +
                                  n_right * impurity(pos - left_pos, neg - left_neg, params_.criterion)) /
                                 n;
            const double gain = parent - child;
            if (gain > best.gain + (best.feature < 0 ? 0.0 : kMinGain)) {
               best.feature = static_cast<int>(f);
               // correctly rounded midpoint; for adjacent doubles it can round up to next
               double mid = v / 2.0 + next / 2.0;
               if (mid >= next) mid = v;
               best.threshold = mid;
               best.gain = gain;
            }
         }
      }
      return best;
   }

   const std::vector<std::vector<double>>& x_;
   const std::vector<int>& y_;
   const TreeParams& params_;
   std::size_t n_features_;
   Tree tree_;
};

std::vector<std::vector<double>> design_matrix(const std::vector<Instance>& instances)
{
   std::vector<std::vector<double>> x;
   x.reserve(instances.size());
   for (const auto& inst : instances) {
      const auto f = inst.model_features();
      x.emplace_back(f.begin(), f.end());
   }
   return x;
}

std::vector<int> label_vector(const std::vector<Instance>& instances)
{
   std::vector<int> y;
   y.reserve(instances.size());
   for (const auto& inst : instances) y.push_back(inst.label_bit());
   return y;
}

} // namespace

Tree fit_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const TreeParams& params)
{
   params.validate();
   if (x.empty()) throw EmptyTrainingSet("fit_tree: no training instances");
   if (x.size() != y.size()) throw ConfigError("fit_tree: feature and label counts differ");
   const std::size_t width = x.front().size();
   if (width == 0) throw EmptyTrainingSet("fit_tree: no features");
   for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != width) throw ConfigError("fit_tree: ragged feature rows");
      if (y[i] != 0 && y[i] != 1) throw ConfigError("fit_tree: labels must be 0 or 1");
   }
   return Builder(x, y, params).build();
}

Tree fit_tree(const std::vector<Instance>& train, const TreeParams& params)
{
   if (train.empty()) throw EmptyTrainingSet("fit_tree: no training instances");
   return fit_tree(design_matrix(train), label_vector(train), params);
}

double predict_score(const Tree& tree, std::span<const double> features)
{
   if (tree.nodes.empty()) throw ConfigError("predict_score: tree is not fitted");
   std::size_t id = 0;
   while (!tree.nodes[id].is_leaf()) {
      const auto& n = tree.nodes[id];
      if (static_cast<std::size_t>(n.feature) >= features.size()) throw ConfigError("predict_score: feature vector too short");
      id = static_cast<std::size_t>(features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
   }
   const auto& leaf = tree.nodes[id];
   return static_cast<double>(leaf.n_pos) / (leaf.n_pos + leaf.n_neg);
}

double predict_score(const Tree& tree, const Instance& inst)
{
   const auto f = inst.model_features();
   return predict_score(tree, std::span<const double>(f));
}

std::vector<double> predict_scores(const Tree& tree, const std::vector<Instance>& instances)
{
   std::vector<double> out;
   out.reserve(instances.size());
   for (const auto& inst : instances) out.push_back(predict_score(tree, inst));
   return out;
}

int predict_label(const Tree& tree, const Instance& inst)
{
   return predict_score(tree, inst) > 0.5 ? 1 : 0;
}

namespace {

nlohmann::json node_to_json(const Tree& tree, int id)
{
   const auto& n = tree.nodes[static_cast<std::size_t>(id)];
   if (n.is_leaf()) return {{"n_pos", n.n_pos}, {"n_neg", n.n_neg}};
   return {{"feature_index", n.feature},
           {"threshold", n.threshold},
           {"n_pos", n.n_pos},
           {"n_neg", n.n_neg},
           {"left", node_to_json(tree, n.left)},
           {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& tree)
{
   const int id = static_cast<int>(tree.nodes.size());
   tree.nodes.push_back({});
   TreeNode n;
   n.n_pos = j.at("n_pos").get<int>();
   n.n_neg = j.at("n_neg").get<int>();
   if (j.contains("feature_index")) {
      n.feature = j.at("feature_index").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.left = node_from_json(j.at("left"), tree);
      n.right = node_from_json(j.at("right"), tree);
   }
   tree.nodes[static_cast<std::size_t>(id)] = n;
   return id;
}

} // namespace

nlohmann::json tree_to_json(const Tree& tree)
{
   if (tree.nodes.empty()) return nullptr;
   return node_to_json(tree, 0);
}

Tree tree_from_json(const nlohmann::json& j)
{
   Tree tree;
   if (j.is_null()) return tree;
   try {
      node_from_json(j, tree);
   }
   catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed tree JSON: ") + e.what());
   }
   return tree;
}

std::vector<TreeParams> ParamGrid::cells() const
{
   std::vector<TreeParams> out;
   for (auto c : criteria) {
      for (int leaf : leaf_values) {
         for (int split : split_values) out.push_back({c, leaf, split});
      }
   }
   return out;
}

std::vector<int> make_folds(const std::vector<Instance>& instances, const FoldSpec& spec)
{
   if (spec.k < 2) throw ConfigError("cross-validation needs k >= 2");
   const auto k = static_cast<std::size_t>(spec.k);

   // Units: patients when grouped, otherwise single instances.
   std::map<std::string, std::vector<std::size_t>> by_patient;
   std::vector<std::vector<std::size_t>> units;
   if (spec.group_by_patient) {
      for (std::size_t i = 0; i < instances.size(); ++i) by_patient[instances[i].patient_id].push_back(i);
      for (auto& [id, members] : by_patient) units.push_back(std::move(members));
   }
   else {
      for (std::size_t i = 0; i < instances.size(); ++i) units.push_back({i});
   }

   std::vector<std::size_t> per_label[2];
   for (std::size_t u = 0; u < units.size(); ++u) per_label[instances[units[u].front()].label_bit()].push_back(u);

   Rng rng(spec.seed);
   std::vector<int> fold(instances.size(), -1);
   std::vector<std::size_t> fold_size(k, 0);
   for (auto& label_units : per_label) {
      rng.shuffle(label_units.begin(), label_units.end());
      std::vector<std::size_t> label_count(k, 0);
      for (auto u : label_units) {
         // Smallest fold for this label, then smallest overall, then lowest index.
         std::size_t target = 0;
         for (std::size_t f = 1; f < k; ++f) {
            if (label_count[f] < label_count[target] ||
                (label_count[f] == label_count[target] && fold_size[f] < fold_size[target])) {
               target = f;
            }
         }
         label_count[target] += units[u].size();
         fold_size[target] += units[u].size();
         for (auto i : units[u]) fold[i] = static_cast<int>(target);
      }
   }
   for (std::size_t f = 0; f < k; ++f) {
      if (fold_size[f] == 0) {
         throw TooFewInstances("cannot form " + std::to_string(k) + " non-empty folds from " + std::to_string(units.size()) +
                               (spec.group_by_patient ? " patients" : " instances"));
      }
   }
   return fold;
}

namespace {

struct FoldData
{
   std::vector<std::vector<double>> x_train;
   std::vector<int> y_train;
   std::vector<std::size_t> held_out;
};

std::vector<FoldData> split_folds(const std::vector<Instance>& data, const std::vector<int>& fold, int k)
{
   const auto x = design_matrix(data);
   std::vector<FoldData> out(static_cast<std::size_t>(k));
   for (std::size_t i = 0; i < data.size(); ++i) {
      for (int f = 0; f < k; ++f) {
         auto& fd = out[static_cast<std::size_t>(f)];
         if (fold[i] == f) fd.held_out.push_back(i);
         else {
            fd.x_train.push_back(x[i]);
            fd.y_train.push_back(data[i].label_bit());
         }
      }
   }
   for (const auto& fd : out) {
      if (fd.x_train.empty()) throw TooFewInstances("a cross-validation fold leaves no training data");
   }
   return out;
}

} // namespace

GridResult grid_search_cv(const std::vector<Instance>& train, const ParamGrid& grid, bool group_by_patient,
                          std::uint64_t seed)
{
   const auto cells = grid.cells();
   if (cells.empty()) throw ConfigError("parameter grid is empty");
   if (train.size() < static_cast<std::size_t>(grid.folds)) {
      throw TooFewInstances("grid search needs at least " + std::to_string(grid.folds) + " instances");
   }
   const auto fold = make_folds(train, {grid.folds, group_by_patient, seed});
   const auto folds = split_folds(train, fold, grid.folds);
   const auto x = design_matrix(train);

   GridResult result;
   result.best_accuracy = -1.0;
   for (const auto& params : cells) {
      GridCell cell{params, 0.0, {}};
      for (const auto& fd : folds) {
         const Tree tree = fit_tree(fd.x_train, fd.y_train, params);
         int correct = 0;
         for (auto i : fd.held_out) {
            const int pred = predict_score(tree, x[i]) > 0.5 ? 1 : 0;
            correct += pred == train[i].label_bit() ? 1 : 0;
         }
         cell.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(fd.held_out.size()));
      }
      cell.mean_accuracy =
         std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) / static_cast<double>(folds.size());
      if (cell.mean_accuracy > result.best_accuracy) {
         result.best_accuracy = cell.mean_accuracy;
         result.best = params;
      }
      result.cells.push_back(std::move(cell));
   }
   return result;
}

std::vector<double> out_of_fold_scores(const std::vector<Instance>& train, const TreeParams& params, const FoldSpec& spec)
{
   const auto fold = make_folds(train, spec);
   const auto folds = split_folds(train, fold, spec.k);
   const auto x = design_matrix(train);
   std::vector<double> scores(train.size(), 0.0);
   for (const auto& fd : folds) {
      const Tree tree = fit_tree(fd.x_train, fd.y_train, params);
      for (auto i : fd.held_out) scores[i] = predict_score(tree, x[i]);
   }
   return scores;
}

} // namespace breathfair
