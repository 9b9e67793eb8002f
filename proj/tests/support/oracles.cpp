#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#ifndef BREATHFAIR_FIXTURE_DIR
#error "BREATHFAIR_FIXTURE_DIR must be defined"
#endif

namespace oracle {

namespace {

double ratio_of(double a, double b)
{
   const double lo = std::min(a, b);
   const double hi = std::max(a, b);
   return hi == 0.0 ? 1.0 : lo / hi;
}

struct Op
{
   double x;
   double y;
};

// Operating points of every threshold: below the minimum, between each pair of distinct
// scores, and above the maximum.
std::vector<double> thresholds(const std::vector<Sample>& g)
{
   std::set<double> s;
   for (const auto& v : g) s.insert(v.score);
   std::vector<double> u(s.begin(), s.end());
   std::vector<double> t{-std::numeric_limits<double>::infinity()};
   for (std::size_t i = 0; i + 1 < u.size(); ++i) t.push_back(0.5 * (u[i] + u[i + 1]));
   t.push_back(std::numeric_limits<double>::infinity());
   return t;
}

std::vector<Op> selection_points(const std::vector<Sample>& g)
{
   std::vector<Op> out;
   for (double t : thresholds(g)) {
      long sel = 0;
      long ok = 0;
      for (const auto& v : g) {
         const int p = v.score > t ? 1 : 0;
         sel += p;
         ok += p == v.label ? 1 : 0;
      }
      out.push_back({static_cast<double>(sel) / g.size(), static_cast<double>(ok) / g.size()});
   }
   return out;
}

std::vector<Op> roc_points(const std::vector<Sample>& g)
{
   long pos = 0;
   for (const auto& v : g) pos += v.label;
   const long neg = static_cast<long>(g.size()) - pos;
   std::vector<Op> out;
   for (double t : thresholds(g)) {
      long tp = 0;
      long fp = 0;
      for (const auto& v : g) {
         if (v.score > t) (v.label == 1 ? tp : fp) += 1;
      }
      out.push_back({neg > 0 ? static_cast<double>(fp) / neg : 0.0, pos > 0 ? static_cast<double>(tp) / pos : 0.0});
   }
   return out;
}

// max over pairs (a, b) with a.x <= x <= b.x of the linear interpolation at x.
double best_pair_value(const std::vector<Op>& pts, double x)
{
   double best = -std::numeric_limits<double>::infinity();
   for (const auto& a : pts) {
      for (const auto& b : pts) {
         if (a.x > x + 1e-15 || b.x < x - 1e-15) continue;
         double v;
         if (b.x - a.x <= 1e-15) v = std::max(a.y, b.y);
         else v = a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
         best = std::max(best, v);
      }
   }
   return best;
}

} // namespace

FairnessTruth count_loop(const std::vector<int>& pred, const std::vector<int>& label,
                         const std::vector<std::string>& group)
{
   FairnessTruth t;
   for (std::size_t i = 0; i < pred.size(); ++i) {
      Counts& c = group[i] == "female" ? t.female : t.male;
      c.n += 1;
      if (pred[i] == 1) c.selected += 1;
      if (pred[i] == 1 && label[i] == 1) c.tp += 1;
      if (pred[i] == 1 && label[i] == 0) c.fp += 1;
      if (pred[i] == 0 && label[i] == 0) c.tn += 1;
      if (pred[i] == 0 && label[i] == 1) c.fn += 1;
      if (pred[i] == label[i]) t.correct += 1;
   }
   t.sel_female = static_cast<double>(t.female.selected) / static_cast<double>(t.female.n);
   t.sel_male = static_cast<double>(t.male.selected) / static_cast<double>(t.male.n);
   t.dp_ratio = ratio_of(t.sel_female, t.sel_male);
   t.dp_difference = std::fabs(t.sel_female - t.sel_male);
   t.accuracy = static_cast<double>(t.correct) / static_cast<double>(pred.size());

   const long pf = t.female.tp + t.female.fn;
   const long nf = t.female.fp + t.female.tn;
   const long pm = t.male.tp + t.male.fn;
   const long nm = t.male.fp + t.male.tn;
   t.rates_defined = pf > 0 && nf > 0 && pm > 0 && nm > 0;
   if (t.rates_defined) {
      t.tpr_female = static_cast<double>(t.female.tp) / static_cast<double>(pf);
      t.tpr_male = static_cast<double>(t.male.tp) / static_cast<double>(pm);
      t.fpr_female = static_cast<double>(t.female.fp) / static_cast<double>(nf);
      t.fpr_male = static_cast<double>(t.male.fp) / static_cast<double>(nm);
      t.fnr_female = static_cast<double>(t.female.fn) / static_cast<double>(pf);
      t.fnr_male = static_cast<double>(t.male.fn) / static_cast<double>(pm);
      t.eo_ratio = std::min(ratio_of(t.tpr_female, t.tpr_male), ratio_of(t.fpr_female, t.fpr_male));
      t.eo_difference = std::max(std::fabs(t.tpr_female - t.tpr_male), std::fabs(t.fpr_female - t.fpr_male));
   }
   return t;
}

double best_accuracy_at_rate(const std::vector<Sample>& g, double r)
{
   return best_pair_value(selection_points(g), r);
}

double best_tpr_at_fpr(const std::vector<Sample>& g, double x)
{
   return best_pair_value(roc_points(g), x);
}

LatticeOptimum dp_lattice_optimum(const std::vector<std::vector<Sample>>& groups, int grid)
{
   std::size_t total = 0;
   for (const auto& g : groups) total += g.size();
   LatticeOptimum best{-1.0, -1};
   for (int k = 0; k <= grid; ++k) {
      const double r = static_cast<double>(k) / grid;
      double obj = 0.0;
      for (const auto& g : groups) obj += static_cast<double>(g.size()) / total * best_accuracy_at_rate(g, r);
      if (obj > best.objective) best = {obj, k};
   }
   return best;
}

LatticeOptimum eo_lattice_optimum(const std::vector<std::vector<Sample>>& groups, int grid)
{
   std::size_t total = 0;
   for (const auto& g : groups) total += g.size();
   LatticeOptimum best{-1.0, -1};
   for (int k = 0; k <= grid; ++k) {
      const double x = static_cast<double>(k) / grid;
      double y = 1.0;
      for (const auto& g : groups) y = std::min(y, best_tpr_at_fpr(g, x));
      double obj = 0.0;
      for (const auto& g : groups) {
         long pos = 0;
         for (const auto& v : g) pos += v.label;
         const double pi = static_cast<double>(pos) / g.size();
         obj += static_cast<double>(g.size()) / total * (pi * y + (1.0 - pi) * (1.0 - x));
      }
      if (obj > best.objective) best = {obj, k};
   }
   return best;
}

std::vector<std::pair<double, double>> brute_force_roc_hull(const std::vector<Sample>& g)
{
   // A point is a hull vertex iff it is not weakly below the segment of any other two points
   // that bracket it, and it is the top point at its x. Sorted by x then y.
   auto pts = roc_points(g);
   std::sort(pts.begin(), pts.end(), [](const Op& a, const Op& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
   pts.erase(std::unique(pts.begin(), pts.end(), [](const Op& a, const Op& b) { return a.x == b.x && a.y == b.y; }),
             pts.end());
   std::vector<std::pair<double, double>> out;
   for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      bool extreme = true;
      for (std::size_t a = 0; a < pts.size() && extreme; ++a) {
         for (std::size_t b = 0; b < pts.size() && extreme; ++b) {
            if (a == i || b == i) continue;
            const auto& pa = pts[a];
            const auto& pb = pts[b];
            if (pa.x == p.x && pa.y >= p.y) extreme = false;
            if (pa.x < p.x && pb.x > p.x) {
               const double y = pa.y + (pb.y - pa.y) * (p.x - pa.x) / (pb.x - pa.x);
               if (y >= p.y - 1e-12) extreme = false;
            }
         }
      }
      if (extreme) out.emplace_back(p.x, p.y);
   }
   return out;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path)
{
   std::ifstream in(path);
   if (!in) throw std::runtime_error("cannot open fixture " + path);
   std::vector<std::vector<double>> rows;
   std::string line;
   while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      bool numeric = true;
      while (std::getline(ss, cell, ',')) {
         try {
            std::size_t used = 0;
            row.push_back(std::stod(cell, &used));
         }
         catch (const std::exception&) {
            numeric = false;
            break;
         }
      }
      if (numeric) rows.push_back(std::move(row));
   }
   return rows;
}

std::string fixture_dir()
{
   return BREATHFAIR_FIXTURE_DIR;
}

} // namespace oracle
