#include "breathfair/fairness.hpp"
#include "breathfair/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

namespace bf = breathfair;

TEST_CASE("selection rate")
{
   CHECK(bf::selection_rate(std::vector<int>{1, 1, 1, 1}) == 1.0);
   CHECK(bf::selection_rate(std::vector<int>{1, 0, 1, 0}) == 0.5);
   CHECK_THROWS_AS(bf::selection_rate(std::vector<int>{}), bf::EmptyGroup);
}

TEST_CASE("demographic parity arithmetic")
{
   // female 1/2, male 4/5
   const std::vector<int> p{1, 0, 1, 1, 1, 1, 0};
   const std::vector<std::string> g{"female", "female", "male", "male", "male", "male", "male"};
   const auto r = bf::demographic_parity(p, g);
   CHECK(r.dp_ratio == doctest::Approx(0.625));
   CHECK(r.dp_difference == doctest::Approx(0.3));
   const std::vector<int> q{1, 0, 1, 0};
   const std::vector<std::string> h{"a", "a", "b", "b"};
   CHECK(bf::demographic_parity(q, h).dp_ratio == 1.0);
   CHECK(bf::demographic_parity(q, h).dp_difference == 0.0);
   const std::vector<int> zeros{0, 0, 0, 0};
   const auto d = bf::demographic_parity(zeros, h);
   CHECK(d.degenerate);
   CHECK(d.dp_ratio == 1.0);
}

TEST_CASE("group rates: perfect, inverted and undefined")
{
   const std::vector<int> y{1, 0, 1, 0};
   const std::vector<std::string> g{"a", "a", "b", "b"};
   for (const auto& [name, r] : bf::group_rates(y, y, g)) {
      CHECK(r.tpr == 1.0);
      CHECK(r.fpr == 0.0);
      CHECK(r.fnr == 0.0);
   }
   const std::vector<int> inv{0, 1, 0, 1};
   for (const auto& [name, r] : bf::group_rates(inv, y, g)) {
      CHECK(r.tpr == 0.0);
      CHECK(r.fpr == 1.0);
      CHECK(r.fnr == 1.0);
   }
   const std::vector<int> only_pos{1, 1, 1, 0};
   try {
      bf::group_rates(y, only_pos, g);
      FAIL("undefined fpr accepted");
   }
   catch (const bf::UndefinedRate& e) {
      CHECK(e.group() == "a");
   }
}

TEST_CASE("equalized odds arithmetic")
{
   // a: tpr 9/10, fpr 1/10; b: tpr 6/10, fpr 1/10
   std::vector<int> p;
   std::vector<int> y;
   std::vector<std::string> g;
   auto add = [&](const std::string& grp, int tp, int fn, int fp, int tn) {
      for (int i = 0; i < tp; ++i) p.push_back(1), y.push_back(1), g.push_back(grp);
      for (int i = 0; i < fn; ++i) p.push_back(0), y.push_back(1), g.push_back(grp);
      for (int i = 0; i < fp; ++i) p.push_back(1), y.push_back(0), g.push_back(grp);
      for (int i = 0; i < tn; ++i) p.push_back(0), y.push_back(0), g.push_back(grp);
   };
   add("a", 9, 1, 1, 9);
   add("b", 6, 4, 1, 9);
   const auto r = bf::equalized_odds(p, y, g);
   CHECK(r.eo_ratio == doctest::Approx(0.6 / 0.9));
   CHECK(r.eo_difference == doctest::Approx(0.3));
   p.clear(), y.clear(), g.clear();
   add("a", 3, 2, 1, 4);
   add("b", 3, 2, 1, 4);
   const auto s = bf::equalized_odds(p, y, g);
   CHECK(s.eo_ratio == 1.0);
   CHECK(s.eo_difference == 0.0);
}

TEST_CASE("accuracy")
{
   const std::vector<int> y{1, 0, 1, 0};
   CHECK(bf::accuracy(y, y) == 1.0);
   CHECK(bf::accuracy(std::vector<int>{0, 1, 0, 1}, y) == 0.0);
   CHECK(bf::accuracy(std::vector<int>{1, 1, 0, 0}, y) == 0.5);
}

TEST_CASE("1000 random trials agree exactly with count loops")
{
   bf::Rng rng(2024);
   int checked_odds = 0;
   for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 2 + rng.index(199);
      std::vector<int> p(n);
      std::vector<int> y(n);
      std::vector<std::string> g(n);
      const double bias = rng.uniform();
      for (std::size_t i = 0; i < n; ++i) {
         g[i] = i < 2 ? (i == 0 ? "female" : "male") : (rng.uniform() < 0.5 ? "female" : "male");
         y[i] = rng.uniform() < 0.5 ? 1 : 0;
         p[i] = rng.uniform() < (g[i] == "female" ? bias : 0.5) ? 1 : 0;
      }
      const auto t = oracle::count_loop(p, y, g);
      const auto dp = bf::demographic_parity(p, g);
      REQUIRE(dp.selection_rate.at("female") == t.sel_female);
      REQUIRE(dp.selection_rate.at("male") == t.sel_male);
      REQUIRE(dp.dp_ratio == t.dp_ratio);
      REQUIRE(dp.dp_difference == t.dp_difference);
      REQUIRE(bf::accuracy(p, y) == t.accuracy);
      if (!t.rates_defined) {
         CHECK_THROWS_AS(bf::equalized_odds(p, y, g), bf::UndefinedRate);
         continue;
      }
      ++checked_odds;
      const auto eo = bf::equalized_odds(p, y, g);
      const auto gr = bf::group_rates(p, y, g);
      REQUIRE(gr.at("female").confusion.tp == t.female.tp);
      REQUIRE(gr.at("female").confusion.fp == t.female.fp);
      REQUIRE(gr.at("male").confusion.tn == t.male.tn);
      REQUIRE(gr.at("male").confusion.fn == t.male.fn);
      REQUIRE(eo.tpr.at("female") == t.tpr_female);
      REQUIRE(eo.tpr.at("male") == t.tpr_male);
      REQUIRE(eo.fpr.at("female") == t.fpr_female);
      REQUIRE(eo.fpr.at("male") == t.fpr_male);
      REQUIRE(eo.fnr.at("female") == t.fnr_female);
      REQUIRE(eo.fnr.at("male") == t.fnr_male);
      REQUIRE(eo.eo_ratio == t.eo_ratio);
      REQUIRE(eo.eo_difference == t.eo_difference);
   }
   CHECK(checked_odds > 900);
}
