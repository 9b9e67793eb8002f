#include "breathfair/stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

namespace bf = breathfair;

TEST_CASE("Welch on {1,2,3} vs {2,3,4}")
{
   const std::vector<double> a{1, 2, 3};
   const std::vector<double> b{2, 3, 4};
   const auto r = bf::welch_t_test(a, b);
   CHECK(std::fabs(r.t - (-1.224744871391589)) < 1e-9);
   CHECK(std::fabs(r.df - 4.0) < 1e-9);
   CHECK(r.mu_before == 2.0);
   CHECK(r.mu_after == 3.0);
   CHECK_FALSE(r.degenerate);
}

TEST_CASE("Welch identity and degenerate cases")
{
   const std::vector<double> a{0.3, 0.1, 0.7, 0.2};
   const auto r = bf::welch_t_test(a, a);
   CHECK(r.t == 0.0);
   CHECK(r.p == doctest::Approx(1.0));
   const std::vector<double> c{1, 1, 1};
   const std::vector<double> d{2, 2};
   const auto e = bf::welch_t_test(c, d);
   CHECK(e.degenerate);
   CHECK(e.p == 0.0);
   CHECK(std::isinf(e.t));
   CHECK(e.df == 3.0);
   const auto same = bf::welch_t_test(c, c);
   CHECK(same.t == 0.0);
   CHECK(same.p == 1.0);
   const std::vector<double> one{1.0};
   CHECK_THROWS_AS(bf::welch_t_test(one, a), bf::DataError);
}

TEST_CASE("two-sided p-values match the reference table")
{
   const auto rows = oracle::read_numeric_csv(oracle::fixture_dir() + "/t_two_sided_p.csv");
   REQUIRE(rows.size() == 100);
   for (const auto& r : rows) {
      CAPTURE(r[0]);
      CAPTURE(r[1]);
      REQUIRE(std::fabs(bf::student_t_two_sided_p(r[0], r[1]) - r[2]) < 1e-9);
   }
}

TEST_CASE("incomplete beta closed forms")
{
   // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a
   for (double x : {0.0, 0.1, 0.5, 0.93, 1.0}) {
      CHECK(bf::regularized_incomplete_beta(1.0, 3.5, x) == doctest::Approx(1.0 - std::pow(1.0 - x, 3.5)).epsilon(1e-12));
      CHECK(bf::regularized_incomplete_beta(2.5, 1.0, x) == doctest::Approx(std::pow(x, 2.5)).epsilon(1e-12));
   }
}

TEST_CASE("percent improvement")
{
   CHECK(bf::percent_improvement(3.0, 3.0) == 0.0);
   CHECK(std::fabs(bf::percent_improvement(4.85, 0.90) - 81.44) < 0.05);
   CHECK(std::fabs(bf::percent_improvement(84.17, 96.06) - 14.13) < 0.005);
   CHECK_THROWS_AS(bf::percent_improvement(0.0, 1.0), bf::ZeroBaseline);
}

TEST_CASE("run summaries")
{
   const std::vector<double> same(30, 0.42);
   const auto s = bf::summarize_phase(same);
   CHECK(s.mean == doctest::Approx(0.42));
   CHECK(s.std == 0.0);

   std::vector<double> half;
   for (int i = 0; i < 30; ++i) half.push_back(i % 2);
   const auto h = bf::summarize_phase(half);
   CHECK(h.mean == 0.5);
   CHECK(h.std == doctest::Approx(std::sqrt(0.25 * 30 / 29)));
   CHECK(h.stderr_ == doctest::Approx(h.std / std::sqrt(30.0)));

   const auto m = bf::summarize_runs({{"x", half, same}});
   REQUIRE(m.size() == 1);
   CHECK(m[0].n == 30);
   REQUIRE(m[0].pct_improvement);
   CHECK(*m[0].pct_improvement == doctest::Approx(16.0));
   const auto z = bf::summarize_runs({{"z", std::vector<double>(3, 0.0), {0.1, 0.2, 0.3}}});
   CHECK_FALSE(z[0].pct_improvement);
   CHECK_THROWS(bf::summarize_runs({{"bad", {1, 2}, {1, 2, 3}}}));
}
