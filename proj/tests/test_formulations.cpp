#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace softpd;
using Catch::Approx;

TEST_CASE("penalty weight sits strictly between the stage reciprocals") {
  CHECK(margin_penalty(1) == Approx(0.75));
  CHECK(margin_penalty(2) == Approx(2.5 / 6.0));
  for (long t : {1L, 2L, 3L, 7L, 10L, 100L, 1000000L}) {
    const double f = margin_penalty(t);
    CHECK(f < 1.0 / static_cast<double>(t));
    CHECK(f > 1.0 / static_cast<double>(t + 1));
  }
  CHECK_THROWS_AS(margin_penalty(0), std::invalid_argument);
  CHECK_THROWS_AS(margin_penalty(-2), std::invalid_argument);
}

TEST_CASE("sigma aggregates the farthest projection per ordered pair") {
  const auto data = testsupport::five_point();
  const auto sites = testsupport::five_point_sites();
  const auto s = build_sigma(data, sites);
  CHECK(s.k == 2);
  CHECK(s.d(0, 1) == Approx(5.0));
  CHECK(s.at(0, 1) == Approx(6.0));   // farthest of {0, 1, 6} along +1
  CHECK(s.at(1, 0) == Approx(-4.0));  // farthest of {4, 5} along -1

  // Pointwise definition on a random instance.
  std::mt19937 rng(3);
  const auto d2 = testsupport::random_instance(rng, 15, 4, 3, 0.8);
  const auto m = d2.cluster_means();
  const auto s2 = build_sigma(d2, m);
  const auto pt = build_pair_table(m);
  for (std::size_t i = 0; i < d2.clusters(); ++i)
    for (std::size_t j = 0; j < d2.clusters(); ++j) {
      if (i == j) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < d2.size(); ++l)
        if (static_cast<std::size_t>(d2.label(l)) == i)
          best = std::max(best, dot(pt.unit(i, j), d2.point(l)));
      CHECK(s2.at(i, j) == Approx(best));
    }
}

TEST_CASE("hard margin program has one row per ordered pair") {
  const auto data = testsupport::five_point();
  const auto sites = testsupport::five_point_sites();
  const auto lp = build_hard_margin_lp(build_sigma(data, sites));
  REQUIRE(lp.nvars == 2);
  REQUIRE(lp.row_count() == 2);
  CHECK(lp.var_names == std::vector<std::string>{"G0000002", "EPSILON"});
  for (std::size_t c = 0; c < lp.nvars; ++c)
    CHECK(lp.var_sign[c] == VarSign::Free);
  // (0,1): sigma 6, dist 5 -> -gamma2/5 + eps <= -6.
  CHECK(lp.row(0)[0] == Approx(-0.2));
  CHECK(lp.row(0)[1] == Approx(1.0));
  CHECK(lp.rhs[0] == Approx(-6.0));
  // (1,0): sigma -4 -> gamma2/5 + eps <= 4.
  CHECK(lp.row(1)[0] == Approx(0.2));
  CHECK(lp.rhs[1] == Approx(4.0));

  const auto sol = solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[1] == Approx(-1.0));   // largest margin
  CHECK(sol.x[0] == Approx(25.0));   // gamma_2 = 5 * 5

  SECTION("three clusters produce k(k-1) rows") {
    const Dataset d3(1, 3, {0.0, 4.0, 9.0, 10.0}, {0, 1, 2, 2});
    const auto lp3 = build_hard_margin_lp(build_sigma(d3, d3.cluster_means()));
    CHECK(lp3.nvars == 3);
    CHECK(lp3.row_count() == 6);
    CHECK(lp3.var_names[0] == "G0000002");
    CHECK(lp3.var_names[1] == "G0000003");
  }
}

TEST_CASE("soft program shapes, names and objective") {
  const auto data = testsupport::five_point();
  const auto sites = testsupport::five_point_sites();

  const auto per_point = build_soft_lp(data, sites, 2, Variant::PerPoint);
  REQUIRE(per_point.nvars == 7);  // gamma_2, eps, five penalties
  REQUIRE(per_point.row_count() == 5);
  CHECK(per_point.var_names[0] == "G0000002");
  CHECK(per_point.var_names[1] == "EPSILON");
  CHECK(per_point.var_names[2] == "X0000001");
  CHECK(per_point.var_names[6] == "X0000005");
  CHECK(per_point.var_sign[1] == VarSign::Free);
  CHECK(per_point.var_sign[2] == VarSign::NonNegative);
  const double f2 = margin_penalty(2);
  CHECK(per_point.objective[1] == Approx(1.0));
  for (std::size_t c = 2; c < 7; ++c)
    CHECK(per_point.objective[c] == Approx(-f2));

  // With two clusters the per-pair program coincides shape-wise.
  const auto per_pair = build_soft_lp(data, sites, 2, Variant::PerPair);
  CHECK(per_pair.nvars == per_point.nvars);
  CHECK(per_pair.row_count() == per_point.row_count());

  SECTION("per pair penalties multiply with more clusters") {
    const Dataset d3(1, 3, {0.0, 4.0, 9.0, 10.0}, {0, 1, 2, 2});
    const auto m = d3.cluster_means();
    const auto mme = build_soft_lp(d3, m, 1, Variant::PerPair);
    CHECK(mme.nvars == 3 + 4 * 2);
    CHECK(mme.row_count() == 8);
    const auto mep = build_soft_lp(d3, m, 1, Variant::PerPoint);
    CHECK(mep.nvars == 3 + 4);
    CHECK(mep.row_count() == 8);
  }
}

TEST_CASE("five point stage optima match the reference curve") {
  const auto data = testsupport::five_point();
  const auto sites = testsupport::five_point_sites();

  SECTION("stage 1 keeps the hard optimum, no penalties paid") {
    const auto out = extract_soft_solution(
        solve(build_soft_lp(data, sites, 1, Variant::PerPoint)), data, sites, 1,
        Variant::PerPoint);
    REQUIRE(out.solution.has_value());
    CHECK(out.solution->epsilon == Approx(-1.0));
    CHECK(out.solution->objective == Approx(-1.0));
    for (double v : out.solution->xi) CHECK(v == Approx(0.0).margin(1e-9));
  }

  SECTION("stage 2 buys out the two crossing points") {
    const auto out = extract_soft_solution(
        solve(build_soft_lp(data, sites, 2, Variant::PerPoint)), data, sites, 2,
        Variant::PerPoint);
    REQUIRE(out.solution.has_value());
    const auto& s = *out.solution;
    CHECK(s.epsilon == Approx(2.0));
    CHECK(s.objective == Approx(-0.5));
    REQUIRE(s.xi.size() == 5);
    CHECK(s.xi[0] == Approx(0.0).margin(1e-9));
    CHECK(s.xi[1] == Approx(0.0).margin(1e-9));
    CHECK(s.xi[2] == Approx(5.0));
    CHECK(s.xi[3] == Approx(1.0));
    CHECK(s.xi[4] == Approx(0.0).margin(1e-9));
    CHECK(s.diagram.gamma[1] == Approx(15.0));  // boundary at 3
  }

  SECTION("stage 3 improves the objective but not the margin") {
    const auto out = extract_soft_solution(
        solve(build_soft_lp(data, sites, 3, Variant::PerPoint)), data, sites, 3,
        Variant::PerPoint);
    REQUIRE(out.solution.has_value());
    CHECK(out.solution->epsilon == Approx(2.0));
    CHECK(out.solution->objective == Approx(0.25));
  }

  SECTION("stages 4 and 5 are unbounded") {
    for (long t : {4L, 5L}) {
      const auto sol = solve(build_soft_lp(data, sites, t, Variant::PerPoint));
      CHECK(sol.status == LpStatus::Unbounded);
      const auto out = extract_soft_solution(sol, data, sites, t, Variant::PerPoint);
      CHECK(out.status == LpStatus::Unbounded);
      CHECK_FALSE(out.solution.has_value());
    }
  }

  SECTION("with two clusters both penalty variants coincide") {
    for (long t : {1L, 2L, 3L}) {
      const auto a = extract_soft_solution(
          solve(build_soft_lp(data, sites, t, Variant::PerPoint)), data, sites,
          t, Variant::PerPoint);
      const auto b = extract_soft_solution(
          solve(build_soft_lp(data, sites, t, Variant::PerPair)), data, sites,
          t, Variant::PerPair);
      REQUIRE(a.solution.has_value());
      REQUIRE(b.solution.has_value());
      CHECK(a.solution->epsilon == Approx(b.solution->epsilon));
      CHECK(a.solution->objective == Approx(b.solution->objective));
    }
  }
}

TEST_CASE("separable data pays no penalty at stage one") {
  const auto pair = testsupport::symmetric_pair();
  const auto m = pair.cluster_means();
  const auto out = extract_soft_solution(
      solve(build_soft_lp(pair, m, 1, Variant::PerPoint)), pair, m, 1,
      Variant::PerPoint);
  REQUIRE(out.solution.has_value());
  CHECK(out.solution->epsilon == Approx(1.0));
  CHECK(out.solution->objective == Approx(1.0));
}

TEST_CASE("solution assembly validates penalties and rows") {
  const auto data = testsupport::five_point();
  const auto sites = testsupport::five_point_sites();

  // gamma_2 = 15 puts the boundary at 3; margin 2 with xi = (0,0,5,1,0).
  const std::vector<double> good{15.0, 2.0, 0.0, 0.0, 5.0, 1.0, 0.0};
  const auto s = soft_solution_from_point(good, data, sites, 2, Variant::PerPoint);
  CHECK(s.objective == Approx(-0.5));

  // A slightly negative penalty inside tolerance is clamped to zero.
  std::vector<double> near = good;
  near[2] = -0.5 * kNumTol;
  CHECK(soft_solution_from_point(near, data, sites, 2, Variant::PerPoint).xi[0] == 0.0);

  // Further below tolerance it is an error.
  std::vector<double> bad = good;
  bad[2] = -1e-3;
  CHECK_THROWS_AS(soft_solution_from_point(bad, data, sites, 2, Variant::PerPoint),
                  NumericError);

  // Penalties too small for the claimed margin violate a row.
  std::vector<double> short_xi{15.0, 2.0, 0.0, 0.0, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(
      soft_solution_from_point(short_xi, data, sites, 2, Variant::PerPoint),
      NumericError);
}

TEST_CASE("site feasibility program separates the separable and not the rest") {
  SECTION("strictly separable data admits aligned sites") {
    const auto pair = testsupport::symmetric_pair();
    const auto lp = build_site_feasibility_lp(pair);
    CHECK(lp.nvars == 2 * 1 + 1);
    const auto sol = solve_feasibility(lp);
    CHECK(sol.status == LpStatus::Optimal);
  }

  SECTION("an interval piercing another cluster has no separating diagram") {
    const Dataset bad(1, 2, {0.0, 2.0, 1.2}, {0, 0, 1});
    const auto sol = solve_feasibility(build_site_feasibility_lp(bad));
    CHECK(sol.status == LpStatus::Infeasible);
  }

  SECTION("feasible sites from the program do separate after a hard solve") {
    const Dataset d(2, 2, {0.0, 0.0, 1.0, 0.2, 3.0, 0.1, 4.0, -0.3},
                    {0, 0, 1, 1});
    const auto sol = solve_feasibility(build_site_feasibility_lp(d));
    REQUIRE(sol.status == LpStatus::Optimal);
    std::vector<double> coords(sol.x.begin(), sol.x.begin() + 4);
    const SiteSet sites(2, coords);
    const auto hard = solve(build_hard_margin_lp(build_sigma(d, sites)));
    REQUIRE(hard.status == LpStatus::Optimal);
    CHECK(hard.x.back() >= -kNumTol);
  }
}

TEST_CASE("final stage programs are always unbounded") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = testsupport::random_instance(rng, 10, 3, 2, 1.5);
    const auto m = data.cluster_means();
    for (Variant v : {Variant::PerPoint, Variant::PerPair}) {
      const long t_max = v == Variant::PerPoint
                             ? static_cast<long>(data.size())
                             : static_cast<long>(data.size() * (data.clusters() - 1));
      const auto sol = solve(build_soft_lp(data, m, t_max, v));
      CHECK(sol.status == LpStatus::Unbounded);
    }
  }
}
