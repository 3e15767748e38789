#include <sstream>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "softpd/mps.hpp"

using namespace softpd;
using Catch::Approx;

namespace {

double row_dot(const LinearProgram& lp, std::size_t r, const std::vector<double>& x) {
  double s = 0.0;
  const auto row = lp.row(r);
  for (std::size_t c = 0; c < lp.nvars; ++c) s += row[c] * x[c];
  return s;
}

void check_primal_feasible(const LinearProgram& lp, const std::vector<double>& x,
                           double tol = 1e-7) {
  REQUIRE(x.size() == lp.nvars);
  for (std::size_t r = 0; r < lp.row_count(); ++r)
    CHECK(row_dot(lp, r, x) <= lp.rhs[r] + tol);
  for (std::size_t c = 0; c < lp.nvars; ++c)
    if (lp.var_sign[c] == VarSign::NonNegative) CHECK(x[c] >= -tol);
}

}  // namespace

TEST_CASE("two variable program solves to the known vertex") {
  // max 3x + 2y, x + y <= 4, x <= 2, y <= 3, x,y >= 0 -> (2,2), value 10.
  LinearProgram lp(2);
  lp.objective = {3.0, 2.0};
  lp.add_row(std::vector<double>{1.0, 1.0}, 4.0);
  lp.add_row(std::vector<double>{1.0, 0.0}, 2.0);
  lp.add_row(std::vector<double>{0.0, 1.0}, 3.0);
  const auto sol = solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == Approx(10.0));
  CHECK(sol.x[0] == Approx(2.0));
  CHECK(sol.x[1] == Approx(2.0));

  SECTION("duals satisfy complementary slackness") {
    REQUIRE(sol.duals.size() == 3);
    CHECK(sol.duals[0] == Approx(2.0));
    CHECK(sol.duals[1] == Approx(1.0));
    CHECK(sol.duals[2] == Approx(0.0));
    for (std::size_t r = 0; r < 3; ++r) {
      const double slack = lp.rhs[r] - row_dot(lp, r, sol.x);
      CHECK(sol.duals[r] * slack == Approx(0.0).margin(1e-7));
      CHECK(sol.duals[r] >= -1e-9);
    }
    // Dual feasibility: reduced costs of structural columns are nonpositive.
    for (std::size_t c = 0; c < lp.nvars; ++c) {
      double red = lp.objective[c];
      for (std::size_t r = 0; r < 3; ++r) red -= sol.duals[r] * lp.row(r)[c];
      CHECK(red <= 1e-7);
    }
  }
}

TEST_CASE("free variables reach negative coordinates") {
  // max -x, x free, x >= -5 encoded as -x <= 5.
  LinearProgram lp(1);
  lp.var_sign[0] = VarSign::Free;
  lp.objective = {-1.0};
  lp.add_row(std::vector<double>{-1.0}, 5.0);
  const auto sol = solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == Approx(-5.0));
  CHECK(sol.objective == Approx(5.0));
}

TEST_CASE("degenerate pivoting survives the classic cycling example") {
  LinearProgram lp(4);
  lp.objective = {0.75, -150.0, 0.02, -6.0};
  lp.add_row(std::vector<double>{0.25, -60.0, -0.04, 9.0}, 0.0);
  lp.add_row(std::vector<double>{0.5, -90.0, -0.02, 3.0}, 0.0);
  lp.add_row(std::vector<double>{0.0, 0.0, 1.0, 0.0}, 1.0);
  const auto sol = solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == Approx(0.05));
  check_primal_feasible(lp, sol.x);
}

TEST_CASE("phase one keeps positive artificials pivotable at true ratios") {
  // Regression: an all-free program whose phase 1 once forced a zero-ratio
  // pivot on an artificial still at positive value, corrupting the tableau
  // and returning a "solution" that violated two rows by ~4e-2.
  LinearProgram lp(3);
  lp.var_sign = {VarSign::Free, VarSign::Free, VarSign::Free};
  lp.objective = {0.0, 0.0, 1.0};
  const double a = 2.6027143291302766;
  const double b = 7.6496009421915403;
  const double c = 1.9419736379023245;
  lp.add_row(std::vector<double>{-a, 0.0, 1.0}, -0.88134322773566731);
  lp.add_row(std::vector<double>{0.0, -b, 1.0}, -0.45479308109178329);
  lp.add_row(std::vector<double>{a, 0.0, 1.0}, 0.39698067092034239);
  lp.add_row(std::vector<double>{c, -c, 1.0}, 0.39698067092034239);
  lp.add_row(std::vector<double>{0.0, b, 1.0}, -0.76990095753267218);
  lp.add_row(std::vector<double>{-c, c, 1.0}, -0.76990095753267218);
  const auto sol = solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == Approx(-0.612347019).epsilon(1e-7));
  check_primal_feasible(lp, sol.x);
}

TEST_CASE("infeasible systems are reported as such") {
  LinearProgram lp(1);
  lp.objective = {1.0};
  lp.add_row(std::vector<double>{1.0}, 1.0);
  lp.add_row(std::vector<double>{-1.0}, -3.0);  // x >= 3 contradicts x <= 1
  const auto sol = solve(lp);
  CHECK(sol.status == LpStatus::Infeasible);
}

TEST_CASE("unbounded programs come with a verified improving ray") {
  LinearProgram lp(2);
  lp.objective = {1.0, 0.0};
  lp.add_row(std::vector<double>{-1.0, 1.0}, 2.0);
  lp.add_row(std::vector<double>{0.0, 1.0}, 3.0);
  const auto sol = solve(lp);
  REQUIRE(sol.status == LpStatus::Unbounded);
  REQUIRE(sol.ray.size() == 2);
  double gain = 0.0;
  for (std::size_t c = 0; c < 2; ++c) gain += lp.objective[c] * sol.ray[c];
  CHECK(gain > 1e-9);
  for (std::size_t r = 0; r < lp.row_count(); ++r) {
    double along = 0.0;
    for (std::size_t c = 0; c < 2; ++c) along += lp.row(r)[c] * sol.ray[c];
    CHECK(along <= 1e-9);
  }
  for (std::size_t c = 0; c < 2; ++c)
    if (lp.var_sign[c] == VarSign::NonNegative) CHECK(sol.ray[c] >= -1e-9);
}

TEST_CASE("warm started resolves match cold solves") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    LinearProgram lp = testsupport::random_boxed_lp(rng);
    const auto cold = solve(lp);
    REQUIRE(cold.status == LpStatus::Optimal);
    // Same constraints, shifted objective: the warm token stays valid.
    std::uniform_real_distribution<double> delta(-0.5, 0.5);
    for (auto& c : lp.objective) c += delta(rng);
    const auto cold2 = solve(lp);
    const auto warm2 = solve(lp, &cold.warm);
    REQUIRE(cold2.status == LpStatus::Optimal);
    REQUIRE(warm2.status == LpStatus::Optimal);
    CHECK(warm2.objective == Approx(cold2.objective).margin(1e-7));
    check_primal_feasible(lp, warm2.x);
  }
}

TEST_CASE("warm tokens from different constraints fall back to cold solves") {
  LinearProgram a(2);
  a.objective = {1.0, 1.0};
  a.add_row(std::vector<double>{1.0, 0.0}, 1.0);
  a.add_row(std::vector<double>{0.0, 1.0}, 1.0);
  const auto sa = solve(a);
  LinearProgram b(2);
  b.objective = {1.0, 1.0};
  b.add_row(std::vector<double>{1.0, 0.0}, 2.0);
  b.add_row(std::vector<double>{0.0, 1.0}, 2.0);
  const auto sb = solve(b, &sa.warm);  // fingerprint mismatch
  REQUIRE(sb.status == LpStatus::Optimal);
  CHECK(sb.objective == Approx(4.0));
}

TEST_CASE("simplex agrees with exhaustive vertex enumeration") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const LinearProgram lp = testsupport::random_boxed_lp(rng);
    const auto oracle = testsupport::vertex_oracle(lp);
    REQUIRE(oracle.feasible);
    const auto sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective ==
          Approx(oracle.objective).margin(1e-6 * (1.0 + std::fabs(oracle.objective))));
    check_primal_feasible(lp, sol.x);
  }
}

TEST_CASE("feasibility solves ignore the objective") {
  LinearProgram lp(2);
  lp.objective = {1.0, 0.0};  // would be unbounded as an optimization
  lp.var_sign[0] = VarSign::Free;
  lp.add_row(std::vector<double>{-1.0, 0.0}, -2.0);  // x >= 2
  const auto sol = solve_feasibility(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] >= 2.0 - 1e-9);
}

TEST_CASE("fixed format writer emits the reference deck") {
  LinearProgram lp(2);
  lp.objective = {3.0, 2.0};
  lp.var_sign[1] = VarSign::Free;
  lp.var_names = {"ALPHA", "BETA"};
  lp.add_row(std::vector<double>{1.0, 1.0}, 4.0);
  lp.add_row(std::vector<double>{1.0, -0.25}, 2.0);
  std::ostringstream os;
  write_mps(os, lp, "TINY");
  const std::string expected =
      "NAME          TINY\n"
      "OBJSENSE\n"
      "    MAX\n"
      "ROWS\n"
      " N  OBJ\n"
      " L  R0000001\n"
      " L  R0000002\n"
      "COLUMNS\n"
      "    ALPHA     OBJ       3\n"
      "    ALPHA     R0000001  1\n"
      "    ALPHA     R0000002  1\n"
      "    BETA      OBJ       2\n"
      "    BETA      R0000001  1\n"
      "    BETA      R0000002  -0.25\n"
      "RHS\n"
      "    RHS       R0000001  4\n"
      "    RHS       R0000002  2\n"
      "BOUNDS\n"
      " FR BND       BETA\n"
      "ENDATA\n";
  CHECK(os.str() == expected);
}
