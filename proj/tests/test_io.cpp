#include <cstdlib>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace softpd;
using Catch::Approx;
using nlohmann::json;

TEST_CASE("sparse format fills unmentioned features with zero") {
  std::istringstream in("7 1:1.0\n3 1:0.5 3:2.0\n");
  const auto parsed = parse_libsvm(in);
  const auto& d = parsed.data;
  CHECK(d.dim() == 3);
  CHECK(d.size() == 2);
  // Label tokens sort numerically: "3" becomes cluster 0, "7" cluster 1.
  CHECK(parsed.label_names == std::vector<std::string>{"3", "7"});
  CHECK(d.label(0) == 1);
  CHECK(d.label(1) == 0);
  CHECK(d.point(0)[0] == Approx(1.0));
  CHECK(d.point(0)[1] == 0.0);
  CHECK(d.point(0)[2] == 0.0);
  CHECK(d.point(1)[0] == Approx(0.5));
  CHECK(d.point(1)[2] == Approx(2.0));
}

TEST_CASE("sparse parser skips blank lines and honors a declared dimension") {
  std::istringstream in("\na 1:1\n\nb 2:1\n\n");
  const auto parsed = parse_libsvm(in, 4);
  CHECK(parsed.data.dim() == 4);
  CHECK(parsed.data.size() == 2);
  CHECK(parsed.label_names == std::vector<std::string>{"a", "b"});

  // A label-only line is a legal all-zeros point.
  std::istringstream zeros("1 1:1\n2\n");
  const auto pz = parse_libsvm(zeros);
  REQUIRE(pz.data.size() == 2);
  CHECK(pz.data.point(1)[0] == 0.0);
}

TEST_CASE("sparse parser reports the offending line") {
  const auto line_of = [](const std::string& text,
                          std::optional<std::size_t> dim = {}) -> std::size_t {
    std::istringstream in(text);
    try {
      (void)parse_libsvm(in, dim);
    } catch (const ParseError& e) {
      return e.line_number;
    }
    return 0;
  };
  CHECK(line_of("1 1:1\n2 oops\n") == 2);               // malformed pair
  CHECK(line_of("1 1:1\n2 0:1\n") == 2);                // 1-based indices
  CHECK(line_of("1 1:1\n2 2:1 2:3\n") == 2);            // not increasing
  CHECK(line_of("1 1:1\n2 1:xy\n") == 2);               // bad value
  CHECK(line_of("1 1:1\n2 7:1\n", 3) == 2);             // beyond declared dim
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_libsvm(empty), ParseError);
}

TEST_CASE("delimited format requires the canonical header") {
  std::istringstream good("x1,x2,label\n0,0,a\n1,1,b\n");
  const auto parsed = parse_csv(good);
  CHECK(parsed.data.dim() == 2);
  CHECK(parsed.data.size() == 2);

  std::istringstream bad_header("x1,y,label\n0,0,a\n");
  CHECK_THROWS_AS(parse_csv(bad_header), ParseError);
  std::istringstream short_row("x1,x2,label\n0,a\n");
  CHECK_THROWS_AS(parse_csv(short_row), ParseError);
  std::istringstream bad_number("x1,label\n0,a\nzz,b\n");
  try {
    (void)parse_csv(bad_number);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 3);
  }
}

TEST_CASE("serialize then parse is the identity on datasets") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    const auto data = testsupport::random_instance(rng, 10, 4, 3, 1.0);
    std::ostringstream out;
    write_csv(out, data);
    std::istringstream in(out.str());
    const auto back = parse_csv(in);
    REQUIRE(back.data.size() == data.size());
    REQUIRE(back.data.dim() == data.dim());
    REQUIRE(back.data.clusters() == data.clusters());
    for (std::size_t l = 0; l < data.size(); ++l) {
      CHECK(back.data.label(l) == data.label(l));
      for (std::size_t c = 0; c < data.dim(); ++c)
        CHECK(back.data.point(l)[c] == data.point(l)[c]);  // exact round trip
    }
  }
}

TEST_CASE("site files round trip") {
  const SiteSet s(2, {0.0, 0.125, -3.5, 42.0});
  std::ostringstream out;
  write_sites_csv(out, s);
  std::istringstream in(out.str());
  const auto back = parse_sites_csv(in);
  CHECK(back.dim() == 2);
  CHECK(back.coords() == s.coords());
  std::istringstream bad("x1,x2\n1,2\n3\n");
  CHECK_THROWS_AS(parse_sites_csv(bad), ParseError);
}

TEST_CASE("canonical rendering sorts keys and pins float format") {
  json j;
  j["beta"] = 1.5;
  j["alpha"] = json::array({1, 2.25, true});
  j["gamma"] = json{{"z", nullptr}, {"a", "text"}};
  const std::string s = canonical_json(j);
  CHECK(s ==
        "{\"alpha\": [1, 2.250000, true], \"beta\": 1.500000, "
        "\"gamma\": {\"a\": \"text\", \"z\": null}}");
  CHECK(canonical_json(j) == s);  // byte stable across calls
}

TEST_CASE("models round trip through their JSON form") {
  const SiteSet s(2, {0.0, 0.0, 3.0, 4.0});
  const Model m{PowerDiagram(s, {0.0, 7.5}), 1.25, "mep", 3};
  std::ostringstream out;
  write_model(out, m);
  std::istringstream in(out.str());
  const Model back = read_model(in);
  CHECK(back.diagram.sites.coords() == s.coords());
  CHECK(back.diagram.gamma == m.diagram.gamma);
  CHECK(back.epsilon == m.epsilon);
  CHECK(back.variant == "mep");
  CHECK(back.t == 3);

  std::istringstream garbage("not json at all");
  CHECK_THROWS_AS(read_model(garbage), ParseError);
  std::istringstream wrong_shape(
      "{\"d\":2,\"k\":2,\"sites\":[[0,0]],\"gamma\":[0,1],"
      "\"epsilon\":0,\"variant\":\"spd\",\"t\":0}");
  CHECK_THROWS_AS(read_model(wrong_shape), ParseError);
}

TEST_CASE("exec backends enforce the reply contract") {
  const std::string dir = SOFTPD_WORK_DIR;

  SECTION("nonzero exit is a solver failure") {
    const auto solver = make_solver("false");
    LinearProgram lp(1);
    lp.objective = {0.0};
    lp.add_row(std::vector<double>{1.0}, 1.0);
    CHECK_THROWS_AS(solver.solve(lp), NumericError);
  }

  SECTION("wrong variable count is rejected") {
    const std::string script = dir + "/fake_short.sh";
    {
      std::ofstream f(script);
      f << "#!/bin/sh\nprintf '{\"status\":\"optimal\",\"x\":[0.0]}' > \"$2\"\n";
    }
    REQUIRE(std::system(("chmod +x " + script).c_str()) == 0);
    const auto solver = make_solver(script);
    LinearProgram lp(2);
    lp.objective = {0.0, 0.0};
    lp.add_row(std::vector<double>{1.0, 0.0}, 1.0);
    CHECK_THROWS_AS(solver.solve(lp), NumericError);
  }

  SECTION("well formed optimal replies pass through") {
    const std::string script = dir + "/fake_ok.sh";
    {
      std::ofstream f(script);
      f << "#!/bin/sh\nprintf '{\"status\":\"optimal\",\"x\":[0.25,0.5]}' > \"$2\"\n";
    }
    REQUIRE(std::system(("chmod +x " + script).c_str()) == 0);
    const auto solver = make_solver(script);
    LinearProgram lp(2);
    lp.objective = {1.0, 2.0};
    lp.add_row(std::vector<double>{1.0, 1.0}, 1.0);
    const auto sol = solver.solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == Approx(0.25));
    CHECK(sol.objective == Approx(1.25));  // recomputed from the objective row
  }

  SECTION("garbage replies are reported as numeric errors") {
    const std::string script = dir + "/fake_bad.sh";
    {
      std::ofstream f(script);
      f << "#!/bin/sh\nprintf 'garbage' > \"$2\"\n";
    }
    REQUIRE(std::system(("chmod +x " + script).c_str()) == 0);
    const auto solver = make_solver(script);
    LinearProgram lp(1);
    lp.objective = {0.0};
    lp.add_row(std::vector<double>{1.0}, 1.0);
    CHECK_THROWS_AS(solver.solve(lp), NumericError);
  }
}

TEST_CASE("parse errors carry one based line numbers in their message") {
  std::istringstream in("x1,label\n0,a\noops\n");
  try {
    (void)parse_csv(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
