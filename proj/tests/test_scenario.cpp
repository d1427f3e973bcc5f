#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "cosym/cli.hpp"
#include "cosym/scenario.hpp"
#include "support.hpp"

using namespace cosym;
using cosym::testing::pt;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json builtin_doc(const std::string& name) { return to_json(builtin_file(name)); }

std::string error_path(const ordered_json& doc) {
  try {
    compile(scenario_from_json(doc));
  } catch (const ScenarioError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("catalog names") {
  const auto names = builtin_names();
  CHECK(names.size() == 6);
  for (const auto& n : names) CHECK(builtin_file(n).name == n);
  CHECK_THROWS_AS(builtin("nope"), UnknownScenario);
}

TEST_CASE("every builtin validates and carries derivation notes") {
  for (const auto& n : builtin_names()) {
    INFO(n);
    const Scenario s = builtin(n);
    CHECK(validate(s.structure(), 100, 3, s.tol()).pass);
    for (const auto& o : s.file.oracles) CHECK_FALSE(o.note.empty());
    if (s.file.torus) {
      // the base point lies on the declared fiber
      CHECK((s.system.values(s.base_point()) - s.fiber()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("flat torus Reeb field is constant") {
  const Scenario s = builtin("flat-torus-reeb");
  PointSampler rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vector z = reeb(s.structure(), rng.sample(s.structure().box));
    CHECK((z - pt({0, 0, 1})).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("Poincare-Cartan scenario matches the constructors") {
  const Scenario s = builtin("pc-oscillator-1d");
  const ChartSpec c = canonical_chart(1, true);
  const Expr H = c.parse("(q^2 + p^2)/2");
  const auto pc = make_poincare_cartan(c, H);
  const auto tw = twist(make_canonical(c), H);
  PointSampler rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector x = rng.sample(s.structure().box);
    CHECK((s.structure().omega.value(x) - pc.omega.value(x)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((s.structure().omega.value(x) - tw.omega.value(x)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((s.lambda->value(x) - pc.primitive->value(x)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("shipped scenario files equal the programmatic definitions byte for byte") {
  for (const auto& n : builtin_names()) {
    INFO(n);
    const std::string text = slurp(std::string(COSYM_SOURCE_DIR) + "/scenarios/" + n + ".json");
    CHECK(text == dump_scenario(builtin_file(n)));
    CHECK(dump_scenario(parse_scenario(text)) == text);
  }
}

TEST_CASE("scenario round trip through JSON") {
  for (const auto& n : builtin_names()) {
    const ScenarioFile f = builtin_file(n);
    const ScenarioFile g = scenario_from_json(to_json(f));
    CHECK(to_json(g) == to_json(f));
    const Scenario a = compile(f), b = compile(g);
    PointSampler rng(1);
    const Vector x = rng.sample(a.structure().box);
    CHECK(a.structure().omega.value(x) == b.structure().omega.value(x));
    CHECK(a.system.values(x) == b.system.values(x));
  }
}

TEST_CASE("unknown keys are rejected with their path") {
  auto doc = builtin_doc("ext-oscillator-1d");
  doc["extra"] = 1;
  CHECK(error_path(doc) == "extra");

  doc = builtin_doc("ext-oscillator-1d");
  doc["chart"]["colour"] = "red";
  CHECK(error_path(doc) == "chart.colour");

  doc = builtin_doc("ext-oscillator-1d");
  doc["torus"]["speed"] = 2;
  CHECK(error_path(doc) == "torus.speed");

  doc = builtin_doc("ext-oscillator-1d");
  doc["oracles"][0]["source"] = "x";
  CHECK(error_path(doc) == "oracles[0].source");

  doc = builtin_doc("ext-oscillator-1d");
  doc["tolerances"] = {{"closedness", 1e-3}};
  CHECK(error_path(doc) == "tolerances.closedness");
}

TEST_CASE("malformed scenarios") {
  auto doc = builtin_doc("ext-oscillator-1d");
  doc.erase("eta");
  CHECK(error_path(doc) == "eta");

  doc = builtin_doc("ext-oscillator-1d");
  doc["integrals"][0]["expr"] = "q^";
  CHECK(error_path(doc) == "integrals[0].expr");

  doc = builtin_doc("ext-oscillator-1d");
  doc["hamiltonian"] = "x + 1";
  CHECK(error_path(doc) == "hamiltonian");

  doc = builtin_doc("ext-oscillator-1d");
  doc["omega"] = {{"2,1", "1"}};
  CHECK(error_path(doc) == "omega.2,1");

  doc = builtin_doc("ext-oscillator-1d");
  doc["omega"] = {{"a", "1"}};
  CHECK(error_path(doc) == "omega.a");

  doc = builtin_doc("ext-oscillator-1d");
  doc["chart"]["box"][1] = {1.0, -1.0};
  CHECK(error_path(doc) == "chart.box[1]");

  doc = builtin_doc("ext-oscillator-1d");
  doc["r"] = 0;
  CHECK(error_path(doc) == "r");

  doc = builtin_doc("ext-oscillator-1d");
  doc["r"] = -1;
  CHECK(error_path(doc) == "r");

  doc = builtin_doc("ext-oscillator-1d");
  doc["oracles"][0]["note"] = "";
  CHECK(error_path(doc) == "oracles[0].note");

  doc = builtin_doc("ext-oscillator-1d");
  doc["oracles"][0]["quantity"] = "energy";
  CHECK(error_path(doc) == "oracles[0].quantity");

  doc = builtin_doc("ext-oscillator-1d");
  doc["torus"]["fiber"] = {0.5, 1.0};
  CHECK(error_path(doc) == "torus.fiber");

  doc = builtin_doc("ext-oscillator-1d");
  doc["chart"]["names"] = {"t", "q", "sin"};
  CHECK(error_path(doc) == "chart");

  CHECK_THROWS_AS(parse_scenario("{ not json"), ScenarioError);
}

TEST_CASE("tolerance overrides reach the integral system") {
  auto doc = builtin_doc("ext-oscillator-1d");
  doc["tolerances"] = {{"first_integral", 1e-3}, {"lattice_return", 1e-4}};
  const Scenario s = compile(scenario_from_json(doc));
  CHECK(s.tol().first_integral == 1e-3);
  CHECK(s.tol().lattice_return == 1e-4);
  CHECK(s.tol().closed == ToleranceConfig{}.closed);
  CHECK(tolerance_names().size() == 21);
}

TEST_CASE("every oracle is reproduced by the toolkit") {
  for (const auto& n : builtin_names()) {
    INFO(n);
    const Scenario s = builtin(n);
    const ReportResult r = run_report(s);
    CHECK(r.status == exit_code::ok);
    CHECK(r.failed_sections.empty());
    const auto& entries = r.json["sections"]["oracles"]["entries"];
    CHECK(entries.size() == s.file.oracles.size());
    for (const auto& e : entries) {
      INFO(e.dump());
      CHECK_FALSE(e.contains("skipped"));
      CHECK(e.value("pass", false));
    }
  }
}
