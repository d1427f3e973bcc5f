#pragma once

// Scenario files: a chart, a cosymplectic structure, an integral system and
// optional torus data (primitive, angle maps, base point, lattice, oracles),
// stored as JSON with expression strings. Six systems are built in.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cosym/actionangle.hpp"
#include "cosym/integrability.hpp"

namespace cosym {

using ordered_json = nlohmann::ordered_json;

// Malformed or inconsistent scenario document. `path` locates the offending
// key, e.g. "chart.box[2]".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class UnknownScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedExpr {
  std::string name;
  std::string expr;
};

struct AngleSpec {
  std::string name;
  std::string cos;
  std::string sin;
};

// Analytic value of one computed quantity at the scenario torus.
// quantity: "actions", "b_matrix" (row-major), "frequencies:reeb",
// "frequencies:eval", "frequencies:ham:<k>", "empirical:eval",
// "empirical:reeb" or "reeb_field" (at the base point).
struct OracleSpec {
  std::string quantity;
  std::vector<double> value;
  double tolerance = 1e-6;
  std::string note;
};

struct TorusSpec {
  bool compact = true;
  std::vector<double> base_point;        // guess, projected onto the fiber
  std::vector<double> fiber;             // c = (f_1, ..., f_m)
  std::optional<std::vector<std::vector<double>>> lattice;  // rows T_mu
  double empirical_tau = 100.0;          // flow time of the empirical fit
};

// The document, kept as written. Expressions stay strings so that a file
// round-trips byte for byte.
struct ScenarioFile {
  std::string name;
  std::string description;
  std::vector<std::string> names;
  std::vector<bool> periodic;
  std::vector<std::pair<double, double>> box;
  std::vector<std::pair<std::string, std::string>> omega;  // "i,j" (i < j) -> expr
  std::vector<std::string> eta;
  std::string hamiltonian;
  std::vector<NamedExpr> integrals;
  std::size_t r = 0;
  bool allow_incomplete = false;
  std::vector<NamedExpr> casimirs;
  std::optional<std::vector<std::string>> lambda;
  std::vector<AngleSpec> angle_maps;
  std::optional<TorusSpec> torus;
  std::vector<OracleSpec> oracles;
  std::vector<std::pair<std::string, double>> tolerances;  // overrides by field name
};

struct Scenario {
  ScenarioFile file;
  IntegralSystem system;          // holds the structure and the tolerances
  std::optional<OneFormField> lambda;
  std::vector<AngleMap> angles;

  const CosymplecticStructure& structure() const { return system.structure; }
  const ChartSpec& chart() const { return system.structure.chart; }
  const ToleranceConfig& tol() const { return system.tol; }
  bool compact() const { return file.torus && file.torus->compact; }
  std::optional<Matrix> lattice_guess() const;
  Vector base_point() const;
  Vector fiber() const;
  const OracleSpec* oracle(const std::string& quantity) const;
};

// Parses expressions and assembles the structure. Throws ScenarioError.
Scenario compile(const ScenarioFile& file);

ordered_json to_json(const ScenarioFile& file);
// Rejects unknown keys and wrong types. Throws ScenarioError.
ScenarioFile scenario_from_json(const ordered_json& doc);
// Throws ScenarioError, including for malformed JSON text.
ScenarioFile parse_scenario(const std::string& text);
std::string dump_scenario(const ScenarioFile& file);  // dump(2) + "\n"

// Tolerance fields by name, as used in the "tolerances" object.
std::vector<std::string> tolerance_names();
double& tolerance_field(ToleranceConfig& tol, const std::string& name);  // throws std::out_of_range

std::vector<std::string> builtin_names();
// Throws UnknownScenario.
ScenarioFile builtin_file(const std::string& name);
Scenario builtin(const std::string& name);

}  // namespace cosym
