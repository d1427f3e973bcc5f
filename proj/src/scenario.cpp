#include "cosym/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace cosym {

ScenarioError::ScenarioError(std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

struct TolField {
  const char* name;
  double ToleranceConfig::*member;
};

constexpr TolField kTolFields[] = {
    {"closed", &ToleranceConfig::closed},
    {"volume_det", &ToleranceConfig::volume_det},
    {"reeb_residual", &ToleranceConfig::reeb_residual},
    {"eta_pairing", &ToleranceConfig::eta_pairing},
    {"field_residual", &ToleranceConfig::field_residual},
    {"bracket_agreement", &ToleranceConfig::bracket_agreement},
    {"first_integral", &ToleranceConfig::first_integral},
    {"commuting", &ToleranceConfig::commuting},
    {"rank_relative", &ToleranceConfig::rank_relative},
    {"lie_bracket", &ToleranceConfig::lie_bracket},
    {"fiber_equal", &ToleranceConfig::fiber_equal},
    {"closure", &ToleranceConfig::closure},
    {"lemma", &ToleranceConfig::lemma},
    {"casimir", &ToleranceConfig::casimir},
    {"tangency", &ToleranceConfig::tangency},
    {"lattice_return", &ToleranceConfig::lattice_return},
    {"path_independence", &ToleranceConfig::path_independence},
    {"primitive", &ToleranceConfig::primitive},
    {"cond_max", &ToleranceConfig::cond_max},
    {"frequency_mismatch", &ToleranceConfig::frequency_mismatch},
    {"linear_fit", &ToleranceConfig::linear_fit},
};

bool known_quantity(const std::string& q) {
  static const std::set<std::string> fixed{"actions",        "b_matrix",       "frequencies:reeb", "frequencies:eval",
                                           "empirical:eval", "empirical:reeb", "reeb_field"};
  if (fixed.count(q)) return true;
  const std::string prefix = "frequencies:ham:";
  if (q.rfind(prefix, 0) != 0 || q.size() == prefix.size()) return false;
  for (std::size_t i = prefix.size(); i < q.size(); ++i) {
    if (q[i] < '0' || q[i] > '9') return false;
  }
  return true;
}

// JSON reading with key paths in every error.
class Reader {
 public:
  Reader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {}

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) throw ScenarioError(path_, "expected an object");
    for (const auto& [key, value] : j_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ScenarioError(join(key), "unknown key");
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  Reader at(const char* key) const {
    if (!j_.contains(key)) throw ScenarioError(join(key), "missing required key");
    return Reader(j_.at(key), join(key));
  }
  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const { return j_.size(); }
  const std::string& path() const { return path_; }
  const ordered_json& raw() const { return j_; }

  const ordered_json& array() const {
    if (!j_.is_array()) throw ScenarioError(path_, "expected an array");
    return j_;
  }
  std::string str() const {
    if (!j_.is_string()) throw ScenarioError(path_, "expected a string");
    return j_.get<std::string>();
  }
  double num() const {
    if (!j_.is_number()) throw ScenarioError(path_, "expected a number");
    return j_.get<double>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) throw ScenarioError(path_, "expected true or false");
    return j_.get<bool>();
  }
  std::size_t count() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long long>() >= 0)) {
      throw ScenarioError(path_, "expected a non-negative integer");
    }
    return j_.get<std::size_t>();
  }
  std::vector<std::string> strings() const {
    array();
    std::vector<std::string> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).str());
    return out;
  }
  std::vector<double> numbers() const {
    array();
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).num());
    return out;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const ordered_json& j_;
  std::string path_;
};

std::vector<NamedExpr> named_exprs(const Reader& r) {
  r.array();
  std::vector<NamedExpr> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Reader e = r.at(i);
    e.require_object({"name", "expr"});
    out.push_back({e.at("name").str(), e.at("expr").str()});
  }
  return out;
}

ordered_json named_exprs_json(const std::vector<NamedExpr>& v) {
  ordered_json a = ordered_json::array();
  for (const auto& e : v) a.push_back({{"name", e.name}, {"expr", e.expr}});
  return a;
}

Expr parse_at(const ChartSpec& chart, const std::string& src, const std::string& path) {
  try {
    return chart.parse(src);
  } catch (const ParseError& e) {
    throw ScenarioError(path, e.what());
  }
}

std::pair<std::size_t, std::size_t> omega_index(const std::string& key, std::size_t dim) {
  const auto comma = key.find(',');
  std::size_t i = 0, j = 0;
  try {
    if (comma == std::string::npos) throw std::invalid_argument("");
    std::size_t used = 0;
    i = std::stoul(key.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("");
    j = std::stoul(key.substr(comma + 1), &used);
    if (used != key.size() - comma - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ScenarioError("omega." + key, "key must be \"i,j\" with integer indices");
  }
  if (!(i < j && j < dim)) {
    throw ScenarioError("omega." + key, "need 0 <= i < j < " + std::to_string(dim));
  }
  return {i, j};
}

}  // namespace

std::vector<std::string> tolerance_names() {
  std::vector<std::string> out;
  for (const auto& f : kTolFields) out.emplace_back(f.name);
  return out;
}

double& tolerance_field(ToleranceConfig& tol, const std::string& name) {
  for (const auto& f : kTolFields) {
    if (name == f.name) return tol.*(f.member);
  }
  throw std::out_of_range("unknown tolerance '" + name + "'");
}

std::optional<Matrix> Scenario::lattice_guess() const {
  if (!file.torus || !file.torus->lattice) return std::nullopt;
  const auto& rows = *file.torus->lattice;
  Matrix m(ix(rows.size()), ix(rows.empty() ? 0 : rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(ix(i), ix(j)) = rows[i][j];
  }
  return m;
}

Vector Scenario::base_point() const {
  if (!file.torus) throw std::logic_error("scenario has no torus data");
  return Eigen::Map<const Vector>(file.torus->base_point.data(), ix(file.torus->base_point.size()));
}

Vector Scenario::fiber() const {
  if (!file.torus) throw std::logic_error("scenario has no torus data");
  return Eigen::Map<const Vector>(file.torus->fiber.data(), ix(file.torus->fiber.size()));
}

const OracleSpec* Scenario::oracle(const std::string& quantity) const {
  for (const auto& o : file.oracles) {
    if (o.quantity == quantity) return &o;
  }
  return nullptr;
}

Scenario compile(const ScenarioFile& f) {
  Scenario s;
  s.file = f;
  ChartSpec chart;
  try {
    chart = ChartSpec(f.names, f.periodic);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("chart", e.what());
  }
  const std::size_t n = chart.dim();
  if (f.box.size() != n) throw ScenarioError("chart.box", "need one interval per coordinate");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f.box[i].first < f.box[i].second)) {
      throw ScenarioError("chart.box[" + std::to_string(i) + "]", "interval must satisfy lo < hi");
    }
  }
  CosymplecticStructure& st = s.system.structure;
  st.chart = chart;
  st.box = DomainBox{f.box};
  st.omega = TwoFormField(n);
  for (const auto& [key, src] : f.omega) {
    const auto [i, j] = omega_index(key, n);
    st.omega.set(i, j, parse_at(chart, src, "omega." + key));
  }
  if (f.eta.size() != n) throw ScenarioError("eta", "need one component per coordinate");
  std::vector<Expr> eta;
  for (std::size_t i = 0; i < n; ++i) eta.push_back(parse_at(chart, f.eta[i], "eta[" + std::to_string(i) + "]"));
  st.eta = OneFormField(std::move(eta));
  if (f.lambda) {
    if (f.lambda->size() != n) throw ScenarioError("lambda", "need one component per coordinate");
    std::vector<Expr> lam;
    for (std::size_t i = 0; i < n; ++i) {
      lam.push_back(parse_at(chart, (*f.lambda)[i], "lambda[" + std::to_string(i) + "]"));
    }
    s.lambda = OneFormField(std::move(lam));
    st.primitive = s.lambda;
  }

  IntegralSystem& sys = s.system;
  sys.hamiltonian = ScalarField(parse_at(chart, f.hamiltonian, "hamiltonian"), "H");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < f.integrals.size(); ++i) {
    const std::string path = "integrals[" + std::to_string(i) + "]";
    if (f.integrals[i].name.empty() || !seen.insert(f.integrals[i].name).second) {
      throw ScenarioError(path + ".name", "integral names must be unique and non-empty");
    }
    sys.integrals.emplace_back(parse_at(chart, f.integrals[i].expr, path + ".expr"), f.integrals[i].name);
  }
  for (std::size_t i = 0; i < f.casimirs.size(); ++i) {
    const std::string path = "casimirs[" + std::to_string(i) + "].expr";
    sys.casimirs.emplace_back(parse_at(chart, f.casimirs[i].expr, path), f.casimirs[i].name);
  }
  sys.r = f.r;
  sys.allow_incomplete = f.allow_incomplete;
  for (const auto& [name, value] : f.tolerances) {
    try {
      tolerance_field(sys.tol, name) = value;
    } catch (const std::out_of_range& e) {
      throw ScenarioError("tolerances." + name, e.what());
    }
  }
  try {
    sys.check_shape();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("r", e.what());
  }

  for (std::size_t k = 0; k < f.angle_maps.size(); ++k) {
    const std::string path = "angle_maps[" + std::to_string(k) + "]";
    s.angles.push_back(AngleMap{f.angle_maps[k].name, parse_at(chart, f.angle_maps[k].cos, path + ".cos"),
                                parse_at(chart, f.angle_maps[k].sin, path + ".sin")});
  }
  if (!s.angles.empty() && s.angles.size() != f.r + 1) {
    throw ScenarioError("angle_maps", "need r + 1 angle maps");
  }
  if (f.torus) {
    const TorusSpec& t = *f.torus;
    if (t.base_point.size() != n) throw ScenarioError("torus.base_point", "need one entry per coordinate");
    if (t.fiber.size() != f.integrals.size()) throw ScenarioError("torus.fiber", "need one entry per integral");
    if (t.lattice) {
      if (t.lattice->size() != f.r + 1) throw ScenarioError("torus.lattice", "need r + 1 rows");
      for (std::size_t i = 0; i < t.lattice->size(); ++i) {
        if ((*t.lattice)[i].size() != f.r + 1) {
          throw ScenarioError("torus.lattice[" + std::to_string(i) + "]", "need r + 1 entries");
        }
      }
    }
    if (!(t.empirical_tau > 0.0)) throw ScenarioError("torus.empirical_tau", "must be positive");
  }
  for (std::size_t k = 0; k < f.oracles.size(); ++k) {
    const std::string path = "oracles[" + std::to_string(k) + "]";
    if (!known_quantity(f.oracles[k].quantity)) throw ScenarioError(path + ".quantity", "unknown quantity");
    if (f.oracles[k].note.empty()) throw ScenarioError(path + ".note", "every oracle needs a derivation note");
    if (!(f.oracles[k].tolerance > 0.0)) throw ScenarioError(path + ".tolerance", "must be positive");
    if (!f.torus) throw ScenarioError(path, "oracles refer to the torus; add a torus section");
  }
  return s;
}

ordered_json to_json(const ScenarioFile& f) {
  ordered_json j;
  j["name"] = f.name;
  if (!f.description.empty()) j["description"] = f.description;
  ordered_json box = ordered_json::array();
  for (const auto& [lo, hi] : f.box) box.push_back({lo, hi});
  j["chart"] = {{"names", f.names}, {"periodic", f.periodic}, {"box", box}};
  ordered_json omega = ordered_json::object();
  for (const auto& [key, src] : f.omega) omega[key] = src;
  j["omega"] = omega;
  j["eta"] = f.eta;
  j["hamiltonian"] = f.hamiltonian;
  j["integrals"] = named_exprs_json(f.integrals);
  j["r"] = f.r;
  if (f.allow_incomplete) j["allow_incomplete"] = true;
  if (!f.casimirs.empty()) j["casimirs"] = named_exprs_json(f.casimirs);
  if (f.lambda) j["lambda"] = *f.lambda;
  if (!f.angle_maps.empty()) {
    ordered_json a = ordered_json::array();
    for (const auto& m : f.angle_maps) a.push_back({{"name", m.name}, {"cos", m.cos}, {"sin", m.sin}});
    j["angle_maps"] = a;
  }
  if (f.torus) {
    ordered_json t;
    t["compact"] = f.torus->compact;
    t["base_point"] = f.torus->base_point;
    t["fiber"] = f.torus->fiber;
    if (f.torus->lattice) t["lattice"] = *f.torus->lattice;
    t["empirical_tau"] = f.torus->empirical_tau;
    j["torus"] = t;
  }
  if (!f.oracles.empty()) {
    ordered_json a = ordered_json::array();
    for (const auto& o : f.oracles) {
      a.push_back({{"quantity", o.quantity}, {"value", o.value}, {"tolerance", o.tolerance}, {"note", o.note}});
    }
    j["oracles"] = a;
  }
  if (!f.tolerances.empty()) {
    ordered_json t = ordered_json::object();
    for (const auto& [k, v] : f.tolerances) t[k] = v;
    j["tolerances"] = t;
  }
  return j;
}

ScenarioFile scenario_from_json(const ordered_json& doc) {
  const Reader root(doc, "");
  root.require_object({"name", "description", "chart", "omega", "eta", "hamiltonian", "integrals", "r",
                       "allow_incomplete", "casimirs", "lambda", "angle_maps", "torus", "oracles", "tolerances"});
  ScenarioFile f;
  f.name = root.at("name").str();
  if (root.has("description")) f.description = root.at("description").str();

  const Reader chart = root.at("chart");
  chart.require_object({"names", "periodic", "box"});
  f.names = chart.at("names").strings();
  const Reader periodic = chart.at("periodic");
  periodic.array();
  for (std::size_t i = 0; i < periodic.size(); ++i) f.periodic.push_back(periodic.at(i).boolean());
  const Reader box = chart.at("box");
  box.array();
  for (std::size_t i = 0; i < box.size(); ++i) {
    const auto iv = box.at(i).numbers();
    if (iv.size() != 2) throw ScenarioError(box.at(i).path(), "expected [lo, hi]");
    f.box.emplace_back(iv[0], iv[1]);
  }

  const Reader omega = root.at("omega");
  if (!omega.raw().is_object()) throw ScenarioError("omega", "expected an object of \"i,j\": expression");
  for (const auto& [key, value] : omega.raw().items()) {
    f.omega.emplace_back(key, Reader(value, "omega." + key).str());
  }
  f.eta = root.at("eta").strings();
  f.hamiltonian = root.at("hamiltonian").str();
  f.integrals = named_exprs(root.at("integrals"));
  f.r = root.at("r").count();
  if (root.has("allow_incomplete")) f.allow_incomplete = root.at("allow_incomplete").boolean();
  if (root.has("casimirs")) f.casimirs = named_exprs(root.at("casimirs"));
  if (root.has("lambda")) f.lambda = root.at("lambda").strings();
  if (root.has("angle_maps")) {
    const Reader a = root.at("angle_maps");
    a.array();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Reader m = a.at(i);
      m.require_object({"name", "cos", "sin"});
      f.angle_maps.push_back({m.at("name").str(), m.at("cos").str(), m.at("sin").str()});
    }
  }
  if (root.has("torus")) {
    const Reader t = root.at("torus");
    t.require_object({"compact", "base_point", "fiber", "lattice", "empirical_tau"});
    TorusSpec ts;
    ts.compact = t.at("compact").boolean();
    ts.base_point = t.at("base_point").numbers();
    ts.fiber = t.at("fiber").numbers();
    if (t.has("lattice")) {
      const Reader l = t.at("lattice");
      l.array();
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < l.size(); ++i) rows.push_back(l.at(i).numbers());
      ts.lattice = rows;
    }
    if (t.has("empirical_tau")) ts.empirical_tau = t.at("empirical_tau").num();
    f.torus = ts;
  }
  if (root.has("oracles")) {
    const Reader a = root.at("oracles");
    a.array();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Reader o = a.at(i);
      o.require_object({"quantity", "value", "tolerance", "note"});
      f.oracles.push_back({o.at("quantity").str(), o.at("value").numbers(), o.at("tolerance").num(), o.at("note").str()});
    }
  }
  if (root.has("tolerances")) {
    const Reader t = root.at("tolerances");
    if (!t.raw().is_object()) throw ScenarioError("tolerances", "expected an object");
    ToleranceConfig probe;
    for (const auto& [key, value] : t.raw().items()) {
      try {
        tolerance_field(probe, key);
      } catch (const std::out_of_range&) {
        throw ScenarioError("tolerances." + key, "unknown key");
      }
      f.tolerances.emplace_back(key, Reader(value, "tolerances." + key).num());
    }
  }
  return f;
}

ScenarioFile parse_scenario(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("", std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

std::string dump_scenario(const ScenarioFile& f) { return to_json(f).dump(2) + "\n"; }

// Built-in catalog.

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

ScenarioFile oscillator_1d(const std::string& name, bool periodic_time) {
  ScenarioFile f;
  f.name = name;
  f.names = {"t", "q", "p"};
  f.periodic = {periodic_time, false, false};
  f.box = {{periodic_time ? 0.0 : -1.0, periodic_time ? kTwoPi : 1.0}, {-1.5, 1.5}, {-1.5, 1.5}};
  f.omega = {{"1,2", "1"}};
  f.eta = {"1", "0", "0"};
  f.hamiltonian = "(q^2 + p^2)/2";
  f.integrals = {{"H", "(q^2 + p^2)/2"}};
  f.r = 1;
  f.lambda = std::vector<std::string>{"0", "p", "0"};
  f.angle_maps = {{"phi", "p", "q"}, {"t", "cos(t)", "sin(t)"}};
  return f;
}

ScenarioFile ext_oscillator_1d() {
  ScenarioFile f = oscillator_1d("ext-oscillator-1d", true);
  f.description = "Unit oscillator on the extended phase space S^1 x T*R with omega = dq^dp, eta = dt.";
  f.torus = TorusSpec{true, {0.0, 0.0, 1.0}, {0.5}, std::nullopt, 100.0};
  f.oracles = {
      {"reeb_field", {1, 0, 0}, 1e-12, "eta = dt and omega has no dt terms, so Z = d/dt"},
      {"actions", {0.5, 0.0}, 1e-5,
       "p dq around the circle q^2 + p^2 = 2c encloses area 2 pi c, so I_1 = c; the t-circle has dq = 0"},
      {"b_matrix", {1, 0, 0, 1}, 1e-5, "I_1 = H gives dI_1/dH = 1, I_2 = 0; eta periods are 0 (phase circle) and 1 (t-circle)"},
      {"frequencies:reeb", {0, 1}, 1e-5, "b = identity, right-hand side e_2"},
      {"frequencies:eval", {1, 1}, 1e-5, "Y_H = X_H + Z; X_H advances the phase at unit rate"},
      {"frequencies:ham:1", {1, 0}, 1e-5, "b = identity, right-hand side e_1"},
      {"empirical:eval", {1, 1}, 1e-3, "phase and t both advance at unit rate along Y_H"},
      {"empirical:reeb", {0, 1}, 1e-3, "Z = d/dt leaves (q, p) fixed"},
  };
  return f;
}

ScenarioFile ext_oscillator_1d_line() {
  ScenarioFile f = oscillator_1d("ext-oscillator-1d-line", false);
  f.description = "The extended oscillator with t on the real line; invariant sets are cylinders.";
  f.torus = TorusSpec{false, {0.0, 0.0, 1.0}, {0.5}, std::nullopt, 100.0};
  f.oracles = {{"reeb_field", {1, 0, 0}, 1e-12, "eta = dt and omega has no dt terms, so Z = d/dt"}};
  return f;
}

ScenarioFile pc_oscillator_1d() {
  ScenarioFile f;
  f.name = "pc-oscillator-1d";
  f.description =
      "Unit oscillator with omega = -d(p dq - H dt) = dq^dp + dH^dt, eta = dt. The Reeb field is the evaluation "
      "field of H for the canonical structure, so the scenario Hamiltonian is 0.";
  f.names = {"t", "q", "p"};
  f.periodic = {true, false, false};
  f.box = {{0.0, kTwoPi}, {-1.5, 1.5}, {-1.5, 1.5}};
  f.omega = {{"0,1", "-q"}, {"0,2", "-p"}, {"1,2", "1"}};
  f.eta = {"1", "0", "0"};
  f.hamiltonian = "0";
  f.integrals = {{"K", "(q^2 + p^2)/2"}};
  f.r = 1;
  f.lambda = std::vector<std::string>{"-(q^2 + p^2)/2", "p", "0"};
  f.angle_maps = {{"phi", "p", "q"}, {"t", "cos(t)", "sin(t)"}};
  f.torus = TorusSpec{true, {0.0, 0.0, 1.0}, {0.5}, std::nullopt, 100.0};
  f.oracles = {
      {"reeb_field", {1, 1, 0}, 1e-12, "Z' = d/dt + X_H, at (q, p) = (0, 1) equal to d/dt + d/dq"},
      {"actions", {0.5, -0.5}, 1e-5,
       "adapted cycles are the phase circle at fixed t (area 2 pi c) and the t-circle at fixed (q, p), "
       "where alpha = -H dt integrates to -2 pi c"},
      {"b_matrix", {1, 0, -1, 1}, 1e-5, "I_1 = K, I_2 = -K; eta periods 0 and 1"},
      {"frequencies:reeb", {1, 1}, 1e-5, "b^T omega = e_2 with b = [[1, 0], [-1, 1]]"},
      {"frequencies:eval", {1, 1}, 1e-5, "H = 0 makes the evaluation field the Reeb field"},
      {"empirical:reeb", {1, 1}, 1e-3, "Z' rotates the phase and t at unit rate"},
  };
  return f;
}

ScenarioFile ext_oscillator_2d_super() {
  ScenarioFile f;
  f.name = "ext-oscillator-2d-super";
  f.description =
      "Isotropic 2d oscillator on S^1 x T*R^2 with the noncommutative integrals H, L, F; "
      "m = 3, r = 1, {L, F} = 2(q1 q2 + p1 p2).";
  f.names = {"t", "q1", "q2", "p1", "p2"};
  f.periodic = {true, false, false, false, false};
  f.box = {{0.0, kTwoPi}, {-1.5, 1.5}, {-1.5, 1.5}, {-1.5, 1.5}, {-1.5, 1.5}};
  f.omega = {{"1,3", "1"}, {"2,4", "1"}};
  f.eta = {"1", "0", "0", "0", "0"};
  f.hamiltonian = "(p1^2 + p2^2 + q1^2 + q2^2)/2";
  f.integrals = {{"H", "(p1^2 + p2^2 + q1^2 + q2^2)/2"},
                 {"L", "q1*p2 - q2*p1"},
                 {"F", "(q1^2 + p1^2 - q2^2 - p2^2)/2"}};
  f.r = 1;
  f.casimirs = {{"C", "(p1^2 + p2^2 + q1^2 + q2^2)/2"}};
  f.lambda = std::vector<std::string>{"0", "p1", "p2", "0", "0"};
  f.angle_maps = {{"phi", "p1", "q1"}, {"t", "cos(t)", "sin(t)"}};
  f.torus = TorusSpec{true, {0.0, 1.0, 0.5, 0.0, 0.5}, {0.75, 0.5, 0.25}, std::nullopt, 100.0};
  f.oracles = {
      {"reeb_field", {1, 0, 0, 0, 0}, 1e-12, "canonical structure, Z = d/dt"},
      {"actions", {0.75, 0.0}, 1e-5, "the X_H circle traverses both oscillator circles once: I_1 = H"},
      {"b_matrix", {1, 0, 0, 1}, 1e-5, "dI_1/dH = 1 with L, F fixed; eta periods 0 and 1"},
      {"frequencies:reeb", {0, 1}, 1e-5, "b = identity"},
      {"frequencies:eval", {1, 1}, 1e-5, "Y_H = X_H + Z"},
      {"empirical:eval", {1, 1}, 1e-3, "all phases advance at unit rate along Y_H"},
  };
  return f;
}

ScenarioFile ext_oscillator_anisotropic() {
  ScenarioFile f;
  f.name = "ext-oscillator-anisotropic";
  f.description =
      "Oscillator with frequencies 1 and sqrt(2) on S^1 x T*R^2, separable integrals H1, H2 (r = m = n = 2); "
      "the evaluation flow winds densely on the invariant 3-torus.";
  f.names = {"t", "q1", "q2", "p1", "p2"};
  f.periodic = {true, false, false, false, false};
  f.box = {{0.0, kTwoPi}, {-1.5, 1.5}, {-4.0, 4.0}, {-1.5, 1.5}, {-5.0, 5.0}};
  f.omega = {{"1,3", "1"}, {"2,4", "1"}};
  f.eta = {"1", "0", "0", "0", "0"};
  f.hamiltonian = "(p1^2 + p2^2 + q1^2 + 2*q2^2)/2";
  f.integrals = {{"H1", "(p1^2 + q1^2)/2"}, {"H2", "(p2^2 + 2*q2^2)/2"}};
  f.r = 2;
  f.lambda = std::vector<std::string>{"0", "p1", "p2", "0", "0"};
  f.angle_maps = {{"phi1", "p1", "q1"}, {"phi2", "p2", "sqrt(2)*q2"}, {"t", "cos(t)", "sin(t)"}};
  f.torus = TorusSpec{true,
                      {0.0, 0.0, 3.0, 1.0, 0.0},
                      {0.5, 9.0},
                      std::vector<std::vector<double>>{{kTwoPi, 0, 0}, {0, kTwoPi / kSqrt2, 0}, {0, 0, kTwoPi}},
                      100.0};
  f.oracles = {
      {"reeb_field", {1, 0, 0, 0, 0}, 1e-12, "canonical structure, Z = d/dt"},
      {"actions", {0.5, 9.0 / kSqrt2, 0.0}, 1e-5, "I_k = H_k / omega_k with omega = (1, sqrt(2)); the t-circle has dq = 0"},
      {"b_matrix", {1, 0, 0, 0, 1 / kSqrt2, 0, 0, 0, 1}, 1e-5, "dI_k/dH_k = 1/omega_k; eta periods (0, 0, 1)"},
      {"frequencies:reeb", {0, 0, 1}, 1e-5, "b^T omega = e_3"},
      {"frequencies:eval", {1, kSqrt2, 1}, 1e-5, "Y_H = X_H1 + X_H2 + Z, so b^T omega = (1, 1, 1)"},
      {"frequencies:ham:1", {1, 0, 0}, 1e-5, "X_H1 rotates the first oscillator at unit rate"},
      {"frequencies:ham:2", {0, kSqrt2, 0}, 1e-5, "X_H2 rotates the second oscillator at rate sqrt(2)"},
      {"empirical:eval", {1, kSqrt2, 1}, 1e-3, "separable analytic frequencies 1, sqrt(2) and unit t-rate"},
  };
  return f;
}

ScenarioFile flat_torus_reeb() {
  ScenarioFile f;
  f.name = "flat-torus-reeb";
  f.description =
      "T^3 with omega = dth1^dth2 and eta = dth3; constant coefficients, Z = d/dth3. The integral cos(th1) cuts "
      "out 2-tori th1 = const.";
  f.names = {"th1", "th2", "th3"};
  f.periodic = {true, true, true};
  f.box = {{0.0, kTwoPi}, {0.0, kTwoPi}, {0.0, kTwoPi}};
  f.omega = {{"0,1", "1"}};
  f.eta = {"0", "0", "1"};
  f.hamiltonian = "0";
  f.integrals = {{"f", "cos(th1)"}};
  f.r = 1;
  f.lambda = std::vector<std::string>{"0", "-th1", "0"};
  f.angle_maps = {{"th2", "cos(th2)", "sin(th2)"}, {"th3", "cos(th3)", "sin(th3)"}};
  f.torus = TorusSpec{true, {1.0, 0.0, 0.0}, {std::cos(1.0)}, std::nullopt, 100.0};
  f.oracles = {
      {"reeb_field", {0, 0, 1}, 1e-12, "eta = dth3 and omega has no dth3 terms"},
      {"actions", {-1.0, 0.0}, 1e-5, "-th1 dth2 around the th2-circle at th1 = 1 gives -1"},
      {"b_matrix", {1 / std::sin(1.0), 0, 0, 1}, 1e-5, "I_1 = -arccos(f), dI_1/df = 1/sin(th1); eta periods 0 and 1"},
      {"frequencies:reeb", {0, 1}, 1e-5, "Z = d/dth3 moves th3 only"},
      {"empirical:reeb", {0, 1}, 1e-3, "Z = d/dth3 moves th3 only"},
  };
  return f;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"ext-oscillator-1d",          "pc-oscillator-1d", "ext-oscillator-2d-super",
          "ext-oscillator-anisotropic", "flat-torus-reeb",  "ext-oscillator-1d-line"};
}

ScenarioFile builtin_file(const std::string& name) {
  if (name == "ext-oscillator-1d") return ext_oscillator_1d();
  if (name == "pc-oscillator-1d") return pc_oscillator_1d();
  if (name == "ext-oscillator-2d-super") return ext_oscillator_2d_super();
  if (name == "ext-oscillator-anisotropic") return ext_oscillator_anisotropic();
  if (name == "flat-torus-reeb") return flat_torus_reeb();
  if (name == "ext-oscillator-1d-line") return ext_oscillator_1d_line();
  std::ostringstream os;
  os << "unknown scenario '" << name << "'; built-in scenarios:";
  for (const auto& n : builtin_names()) os << ' ' << n;
  throw UnknownScenario(os.str());
}

Scenario builtin(const std::string& name) {
  Scenario s = compile(builtin_file(name));
  if (!validate(s.structure(), 64, 0, s.tol()).pass) {
    throw std::logic_error("built-in scenario " + name + " fails validation");
  }
  return s;
}

}  // namespace cosym
