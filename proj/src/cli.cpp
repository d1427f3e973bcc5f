#include "cosym/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace cosym {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

ordered_json vec_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_json(const Matrix& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), ix(v.size())); }

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

ordered_json validation_json(const ValidationReport& r) {
  return {{"samples", r.samples},
          {"max_d_omega", r.max_d_omega},
          {"max_d_eta", r.max_d_eta},
          {"min_abs_det", r.min_abs_det},
          {"worst_det_point", vec_json(r.worst_det_point)},
          {"closed_omega", r.closed_omega},
          {"closed_eta", r.closed_eta},
          {"nondegenerate", r.nondegenerate},
          {"pass", r.pass}};
}

ordered_json check_json(const CheckReport& c) {
  ordered_json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["max_residual"] = c.max_residual;
  j["threshold"] = c.threshold;
  j["points"] = c.points;
  if (!c.witness.empty()) j["witness"] = c.witness;
  if (c.witness_point) j["witness_point"] = vec_json(*c.witness_point);
  if (!c.metrics.empty()) {
    ordered_json m = ordered_json::object();
    for (const auto& [k, v] : c.metrics) m[k] = v;
    j["metrics"] = m;
  }
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

ordered_json verify_json(const VerifyReport& r) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  std::vector<std::size_t> coranks = r.induced.corank;
  std::sort(coranks.begin(), coranks.end());
  coranks.erase(std::unique(coranks.begin(), coranks.end()), coranks.end());
  std::size_t points = 0;
  for (const auto& f : r.induced.fibers) points += f.size();
  return {{"checks", checks},
          {"induced_bracket",
           {{"fibers", r.induced.fibers.size()},
            {"points", points},
            {"max_fiber_deviation", r.induced.max_fiber_deviation},
            {"coranks", coranks},
            {"ddim", r.induced.ddim},
            {"dind", r.induced.dind},
            {"closure_ok", r.induced.closure_ok},
            {"corank_ok", r.induced.corank_ok},
            {"parity_ok", r.induced.parity_ok},
            {"completeness_ok", r.induced.completeness_ok},
            {"pass", r.induced.pass}}},
          {"regular_points", r.regular_points},
          {"excluded_points", r.excluded_points},
          {"pass", r.pass}};
}

ordered_json lattice_json(const PeriodLattice& l) {
  ordered_json j{{"origin", l.origin},
                 {"basis", mat_json(l.basis)},
                 {"base_point", vec_json(l.base_point)},
                 {"residual", l.residual},
                 {"adapted", l.adapted}};
  if (l.windings.size()) j["windings"] = mat_json(l.windings);
  return j;
}

// Parses "reeb", "eval" or "ham:<integral name>" for integration.
FieldSpec parse_field(const Scenario& s, const std::string& text) {
  if (text == "reeb") return FieldSpec{FieldKind::Reeb, ScalarField()};
  if (text == "eval") return FieldSpec{FieldKind::Evaluation, s.system.hamiltonian};
  if (text.rfind("ham:", 0) == 0) {
    const std::string name = text.substr(4);
    if (name == "H") return FieldSpec{FieldKind::Hamiltonian, s.system.hamiltonian};
    for (const auto& f : s.system.integrals) {
      if (f.name() == name) return FieldSpec{FieldKind::Hamiltonian, f};
    }
    throw std::invalid_argument("unknown function '" + name + "' in --field; use H or an integral name");
  }
  throw std::invalid_argument("--field must be reeb, eval or ham:NAME");
}

struct ModeSpec {
  FrequencyMode mode = FrequencyMode::Reeb;
  std::size_t k = 0;
  std::string label;
};

ModeSpec parse_mode(const Scenario& s, const std::string& text) {
  if (text == "reeb") return {FrequencyMode::Reeb, 0, text};
  if (text == "eval") return {FrequencyMode::Evaluation, 0, text};
  if (text.rfind("ham:", 0) == 0) {
    std::size_t k = 0;
    try {
      std::size_t used = 0;
      k = std::stoul(text.substr(4), &used);
      if (used != text.size() - 4) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("--mode ham:k needs an integer k");
    }
    if (k < 1 || k > s.system.r) throw std::invalid_argument("--mode ham:k needs 1 <= k <= r");
    return {FrequencyMode::Hamiltonian, k, text};
  }
  throw std::invalid_argument("--mode must be reeb, eval or ham:k");
}

// The flow whose angles the solved frequencies describe.
VectorField mode_field(const Scenario& s, const ModeSpec& m) {
  switch (m.mode) {
    case FrequencyMode::Reeb:
      return reeb_vector_field(s.structure(), s.tol());
    case FrequencyMode::Evaluation:
      return evaluation_vector_field(s.structure(), s.system.hamiltonian, s.tol());
    case FrequencyMode::Hamiltonian:
      break;
  }
  return hamiltonian_vector_field(s.structure(), s.system.integrals[m.k - 1], s.tol());
}

Vector default_point(const Scenario& s) {
  if (s.file.torus) return s.base_point();
  Vector x(ix(s.chart().dim()));
  for (std::size_t i = 0; i < s.file.box.size(); ++i) x[ix(i)] = 0.5 * (s.file.box[i].first + s.file.box[i].second);
  return x;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_torus_inputs(const Scenario& s) {
  if (!s.lambda) {
    throw MissingInput("scenario has no primitive; add a \"lambda\" array with -d lambda = omega");
  }
  if (!s.file.torus) {
    throw MissingInput("scenario has no torus section; add \"torus\" with base_point and fiber");
  }
}

FrequencyTable compute_table(const Scenario& s, const std::optional<Vector>& fiber, std::optional<double> delta) {
  require_torus_inputs(s);
  FrequencyOptions fo;
  fo.supplied_lattice = s.lattice_guess();
  if (delta) fo.delta_scale = *delta;
  const Vector c = fiber ? *fiber : s.fiber();
  if (static_cast<std::size_t>(c.size()) != s.system.m()) {
    throw std::invalid_argument("--fiber needs " + std::to_string(s.system.m()) + " comma-separated values");
  }
  return b_matrix(s.system, *s.lambda, s.angles, s.base_point(), c, fo);
}

ordered_json actions_json(const Scenario& s, const FrequencyTable& t, bool& pass) {
  const ToleranceConfig& tol = s.tol();
  const ActionProfile& p = t.profile;
  const Vector periods = generator_period_residuals(s.system, t);
  const bool lattice_ok = p.lattice.residual < tol.lattice_return;
  const bool path_ok = p.path_independence < tol.path_independence;
  const bool primitive_ok = p.primitive_residual < tol.primitive;
  const bool cond_ok = t.cond < tol.cond_max;
  const bool eta_ok = t.eta_column_variance < 1e-6;
  const bool periods_ok = inf_norm(periods) < 1e-4;
  const bool redundancy_ok = t.redundancy_rank == s.system.r;
  pass = lattice_ok && path_ok && primitive_ok && cond_ok && eta_ok && periods_ok && redundancy_ok;
  ordered_json j;
  j["fiber"] = vec_json(p.fiber);
  j["lattice"] = lattice_json(p.lattice);
  j["actions"] = vec_json(p.actions);
  j["eta_periods"] = vec_json(p.eta_periods);
  j["cycle_closure"] = vec_json(p.closure);
  j["primitive_residual"] = p.primitive_residual;
  if (p.second_base_point) {
    j["second_base_point"] = vec_json(*p.second_base_point);
    j["second_actions"] = vec_json(*p.second_actions);
  }
  j["path_independence"] = p.path_independence;
  j["delta"] = t.delta;
  j["b_matrix"] = mat_json(t.b);
  j["cond"] = t.cond;
  j["redundancy_rank"] = t.redundancy_rank;
  j["eta_column_variance"] = t.eta_column_variance;
  j["lattice_b"] = mat_json(t.lattice_b);
  j["lattice_mismatch"] = t.lattice_mismatch;
  j["generator_period_residuals"] = vec_json(periods);
  j["checks"] = {{"lattice_return", lattice_ok}, {"path_independence", path_ok}, {"primitive", primitive_ok},
                 {"cond", cond_ok},           {"eta_constant", eta_ok},     {"generator_periods", periods_ok},
                 {"redundancy_rank", redundancy_ok}};
  j["pass"] = pass;
  return j;
}

struct ModeResult {
  ModeSpec mode;
  Vector solved;
  std::optional<EmpiricalFrequencies> empirical;
  double mismatch = 0.0;
};

ModeResult run_mode(const Scenario& s, const FrequencyTable& t, const ModeSpec& m, bool empirical, double tau) {
  ModeResult r{m, solve_frequencies(t, m.mode, m.k, s.tol().cond_max), std::nullopt, 0.0};
  if (empirical) {
    if (s.angles.empty()) throw MissingInput("empirical frequencies need \"angle_maps\" in the scenario");
    r.empirical = empirical_frequencies(mode_field(s, m), s.chart(), t.profile.lattice.base_point, s.angles, tau,
                                        0.02, IntegratorOptions{1e-11}, s.tol().linear_fit);
    r.mismatch = inf_norm(r.solved - r.empirical->slopes);
  }
  return r;
}

ordered_json mode_json(const Scenario& s, const ModeResult& r, bool& ok) {
  ordered_json j{{"mode", r.mode.label}, {"frequencies", vec_json(r.solved)}};
  ok = true;
  if (r.empirical) {
    const bool match = r.mismatch <= s.tol().frequency_mismatch;
    ok = match && r.empirical->linear;
    j["empirical"] = {{"slopes", vec_json(r.empirical->slopes)},
                      {"fit_residuals", vec_json(r.empirical->fit_residuals)},
                      {"linear", r.empirical->linear},
                      {"samples", r.empirical->samples}};
    j["mismatch"] = r.mismatch;
    j["threshold"] = s.tol().frequency_mismatch;
    j["pass"] = ok;
  }
  return j;
}

std::vector<ModeSpec> all_modes(const Scenario& s) {
  std::vector<ModeSpec> modes{{FrequencyMode::Reeb, 0, "reeb"}, {FrequencyMode::Evaluation, 0, "eval"}};
  for (std::size_t k = 1; k <= s.system.r; ++k) modes.push_back({FrequencyMode::Hamiltonian, k, "ham:" + std::to_string(k)});
  return modes;
}

Vector flatten(const Matrix& m) {
  Vector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json error_json(const std::string& command, const std::string& kind, const std::exception& e) {
  ordered_json j{{"command", command}, {"pass", false}, {"error", {{"kind", kind}, {"message", e.what()}}}};
  if (const auto* d = dynamic_cast<const DegenerateStructure*>(&e)) {
    j["error"]["point"] = vec_json(d->point());
    j["error"]["det"] = d->det();
  }
  if (const auto* u = dynamic_cast<const StepUnderflow*>(&e)) {
    j["error"]["point"] = vec_json(u->state());
    j["error"]["tau"] = u->tau();
  }
  return j;
}

}  // namespace

Scenario load_scenario(const std::string& arg) {
  const std::string prefix = "builtin:";
  if (arg.rfind(prefix, 0) == 0) return compile(builtin_file(arg.substr(prefix.size())));
  return compile(parse_scenario(read_file(arg)));
}

ReportResult run_report(const Scenario& s, const ReportOptions& opts) {
  ReportResult out;
  ordered_json sections;
  bool mismatch = false;
  auto fail = [&](const std::string& name) { out.failed_sections.push_back(name); };

  const ValidationReport val = validate(s.structure(), opts.samples, opts.seed, s.tol());
  sections["validation"] = validation_json(val);
  if (!val.pass) fail("validation");

  VerifyOptions vo;
  vo.points = opts.points;
  vo.seed = opts.seed;
  const VerifyReport ver = verify_chain(s.system, vo);
  sections["verification"] = verify_json(ver);
  if (!ver.pass) fail("verification");

  // Integral drift along Y_H, and the forward-backward residual as a diagnostic.
  {
    const Vector x0 = default_point(s);
    const VectorField y = evaluation_vector_field(s.structure(), s.system.hamiltonian, s.tol());
    IntegratorOptions io{opts.flow_tol};
    ordered_json flow_j;
    try {
      const Trajectory tr = integrate(y, s.chart(), x0, opts.flow_tau, io, s.system.integrals, "eval");
      const std::vector<double> drift = drift_report(tr);
      const Vector back = flow(y, tr.back(), -opts.flow_tau, io);
      const double reversal = inf_norm(s.chart().difference(back, x0));
      double max_drift = 0.0;
      ordered_json d = ordered_json::object();
      for (std::size_t i = 0; i < drift.size(); ++i) {
        d[s.system.integrals[i].name()] = drift[i];
        max_drift = std::max(max_drift, drift[i]);
      }
      const bool ok = max_drift < opts.drift_max;
      flow_j = {{"field", "eval"},
                {"x0", vec_json(x0)},
                {"tau", opts.flow_tau},
                {"tol", opts.flow_tol},
                {"steps", tr.size()},
                {"drift", d},
                {"max_drift", max_drift},
                {"drift_threshold", opts.drift_max},
                {"time_reversal_residual", reversal},
                {"pass", ok}};
      if (!ok) fail("flow");
    } catch (const std::exception& e) {
      flow_j = {{"pass", false}, {"error", e.what()}};
      fail("flow");
    }
    sections["flow"] = flow_j;
  }

  std::optional<FrequencyTable> table;
  std::vector<ModeResult> modes;
  if (!opts.all) {
    // torus sections not requested
  } else if (!s.compact()) {
    sections["actions"] = {{"skipped", "noncompact"}};
    sections["frequencies"] = {{"skipped", "noncompact"}};
  } else if (!s.lambda) {
    sections["actions"] = {{"skipped", "no primitive"}};
    sections["frequencies"] = {{"skipped", "no primitive"}};
  } else {
    try {
      table = compute_table(s, std::nullopt, std::nullopt);
      bool ok = false;
      sections["actions"] = actions_json(s, *table, ok);
      if (!ok) fail("actions");
    } catch (const std::exception& e) {
      sections["actions"] = {{"pass", false}, {"error", e.what()}};
      fail("actions");
    }
    if (table) {
      try {
        const double tau = s.file.torus->empirical_tau;
        ordered_json list = ordered_json::array();
        bool all_ok = true;
        for (const auto& m : all_modes(s)) {
          modes.push_back(run_mode(s, *table, m, !s.angles.empty(), tau));
          bool ok = true;
          list.push_back(mode_json(s, modes.back(), ok));
          all_ok = all_ok && ok;
        }
        ordered_json fj{{"cond", table->cond}, {"modes", list}};
        for (const auto& m : modes) {
          if (m.mode.mode == FrequencyMode::Evaluation && m.empirical && m.empirical->slopes.size() >= 2) {
            // Rotation-number ratios of the evaluation flow.
            ordered_json ratios = ordered_json::array();
            const Vector& w = m.empirical->slopes;
            for (Eigen::Index i = 0; i < w.size(); ++i) {
              for (Eigen::Index j = i + 1; j < w.size(); ++j) {
                if (std::abs(w[j]) < 1e-9) continue;
                ratios.push_back({{"angles", {s.angles[static_cast<std::size_t>(i)].name,
                                              s.angles[static_cast<std::size_t>(j)].name}},
                                  {"ratio", w[i] / w[j]},
                                  {"irrational", irrational_ratio(w[i] / w[j])}});
              }
            }
            fj["eval_ratios"] = ratios;
          }
        }
        fj["pass"] = all_ok;
        sections["frequencies"] = fj;
        if (!all_ok) {
          fail("frequencies");
          mismatch = true;
        }
      } catch (const std::exception& e) {
        sections["frequencies"] = {{"pass", false}, {"error", e.what()}};
        fail("frequencies");
      }
    } else {
      sections["frequencies"] = {{"skipped", "actions failed"}};
    }
  }

  if (opts.all && !s.file.oracles.empty()) {
    ordered_json list = ordered_json::array();
    bool all_ok = true;
    for (const auto& o : s.file.oracles) {
      std::optional<Vector> computed;
      if (o.quantity == "reeb_field") {
        computed = reeb(s.structure(), s.base_point(), s.tol());
      } else if (table && o.quantity == "actions") {
        computed = table->profile.actions;
      } else if (table && o.quantity == "b_matrix") {
        computed = flatten(table->b);
      } else {
        for (const auto& m : modes) {
          if (o.quantity == "frequencies:" + m.mode.label) computed = m.solved;
          if (m.empirical && o.quantity == "empirical:" + m.mode.label) computed = m.empirical->slopes;
        }
      }
      ordered_json e{{"quantity", o.quantity}, {"expected", o.value}, {"tolerance", o.tolerance}, {"note", o.note}};
      if (!computed) {
        e["skipped"] = "not computed";
      } else if (static_cast<std::size_t>(computed->size()) != o.value.size()) {
        e["computed"] = vec_json(*computed);
        e["pass"] = false;
        all_ok = false;
      } else {
        const double err = inf_norm(*computed - to_vector(o.value));
        const bool ok = err <= o.tolerance;
        e["computed"] = vec_json(*computed);
        e["error"] = err;
        e["pass"] = ok;
        all_ok = all_ok && ok;
      }
      list.push_back(e);
    }
    sections["oracles"] = {{"entries", list}, {"pass", all_ok}};
    if (!all_ok) fail("oracles");
  }

  out.json["command"] = "report";
  out.json["scenario"] = s.file.name;
  out.json["seed"] = opts.seed;
  out.json["sections"] = sections;
  out.json["failed_sections"] = out.failed_sections;
  out.json["pass"] = out.failed_sections.empty();
  const bool only_mismatch = out.failed_sections.size() == 1 && mismatch;
  out.status = out.failed_sections.empty() ? exit_code::ok
               : only_mismatch             ? exit_code::cross_check_mismatch
                                           : exit_code::verification_failure;
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cosymplectic integrable systems toolkit", "cosym"};
  app.require_subcommand(1);

  std::string file;
  std::uint64_t seed = 0;

  auto* c_validate = app.add_subcommand("validate", "closedness and volume condition of (omega, eta)");
  std::size_t samples = 200;
  c_validate->add_option("scenario", file, "scenario file or builtin:NAME")->required();
  c_validate->add_option("--samples", samples, "random points")->capture_default_str();
  c_validate->add_option("--seed", seed, "sampling seed")->capture_default_str();

  auto* c_verify = app.add_subcommand("verify", "integrability checks of the integral system");
  std::size_t points = 64, fibers = 8, per_fiber = 3;
  c_verify->add_option("scenario", file, "scenario file or builtin:NAME")->required();
  c_verify->add_option("--points", points, "random points")->capture_default_str();
  c_verify->add_option("--seed", seed, "sampling seed")->capture_default_str();
  c_verify->add_option("--fibers", fibers, "fibers for the induced bracket")->capture_default_str();
  c_verify->add_option("--per-fiber", per_fiber, "points per fiber")->capture_default_str();

  auto* c_integrate = app.add_subcommand("integrate", "flow of a derived vector field");
  std::string field = "eval", csv_path;
  std::vector<double> x0;
  double tau = kTwoPi, tol = 1e-10;
  c_integrate->add_option("scenario", file, "scenario file or builtin:NAME")->required();
  c_integrate->add_option("--field", field, "reeb, eval or ham:NAME")->capture_default_str();
  c_integrate->add_option("--x0", x0, "initial point (comma-separated)")->delimiter(',');
  c_integrate->add_option("--tau", tau, "flow time, negative for backward")->capture_default_str();
  c_integrate->add_option("--tol", tol, "local error tolerance")->capture_default_str();
  c_integrate->add_option("--out", csv_path, "write the trajectory as CSV");

  auto* c_actions = app.add_subcommand("actions", "period lattice, actions and the matrix b");
  std::vector<double> fiber;
  std::optional<double> delta;
  c_actions->add_option("scenario", file, "scenario file or builtin:NAME")->required();
  c_actions->add_option("--fiber", fiber, "fiber value c (comma-separated)")->delimiter(',');
  c_actions->add_option("--delta", delta, "relative fiber step for db/dc");

  auto* c_freq = app.add_subcommand("frequencies", "solve the frequency system");
  std::string mode = "reeb";
  bool verify_empirical = false;
  std::optional<double> emp_tau;
  c_freq->add_option("scenario", file, "scenario file or builtin:NAME")->required();
  c_freq->add_option("--fiber", fiber, "fiber value c (comma-separated)")->delimiter(',');
  c_freq->add_option("--delta", delta, "relative fiber step for db/dc");
  c_freq->add_option("--mode", mode, "reeb, eval or ham:k")->capture_default_str();
  c_freq->add_flag("--verify-empirical", verify_empirical, "compare with fitted angle slopes");
  c_freq->add_option("--tau", emp_tau, "flow time of the empirical fit");

  auto* c_report = app.add_subcommand("report", "run every section and aggregate");
  bool all = false;
  c_report->add_option("scenario", file, "scenario file or builtin:NAME")->required();
  c_report->add_flag("--all", all, "include actions, frequencies and oracles");
  c_report->add_option("--seed", seed, "sampling seed")->capture_default_str();
  c_report->add_option("--points", points, "random points")->capture_default_str();

  auto* c_builtin = app.add_subcommand("builtin", "print a built-in scenario as JSON");
  std::string name;
  bool list = false;
  c_builtin->add_option("name", name, "scenario name");
  c_builtin->add_flag("--list", list, "list the built-in names");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "builtin") {
      if (list) {
        for (const auto& n : builtin_names()) out << n << '\n';
        return exit_code::ok;
      }
      if (name.empty()) throw UsageError("builtin needs a scenario name or --list");
      out << dump_scenario(builtin_file(name));
      return exit_code::ok;
    }
    if (command == "verify" && points == 0) throw UsageError("--points must be positive");
    if (command == "validate" && samples == 0) throw UsageError("--samples must be positive");
    if (command == "report" && points == 0) throw UsageError("--points must be positive");

    const Scenario s = load_scenario(file);
    ordered_json j;
    j["command"] = command;
    j["scenario"] = s.file.name;
    int status = exit_code::ok;

    if (command == "validate") {
      const ValidationReport r = validate(s.structure(), samples, seed, s.tol());
      j["seed"] = seed;
      j["validation"] = validation_json(r);
      j["pass"] = r.pass;
      status = r.pass ? exit_code::ok : exit_code::verification_failure;
    } else if (command == "verify") {
      VerifyOptions vo;
      vo.points = points;
      vo.seed = seed;
      vo.fibers = fibers;
      vo.per_fiber = per_fiber;
      const VerifyReport r = verify_chain(s.system, vo);
      j["seed"] = seed;
      j["verification"] = verify_json(r);
      j["pass"] = r.pass;
      status = r.pass ? exit_code::ok : exit_code::verification_failure;
    } else if (command == "integrate") {
      const FieldSpec spec = parse_field(s, field);
      Vector start = default_point(s);
      if (!x0.empty()) {
        if (x0.size() != s.chart().dim()) {
          throw UsageError("--x0 needs " + std::to_string(s.chart().dim()) + " comma-separated values");
        }
        start = to_vector(x0);
      }
      if (!(tol > 0.0)) throw UsageError("--tol must be positive");
      IntegratorOptions io{tol};
      const Trajectory tr = integrate(s.structure(), spec, start, tau, io, s.system.integrals, s.tol());
      const std::vector<double> drift = drift_report(tr);
      ordered_json d = ordered_json::object();
      for (std::size_t i = 0; i < drift.size(); ++i) d[s.system.integrals[i].name()] = drift[i];
      j["field"] = spec.label();
      j["x0"] = vec_json(start);
      j["tau"] = tau;
      j["tol"] = tol;
      j["steps"] = tr.size();
      j["endpoint"] = vec_json(tr.normalized_state(tr.size() - 1));
      j["return_distance"] = s.chart().distance(tr.back(), start);
      j["drift"] = d;
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw UsageError("cannot write '" + csv_path + "'");
        write_csv(csv, tr);
        j["csv"] = csv_path;
      }
      j["pass"] = true;
    } else if (command == "actions") {
      const FrequencyTable t =
          compute_table(s, fiber.empty() ? std::nullopt : std::optional<Vector>(to_vector(fiber)), delta);
      bool ok = false;
      j["actions"] = actions_json(s, t, ok);
      j["pass"] = ok;
      status = ok ? exit_code::ok : exit_code::verification_failure;
    } else if (command == "frequencies") {
      const ModeSpec m = parse_mode(s, mode);
      const FrequencyTable t =
          compute_table(s, fiber.empty() ? std::nullopt : std::optional<Vector>(to_vector(fiber)), delta);
      const double t_emp = emp_tau ? *emp_tau : s.file.torus->empirical_tau;
      const ModeResult r = run_mode(s, t, m, verify_empirical, t_emp);
      bool ok = true;
      j["b_matrix"] = mat_json(t.b);
      j["cond"] = t.cond;
      j["result"] = mode_json(s, r, ok);
      j["pass"] = ok;
      status = ok ? exit_code::ok : exit_code::cross_check_mismatch;
    } else if (command == "report") {
      ReportOptions ro;
      ro.seed = seed;
      ro.points = points;
      ro.all = all;
      const ReportResult r = run_report(s, ro);
      out << r.json.dump(2) << '\n';
      if (!r.failed_sections.empty()) {
        err << "report: failed sections:";
        for (const auto& f : r.failed_sections) err << ' ' << f;
        err << '\n';
      }
      return r.status;
    }
    out << j.dump(2) << '\n';
    return status;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const UnknownScenario& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const MissingInput& e) {
    out << error_json(command, "missing_input", e).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return exit_code::verification_failure;
  } catch (const LatticeError& e) {
    out << error_json(command, "lattice", e).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return exit_code::verification_failure;
  } catch (const std::runtime_error& e) {
    // Degenerate structure, domain errors, step underflow, action and
    // continuation failures.
    out << error_json(command, "computation", e).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return exit_code::verification_failure;
  }
}

}  // namespace cosym
