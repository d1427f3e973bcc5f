#include "cosym/actionangle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cosym/parallel.hpp"

namespace cosym {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -M_PI ? a + kTwoPi : a;
}

Vector return_displacement(const IntegralSystem& sys, const std::vector<VectorField>& gens, const Vector& x0,
                           const Vector& T, const IntegratorOptions& opts) {
  return sys.structure.chart.difference(lattice_flow(gens, x0, T, opts), x0);
}

double det2(const Vector& a, const Vector& b) { return a[0] * b[1] - a[1] * b[0]; }

// Gauss-Legendre nodes and weights on [0, 1].
constexpr double kGaussNodes[3] = {0.5 - 0.38729833462074168852, 0.5, 0.5 + 0.38729833462074168852};
constexpr double kGaussWeights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace

double AngleMap::value(const Vector& x) const {
  const auto s = as_span(x);
  return std::atan2(sin_expr.eval(s), cos_expr.eval(s));
}

std::vector<VectorField> torus_generators(const IntegralSystem& sys) {
  std::vector<VectorField> gens;
  for (std::size_t i = 0; i < sys.r; ++i) {
    gens.push_back(hamiltonian_vector_field(sys.structure, sys.integrals[i], sys.tol));
  }
  gens.push_back(reeb_vector_field(sys.structure, sys.tol));
  return gens;
}

Vector lattice_flow(const std::vector<VectorField>& gens, const Vector& x, const Vector& T,
                    const IntegratorOptions& opts) {
  if (inf_norm(T) == 0.0) return x;
  return flow(combine(gens, T), x, 1.0, opts);
}

Vector polish_lattice_vector(const IntegralSystem& sys, const Vector& x0, const Vector& guess,
                             const LatticeOptions& opts) {
  const auto gens = torus_generators(sys);
  if (static_cast<std::size_t>(guess.size()) != gens.size()) {
    throw std::invalid_argument("lattice vector length must be r + 1");
  }
  auto G = [&](const Vector& T) { return return_displacement(sys, gens, x0, T, opts.integrator); };
  Vector T = guess;
  Vector g = G(T);
  double res = inf_norm(g);
  for (int it = 0; it < opts.newton_iterations && res > 1e-11; ++it) {
    Matrix J(g.size(), T.size());
    const double delta = 1e-6 * std::max(1.0, inf_norm(T));
    for (Eigen::Index k = 0; k < T.size(); ++k) {
      Vector tp = T, tm = T;
      tp[k] += delta;
      tm[k] -= delta;
      J.col(k) = (G(tp) - G(tm)) / (2 * delta);
    }
    const Vector step = J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-g);
    double lambda = 1.0;
    bool improved = false;
    // Near the integrator noise floor a failed full step ends the iteration.
    const int tries = res < 1e-3 * sys.tol.lattice_return ? 1 : 12;
    for (int ls = 0; ls < tries; ++ls, lambda *= 0.5) {
      const Vector trial = T + lambda * step;
      const Vector gt = G(trial);
      if (inf_norm(gt) < res) {
        T = trial;
        g = gt;
        res = inf_norm(gt);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(res < sys.tol.lattice_return)) {
    std::ostringstream os;
    os << "lattice polish did not converge (return residual " << res << ")";
    throw LatticeError(os.str());
  }
  return T;
}

PeriodLattice polish_lattice(const IntegralSystem& sys, const Vector& x0, const Matrix& guess,
                             const LatticeOptions& opts) {
  PeriodLattice lat;
  lat.base_point = x0;
  lat.basis = guess;
  lat.origin = "supplied";
  const auto gens = torus_generators(sys);
  std::vector<Vector> rows(static_cast<std::size_t>(guess.rows()));
  parallel_for(rows.size(), [&](std::size_t mu) {
    rows[mu] = polish_lattice_vector(sys, x0, guess.row(ix(mu)).transpose(), opts);
  });
  for (std::size_t mu = 0; mu < rows.size(); ++mu) {
    lat.basis.row(ix(mu)) = rows[mu].transpose();
    lat.residual =
        std::max(lat.residual, inf_norm(return_displacement(sys, gens, x0, rows[mu], opts.integrator)));
  }
  return lat;
}

PeriodLattice detect_period_lattice(const IntegralSystem& sys, const Vector& x0, const LatticeOptions& opts) {
  const auto gens = torus_generators(sys);
  if (gens.size() != 2) {
    throw LatticeError("lattice detection covers two-dimensional tori (r = 1); supply the lattice instead");
  }
  const ChartSpec& chart = sys.structure.chart;
  const std::vector<Vector> directions{(Vector(2) << 1, 0).finished(), (Vector(2) << 0, 1).finished(),
                                       (Vector(2) << 1, 1).finished(), (Vector(2) << 1, -1).finished()};
  std::vector<std::vector<Vector>> found(directions.size());
  parallel_for(directions.size(), [&](std::size_t d) {
    const VectorField W = combine(gens, directions[d]);
    bool escaped = false;
    double prev2 = std::numeric_limits<double>::infinity(), prev1 = prev2, s_prev1 = 0.0;
    std::vector<double> times;
    flow_steps(W, x0, opts.horizon, opts.integrator,
               [&](double s0, const Vector& a, const Vector& da, double s1, const Vector& b, const Vector& db) {
                 if (times.size() >= opts.max_candidates) return;
                 // Samples no further apart than a quarter window along the path.
                 const int sub = std::max(4, static_cast<int>(std::ceil((b - a).norm() / (0.25 * opts.window))));
                 for (int j = 1; j <= sub; ++j) {
                   const double s = s0 + (s1 - s0) * j / sub;
                   const double dist = chart.distance(hermite_point(s0, a, da, s1, b, db, s), x0);
                   if (dist > opts.escape) escaped = true;
                   if (escaped && prev1 < opts.window && prev1 <= prev2 && prev1 <= dist) {
                     times.push_back(s_prev1);
                     escaped = false;
                   }
                   prev2 = prev1;
                   prev1 = dist;
                   s_prev1 = s;
                 }
               });
    // The earliest candidate that polishes is enough per direction.
    for (double s : times) {
      try {
        found[d].push_back(polish_lattice_vector(sys, x0, s * directions[d], opts));
        break;
      } catch (const LatticeError&) {
      }
    }
  });
  std::vector<Vector> cands;
  for (const auto& f : found) {
    for (const auto& v : f) cands.push_back(v);
  }
  std::vector<Vector> pool = cands;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    for (std::size_t j = i + 1; j < cands.size(); ++j) pool.push_back(cands[i] - cands[j]);
  }
  double scale = 1.0;
  for (const auto& v : cands) scale = std::max(scale, v.norm());
  const double det_floor = 1e-6 * scale * scale;
  Vector u, v;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const double d = std::abs(det2(pool[i], pool[j]));
      if (d > det_floor && d < best) {
        best = d;
        u = pool[i];
        v = pool[j];
      }
    }
  }
  if (!std::isfinite(best)) {
    std::ostringstream os;
    os << "no return found within the time horizon " << opts.horizon << " (" << cands.size()
       << " period candidate(s), fewer than two independent)";
    throw LatticeError(os.str());
  }
  // Every candidate must have integer coordinates in the basis; a fractional
  // remainder is a shorter lattice vector and replaces one basis vector.
  for (int pass = 0; pass < 20; ++pass) {
    bool changed = false;
    for (const auto& c : cands) {
      Matrix B(2, 2);
      B.col(0) = u;
      B.col(1) = v;
      const Vector a = B.lu().solve(c);
      const Vector rem = c - std::round(a[0]) * u - std::round(a[1]) * v;
      const double fa = std::abs(a[0] - std::round(a[0])), fb = std::abs(a[1] - std::round(a[1]));
      if (fa < 1e-4 && fb < 1e-4) continue;
      if (fb >= 1e-4 && (fa < 1e-4 || fb <= fa)) {
        v = rem;
      } else {
        u = rem;
      }
      changed = true;
      break;
    }
    if (!changed) break;
  }
  // Lagrange reduction.
  for (int it = 0; it < 100; ++it) {
    if (u.squaredNorm() > v.squaredNorm()) std::swap(u, v);
    const double mu = std::round(u.dot(v) / u.squaredNorm());
    if (mu == 0.0) break;
    v -= mu * u;
  }
  if (det2(u, v) < 0) v = -v;
  Matrix basis(2, 2);
  basis.row(0) = u.transpose();
  basis.row(1) = v.transpose();
  PeriodLattice lat = polish_lattice(sys, x0, basis, opts);
  lat.origin = "detected";
  return lat;
}

Matrix angle_windings(const IntegralSystem& sys, const PeriodLattice& lattice, const std::vector<AngleMap>& angles,
                      const LatticeOptions& opts) {
  const auto gens = torus_generators(sys);
  const auto rows = static_cast<std::size_t>(lattice.basis.rows());
  Matrix w(ix(rows), ix(angles.size()));
  std::vector<Vector> turns(rows);
  parallel_for(rows, [&](std::size_t mu) {
    const VectorField W = combine(gens, lattice.basis.row(ix(mu)).transpose());
    Vector prev(ix(angles.size())), total = Vector::Zero(ix(angles.size()));
    for (std::size_t k = 0; k < angles.size(); ++k) prev[ix(k)] = angles[k].value(lattice.base_point);
    flow_steps(W, lattice.base_point, 1.0, opts.integrator,
               [&](double s0, const Vector& a, const Vector& da, double s1, const Vector& b, const Vector& db) {
                 const int sub = std::max(8, static_cast<int>(std::ceil((b - a).norm() / 0.1)));
                 for (int j = 1; j <= sub; ++j) {
                   const Vector x = hermite_point(s0, a, da, s1, b, db, s0 + (s1 - s0) * j / sub);
                   for (std::size_t k = 0; k < angles.size(); ++k) {
                     const double phi = angles[k].value(x);
                     total[ix(k)] += wrap_angle(phi - prev[ix(k)]);
                     prev[ix(k)] = phi;
                   }
                 }
               });
    turns[mu] = total / kTwoPi;
  });
  for (std::size_t mu = 0; mu < rows; ++mu) {
    for (std::size_t k = 0; k < angles.size(); ++k) {
      const double t = turns[mu][ix(k)];
      if (std::abs(t - std::round(t)) > 1e-3) {
        std::ostringstream os;
        os << "angle " << angles[k].name << " makes " << t << " turns along lattice vector " << mu
           << "; expected an integer";
        throw LatticeError(os.str());
      }
      w(ix(mu), ix(k)) = std::round(t);
    }
  }
  return w;
}

PeriodLattice adapt_to_angles(const IntegralSystem& sys, const PeriodLattice& lattice,
                              const std::vector<AngleMap>& angles, const LatticeOptions& opts) {
  if (angles.size() != static_cast<std::size_t>(lattice.basis.rows())) {
    throw std::invalid_argument("need one angle map per lattice vector");
  }
  const Matrix W = angle_windings(sys, lattice, angles, opts);
  const double det = W.determinant();
  if (std::abs(std::abs(std::round(det)) - 1.0) > 0.5) {
    std::ostringstream os;
    os << "declared angles do not form a basis of the torus homology (winding determinant " << det << ")";
    throw LatticeError(os.str());
  }
  Matrix Winv = W.inverse();
  for (Eigen::Index i = 0; i < Winv.size(); ++i) Winv.data()[i] = std::round(Winv.data()[i]);
  PeriodLattice out = lattice;
  out.basis = Winv * lattice.basis;
  out.windings = angle_windings(sys, out, angles, opts);
  out.adapted = true;
  const auto gens = torus_generators(sys);
  out.residual = 0.0;
  for (Eigen::Index mu = 0; mu < out.basis.rows(); ++mu) {
    out.residual = std::max(out.residual, inf_norm(return_displacement(sys, gens, out.base_point,
                                                                       out.basis.row(mu).transpose(),
                                                                       opts.integrator)));
  }
  return out;
}

namespace {

struct CycleIntegral {
  double lambda = 0.0;
  double eta = 0.0;
  double closure = 0.0;
  std::vector<Vector> samples;
};

CycleIntegral trace_cycle(const IntegralSystem& sys, const std::vector<VectorField>& gens, const Vector& x0,
                          const Vector& T, const OneFormField& lambda, const IntegratorOptions& opts) {
  CycleIntegral out;
  const VectorField W = combine(gens, T);
  const OneFormField& eta = sys.structure.eta;
  Vector end = x0;
  flow_steps(W, x0, 1.0, opts,
             [&](double s0, const Vector& a, const Vector& da, double s1, const Vector& b, const Vector& db) {
               const double h = s1 - s0;
               for (int j = 0; j < 3; ++j) {
                 const Vector x = hermite_point(s0, a, da, s1, b, db, s0 + h * kGaussNodes[j]);
                 const Vector w = W(x);
                 out.lambda += kGaussWeights[j] * h * lambda.value(x).dot(w);
                 out.eta += kGaussWeights[j] * h * eta.value(x).dot(w);
               }
               out.samples.push_back(b);
               end = b;
             });
  out.closure = inf_norm(sys.structure.chart.difference(end, x0));
  return out;
}

ActionProfile actions_at(const IntegralSystem& sys, const PeriodLattice& lattice, const OneFormField& lambda,
                         const ActionOptions& opts) {
  const auto gens = torus_generators(sys);
  const auto rows = static_cast<std::size_t>(lattice.basis.rows());
  std::vector<CycleIntegral> cycles(rows);
  parallel_for(rows, [&](std::size_t mu) {
    cycles[mu] = trace_cycle(sys, gens, lattice.base_point, lattice.basis.row(ix(mu)).transpose(), lambda,
                             opts.integrator);
  });
  ActionProfile p;
  p.lattice = lattice;
  p.fiber = sys.values(lattice.base_point);
  p.actions.resize(ix(rows));
  p.eta_periods.resize(ix(rows));
  p.closure.resize(ix(rows));
  for (std::size_t mu = 0; mu < rows; ++mu) {
    p.actions[ix(mu)] = cycles[mu].lambda / kTwoPi;
    p.eta_periods[ix(mu)] = cycles[mu].eta / kTwoPi;
    p.closure[ix(mu)] = cycles[mu].closure;
    if (cycles[mu].closure > 10 * sys.tol.lattice_return) {
      std::ostringstream os;
      os << "cycle " << mu << " fails to close (residual " << cycles[mu].closure << ")";
      throw ActionError(os.str());
    }
  }
  // -d lambda = omega along the traced cycles
  std::vector<Vector> pts;
  std::size_t total = 0;
  for (const auto& c : cycles) total += c.samples.size();
  const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, opts.primitive_samples));
  std::size_t k = 0;
  for (const auto& c : cycles) {
    for (const auto& x : c.samples) {
      if (k++ % stride == 0) pts.push_back(x);
    }
  }
  for (const auto& x : pts) {
    const Matrix diff = -exterior_derivative(lambda, x) - sys.structure.omega.value(x);
    p.primitive_residual = std::max(p.primitive_residual, diff.cwiseAbs().maxCoeff());
  }
  if (!(p.primitive_residual < sys.tol.primitive)) {
    std::ostringstream os;
    os << "lambda is not a primitive of omega near the torus (max |-d lambda - omega| = " << p.primitive_residual
       << ")";
    throw ActionError(os.str());
  }
  return p;
}

}  // namespace

ActionProfile action_integrals(const IntegralSystem& sys, const PeriodLattice& lattice, const OneFormField& lambda,
                               const ActionOptions& opts) {
  if (lambda.dim() != sys.structure.dim()) throw std::invalid_argument("lambda dimension does not match the chart");
  ActionProfile p = actions_at(sys, lattice, lambda, opts);
  if (opts.check_path_independence) {
    const auto gens = torus_generators(sys);
    Vector shift = Vector::Zero(lattice.basis.cols());
    for (Eigen::Index mu = 0; mu < lattice.basis.rows(); ++mu) {
      const double c = static_cast<std::size_t>(mu) < opts.second_base.size() ? opts.second_base[static_cast<std::size_t>(mu)] : 0.25;
      shift += c * lattice.basis.row(mu).transpose();
    }
    const Vector x1 = lattice_flow(gens, lattice.base_point, shift, opts.integrator);
    LatticeOptions lo;
    lo.integrator = opts.integrator;
    PeriodLattice moved = polish_lattice(sys, x1, lattice.basis, lo);
    moved.windings = lattice.windings;
    moved.adapted = lattice.adapted;
    moved.origin = lattice.origin;
    const ActionProfile q = actions_at(sys, moved, lambda, opts);
    p.second_base_point = x1;
    p.second_actions = q.actions;
    p.path_independence = inf_norm(q.actions - p.actions);
  }
  return p;
}

Vector project_to_fiber(const IntegralSystem& sys, const Vector& guess, const Vector& c) {
  if (static_cast<std::size_t>(c.size()) != sys.m()) {
    throw std::invalid_argument("fiber value needs one entry per integral");
  }
  Vector x = guess;
  const double target = 1e-13 * std::max(1.0, inf_norm(c));
  for (int it = 0; it < 60; ++it) {
    const Vector res = c - sys.values(x);
    if (inf_norm(res) < target) return x;
    const Matrix J = sys.differentials(x);
    const Vector dx = J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(res);
    if (!dx.allFinite()) break;
    x += dx;
  }
  const Vector res = c - sys.values(x);
  if (inf_norm(res) < 1e3 * target) return x;
  std::ostringstream os;
  os << "could not reach the fiber (residual " << inf_norm(res) << ")";
  throw FiberContinuationError(os.str());
}

FrequencyTable b_matrix(const IntegralSystem& sys, const OneFormField& lambda, const std::vector<AngleMap>& angles,
                        const Vector& base_guess, const Vector& c, const FrequencyOptions& opts) {
  const std::size_t r = sys.r;
  FrequencyTable t;
  const Vector x_c = project_to_fiber(sys, base_guess, c);
  PeriodLattice lattice = opts.supplied_lattice ? polish_lattice(sys, x_c, *opts.supplied_lattice, opts.lattice)
                                                : detect_period_lattice(sys, x_c, opts.lattice);
  if (opts.supplied_lattice) lattice.origin = "supplied";
  if (angles.size() == r + 1) lattice = adapt_to_angles(sys, lattice, angles, opts.lattice);
  t.profile = action_integrals(sys, lattice, lambda, opts.actions);

  ActionOptions neighbor = opts.actions;
  neighbor.check_path_independence = false;
  std::vector<Vector> fiber_actions(2 * r), fiber_eta(2 * r);
  std::vector<double> deltas(r);
  for (std::size_t nu = 0; nu < r; ++nu) deltas[nu] = opts.delta_scale * std::max(1.0, std::abs(c[ix(nu)]));
  parallel_for(2 * r, [&](std::size_t run) {
    const std::size_t nu = run / 2;
    const double sign = run % 2 == 0 ? 1.0 : -1.0;
    Vector c2 = c;
    c2[ix(nu)] += sign * deltas[nu];
    try {
      const Vector x2 = project_to_fiber(sys, x_c, c2);
      PeriodLattice lat2 = polish_lattice(sys, x2, lattice.basis, opts.lattice);
      const ActionProfile p2 = action_integrals(sys, lat2, lambda, neighbor);
      fiber_actions[run] = p2.actions;
      fiber_eta[run] = p2.eta_periods;
    } catch (const LatticeError& e) {
      throw FiberContinuationError(std::string("neighboring torus not found: ") + e.what());
    } catch (const ActionError& e) {
      throw FiberContinuationError(std::string("neighboring torus not found: ") + e.what());
    }
  });
  const auto n = ix(r + 1);
  t.b = Matrix::Zero(n, n);
  for (std::size_t nu = 0; nu < r; ++nu) {
    t.b.col(ix(nu)) = (fiber_actions[2 * nu] - fiber_actions[2 * nu + 1]) / (2 * deltas[nu]);
  }
  t.b.col(ix(r)) = t.profile.eta_periods;
  t.delta = r ? deltas[0] : 0.0;

  // Spread of the eta column over the base and neighboring fibers.
  std::vector<Vector> etas{t.profile.eta_periods};
  for (const auto& e : fiber_eta) etas.push_back(e);
  for (Eigen::Index mu = 0; mu < n; ++mu) {
    double mean = 0.0;
    for (const auto& e : etas) mean += e[mu];
    mean /= static_cast<double>(etas.size());
    double var = 0.0;
    for (const auto& e : etas) var += (e[mu] - mean) * (e[mu] - mean);
    t.eta_column_variance = std::max(t.eta_column_variance, var / static_cast<double>(etas.size()));
  }

  Eigen::JacobiSVD<Matrix> svd(t.b);
  const Vector& sv = svd.singularValues();
  t.cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  if (r > 0) {
    Eigen::JacobiSVD<Matrix> sub(t.b.leftCols(ix(r)));
    const Vector& s = sub.singularValues();
    t.redundancy_rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[0] > 0.0 && s[i] > 1e-8 * s[0]) ++t.redundancy_rank;
    }
  }
  t.lattice_b = lattice.basis / kTwoPi;
  t.lattice_mismatch = (t.b - t.lattice_b).cwiseAbs().maxCoeff();

  const auto gens = torus_generators(sys);
  Matrix V(x_c.size(), n);
  for (Eigen::Index k = 0; k < n; ++k) V.col(k) = gens[static_cast<std::size_t>(k)](x_c);
  const Vector y = evaluation_field(sys.structure, sys.hamiltonian, x_c, sys.tol);
  t.eval_coefficients = V.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  t.eval_fit_residual = inf_norm(V * t.eval_coefficients - y);
  return t;
}

Vector solve_frequencies(const FrequencyTable& table, FrequencyMode mode, std::size_t k, double cond_max) {
  const Eigen::Index n = table.b.rows();
  if (!(table.cond < cond_max)) {
    std::ostringstream os;
    os << "frequency matrix b is singular (cond " << table.cond << ")";
    throw SingularFrequencyMatrix(os.str());
  }
  Vector rhs = Vector::Zero(n);
  switch (mode) {
    case FrequencyMode::Reeb:
      rhs[n - 1] = 1.0;
      break;
    case FrequencyMode::Hamiltonian:
      if (k < 1 || static_cast<Eigen::Index>(k) >= n) {
        throw std::invalid_argument("Hamiltonian frequency index must be in 1..r");
      }
      rhs[static_cast<Eigen::Index>(k) - 1] = 1.0;
      break;
    case FrequencyMode::Evaluation:
      rhs = table.eval_coefficients;
      break;
  }
  return table.b.transpose().partialPivLu().solve(rhs);
}

Vector generator_period_residuals(const IntegralSystem& sys, const FrequencyTable& table,
                                  const IntegratorOptions& opts) {
  const auto gens = torus_generators(sys);
  const Vector& x0 = table.profile.lattice.base_point;
  Vector res(table.b.rows());
  for (Eigen::Index mu = 0; mu < table.b.rows(); ++mu) {
    const Vector end = flow(combine(gens, table.b.row(mu).transpose()), x0, kTwoPi, opts);
    res[mu] = inf_norm(sys.structure.chart.difference(end, x0));
  }
  return res;
}

EmpiricalFrequencies empirical_frequencies(const VectorField& field, const ChartSpec& chart, const Vector& x0,
                                           const std::vector<AngleMap>& angles, double tau_end, double dt,
                                           const IntegratorOptions& opts, double linear_fit) {
  (void)chart;
  if (!(dt > 0.0) || !(tau_end > 0.0)) throw std::invalid_argument("empirical frequencies need tau_end, dt > 0");
  const std::size_t na = angles.size();
  std::vector<double> taus{0.0};
  std::vector<Vector> phis;
  Vector prev(ix(na)), unwrapped(ix(na));
  for (std::size_t k = 0; k < na; ++k) prev[ix(k)] = unwrapped[ix(k)] = angles[k].value(x0);
  phis.push_back(unwrapped);
  std::size_t next = 1;
  flow_steps(field, x0, tau_end, opts,
             [&](double s0, const Vector& a, const Vector& da, double s1, const Vector& b, const Vector& db) {
               while (static_cast<double>(next) * dt <= s1 + 1e-12) {
                 const double s = static_cast<double>(next) * dt;
                 const Vector x = hermite_point(s0, a, da, s1, b, db, std::min(s, s1));
                 for (std::size_t k = 0; k < na; ++k) {
                   const double phi = angles[k].value(x);
                   const double jump = wrap_angle(phi - prev[ix(k)]);
                   if (std::abs(jump) > M_PI / 2) {
                     std::ostringstream os;
                     os << "angle " << angles[k].name << " jumps by " << jump << " between samples at tau = " << s
                        << "; use a smaller output step";
                     throw AngleUnwrapError(os.str());
                   }
                   unwrapped[ix(k)] += jump;
                   prev[ix(k)] = phi;
                 }
                 taus.push_back(s);
                 phis.push_back(unwrapped);
                 ++next;
               }
             });
  EmpiricalFrequencies out;
  out.samples = taus.size();
  out.slopes.resize(ix(na));
  out.fit_residuals.resize(ix(na));
  double tm = 0.0;
  for (double t : taus) tm += t;
  tm /= static_cast<double>(taus.size());
  double stt = 0.0;
  for (double t : taus) stt += (t - tm) * (t - tm);
  for (std::size_t k = 0; k < na; ++k) {
    double pm = 0.0;
    for (const auto& p : phis) pm += p[ix(k)];
    pm /= static_cast<double>(phis.size());
    double stp = 0.0;
    for (std::size_t j = 0; j < taus.size(); ++j) stp += (taus[j] - tm) * (phis[j][ix(k)] - pm);
    const double slope = stt > 0.0 ? stp / stt : 0.0;
    const double intercept = pm - slope * tm;
    double res = 0.0;
    for (std::size_t j = 0; j < taus.size(); ++j) {
      res = std::max(res, std::abs(phis[j][ix(k)] - (intercept + slope * taus[j])));
    }
    out.slopes[ix(k)] = slope;
    out.fit_residuals[ix(k)] = res;
    out.max_residual = std::max(out.max_residual, res);
  }
  out.linear = out.max_residual < linear_fit;
  return out;
}

bool irrational_ratio(double ratio, int max_denominator, double tol) {
  for (int q = 1; q <= max_denominator; ++q) {
    const double p = std::round(ratio * q);
    if (std::abs(ratio - p / q) < tol) return false;
  }
  return true;
}

double min_return_distance(const VectorField& field, const ChartSpec& chart, const Vector& x0, const Section& section,
                           double tau_end, const IntegratorOptions& opts) {
  const Trajectory tr = integrate(field, chart, x0, tau_end, opts);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ev : section_crossings(tr, field, section)) best = std::min(best, chart.distance(ev.state, x0));
  return best;
}

}  // namespace cosym
