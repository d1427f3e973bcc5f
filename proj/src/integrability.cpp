#include "cosym/integrability.hpp"

#include <cmath>
#include <sstream>

#include "cosym/flow.hpp"
#include "cosym/parallel.hpp"

namespace cosym {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t numeric_rank(const Matrix& m, double relative) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > s[0] * relative) ++rank;
  }
  return rank;
}

// Per-point maximum with the label of the term that attained it.
struct Worst {
  double value = 0.0;
  std::string label;
};

void absorb(CheckReport& r, const std::vector<Worst>& per_point, const std::vector<Vector>& points) {
  r.points = points.size();
  for (std::size_t k = 0; k < per_point.size(); ++k) {
    if (!r.witness_point || per_point[k].value > r.max_residual) {
      r.max_residual = per_point[k].value;
      r.witness = per_point[k].label;
      r.witness_point = points[k];
    }
  }
  r.pass = r.max_residual < r.threshold;
}

std::vector<Vector> gradients(const std::vector<ScalarField>& fs, const Vector& x) {
  std::vector<Vector> g;
  g.reserve(fs.size());
  for (const auto& f : fs) g.push_back(f.gradient(x));
  return g;
}

}  // namespace

void IntegralSystem::check_shape() const {
  const std::size_t dim = structure.dim();
  if (r > m()) throw std::invalid_argument("commuting prefix r exceeds the number of integrals");
  if (!allow_incomplete && m() + r != dim - 1) {
    std::ostringstream os;
    os << "incomplete integral set: m + r = " << m() + r << " but 2n = " << dim - 1
       << " (set allow_incomplete to override)";
    throw std::invalid_argument(os.str());
  }
}

Vector IntegralSystem::values(const Vector& x) const {
  Vector v(ix(m()));
  for (std::size_t i = 0; i < m(); ++i) v[ix(i)] = integrals[i].value(x);
  return v;
}

Matrix IntegralSystem::differentials(const Vector& x) const {
  Matrix d(ix(m()), x.size());
  for (std::size_t i = 0; i < m(); ++i) d.row(ix(i)) = integrals[i].gradient(x).transpose();
  return d;
}

std::vector<Vector> sample_points(const IntegralSystem& sys, std::size_t count, std::uint64_t seed) {
  PointSampler sampler(seed);
  return sampler.sample(sys.structure.box, count);
}

CheckReport check_first_integrals(const IntegralSystem& sys, const std::vector<Vector>& points) {
  CheckReport r;
  r.name = "first_integrals";
  r.threshold = sys.tol.first_integral;
  const std::size_t m = sys.m();
  std::vector<Worst> worst(points.size());
  std::vector<Vector> per_integral(points.size(), Vector::Zero(ix(m)));
  parallel_for(points.size(), [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    const Vector dH = sys.hamiltonian.gradient(x);
    for (std::size_t i = 0; i < m; ++i) {
      const Vector df = sys.integrals[i].gradient(x);
      const double res = std::abs(frame.reeb_derivative(df) + frame.bracket(df, dH));
      per_integral[k][ix(i)] = res;
      if (res >= worst[k].value) worst[k] = {res, sys.integrals[i].name()};
    }
  });
  absorb(r, worst, points);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = 0.0;
    for (const auto& v : per_integral) mx = std::max(mx, v[ix(i)]);
    r.metrics.emplace_back(sys.integrals[i].name(), mx);
  }
  return r;
}

CheckReport check_commuting_prefix(const IntegralSystem& sys, const std::vector<Vector>& points) {
  CheckReport r;
  r.name = "commuting_prefix";
  r.threshold = sys.tol.commuting;
  std::vector<Worst> worst(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    const auto d = gradients(sys.integrals, x);
    for (std::size_t i = 0; i < sys.r; ++i) {
      for (std::size_t j = 0; j < sys.m(); ++j) {
        if (i == j) continue;
        const double res = std::abs(frame.bracket(d[i], d[j]));
        if (res >= worst[k].value) {
          worst[k] = {res, "{" + sys.integrals[i].name() + "," + sys.integrals[j].name() + "}"};
        }
      }
    }
  });
  absorb(r, worst, points);
  if (sys.r == 0) r.note = "empty commuting prefix";
  return r;
}

IndependenceReport check_independence(const IntegralSystem& sys, const std::vector<Vector>& points) {
  IndependenceReport out;
  CheckReport& r = out.check;
  r.name = "independence";
  r.points = points.size();
  const std::size_t n = points.size();
  out.df_rank.resize(n);
  out.field_rank.resize(n);
  parallel_for(n, [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    out.df_rank[k] = numeric_rank(sys.differentials(x), sys.tol.rank_relative);
    Matrix rows(ix(sys.r + 1), x.size());
    rows.row(0) = frame.evaluation(sys.hamiltonian.gradient(x)).transpose();
    for (std::size_t i = 0; i < sys.r; ++i) {
      rows.row(ix(i + 1)) = frame.hamiltonian(sys.integrals[i].gradient(x)).transpose();
    }
    out.field_rank[k] = numeric_rank(rows, sys.tol.rank_relative);
  });
  for (std::size_t k = 0; k < n; ++k) {
    if (out.df_rank[k] == sys.m() && out.field_rank[k] == sys.r + 1) {
      out.regular.push_back(points[k]);
    } else {
      out.excluded.push_back(points[k]);
      if (!r.witness_point) {
        r.witness_point = points[k];
        std::ostringstream os;
        os << "rank(df) = " << out.df_rank[k] << " (want " << sys.m() << "), rank(Y_H, X_f) = "
           << out.field_rank[k] << " (want " << sys.r + 1 << ")";
        r.witness = os.str();
      }
    }
  }
  r.metrics.emplace_back("regular_points", static_cast<double>(out.regular.size()));
  r.metrics.emplace_back("excluded_points", static_cast<double>(out.excluded.size()));
  r.pass = n == 0 || !out.regular.empty();
  r.max_residual = static_cast<double>(out.excluded.size());
  r.threshold = static_cast<double>(n);
  if (!out.excluded.empty()) r.note = "points with a rank drop are excluded from the regular set";
  return out;
}

CheckReport check_symmetry_algebra(const IntegralSystem& sys, const std::vector<Vector>& points) {
  CheckReport r;
  r.name = "symmetry_algebra";
  r.threshold = sys.tol.lie_bracket;
  std::vector<VectorField> fields{evaluation_vector_field(sys.structure, sys.hamiltonian, sys.tol)};
  std::vector<std::string> names{"Y_H"};
  for (std::size_t i = 0; i < sys.r; ++i) {
    fields.push_back(hamiltonian_vector_field(sys.structure, sys.integrals[i], sys.tol));
    names.push_back("X_" + sys.integrals[i].name());
  }
  std::vector<Worst> worst(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t b = a + 1; b < fields.size(); ++b) {
        const double res = lie_bracket(fields[a], fields[b], points[k]).cwiseAbs().maxCoeff();
        if (res >= worst[k].value) worst[k] = {res, "[" + names[a] + "," + names[b] + "]"};
      }
    }
  });
  absorb(r, worst, points);
  return r;
}

CheckReport check_fiber_tangency(const IntegralSystem& sys, const std::vector<Vector>& points) {
  CheckReport r;
  r.name = "fiber_tangency";
  r.threshold = sys.tol.tangency;
  std::vector<Worst> worst(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    const auto d = gradients(sys.integrals, x);
    std::vector<Vector> fields{frame.evaluation(sys.hamiltonian.gradient(x))};
    std::vector<std::string> names{"Y_H"};
    for (std::size_t i = 0; i < sys.r; ++i) {
      fields.push_back(frame.hamiltonian(d[i]));
      names.push_back("X_" + sys.integrals[i].name());
    }
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t j = 0; j < d.size(); ++j) {
        const double res = std::abs(d[j].dot(fields[a]));
        if (res >= worst[k].value) worst[k] = {res, names[a] + "(" + sys.integrals[j].name() + ")"};
      }
    }
  });
  absorb(r, worst, points);
  return r;
}

CheckReport check_casimirs(const IntegralSystem& sys, const std::vector<Vector>& points) {
  CheckReport r;
  r.name = "casimirs";
  r.threshold = sys.tol.casimir;
  std::vector<Worst> worst(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    for (const auto& G : sys.casimirs) {
      const Vector dG = G.gradient(x);
      for (const auto& f : sys.integrals) {
        const double res = std::abs(frame.bracket(dG, f.gradient(x)));
        if (res >= worst[k].value) worst[k] = {res, "{" + G.name() + "," + f.name() + "}"};
      }
    }
  });
  absorb(r, worst, points);
  if (sys.casimirs.empty()) r.note = "no Casimir candidates declared";
  return r;
}

InducedBracket bracket_closure_and_corank(const IntegralSystem& sys, const std::vector<Vector>& points) {
  InducedBracket out;
  const std::size_t m = sys.m();
  out.ddim = m;
  out.dind = sys.r;
  const std::size_t n = points.size();
  std::vector<Vector> values(n);
  std::vector<Matrix> a(n);
  parallel_for(n, [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    const auto d = gradients(sys.integrals, x);
    values[k] = sys.values(x);
    a[k] = Matrix::Zero(ix(m), ix(m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const double v = frame.bracket(d[i], d[j]);
        a[k](ix(i), ix(j)) = v;
        a[k](ix(j), ix(i)) = -v;
      }
    }
  });
  std::vector<std::size_t> group_of(n);
  std::vector<std::size_t> representative;
  for (std::size_t k = 0; k < n; ++k) {
    bool placed = false;
    for (std::size_t g = 0; g < representative.size(); ++g) {
      const double dist = m ? (values[k] - values[representative[g]]).cwiseAbs().maxCoeff() : 0.0;
      if (dist < sys.tol.fiber_equal) {
        group_of[k] = g;
        placed = true;
        break;
      }
    }
    if (!placed) {
      group_of[k] = representative.size();
      representative.push_back(k);
    }
  }
  out.fibers.resize(representative.size());
  out.a.resize(representative.size());
  bool any_pair = false;
  out.parity_ok = true;
  out.corank_ok = true;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t g = group_of[k];
    out.fibers[g].push_back(points[k]);
    out.a[g].push_back(a[k]);
    if (out.fibers[g].size() > 1) {
      any_pair = true;
      const double dev = m ? (a[k] - a[representative[g]]).cwiseAbs().maxCoeff() : 0.0;
      out.max_fiber_deviation = std::max(out.max_fiber_deviation, dev);
    }
  }
  for (std::size_t g = 0; g < out.a.size(); ++g) {
    for (const auto& ak : out.a[g]) {
      const std::size_t rank = numeric_rank(ak, sys.tol.rank_relative);
      const std::size_t corank = m - rank;
      out.corank.push_back(corank);
      if (corank != sys.r) out.corank_ok = false;
      if (rank % 2 != 0 || corank % 2 != m % 2) out.parity_ok = false;
    }
  }
  out.closure_ok = any_pair && out.max_fiber_deviation < sys.tol.closure;
  out.completeness_ok = out.ddim + out.dind == sys.structure.dim() - 1;
  out.pass = out.closure_ok && out.corank_ok && out.parity_ok && out.completeness_ok;
  return out;
}

std::vector<Vector> sample_fiber_points(const IntegralSystem& sys, std::size_t fibers, std::size_t per_fiber,
                                        std::uint64_t seed) {
  PointSampler sampler(seed);
  std::vector<Vector> bases;
  for (std::size_t attempt = 0; bases.size() < fibers && attempt < 100 * std::max<std::size_t>(fibers, 1);
       ++attempt) {
    const Vector x = sampler.sample(sys.structure.box);
    const auto ind = check_independence(sys, {x});
    if (!ind.regular.empty()) bases.push_back(x);
  }
  // Flow times are drawn up front so the result does not depend on threads.
  std::vector<std::vector<Vector>> times(bases.size());
  for (auto& t : times) {
    for (std::size_t c = 1; c < per_fiber; ++c) {
      Vector v(ix(sys.r + 1));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = sampler.uniform(0.2, 1.5);
      t.push_back(v);
    }
  }
  std::vector<VectorField> fields{evaluation_vector_field(sys.structure, sys.hamiltonian, sys.tol)};
  for (std::size_t i = 0; i < sys.r; ++i) {
    fields.push_back(hamiltonian_vector_field(sys.structure, sys.integrals[i], sys.tol));
  }
  IntegratorOptions opts;
  opts.tol = 1e-12;
  std::vector<std::vector<Vector>> groups(bases.size());
  parallel_for(bases.size(), [&](std::size_t b) {
    groups[b].push_back(bases[b]);
    for (const Vector& t : times[b]) {
      Vector x = bases[b];
      for (std::size_t i = 0; i < fields.size(); ++i) x = flow(fields[i], x, t[ix(i)], opts);
      groups[b].push_back(sys.structure.chart.normalize(x));
    }
  });
  std::vector<Vector> out;
  for (auto& g : groups) {
    for (auto& x : g) out.push_back(std::move(x));
  }
  return out;
}

CheckReport check_bracket_of_integrals_lemma(const IntegralSystem& sys,
                                             std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                             const std::vector<Vector>& points) {
  if (pairs.empty()) {
    for (std::size_t i = 0; i < sys.m(); ++i) {
      for (std::size_t j = i + 1; j < sys.m(); ++j) pairs.emplace_back(i, j);
    }
  }
  for (const auto& [i, j] : pairs) {
    if (i >= sys.m() || j >= sys.m()) throw std::out_of_range("integral index out of range");
  }
  {
    IntegralSystem sub = sys;
    sub.integrals.clear();
    for (const auto& [i, j] : pairs) {
      sub.integrals.push_back(sys.integrals[i]);
      sub.integrals.push_back(sys.integrals[j]);
    }
    const CheckReport pre = check_first_integrals(sub, points);
    if (!pre.pass) {
      throw PreconditionError("bracket-of-integrals check refused: " + pre.witness +
                              " is not a first integral (residual " + std::to_string(pre.max_residual) + ")");
    }
  }
  CheckReport r;
  r.name = "bracket_of_integrals";
  r.threshold = sys.tol.lemma;
  std::vector<Worst> worst(points.size());
  std::vector<double> g_size(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t k) {
    const Vector& x = points[k];
    PointFrame frame(sys.structure, x, sys.tol);
    const Vector dH = sys.hamiltonian.gradient(x);
    for (const auto& [i, j] : pairs) {
      const ScalarField& fi = sys.integrals[i];
      const ScalarField& fj = sys.integrals[j];
      auto g = [&](const Vector& y) {
        return PointFrame(sys.structure, y, sys.tol).bracket(fi.gradient(y), fj.gradient(y));
      };
      g_size[k] = std::max(g_size[k], std::abs(g(x)));
      const Vector dg = gradient_fd(g, x);
      const double res = std::abs(frame.reeb_derivative(dg) + frame.bracket(dg, dH));
      if (res >= worst[k].value) worst[k] = {res, "{" + fi.name() + "," + fj.name() + "}"};
    }
  });
  absorb(r, worst, points);
  double gmax = 0.0;
  for (double v : g_size) gmax = std::max(gmax, v);
  r.metrics.emplace_back("max_abs_bracket", gmax);
  return r;
}

VerifyReport verify_chain(const IntegralSystem& sys, const VerifyOptions& opts) {
  if (opts.points == 0) throw std::invalid_argument("verify needs at least one sample point");
  sys.check_shape();
  VerifyReport rep;
  const auto points = sample_points(sys, opts.points, opts.seed);
  const CheckReport fi = check_first_integrals(sys, points);
  rep.checks.push_back(fi);
  rep.checks.push_back(check_commuting_prefix(sys, points));
  const IndependenceReport ind = check_independence(sys, points);
  rep.checks.push_back(ind.check);
  rep.regular_points = ind.regular.size();
  rep.excluded_points = ind.excluded.size();
  rep.checks.push_back(check_symmetry_algebra(sys, ind.regular));
  rep.checks.push_back(check_fiber_tangency(sys, ind.regular));
  if (!sys.casimirs.empty()) rep.checks.push_back(check_casimirs(sys, ind.regular));

  rep.induced = bracket_closure_and_corank(sys, sample_fiber_points(sys, opts.fibers, opts.per_fiber, opts.seed + 1));
  CheckReport closure;
  closure.name = "induced_bracket";
  closure.pass = rep.induced.pass;
  closure.max_residual = rep.induced.max_fiber_deviation;
  closure.threshold = sys.tol.closure;
  closure.points = rep.induced.corank.size();
  closure.metrics = {{"ddim", static_cast<double>(rep.induced.ddim)},
                     {"dind", static_cast<double>(rep.induced.dind)},
                     {"closure", rep.induced.closure_ok ? 1.0 : 0.0},
                     {"corank", rep.induced.corank_ok ? 1.0 : 0.0},
                     {"parity", rep.induced.parity_ok ? 1.0 : 0.0},
                     {"completeness", rep.induced.completeness_ok ? 1.0 : 0.0}};
  rep.checks.push_back(closure);

  if (fi.pass) {
    rep.checks.push_back(check_bracket_of_integrals_lemma(sys, {}, ind.regular));
  } else {
    CheckReport lemma;
    lemma.name = "bracket_of_integrals";
    lemma.pass = false;
    lemma.threshold = sys.tol.lemma;
    lemma.note = "refused: not every integral is a first integral";
    rep.checks.push_back(lemma);
  }
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

}  // namespace cosym
