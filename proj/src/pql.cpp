#include "pwacert/pql.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "json.hpp"
#include "pwacert/errors.hpp"

namespace pwacert {

using conic::LinExpr;
using conic::SymExpr;
using conic::SymVar;
using nlohmann::json;

MatrixXd CellForm::lifted() const { return lift(P, 2.0 * q, 0.0); }

namespace {

double scale_of(const MatrixXd& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

// Embeds the multiplier of the target cell into the rows of a switch stack:
// row 0 stays the homogenizing row, the target rows follow the source rows.
MatrixXd embed_target(const MatrixXd& w, int source_rows) {
  const int nj = static_cast<int>(w.rows()) - 1;
  const int n = 1 + source_rows + nj;
  std::vector<int> map(nj + 1);
  map[0] = 0;
  for (int k = 1; k <= nj; ++k) map[k] = source_rows + k;
  MatrixXd out = MatrixXd::Zero(n, n);
  for (int a = 0; a <= nj; ++a)
    for (int b = 0; b <= nj; ++b) out(map[a], map[b]) = w(a, b);
  return out;
}

struct FormVars {
  SymVar P;
  int q = -1;  // first index of q, or -1 when fixed to zero
};

// Adds coef * M(P, 2q, 0) of a variable form to an expression of size d+1.
void add_form(SymExpr& e, const FormVars& f, int d, double coef) {
  for (int j = 0; j < d; ++j)
    for (int i = j; i < d; ++i) e.at(i + 1, j + 1).add_term(f.P.index(i, j), coef);
  if (f.q >= 0)
    for (int i = 0; i < d; ++i) e.at(i + 1, 0).add_term(f.q + i, coef);
}

// Adds coef * F' M(P, 2q, 0) F for a variable form.
void add_form_conjugated(SymExpr& e, const FormVars& f, const MatrixXd& F, int d, double coef) {
  const int n = d + 1;
  for (int c = 0; c < n; ++c)
    for (int r = c; r < n; ++r) {
      LinExpr& entry = e.at(r, c);
      // M(P,2q,0)_{ab}: P_{a-1,b-1} for a,b >= 1; q_{a-1} for (a,0) and (0,a).
      for (int b = 1; b < n; ++b)
        for (int a = b; a < n; ++a) {
          double w = F(a, r) * F(b, c);
          if (a != b) w += F(b, r) * F(a, c);
          entry.add_term(f.P.index(a - 1, b - 1), coef * w);
        }
      if (f.q >= 0)
        for (int a = 1; a < n; ++a) {
          double w = F(a, r) * F(0, c) + F(0, r) * F(a, c);
          entry.add_term(f.q + a - 1, coef * w);
        }
    }
}

// Solver output projected onto the multiplier cones; the residual check then
// absorbs the projection error.
Multiplier read_multiplier(const SymVar& pos, const SymVar& psd, const VectorXd& x) {
  MatrixXd nonneg = pos.value(x).cwiseMax(0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(psd.value(x));
  VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  MatrixXd psd_part = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return {nonneg, 0.5 * (psd_part + psd_part.transpose())};
}

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (int c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

MatrixXd read_matrix(const json& j, int n, const std::string& where) {
  MatrixXd m(n, n);
  if (j.is_array() && j.size() == static_cast<std::size_t>(n) && (n == 0 || j[0].is_array())) {
    for (int r = 0; r < n; ++r) {
      if (j[r].size() != static_cast<std::size_t>(n))
        throw Error(ErrorKind::Parse, "matrix row has wrong length at " + where);
      for (int c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
    }
  } else if (j.is_array() && j.size() == static_cast<std::size_t>(n * n)) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = j[r * n + c].get<double>();
  } else {
    throw Error(ErrorKind::Parse, "expected a " + std::to_string(n) + "x" + std::to_string(n) +
                                      " matrix at " + where);
  }
  return m;
}

Multiplier read_multiplier_json(const json& j, const std::string& where) {
  const int n = static_cast<int>(j.at("nonneg").size());
  return {read_matrix(j.at("nonneg"), n, where + "/nonneg"),
          read_matrix(j.at("psd"), n, where + "/psd")};
}

json multiplier_json(const Multiplier& m) {
  return {{"nonneg", matrix_json(m.nonneg)}, {"psd", matrix_json(m.psd)}};
}

}  // namespace

namespace {

PqlCertificate synthesize_once(const PwaSystem& sys, const SwitchSets& sw,
                               const LiftedSystem& lifted, const SynthesisOptions& options) {
  const int d = sys.dim();
  const std::size_t ncell = sys.cell_count();
  conic::Model model;
  std::vector<FormVars> forms(ncell);
  for (auto& f : forms) {
    f.P = model.add_symmetric(d);
    if (!options.homogeneous) f.q = model.add_variables(d);
  }
  const int alpha = model.add_variable();
  const int beta = model.add_variable();
  model.add_nonneg(LinExpr::variable(alpha));
  model.add_nonneg(LinExpr::variable(beta));

  struct Pair {
    SymVar pos, psd;
  };
  std::vector<Pair> wvars;
  std::map<CellPair, Pair> uvars;
  std::map<std::size_t, Pair> zvars;

  const MatrixXd id_lift = lift(MatrixXd::Identity(d, d), VectorXd::Zero(d), 0.0);
  for (std::size_t i = 0; i < ncell; ++i) {
    const MatrixXd& E = lifted.E[i];
    Pair w{model.add_nonneg_symmetric(E.rows()), model.add_psd_symmetric(E.rows())};
    SymExpr e(d + 1);
    add_form(e, forms[i], d, 1.0);
    e.at(0, 0).add_term(alpha, -1.0);
    e.add_constant(id_lift, -1.0);
    e.at(0, 0).add_term(beta, 1.0);
    e.add_congruence(E, w.pos, -1.0);
    e.add_congruence(E, w.psd, -1.0);
    model.add_psd(e);
    wvars.push_back(w);
  }
  for (CellPair p : sw.sw_bar) {
    const MatrixXd& E = lifted.E_pair.at(p);
    Pair u{model.add_nonneg_symmetric(E.rows()), model.add_psd_symmetric(E.rows())};
    SymExpr e(d + 1);
    add_form(e, forms[p.from], d, 1.0);
    add_form_conjugated(e, forms[p.to], lifted.F[p.from], d, -1.0);
    e.add_congruence(E, u.pos, -1.0);
    e.add_congruence(E, u.psd, -1.0);
    model.add_psd(e);
    uvars.emplace(p, u);
  }
  for (std::size_t i : sw.in_set) {
    const MatrixXd& E = lifted.E_init.at(i);
    Pair z{model.add_nonneg_symmetric(E.rows()), model.add_psd_symmetric(E.rows())};
    SymExpr e(d + 1);
    add_form(e, forms[i], d, -1.0);
    e.at(0, 0).add_term(alpha, 1.0);
    e.add_congruence(E, z.pos, -1.0);
    e.add_congruence(E, z.psd, -1.0);
    model.add_psd(e);
    zvars.emplace(i, z);
  }
  LinExpr objective;
  objective.add_term(alpha, options.alpha_weight);
  objective.add_term(beta, options.beta_weight);
  if (options.multiplier_weight > 0) {
    auto penalize = [&](const Pair& m) {
      const int n = m.pos.size();
      for (int j = 0; j < n; ++j) {
        objective.add_term(m.psd.index(j, j), options.multiplier_weight);
        for (int i = j; i < n; ++i)
          objective.add_term(m.pos.index(i, j), options.multiplier_weight * (i == j ? 1.0 : 2.0));
      }
    };
    for (const auto& w : wvars) penalize(w);
    for (const auto& [p, u] : uvars) penalize(u);
    for (const auto& [i, z] : zvars) penalize(z);
  }
  model.minimize(objective);

  conic::ConicSolution sol = conic::solve(model.build(), options.settings);
  if (sol.status == conic::Status::Infeasible || sol.status == conic::Status::Unbounded)
    throw Error(ErrorKind::NoPqlFound,
                "no piecewise quadratic certificate exists for this relaxation (solver status " +
                    std::string(conic::to_string(sol.status)) + ")");
  if (sol.status != conic::Status::Optimal && sol.status != conic::Status::Inaccurate)
    throw Error(ErrorKind::SynthesisFailed,
                "certificate program did not converge (status " +
                    std::string(conic::to_string(sol.status)) + ", primal residual " +
                    std::to_string(sol.primal_residual) + ", dual residual " +
                    std::to_string(sol.dual_residual) + ")");

  const VectorXd& x = sol.x;
  PqlCertificate cert;
  cert.homogeneous = options.homogeneous;
  for (const auto& f : forms) {
    CellForm form{f.P.value(x), VectorXd::Zero(d)};
    if (f.q >= 0) form.q = x.segment(f.q, d);
    cert.forms.push_back(std::move(form));
  }
  cert.alpha = x[alpha];
  cert.beta = x[beta];
  for (std::size_t i = 0; i < ncell; ++i)
    cert.cell_multipliers.emplace(i, read_multiplier(wvars[i].pos, wvars[i].psd, x));
  for (const auto& [p, u] : uvars) cert.switch_multipliers.emplace(p, read_multiplier(u.pos, u.psd, x));
  for (const auto& [i, z] : zvars) cert.initial_multipliers.emplace(i, read_multiplier(z.pos, z.psd, x));
  return cert;
}

}  // namespace

PqlCertificate synthesize(const PwaSystem& sys, const SwitchSets& sw, const LiftedSystem& lifted,
                          const SynthesisOptions& options) {
  try {
    return synthesize_once(sys, sw, lifted, options);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SynthesisFailed || options.multiplier_weight > 0) throw;
  }
  // Without a strictly feasible point the multipliers can drift to infinity;
  // a small weight on their size keeps the optimum attained.
  for (double weight : {1e-3, 1e-2}) {
    SynthesisOptions retry = options;
    retry.multiplier_weight = weight;
    try {
      return synthesize_once(sys, sw, lifted, retry);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SynthesisFailed || weight == 1e-2) throw;
    }
  }
  throw Error(ErrorKind::SynthesisFailed, "certificate program did not converge");
}

MatrixXd level_matrix(const PqlCertificate& cert, std::size_t i, int dim) {
  const CellForm& f = cert.forms.at(i);
  return lift(f.P, 2.0 * f.q, -cert.alpha) -
         lift(MatrixXd::Identity(dim, dim), VectorXd::Zero(dim), -cert.beta);
}

MatrixXd decrease_matrix(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p) {
  const MatrixXd& F = lifted.F[p.from];
  return cert.forms.at(p.from).lifted() - F.transpose() * cert.forms.at(p.to).lifted() * F;
}

MatrixXd initial_matrix(const PqlCertificate& cert, std::size_t i, int /*dim*/) {
  const CellForm& f = cert.forms.at(i);
  return -lift(f.P, 2.0 * f.q, -cert.alpha);
}

MatrixXd level_residual(const PqlCertificate& cert, const LiftedSystem& lifted, std::size_t i) {
  const MatrixXd& E = lifted.E[i];
  return level_matrix(cert, i, lifted.dim) - E.transpose() * cert.cell_multipliers.at(i).sum() * E;
}

MatrixXd decrease_residual(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p) {
  const MatrixXd& E = lifted.E_pair.at(p);
  return decrease_matrix(cert, lifted, p) - E.transpose() * cert.switch_multipliers.at(p).sum() * E;
}

MatrixXd initial_residual(const PqlCertificate& cert, const LiftedSystem& lifted, std::size_t i) {
  const MatrixXd& E = lifted.E_init.at(i);
  return initial_matrix(cert, i, lifted.dim) -
         E.transpose() * cert.initial_multipliers.at(i).sum() * E;
}

std::optional<MarginResult> best_margin(const MatrixXd& Q, const MatrixXd& E,
                                        const conic::Settings& settings) {
  const int n = static_cast<int>(Q.rows());
  conic::Model model;
  const int t = model.add_variable();
  SymVar pos = model.add_nonneg_symmetric(E.rows());
  SymVar psd = model.add_psd_symmetric(E.rows());
  SymExpr e(n);
  e.add_constant(Q);
  e.add_variable_times(t, MatrixXd::Identity(n, n), -1.0);
  e.add_congruence(E, pos, -1.0);
  e.add_congruence(E, psd, -1.0);
  model.add_psd(e);
  model.add_nonneg(LinExpr(1.0) - LinExpr::variable(t));
  model.minimize(LinExpr::variable(t, -1.0));
  conic::ConicSolution sol = conic::solve(model.build(), settings);
  if (sol.status != conic::Status::Optimal) return std::nullopt;
  Multiplier m{pos.value(sol.x), psd.value(sol.x)};
  // Report the margin actually achieved by the returned multipliers.
  double margin = conic::min_eigenvalue(Q - E.transpose() * m.sum() * E);
  return MarginResult{margin, std::move(m)};
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (c.fatal && !c.passed) out.push_back(c.name + ": " + c.detail);
  return out;
}

namespace {

CheckResult psd_residual_check(const std::string& name, const MatrixXd& Q, const MatrixXd& E,
                               const Multiplier* stored, const VerifyOptions& options) {
  CheckResult r;
  r.name = name;
  const double tol = options.psd_tol * scale_of(Q);
  if (stored) {
    const double neg = std::min(stored->nonneg.minCoeff(), 0.0);
    const double psd_min = conic::min_eigenvalue(stored->psd);
    const double margin = conic::min_eigenvalue(Q - E.transpose() * stored->sum() * E);
    r.value = margin;
    r.passed = margin >= -tol && neg >= -1e-8 * scale_of(stored->nonneg) &&
               psd_min >= -1e-7 * scale_of(stored->psd);
    std::ostringstream msg;
    msg << "min eigenvalue " << margin << " (tolerance " << tol << "), min nonneg entry " << neg
        << ", min psd-multiplier eigenvalue " << psd_min;
    r.detail = msg.str();
    return r;
  }
  auto best = best_margin(Q, E, options.settings);
  if (!best) {
    r.passed = false;
    r.detail = "multiplier search did not converge";
    return r;
  }
  r.value = best->margin;
  r.passed = best->margin >= -tol;
  std::ostringstream msg;
  msg << "min eigenvalue " << best->margin << " with searched multipliers (tolerance " << tol << ")";
  r.detail = msg.str();
  return r;
}

std::string pair_name(CellPair p) {
  return "(" + std::to_string(p.from + 1) + "," + std::to_string(p.to + 1) + ")";
}

}  // namespace

VerificationReport check_certificate(const PqlCertificate& cert, const PwaSystem& sys,
                                     const SwitchSets& sw, const LiftedSystem& lifted,
                                     const VerifyOptions& options) {
  const int d = sys.dim();
  if (cert.forms.size() != sys.cell_count())
    throw Error(ErrorKind::CertificateRejected, "certificate has " + std::to_string(cert.forms.size()) +
                                                    " cells, system has " +
                                                    std::to_string(sys.cell_count()));
  const bool stored = cert.has_multipliers();
  VerificationReport report;

  std::vector<std::future<CheckResult>> jobs;
  for (std::size_t i = 0; i < sys.cell_count(); ++i) {
    const Multiplier* m = stored ? &cert.cell_multipliers.at(i) : nullptr;
    jobs.push_back(std::async(std::launch::async, [&, i, m] {
      return psd_residual_check("level inequality, cell " + std::to_string(i + 1),
                                level_matrix(cert, i, d), lifted.E[i], m, options);
    }));
  }
  for (CellPair p : sw.sw_bar) {
    const Multiplier* m = stored ? &cert.switch_multipliers.at(p) : nullptr;
    jobs.push_back(std::async(std::launch::async, [&, p, m] {
      return psd_residual_check("decrease inequality, switch " + pair_name(p),
                                decrease_matrix(cert, lifted, p), lifted.E_pair.at(p), m, options);
    }));
  }
  for (std::size_t i : sw.in_set) {
    const Multiplier* m = stored ? &cert.initial_multipliers.at(i) : nullptr;
    jobs.push_back(std::async(std::launch::async, [&, i, m] {
      return psd_residual_check("initial inequality, cell " + std::to_string(i + 1),
                                initial_matrix(cert, i, d), lifted.E_init.at(i), m, options);
    }));
  }
  // Norm-bound inequality on every switch, combining the target-cell level
  // multiplier with the switch multiplier.
  const MatrixXd id_lift = lift(MatrixXd::Identity(d, d), VectorXd::Zero(d), 0.0);
  for (CellPair p : sw.sw_bar) {
    jobs.push_back(std::async(std::launch::async, [&, p] {
      const MatrixXd& F = lifted.F[p.from];
      const MatrixXd& E = lifted.E_pair.at(p);
      const CellForm& f = cert.forms[p.from];
      MatrixXd Q = lift(f.P, 2.0 * f.q, -cert.alpha) + cert.beta * lifted.N -
                   F.transpose() * id_lift * F;
      if (stored) {
        Multiplier combined;
        combined.nonneg = embed_target(cert.cell_multipliers.at(p.to).nonneg, lifted.rows[p.from]) +
                          cert.switch_multipliers.at(p).nonneg;
        combined.psd = embed_target(cert.cell_multipliers.at(p.to).psd, lifted.rows[p.from]) +
                       cert.switch_multipliers.at(p).psd;
        // The embedded semidefinite part stays semidefinite; the combined
        // nonnegative part is checked entrywise.
        return psd_residual_check("norm bound after switch " + pair_name(p), Q, E, &combined, options);
      }
      return psd_residual_check("norm bound after switch " + pair_name(p), Q, E, nullptr, options);
    }));
  }
  for (auto& j : jobs) report.checks.push_back(j.get());

  // sup of |x|^2 over the initial set.
  {
    CheckResult r;
    r.name = "initial norm bound";
    auto verts = closure_vertices(sys.initial().rows(), d);
    double sup = 0.0;
    if (verts && !verts->empty()) {
      for (const auto& v : *verts) sup = std::max(sup, v.squaredNorm());
      r.detail = "vertex maximum ";
    } else {
      X0Bounds b = x0_coordinate_bounds(sys, options.settings);
      sup = b.values.head(d).sum();
      r.detail = "box upper bound ";
    }
    r.value = sup;
    r.passed = sup <= cert.beta + options.norm_tol;
    std::ostringstream msg;
    msg << sup << " vs beta " << cert.beta;
    r.detail += msg.str();
    report.checks.push_back(r);
  }

  // Level attained on the initial set.
  if (cert.alpha > 0) {
    CheckResult upper, tight;
    upper.name = "initial level bound";
    tight.name = "initial level attained";
    tight.fatal = false;
    double sup = -std::numeric_limits<double>::infinity();
    X0Bounds box = x0_coordinate_bounds(sys, options.settings);
    for (std::size_t i : sw.in_set) {
      const CellForm& f = cert.forms[i];
      std::vector<ConstraintRow> rows = sys.cell(i).guard.rows();
      const auto& init = sys.initial().rows();
      rows.insert(rows.end(), init.begin(), init.end());
      if (auto verts = closure_vertices(rows, d))
        for (const auto& v : *verts) sup = std::max(sup, f(v));
      // Dense grid over the initial box, closure membership.
      const int per_axis = std::max(2, options.samples_per_axis);
      long total = 1;
      for (int k = 0; k < d; ++k) total *= per_axis;
      total = std::min(total, 4000000L);
      VectorXd x(d);
      for (long s = 0; s < total; ++s) {
        long rem = s;
        for (int k = 0; k < d; ++k) {
          int idx = static_cast<int>(rem % per_axis);
          rem /= per_axis;
          x[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * idx / (per_axis - 1);
        }
        bool inside = true;
        for (const auto& r : rows)
          if (!r.holds_closed(x, 1e-12)) {
            inside = false;
            break;
          }
        if (inside) sup = std::max(sup, f(x));
      }
    }
    report.initial_level_sup = sup;
    const double tol = options.level_rel_tol * std::max(1.0, std::abs(cert.alpha));
    upper.value = sup;
    upper.passed = sup <= cert.alpha + tol;
    tight.value = sup;
    tight.passed = sup >= cert.alpha - tol;
    std::ostringstream msg;
    msg << "sup over initial set " << sup << " vs alpha " << cert.alpha;
    upper.detail = msg.str();
    tight.detail = msg.str();
    report.checks.push_back(upper);
    report.checks.push_back(tight);
  } else {
    CheckResult skipped;
    skipped.name = "initial level attained";
    skipped.fatal = false;
    skipped.passed = true;
    skipped.detail = "skipped: alpha is not positive";
    report.checks.push_back(skipped);
  }

  report.accepted = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const CheckResult& c) { return !c.fatal || c.passed; });
  return report;
}

VerificationReport verify_certificate(const PqlCertificate& cert, const PwaSystem& sys,
                                      const SwitchSets& sw, const LiftedSystem& lifted,
                                      const VerifyOptions& options) {
  VerificationReport report = check_certificate(cert, sys, sw, lifted, options);
  if (!report.accepted) {
    std::string msg = "certificate rejected:";
    for (const auto& f : report.failures()) msg += "\n  " + f;
    throw Error(ErrorKind::CertificateRejected, msg);
  }
  return report;
}

double evaluate_L(const PqlCertificate& cert, const PwaSystem& sys, const VectorXd& x) {
  return cert.forms.at(locate(sys, x))(x);
}

PqlCertificate shift_level(const PqlCertificate& cert) {
  PqlCertificate out = cert;
  if (cert.alpha < 0) {
    out.beta = cert.beta - cert.alpha;
    out.alpha = 0.0;
  }
  return out;
}

std::string certificate_to_json(const PqlCertificate& cert, const PwaSystem& sys) {
  json cells = json::array();
  for (std::size_t i = 0; i < cert.forms.size(); ++i)
    cells.push_back({{"index", i + 1},
                     {"name", sys.cell(i).name},
                     {"P", matrix_json(cert.forms[i].P)},
                     {"q", vector_json(cert.forms[i].q)}});
  json doc = {{"dimension", sys.dim()},
              {"homogeneous", cert.homogeneous},
              {"alpha", cert.alpha},
              {"beta", cert.beta},
              {"cells", cells}};
  if (cert.has_multipliers()) {
    json w = json::array(), u = json::array(), z = json::array();
    for (const auto& [i, m] : cert.cell_multipliers) {
      json e = multiplier_json(m);
      e["cell"] = i + 1;
      w.push_back(e);
    }
    for (const auto& [p, m] : cert.switch_multipliers) {
      json e = multiplier_json(m);
      e["pair"] = {p.from + 1, p.to + 1};
      u.push_back(e);
    }
    for (const auto& [i, m] : cert.initial_multipliers) {
      json e = multiplier_json(m);
      e["cell"] = i + 1;
      z.push_back(e);
    }
    doc["multipliers"] = {{"W", w}, {"U", u}, {"Z", z}};
  }
  return doc.dump(2);
}

PqlCertificate certificate_from_json(const std::string& text, const PwaSystem& sys) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("malformed certificate JSON: ") + e.what());
  }
  const int d = sys.dim();
  PqlCertificate cert;
  try {
    cert.alpha = doc.at("alpha").get<double>();
    cert.beta = doc.at("beta").get<double>();
    cert.homogeneous = doc.value("homogeneous", false);
    const json& cells = doc.at("cells");
    if (cells.size() != sys.cell_count())
      throw Error(ErrorKind::DimensionMismatch, "certificate lists " + std::to_string(cells.size()) +
                                                    " cells, system has " +
                                                    std::to_string(sys.cell_count()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string where = "/cells/" + std::to_string(i);
      CellForm f;
      f.P = read_matrix(cells[i].at("P"), d, where + "/P");
      f.P = 0.5 * (f.P + f.P.transpose());
      f.q = VectorXd::Zero(d);
      if (cells[i].contains("q")) {
        const json& q = cells[i].at("q");
        if (q.size() != static_cast<std::size_t>(d))
          throw Error(ErrorKind::DimensionMismatch, "q has wrong length at " + where + "/q");
        for (int k = 0; k < d; ++k) f.q[k] = q[k].get<double>();
      }
      cert.forms.push_back(std::move(f));
    }
    if (doc.contains("multipliers")) {
      const json& m = doc.at("multipliers");
      for (const auto& e : m.at("W"))
        cert.cell_multipliers.emplace(e.at("cell").get<std::size_t>() - 1,
                                      read_multiplier_json(e, "/multipliers/W"));
      for (const auto& e : m.at("U"))
        cert.switch_multipliers.emplace(
            CellPair{e.at("pair")[0].get<std::size_t>() - 1, e.at("pair")[1].get<std::size_t>() - 1},
            read_multiplier_json(e, "/multipliers/U"));
      for (const auto& e : m.at("Z"))
        cert.initial_multipliers.emplace(e.at("cell").get<std::size_t>() - 1,
                                         read_multiplier_json(e, "/multipliers/Z"));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid certificate: ") + e.what());
  }
  return cert;
}

}  // namespace pwacert
