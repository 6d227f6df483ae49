#include "pwacert/relaxed.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "pwacert/errors.hpp"

namespace pwacert {

using conic::LinExpr;
using conic::SymExpr;

namespace {

constexpr double kResidualTol = 1e-6;

Error selection_failure(CellPair p, int l, const std::string& why) {
  return Error(ErrorKind::SelectionFailure,
               "relaxed bound for switch (" + std::to_string(p.from + 1) + "," +
                   std::to_string(p.to + 1) + "), template " + std::to_string(l + 1) +
                   " has no attained multiplier (" + why + ")");
}

}  // namespace

MatrixXd template_after_step(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p,
                             int l) {
  const int d = lifted.dim;
  const MatrixXd& F = lifted.F.at(p.from);
  const MatrixXd target = l == d ? cert.forms.at(p.to).lifted() : lifted.M.at(l);
  return F.transpose() * target * F;
}

MatrixXd phi(const LiftedSystem& lifted, const PqlCertificate& cert, CellPair p, int l,
             const VectorXd& lambda, const MatrixXd& Y, const MatrixXd& Z) {
  const int d = lifted.dim;
  const MatrixXd& E = lifted.E_pair.at(p);
  MatrixXd out = template_after_step(cert, lifted, p, l);
  for (int k = 0; k < d; ++k) out -= lambda[k] * lifted.M[k];
  out -= lambda[d] * cert.forms.at(p.from).lifted();
  out += E.transpose() * (Y + Z) * E;
  return out;
}

MatrixXd relaxed_residual(const LiftedSystem& lifted, const PqlCertificate& cert, CellPair p,
                          int l, const VectorXd& omega, const RelaxedEval& e) {
  return e.constant(omega) * lifted.N - phi(lifted, cert, p, l, e.lambda, e.Y, e.Z);
}

RelaxedEval eval_relaxed(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p, int l,
                         const VectorXd& omega, const conic::Settings& settings) {
  const int d = lifted.dim;
  const MatrixXd& E = lifted.E_pair.at(p);
  conic::Model model;
  const int eta = model.add_variable();
  const int lam = model.add_variables(d + 1);
  for (int k = 0; k <= d; ++k) model.add_nonneg(LinExpr::variable(lam + k));
  const conic::SymVar Y = model.add_nonneg_symmetric(static_cast<int>(E.rows()));
  const conic::SymVar Z = model.add_psd_symmetric(static_cast<int>(E.rows()));

  SymExpr lmi(d + 1);
  lmi.at(0, 0).add_term(eta, 1.0);
  for (int k = 0; k <= d; ++k) lmi.at(0, 0).add_term(lam + k, -omega[k]);
  lmi.add_constant(template_after_step(cert, lifted, p, l), -1.0);
  for (int k = 0; k < d; ++k) lmi.add_variable_times(lam + k, lifted.M[k]);
  lmi.add_variable_times(lam + d, cert.forms.at(p.from).lifted());
  lmi.add_congruence(E, Y, -1.0);
  lmi.add_congruence(E, Z, -1.0);
  model.add_psd(lmi);
  model.minimize(LinExpr::variable(eta));

  conic::ConicSolution sol = conic::solve(model.build(), settings);
  RelaxedEval out;
  out.status = sol.status;
  switch (sol.status) {
    case conic::Status::Unbounded:
      out.value = MinusInfinity{};
      out.lambda = VectorXd::Zero(d + 1);
      return out;
    case conic::Status::Optimal:
    case conic::Status::Inaccurate:
      break;
    default:
      throw selection_failure(p, l, std::string(conic::to_string(sol.status)));
  }
  const VectorXd& x = sol.x;
  out.eta = x[eta];
  out.lambda = x.segment(lam, d + 1).cwiseMax(0.0);
  out.Y = Y.value(x).cwiseMax(0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Z.value(x));
  out.Z = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
          es.eigenvectors().transpose();
  out.value = out.eta;
  // A stalled solve is accepted only if its rounded point re-checks.
  MatrixXd residual = relaxed_residual(lifted, cert, p, l, omega, out);
  double scale = std::max(1.0, residual.cwiseAbs().maxCoeff());
  if (!conic::psd_check(residual, kResidualTol * scale))
    throw selection_failure(p, l, std::string(conic::to_string(sol.status)) +
                                      ", residual eigenvalue " +
                                      std::to_string(conic::min_eigenvalue(residual)));
  return out;
}

CombinedEval eval_relaxed_combined(const PqlCertificate& cert, const LiftedSystem& lifted,
                                   const std::vector<CellPair>& active, const VectorXd& floor,
                                   const VectorXd& omega, const conic::Settings& settings) {
  const int d = lifted.dim;
  std::vector<std::pair<PairTemplate, std::future<RelaxedEval>>> jobs;
  for (CellPair p : active)
    for (int l = 0; l <= d; ++l)
      jobs.emplace_back(PairTemplate{p, l}, std::async(std::launch::async, [&, p, l] {
                          return eval_relaxed(cert, lifted, p, l, omega, settings);
                        }));

  CombinedEval out;
  out.value = floor;
  std::map<PairTemplate, RelaxedEval> all;
  // Collect every job before rethrowing so no task outlives its inputs.
  std::exception_ptr failure;
  for (auto& [key, job] : jobs) {
    try {
      all.emplace(key, job.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (CellPair p : active) {
    bool empty = false;
    for (int l = 0; l <= d; ++l) empty = empty || !is_finite(all.at({p, l}).value);
    if (empty) {
      out.pruned.push_back(p);
      continue;
    }
    for (int l = 0; l <= d; ++l) {
      RelaxedEval& e = all.at({p, l});
      out.value[l] = std::max(out.value[l], std::get<double>(e.value));
      out.table.emplace(PairTemplate{p, l}, std::move(e));
    }
  }
  return out;
}

namespace {

double template_value(const PqlCertificate& cert, const PwaSystem& sys, CellPair p, int l,
                      const VectorXd& next) {
  if (l == sys.dim()) return cert.forms.at(p.to)(next);
  return next[l] * next[l];
}

}  // namespace

RelaxedValue sharp_oracle(const PqlCertificate& cert, const PwaSystem& sys, CellPair p, int l,
                          const VectorXd& omega, const OracleOptions& options) {
  const int d = sys.dim();
  const Cell& from = sys.cell(p.from);
  const Polyhedron& to = sys.cell(p.to).guard;
  VectorXd radius = omega.head(d).cwiseMax(0.0).cwiseSqrt();

  bool found = false;
  double best = 0.0;
  auto consider = [&](const VectorXd& x) {
    if (!from.guard.closure_contains(x, options.membership_tol)) return;
    if (cert.forms.at(p.from)(x) > omega[d]) return;
    VectorXd next = from.dynamics(x);
    if (!to.closure_contains(next, options.membership_tol)) return;
    double v = template_value(cert, sys, p, l, next);
    if (!found || v > best) best = v;
    found = true;
  };

  // Half the budget on a regular grid (box corners included), half random.
  const int per_axis =
      std::max(2, static_cast<int>(std::floor(std::pow(options.samples / 2.0, 1.0 / d))));
  std::vector<int> idx(d, 0);
  VectorXd x(d);
  for (bool more = true; more;) {
    for (int k = 0; k < d; ++k) x[k] = radius[k] * (-1.0 + 2.0 * idx[k] / (per_axis - 1));
    consider(x);
    more = false;
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < per_axis) {
        more = true;
        break;
      }
      idx[k] = 0;
    }
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int s = 0; s < options.samples / 2; ++s) {
    for (int k = 0; k < d; ++k) x[k] = radius[k] * unit(rng);
    consider(x);
  }
  if (!found) return MinusInfinity{};
  return best;
}

}  // namespace pwacert
