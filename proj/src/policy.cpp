#include "pwacert/policy.hpp"

#include <algorithm>
#include <cmath>

#include "pwacert/errors.hpp"

namespace pwacert {

using conic::LinExpr;

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::FixedPoint: return "FixedPoint";
    case Termination::SelectionFailure: return "SelectionFailure";
    case Termination::MaxIters: return "MaxIters";
    case Termination::Stalled: return "Stalled";
    case Termination::PolicyLpFailure: return "PolicyLpFailure";
  }
  return "MaxIters";
}

Policy select_policy(const CombinedEval& eval, const VectorXd& omega) {
  Policy out;
  for (const auto& [key, e] : eval.table) out.emplace(key, PolicyEntry{e.lambda, e.constant(omega)});
  return out;
}

VectorXd initial_bounds(const PqlCertificate& cert, const X0Bounds& x0) {
  if (!(cert.alpha > 0))
    throw Error(ErrorKind::AlphaNonpositive,
                "certificate level alpha = " + std::to_string(cert.alpha) +
                    " is not positive; bound refinement needs alpha > 0");
  VectorXd w = VectorXd::Constant(x0.dim() + 1, cert.beta);
  w[x0.dim()] = cert.alpha;
  return w;
}

VectorXd floor_bounds(const PqlCertificate& cert, const X0Bounds& x0) {
  VectorXd w = x0.values;
  w[x0.dim()] = cert.alpha;
  return w;
}

VectorXd policy_fixed_point(const Policy& policy, const VectorXd& floor,
                            const conic::Settings& settings) {
  const int n = static_cast<int>(floor.size());
  conic::Model model;
  const int w = model.add_variables(n);
  LinExpr objective;
  for (int l = 0; l < n; ++l) {
    model.add_nonneg(LinExpr::variable(w + l) - LinExpr(floor[l]));
    objective.add_term(w + l, 1.0);
  }
  for (const auto& [key, entry] : policy) {
    // w_l - lambda . w - constant >= 0
    LinExpr e = LinExpr::variable(w + key.second);
    for (int k = 0; k < n; ++k) e.add_term(w + k, -entry.lambda[k]);
    e.add_constant(-entry.constant);
    model.add_nonneg(e);
  }
  model.minimize(objective);
  conic::ConicSolution sol = conic::solve(model.build(), settings);
  if (sol.status != conic::Status::Optimal)
    throw Error(ErrorKind::PolicyLpFailure, "policy fixed-point program ended with status " +
                                                std::string(conic::to_string(sol.status)));
  return sol.x.segment(w, n);
}

namespace {

bool is_fixed_point(const VectorXd& image, const VectorXd& omega, double tol) {
  for (int l = 0; l < omega.size(); ++l)
    if (std::abs(image[l] - omega[l]) > tol * (1.0 + std::abs(omega[l]))) return false;
  return true;
}

bool decreased(const VectorXd& before, const VectorXd& after, double tol) {
  for (int l = 0; l < before.size(); ++l)
    if (before[l] - after[l] >= tol * (1.0 + std::abs(before[l]))) return true;
  return false;
}

void drop(std::vector<CellPair>& active, const std::vector<CellPair>& pruned) {
  std::erase_if(active, [&](CellPair p) {
    return std::find(pruned.begin(), pruned.end(), p) != pruned.end();
  });
}

}  // namespace

IterationTrace iterate(const PwaSystem& sys, const PqlCertificate& cert, const LiftedSystem& lifted,
                       const SwitchSets& sw, const X0Bounds& x0, const IterationOptions& options) {
  (void)sys;
  conic::Settings solve = options.settings;
  solve.feastol *= options.solve_tol_factor;
  solve.abstol *= options.solve_tol_factor;
  solve.reltol *= options.solve_tol_factor;
  IterationTrace trace;
  const VectorXd floor = floor_bounds(cert, x0);
  trace.initial = initial_bounds(cert, x0);
  trace.final_omega = trace.initial;
  std::vector<CellPair> active = sw.sw_bar;

  auto finish = [&](Termination t, std::string message) {
    trace.termination = t;
    trace.message = std::move(message);
    trace.remaining = active;
    return trace;
  };
  auto evaluate = [&](const VectorXd& omega) {
    return eval_relaxed_combined(cert, lifted, active, floor, omega, solve);
  };

  CombinedEval eval;
  try {
    eval = evaluate(trace.initial);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SelectionFailure) throw;
    return finish(Termination::SelectionFailure, e.what());
  }
  trace.initial_image = eval.value;
  trace.initial_pruned = eval.pruned;
  for (CellPair p : eval.pruned) trace.refuted.push_back({p, 0});
  drop(active, eval.pruned);
  Policy policy = select_policy(eval, trace.initial);

  for (int k = 0;; ++k) {
    if (k >= options.max_iters) return finish(Termination::MaxIters, "iteration limit reached");
    IterationRecord rec;
    rec.k = k;
    rec.policy = std::move(policy);
    try {
      rec.omega = policy_fixed_point(rec.policy, floor, solve);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PolicyLpFailure) throw;
      trace.records.push_back(std::move(rec));
      return finish(Termination::PolicyLpFailure, e.what());
    }
    // The fixed point of any policy bounds the relaxed functional from above,
    // so it is a sound bound vector even if the evaluation below fails.
    trace.final_omega = rec.omega;
    const VectorXd& omega = rec.omega;
    try {
      eval = evaluate(omega);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SelectionFailure) throw;
      trace.records.push_back(std::move(rec));
      return finish(Termination::SelectionFailure, e.what());
    }
    rec.image = eval.value;
    rec.pruned = eval.pruned;
    for (CellPair p : eval.pruned) trace.refuted.push_back({p, k});
    drop(active, eval.pruned);
    for (const auto& [key, e] : eval.table)
      rec.table.emplace(key, std::max(0.0, std::get<double>(e.value)));

    const VectorXd previous = k > 0 ? trace.records.back().omega : trace.initial;
    const bool fixed = is_fixed_point(eval.value, omega, options.tol);
    const bool moved = decreased(previous, omega, options.tol);
    policy = select_policy(eval, omega);
    trace.records.push_back(std::move(rec));
    if (fixed) return finish(Termination::FixedPoint, "relaxed functional fixes the bound vector");
    if (!moved) return finish(Termination::Stalled, "bound vector stopped decreasing");
  }
}

}  // namespace pwacert
