#ifndef PWACERT_POLICY_HPP
#define PWACERT_POLICY_HPP

#include <map>
#include <string>
#include <vector>

#include "pwacert/relaxed.hpp"

namespace pwacert {

// Affine minorant omega -> lambda . omega + constant selected for one
// (switch, template).
struct PolicyEntry {
  VectorXd lambda;
  double constant = 0.0;

  double operator()(const VectorXd& omega) const { return lambda.dot(omega) + constant; }
};
using Policy = std::map<PairTemplate, PolicyEntry>;

Policy select_policy(const CombinedEval& eval, const VectorXd& omega);

enum class Termination { FixedPoint, SelectionFailure, MaxIters, Stalled, PolicyLpFailure };
std::string_view to_string(Termination t);

// Iteration k solves for the least fixed point omega of policy k and
// evaluates the relaxed functional there.
struct IterationRecord {
  int k = 0;
  Policy policy;
  VectorXd omega;
  VectorXd image;                    // empty when the evaluation failed
  std::vector<CellPair> pruned;      // refuted while evaluating at omega
  // Per-switch bounds at omega, clamped at zero.
  std::map<PairTemplate, double> table;
};

struct RefutedSwitch {
  CellPair pair;
  int iteration;
};

struct IterationTrace {
  // Selection of the first policy at (beta, ..., beta, alpha).
  VectorXd initial;
  VectorXd initial_image;
  std::vector<CellPair> initial_pruned;
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIters;
  std::string message;
  VectorXd final_omega;
  std::vector<RefutedSwitch> refuted;
  std::vector<CellPair> remaining;
};

struct IterationOptions {
  int max_iters = 50;
  double tol = 1e-6;
  conic::Settings settings;
  // Relaxed evaluations and fixed-point programs run with the solver
  // tolerances multiplied by this factor.
  double solve_tol_factor = 1e-2;
};

// (beta, ..., beta, alpha); throws AlphaNonpositive when alpha <= 0.
VectorXd initial_bounds(const PqlCertificate& cert, const X0Bounds& x0);
// Initial-set bounds with the last slot set to alpha.
VectorXd floor_bounds(const PqlCertificate& cert, const X0Bounds& x0);

// Least w with w >= floor and policy(w) <= w_l for every entry; throws
// PolicyLpFailure when the program has no optimum.
VectorXd policy_fixed_point(const Policy& policy, const VectorXd& floor,
                            const conic::Settings& settings = {});

IterationTrace iterate(const PwaSystem& sys, const PqlCertificate& cert, const LiftedSystem& lifted,
                       const SwitchSets& sw, const X0Bounds& x0, const IterationOptions& options = {});

}  // namespace pwacert

#endif  // PWACERT_POLICY_HPP
