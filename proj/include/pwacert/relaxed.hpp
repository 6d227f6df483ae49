#ifndef PWACERT_RELAXED_HPP
#define PWACERT_RELAXED_HPP

#include <cstdint>
#include <map>
#include <utility>
#include <variant>
#include <vector>

#include "pwacert/conic.hpp"
#include "pwacert/lifting.hpp"
#include "pwacert/pql.hpp"

namespace pwacert {

// Bound of an empty set.
struct MinusInfinity {
  bool operator==(const MinusInfinity&) const = default;
};
using RelaxedValue = std::variant<double, MinusInfinity>;

inline bool is_finite(const RelaxedValue& v) { return std::holds_alternative<double>(v); }

// Templates are indexed 0..d; index d is the Lyapunov template, the others
// the squared coordinates.
struct RelaxedEval {
  RelaxedValue value = MinusInfinity{};
  VectorXd lambda;  // size d + 1, nonnegative
  double eta = 0.0;
  MatrixXd Y;       // entrywise nonnegative
  MatrixXd Z;       // positive semidefinite
  conic::Status status = conic::Status::Indeterminate;

  // Affine part of the minorant omega -> lambda . omega + constant.
  double constant(const VectorXd& omega) const { return eta - lambda.dot(omega); }
};

// Lift of the bounded quantity: a squared coordinate after the step, or the
// target cell's form after the step.
MatrixXd template_after_step(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p,
                             int l);

MatrixXd phi(const LiftedSystem& lifted, const PqlCertificate& cert, CellPair p, int l,
             const VectorXd& lambda, const MatrixXd& Y, const MatrixXd& Z);

// (eta - lambda . omega) N - phi.
MatrixXd relaxed_residual(const LiftedSystem& lifted, const PqlCertificate& cert, CellPair p,
                          int l, const VectorXd& omega, const RelaxedEval& e);

// Throws SelectionFailure when the program is infeasible or undecided.
RelaxedEval eval_relaxed(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p, int l,
                         const VectorXd& omega, const conic::Settings& settings = {});

using PairTemplate = std::pair<CellPair, int>;

struct CombinedEval {
  VectorXd value;                              // size d + 1
  std::map<PairTemplate, RelaxedEval> table;   // finite evaluations only
  std::vector<CellPair> pruned;                // pairs with an empty bound
};

// floor is the initial-set bound vector (its last entry is alpha). A pair is
// pruned when any of its templates evaluates to an empty bound.
CombinedEval eval_relaxed_combined(const PqlCertificate& cert, const LiftedSystem& lifted,
                                   const std::vector<CellPair>& active, const VectorXd& floor,
                                   const VectorXd& omega, const conic::Settings& settings = {});

struct OracleOptions {
  int samples = 10000;
  std::uint64_t seed = 0x5eed;
  double membership_tol = 1e-9;
};

// Sampling lower bound of the exact one-step bound for template l over
// points of the closure of cell from whose image lies in the closure of cell
// to, restricted by omega.
RelaxedValue sharp_oracle(const PqlCertificate& cert, const PwaSystem& sys, CellPair p, int l,
                          const VectorXd& omega, const OracleOptions& options = {});

}  // namespace pwacert

#endif  // PWACERT_RELAXED_HPP
