#ifndef PWACERT_LIFTING_HPP
#define PWACERT_LIFTING_HPP

#include <map>
#include <vector>

#include "pwacert/polyhedral.hpp"
#include "pwacert/system_model.hpp"

namespace pwacert {

// q(x) = x' quad x + linear' x + constant.
struct QuadForm {
  MatrixXd quad;
  VectorXd linear;
  double constant = 0.0;
};

// [[constant, linear'/2], [linear/2, quad]] acting on (1, x).
MatrixXd lift_quadform(const QuadForm& q);
MatrixXd lift(const MatrixXd& quad, const VectorXd& linear, double constant);
// F' lifted F, the lift of x -> q(A x + b).
MatrixXd conjugate(const MatrixXd& lifted, const AffineMap& map);
// [[1, 0], [c, -P]].
MatrixXd homogenize(const MatrixXd& P, const VectorXd& c);
// Lift of x -> x_k^2 (k 0-based) in dimension d.
MatrixXd coordinate_square(int d, int k);
// Single 1 at the homogenizing corner.
MatrixXd corner(int d);

struct LiftedSystem {
  int dim = 0;
  std::vector<MatrixXd> F;
  std::vector<MatrixXd> E;
  std::map<CellPair, MatrixXd> E_pair;
  std::map<std::size_t, MatrixXd> E_init;
  std::vector<MatrixXd> M;  // coordinate templates
  MatrixXd N;
  // Row counts of the guard stacks, used to embed per-cell multipliers.
  std::vector<int> rows;
  int initial_rows = 0;
};

LiftedSystem build_lifted(const PwaSystem& sys, const SwitchSets& sw);

}  // namespace pwacert

#endif  // PWACERT_LIFTING_HPP
