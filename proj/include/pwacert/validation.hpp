#ifndef PWACERT_VALIDATION_HPP
#define PWACERT_VALIDATION_HPP

#include <string>
#include <vector>

#include "pwacert/pql.hpp"
#include "pwacert/system_model.hpp"

namespace pwacert {

// Trajectory points from a grid of initial states, tagged by step index.
struct ReachSample {
  std::vector<VectorXd> points;
  std::vector<int> generation;
  int grid_n = 0;
  int steps = 0;

  std::size_t size() const { return points.size(); }
};

// Seeds grid_n points per axis over the bounding box of the closure of the
// initial set, keeps those in the closure and iterates the dynamics.
ReachSample simulate(const PwaSystem& sys, int grid_n, int steps);

struct Violation {
  VectorXd point;
  int generation = 0;
  std::string bound;
  double value = 0.0;
  double limit = 0.0;
};

constexpr double kMembershipTol = 1e-5;

// x_k^2 <= omega_k, L(x) <= omega_last and L(x) <= alpha for every point.
std::vector<Violation> check_membership(const ReachSample& sample, const PwaSystem& sys,
                                        const PqlCertificate& cert, const VectorXd& omega,
                                        double tol = kMembershipTol);
// L(x) <= alpha and |x|^2 <= beta for every point.
std::vector<Violation> check_level_bounds(const ReachSample& sample, const PwaSystem& sys,
                                          const PqlCertificate& cert,
                                          double tol = kMembershipTol);

}  // namespace pwacert

#endif  // PWACERT_VALIDATION_HPP
