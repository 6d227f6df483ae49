#include "doctest.h"
#include "pwacert/errors.hpp"
#include "pwacert/policy.hpp"
#include "support.hpp"

using namespace pwacert;

namespace {

X0Bounds unit_box_bounds() {
  X0Bounds x0;
  x0.lower = Eigen::Vector2d(-1, -1);
  x0.upper = Eigen::Vector2d(1, 1);
  x0.values = Eigen::Vector3d(1, 1, 0);
  return x0;
}

}  // namespace

TEST_CASE("initial and floor bounds") {
  PqlCertificate cert;
  cert.alpha = 2.0;
  cert.beta = 5.0;
  const X0Bounds x0 = unit_box_bounds();
  CHECK(initial_bounds(cert, x0) == Eigen::Vector3d(5, 5, 2));
  CHECK(floor_bounds(cert, x0) == Eigen::Vector3d(1, 1, 2));

  cert.alpha = 1.0;
  cert.beta = 0.0;
  CHECK(initial_bounds(cert, x0) == Eigen::Vector3d(0, 0, 1));

  for (double alpha : {0.0, -1.0}) {
    cert.alpha = alpha;
    try {
      initial_bounds(cert, x0);
      FAIL("expected AlphaNonpositive");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::AlphaNonpositive);
      CHECK(e.stage() == Stage::Iteration);
    }
  }
}

TEST_CASE("policy fixed points") {
  const VectorXd floor = Eigen::Vector3d(1, 1, 2);
  const CellPair p{0, 0};

  // Constant policies: the least fixed point is the entrywise maximum with the floor.
  Policy constant;
  constant[{p, 0}] = PolicyEntry{VectorXd::Zero(3), 0.5};
  constant[{p, 1}] = PolicyEntry{VectorXd::Zero(3), 4.0};
  constant[{p, 2}] = PolicyEntry{VectorXd::Zero(3), -3.0};
  const VectorXd w = policy_fixed_point(constant, floor);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(w[1] == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(w[2] == doctest::Approx(2.0).epsilon(1e-7));

  CHECK((policy_fixed_point(Policy{}, floor) - floor).cwiseAbs().maxCoeff() <= 1e-7);

  // w_0 >= 0.5 w_1 + 1, w_1 >= 0.5 w_0: least solution (4/3, 2/3) lifted by the floor.
  Policy coupled;
  coupled[{p, 0}] = PolicyEntry{Eigen::Vector3d(0, 0.5, 0), 1.0};
  coupled[{p, 1}] = PolicyEntry{Eigen::Vector3d(0.5, 0, 0), 0.0};
  const VectorXd c = policy_fixed_point(coupled, VectorXd::Zero(3));
  CHECK(c[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(c[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));

  // An expanding self-map has no finite fixed point.
  Policy expanding;
  expanding[{p, 0}] = PolicyEntry{Eigen::Vector3d(2, 0, 0), 1.0};
  try {
    policy_fixed_point(expanding, floor);
    FAIL("expected PolicyLpFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PolicyLpFailure);
  }
}

TEST_CASE("policy iteration on the quadrant fixture") {
  const support::Analysed a = support::analyse(support::quadrants());
  const PqlCertificate cert = support::reference(a.sys, "quadrants_reference_cert.json");
  const IterationTrace tr = iterate(a.sys, cert, a.lifted, a.sw, a.x0);
  CHECK(tr.termination == Termination::FixedPoint);
  REQUIRE_FALSE(tr.records.empty());
  CHECK(tr.initial == initial_bounds(cert, a.x0));

  const VectorXd floor = floor_bounds(cert, a.x0);
  VectorXd previous = tr.initial;
  for (const IterationRecord& r : tr.records) {
    CAPTURE(r.k);
    CHECK((r.omega - floor).minCoeff() >= -1e-9);
    CHECK((r.omega - previous).maxCoeff() <= 1e-6);
    if (r.image.size()) CHECK((r.image - r.omega).maxCoeff() <= 1e-6);
    for (const auto& [key, value] : r.table) CHECK(value >= 0.0);
    previous = r.omega;
  }
  CHECK(tr.final_omega == tr.records.back().omega);

  // The bounds cover simulated trajectories.
  const ReachSample sample = simulate(a.sys, 21, 40);
  CHECK(check_membership(sample, a.sys, cert, tr.final_omega).empty());
}

TEST_CASE("termination names") {
  CHECK(to_string(Termination::FixedPoint) == "FixedPoint");
  CHECK(to_string(Termination::MaxIters) == "MaxIters");
}
