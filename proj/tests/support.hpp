#ifndef PWACERT_TESTS_SUPPORT_HPP
#define PWACERT_TESTS_SUPPORT_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pwacert/policy.hpp"
#include "pwacert/validation.hpp"

namespace support {

using namespace pwacert;

inline std::string data_path(const std::string& name) { return std::string(PWC_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline PwaSystem quadrants() { return load_system_file(data_path("quadrants.json")); }
inline PwaSystem affine2() { return load_system_file(data_path("affine2.json")); }

inline PqlCertificate reference(const PwaSystem& sys, const std::string& name) {
  return certificate_from_json(read_text(data_path(name)), sys);
}

inline Polyhedron box(double lo1, double hi1, double lo2, double hi2) {
  return Polyhedron(2, {{Eigen::Vector2d(1, 0), hi1, false},
                        {Eigen::Vector2d(-1, 0), -lo1, false},
                        {Eigen::Vector2d(0, 1), hi2, false},
                        {Eigen::Vector2d(0, -1), -lo2, false}});
}

// Everything the analysis derives from a system, computed once.
struct Analysed {
  PwaSystem sys;
  SwitchSets sw;
  LiftedSystem lifted;
  X0Bounds x0;
};

inline Analysed analyse(PwaSystem sys) {
  SwitchSets sw = compute_switch_sets(sys);
  LiftedSystem lifted = build_lifted(sys, sw);
  X0Bounds x0 = x0_coordinate_bounds(sys);
  return {std::move(sys), std::move(sw), std::move(lifted), std::move(x0)};
}

// Random 2-D system: either two half-planes split by a random line or the
// four quadrants, with contracting random dynamics and a random initial box.
inline PwaSystem random_system(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(0.3, 0.85);
  auto dynamics = [&](bool offset) {
    Eigen::Matrix2d A;
    A << u(rng), u(rng), u(rng), u(rng);
    const double norm = Eigen::JacobiSVD<Eigen::Matrix2d>(A).singularValues()[0];
    A *= radius(rng) / std::max(norm, 1e-9);
    Eigen::Vector2d b = offset ? Eigen::Vector2d(0.5 * u(rng), 0.5 * u(rng)) : Eigen::Vector2d::Zero();
    return AffineMap{A, b};
  };
  std::vector<Cell> cells;
  if (rng() % 2 == 0) {
    Eigen::Vector2d a(u(rng), u(rng));
    a.normalize();
    const double c = 0.3 * u(rng);
    cells.push_back({"X1", Polyhedron(2, {{a, c, true}}), dynamics(true)});
    cells.push_back({"X2", Polyhedron(2, {{-a, -c, false}}), dynamics(true)});
  } else {
    const bool offset = rng() % 2 == 0;
    const Eigen::Vector2d e1(1, 0), e2(0, 1);
    cells.push_back({"X1", Polyhedron(2, {{-e1, 0, false}, {-e2, 0, false}}), dynamics(offset)});
    cells.push_back({"X2", Polyhedron(2, {{-e1, 0, false}, {e2, 0, true}}), dynamics(offset)});
    cells.push_back({"X3", Polyhedron(2, {{e1, 0, true}, {e2, 0, true}}), dynamics(offset)});
    cells.push_back({"X4", Polyhedron(2, {{e1, 0, true}, {-e2, 0, false}}), dynamics(offset)});
  }
  double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
  return PwaSystem(2, box(std::min(x1, x2), std::max(x1, x2) + 0.1, std::min(y1, y2),
                          std::max(y1, y2) + 0.1),
                   std::move(cells));
}

}  // namespace support

#endif  // PWACERT_TESTS_SUPPORT_HPP
