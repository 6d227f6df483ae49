#include "pwacert/validation.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include "pwacert/errors.hpp"
#include "pwacert/polyhedral.hpp"

namespace pwacert {

namespace {

std::vector<VectorXd> grid_seeds(const PwaSystem& sys, int grid_n) {
  const int d = sys.dim();
  const X0Bounds box = x0_coordinate_bounds(sys);
  std::vector<VectorXd> seeds;
  std::vector<int> idx(d, 0);
  VectorXd x(d);
  for (bool more = true; more;) {
    for (int k = 0; k < d; ++k) {
      double t = grid_n == 1 ? 0.5 : static_cast<double>(idx[k]) / (grid_n - 1);
      x[k] = box.lower[k] + t * (box.upper[k] - box.lower[k]);
    }
    if (sys.initial().closure_contains(x, 1e-12)) seeds.push_back(x);
    more = false;
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < grid_n) {
        more = true;
        break;
      }
      idx[k] = 0;
    }
  }
  return seeds;
}

}  // namespace

ReachSample simulate(const PwaSystem& sys, int grid_n, int steps) {
  if (grid_n < 2 || steps < 0)
    throw Error(ErrorKind::InvalidArgument, "simulation needs grid_n >= 2 and steps >= 0");
  const std::vector<VectorXd> seeds = grid_seeds(sys, grid_n);

  const std::size_t per_seed = static_cast<std::size_t>(steps) + 1;
  ReachSample out;
  out.grid_n = grid_n;
  out.steps = steps;
  out.points.assign(seeds.size() * per_seed, VectorXd());
  out.generation.assign(seeds.size() * per_seed, 0);

  // Each trajectory writes its own slots, so the layout is seed-major
  // whatever the worker count.
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, seeds.size() + 1);
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t s = w; s < seeds.size(); s += workers) {
        VectorXd x = seeds[s];
        for (int k = 0; k <= steps; ++k) {
          if (k > 0) x = step(sys, x).next;
          out.points[s * per_seed + k] = x;
          out.generation[s * per_seed + k] = k;
        }
      }
    }));
  std::exception_ptr failure;
  for (auto& job : jobs) {
    try {
      job.get();
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<Violation> check_membership(const ReachSample& sample, const PwaSystem& sys,
                                        const PqlCertificate& cert, const VectorXd& omega,
                                        double tol) {
  const int d = sys.dim();
  std::vector<Violation> out;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const VectorXd& x = sample.points[s];
    auto test = [&](std::string bound, double value, double limit) {
      if (value > limit + tol)
        out.push_back({x, sample.generation[s], std::move(bound), value, limit});
    };
    for (int k = 0; k < d; ++k) test("x" + std::to_string(k + 1) + "^2", x[k] * x[k], omega[k]);
    const double level = evaluate_L(cert, sys, x);
    test("L", level, omega[d]);
    test("L <= alpha", level, cert.alpha);
  }
  return out;
}

std::vector<Violation> check_level_bounds(const ReachSample& sample, const PwaSystem& sys,
                                          const PqlCertificate& cert, double tol) {
  std::vector<Violation> out;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const VectorXd& x = sample.points[s];
    const double level = evaluate_L(cert, sys, x);
    if (level > cert.alpha + tol)
      out.push_back({x, sample.generation[s], "L <= alpha", level, cert.alpha});
    if (x.squaredNorm() > cert.beta + tol)
      out.push_back({x, sample.generation[s], "|x|^2 <= beta", x.squaredNorm(), cert.beta});
  }
  return out;
}

}  // namespace pwacert
