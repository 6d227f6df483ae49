#include "pwacert/lifting.hpp"

namespace pwacert {

MatrixXd lift(const MatrixXd& quad, const VectorXd& linear, double constant) {
  const auto d = quad.rows();
  MatrixXd m(d + 1, d + 1);
  m(0, 0) = constant;
  m.block(1, 0, d, 1) = 0.5 * linear;
  m.block(0, 1, 1, d) = 0.5 * linear.transpose();
  m.block(1, 1, d, d) = 0.5 * (quad + quad.transpose());
  return m;
}

MatrixXd lift_quadform(const QuadForm& q) { return lift(q.quad, q.linear, q.constant); }

MatrixXd conjugate(const MatrixXd& lifted, const AffineMap& map) {
  MatrixXd f = map.homogeneous();
  return f.transpose() * lifted * f;
}

MatrixXd homogenize(const MatrixXd& P, const VectorXd& c) {
  const auto n = P.rows();
  const auto d = P.cols();
  MatrixXd e = MatrixXd::Zero(n + 1, d + 1);
  e(0, 0) = 1.0;
  e.block(1, 0, n, 1) = c;
  e.block(1, 1, n, d) = -P;
  return e;
}

MatrixXd coordinate_square(int d, int k) {
  MatrixXd m = MatrixXd::Zero(d + 1, d + 1);
  m(k + 1, k + 1) = 1.0;
  return m;
}

MatrixXd corner(int d) {
  MatrixXd m = MatrixXd::Zero(d + 1, d + 1);
  m(0, 0) = 1.0;
  return m;
}

LiftedSystem build_lifted(const PwaSystem& sys, const SwitchSets& sw) {
  const int d = sys.dim();
  LiftedSystem out;
  out.dim = d;
  for (const Cell& c : sys.cells()) {
    out.F.push_back(c.dynamics.homogeneous());
    out.E.push_back(homogenize(c.guard.T(), c.guard.c()));
    out.rows.push_back(static_cast<int>(c.guard.size()));
  }
  for (CellPair p : sw.sw_bar) {
    const Cell& from = sys.cell(p.from);
    const Polyhedron& to = sys.cell(p.to).guard;
    const auto ni = from.guard.size();
    const auto nj = to.size();
    MatrixXd t(ni + nj, d);
    VectorXd c(ni + nj);
    t.topRows(ni) = from.guard.T();
    c.head(ni) = from.guard.c();
    t.bottomRows(nj) = to.T() * from.dynamics.A;
    c.tail(nj) = to.c() - to.T() * from.dynamics.b;
    out.E_pair.emplace(p, homogenize(t, c));
  }
  const Polyhedron& init = sys.initial();
  out.initial_rows = static_cast<int>(init.size());
  for (std::size_t i : sw.in_set) {
    const Polyhedron& g = sys.cell(i).guard;
    MatrixXd t(g.size() + init.size(), d);
    VectorXd c(g.size() + init.size());
    t.topRows(g.size()) = g.T();
    c.head(g.size()) = g.c();
    t.bottomRows(init.size()) = init.T();
    c.tail(init.size()) = init.c();
    out.E_init.emplace(i, homogenize(t, c));
  }
  for (int k = 0; k < d; ++k) out.M.push_back(coordinate_square(d, k));
  out.N = corner(d);
  return out;
}

}  // namespace pwacert
