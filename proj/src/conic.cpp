#include "pwacert/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <cstdlib>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>

namespace pwacert::conic {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;

int tri_index(int i, int j, int n) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

// Cone geometry of the reduced problem: one nonnegative orthant block first,
// then the semidefinite blocks.
struct Layout {
  int nonneg = 0;
  std::vector<int> order;
  std::vector<int> offset;
  int length = 0;

  int degree() const {
    return nonneg + std::accumulate(order.begin(), order.end(), 0);
  }
};

// Nesterov-Todd scaling at the current iterate.
struct Scaling {
  VectorXd w;
  std::vector<MatrixXd> r;
  std::vector<MatrixXd> rinv;
  VectorXd lambda;
  std::vector<VectorXd> eig;

  static Scaling identity(const Layout& lay) {
    Scaling sc;
    sc.w = VectorXd::Ones(lay.nonneg);
    sc.lambda = VectorXd::Zero(lay.length);
    sc.lambda.head(lay.nonneg).setOnes();
    for (std::size_t k = 0; k < lay.order.size(); ++k) {
      int n = lay.order[k];
      sc.r.push_back(MatrixXd::Identity(n, n));
      sc.rinv.push_back(MatrixXd::Identity(n, n));
      sc.eig.push_back(VectorXd::Ones(n));
      sc.lambda.segment(lay.offset[k], n * (n + 1) / 2) = svec(MatrixXd::Identity(n, n));
    }
    return sc;
  }
};

enum class Op { W, WinvT, WT, Winv, WTW, WTWinv };

VectorXd apply(const Layout& lay, const Scaling& sc, Op op, const VectorXd& u) {
  VectorXd out(u.size());
  auto lp_u = u.head(lay.nonneg).array();
  auto w = sc.w.array();
  switch (op) {
    case Op::W:
    case Op::WT: out.head(lay.nonneg) = (w * lp_u).matrix(); break;
    case Op::WinvT:
    case Op::Winv: out.head(lay.nonneg) = (lp_u / w).matrix(); break;
    case Op::WTW: out.head(lay.nonneg) = (w * w * lp_u).matrix(); break;
    case Op::WTWinv: out.head(lay.nonneg) = (lp_u / (w * w)).matrix(); break;
  }
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    int t = n * (n + 1) / 2;
    MatrixXd m = smat(u.segment(lay.offset[k], t), n);
    const MatrixXd& r = sc.r[k];
    const MatrixXd& ri = sc.rinv[k];
    MatrixXd v;
    switch (op) {
      case Op::W: v = r.transpose() * m * r; break;
      case Op::WinvT: v = ri * m * ri.transpose(); break;
      case Op::WT: v = r * m * r.transpose(); break;
      case Op::Winv: v = ri.transpose() * m * ri; break;
      case Op::WTW: {
        MatrixXd rr = r * r.transpose();
        v = rr * m * rr;
        break;
      }
      case Op::WTWinv: {
        MatrixXd q = ri.transpose() * ri;
        v = q * m * q;
        break;
      }
    }
    out.segment(lay.offset[k], t) = svec(0.5 * (v + v.transpose()));
  }
  return out;
}

// lambda o u for the diagonal scaled point.
VectorXd lambda_prod(const Layout& lay, const Scaling& sc, const VectorXd& u) {
  VectorXd out(u.size());
  out.head(lay.nonneg) = (sc.lambda.head(lay.nonneg).array() * u.head(lay.nonneg).array()).matrix();
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    const VectorXd& l = sc.eig[k];
    for (int j = 0; j < n; ++j)
      for (int i = j; i < n; ++i) {
        int idx = lay.offset[k] + tri_index(i, j, n);
        out[idx] = u[idx] * 0.5 * (l[i] + l[j]);
      }
  }
  return out;
}

// Solves lambda o x = u.
VectorXd lambda_div(const Layout& lay, const Scaling& sc, const VectorXd& u) {
  VectorXd out(u.size());
  out.head(lay.nonneg) = (u.head(lay.nonneg).array() / sc.lambda.head(lay.nonneg).array()).matrix();
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    const VectorXd& l = sc.eig[k];
    for (int j = 0; j < n; ++j)
      for (int i = j; i < n; ++i) {
        int idx = lay.offset[k] + tri_index(i, j, n);
        out[idx] = u[idx] * 2.0 / (l[i] + l[j]);
      }
  }
  return out;
}

VectorXd jordan(const Layout& lay, const VectorXd& a, const VectorXd& b) {
  VectorXd out(a.size());
  out.head(lay.nonneg) = (a.head(lay.nonneg).array() * b.head(lay.nonneg).array()).matrix();
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    int t = n * (n + 1) / 2;
    MatrixXd am = smat(a.segment(lay.offset[k], t), n);
    MatrixXd bm = smat(b.segment(lay.offset[k], t), n);
    out.segment(lay.offset[k], t) = svec(0.5 * (am * bm + bm * am));
  }
  return out;
}

VectorXd identity_element(const Layout& lay) {
  VectorXd e = VectorXd::Zero(lay.length);
  e.head(lay.nonneg).setOnes();
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    for (int i = 0; i < n; ++i) e[lay.offset[k] + tri_index(i, i, n)] = 1.0;
  }
  return e;
}

// Largest t >= 0 such that -t is a lower bound for the spectrum of u, i.e.
// returns -lambda_min(u) over all blocks.
double negative_extent(const Layout& lay, const VectorXd& u) {
  double t = -kInf;
  if (lay.nonneg > 0) t = std::max(t, -u.head(lay.nonneg).minCoeff());
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    MatrixXd m = smat(u.segment(lay.offset[k], n * (n + 1) / 2), n);
    t = std::max(t, -min_eigenvalue(m));
  }
  return t;
}

// Largest alpha with lambda + alpha d in the cone (kInf if unrestricted).
double step_limit(const Layout& lay, const Scaling& sc, const VectorXd& d) {
  double alpha = kInf;
  for (int i = 0; i < lay.nonneg; ++i)
    if (d[i] < 0) alpha = std::min(alpha, -sc.lambda[i] / d[i]);
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    MatrixXd m = smat(d.segment(lay.offset[k], n * (n + 1) / 2), n);
    VectorXd isq = sc.eig[k].cwiseSqrt().cwiseInverse();
    m = isq.asDiagonal() * m * isq.asDiagonal();
    double mu = min_eigenvalue(m);
    if (mu < 0) alpha = std::min(alpha, -1.0 / mu);
  }
  return alpha;
}

bool compute_scaling(const Layout& lay, const VectorXd& s, const VectorXd& z, Scaling& sc) {
  sc.w.resize(lay.nonneg);
  sc.lambda.resize(lay.length);
  sc.r.clear();
  sc.rinv.clear();
  sc.eig.clear();
  for (int i = 0; i < lay.nonneg; ++i) {
    if (!(s[i] > 0) || !(z[i] > 0)) return false;
    sc.w[i] = std::sqrt(s[i] / z[i]);
    sc.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  for (std::size_t k = 0; k < lay.order.size(); ++k) {
    int n = lay.order[k];
    int t = n * (n + 1) / 2;
    auto factor = [](const MatrixXd& m, MatrixXd& l) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
      if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0)) return false;
      l = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal();
      return true;
    };
    MatrixXd ls, lz;
    if (!factor(smat(s.segment(lay.offset[k], t), n), ls)) return false;
    if (!factor(smat(z.segment(lay.offset[k], t), n), lz)) return false;
    Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd l = svd.singularValues();
    if (!(l.minCoeff() > 0)) return false;
    VectorXd isq = l.cwiseSqrt().cwiseInverse();
    sc.r.push_back(ls * svd.matrixV() * isq.asDiagonal());
    sc.rinv.push_back(isq.asDiagonal() * svd.matrixU().transpose() * lz.transpose());
    sc.eig.push_back(l);
    VectorXd diag = VectorXd::Zero(t);
    for (int i = 0; i < n; ++i) diag[tri_index(i, i, n)] = l[i];
    sc.lambda.segment(lay.offset[k], t) = diag;
  }
  return true;
}

class InteriorPoint {
 public:
  InteriorPoint(SpMat g, VectorXd h, MatrixXd a, VectorXd b, VectorXd c, Layout lay,
                const Settings& settings)
      : g_(std::move(g)),
        h_(std::move(h)),
        a_(std::move(a)),
        b_(std::move(b)),
        c_(std::move(c)),
        lay_(std::move(lay)),
        settings_(settings) {
    gt_ = g_.transpose();
    n_ = static_cast<int>(c_.size());
    p_ = static_cast<int>(b_.size());
    gdense_ = MatrixXd(g_);
  }

  ConicSolution run();

 private:
  void factor(const Scaling& sc);
  void kkt_solve(const Scaling& sc, const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
                 VectorXd& x, VectorXd& y, VectorXd& z) const;
  void kkt_solve_once(const Scaling& sc, const VectorXd& bx, const VectorXd& by,
                      const VectorXd& bz, VectorXd& x, VectorXd& y, VectorXd& z) const;

  SpMat g_, gt_;
  MatrixXd gdense_;
  VectorXd h_;
  MatrixXd a_;
  VectorXd b_, c_;
  Layout lay_;
  Settings settings_;
  int n_ = 0;
  int p_ = 0;
  Eigen::LDLT<MatrixXd> ldlt_;
};

void InteriorPoint::factor(const Scaling& sc) {
  const int m = lay_.length;
  const int size = n_ + p_ + m;
  constexpr double kReg = 1e-12;
  // Regularized quasidefinite system [0 A' G'; A 0 0; G 0 -W'W].
  MatrixXd kkt = MatrixXd::Zero(size, size);
  if (p_ > 0) {
    kkt.block(0, n_, n_, p_) = a_.transpose();
    kkt.block(n_, 0, p_, n_) = a_;
  }
  kkt.block(0, n_ + p_, n_, m) = gdense_.transpose();
  kkt.block(n_ + p_, 0, m, n_) = gdense_;
  for (int i = 0; i < lay_.nonneg; ++i) kkt(n_ + p_ + i, n_ + p_ + i) = -sc.w[i] * sc.w[i];
  for (std::size_t k = 0; k < lay_.order.size(); ++k) {
    const int n = lay_.order[k];
    const int first = n_ + p_ + lay_.offset[k];
    const int t = n * (n + 1) / 2;
    const MatrixXd rr = sc.r[k] * sc.r[k].transpose();
    VectorXd unit = VectorXd::Zero(t);
    for (int col = 0; col < t; ++col) {
      unit[col] = 1.0;
      const MatrixXd v = rr * smat(unit, n) * rr;
      kkt.block(first, first + col, t, 1) = -svec(0.5 * (v + v.transpose()));
      unit[col] = 0.0;
    }
  }
  kkt.diagonal().head(n_).array() += kReg;
  kkt.diagonal().segment(n_, p_).array() -= kReg;
  kkt.diagonal().tail(m).array() -= kReg * kkt.diagonal().tail(m).cwiseAbs().array().max(1.0);
  ldlt_.compute(kkt);
}

void InteriorPoint::kkt_solve_once(const Scaling&, const VectorXd& bx, const VectorXd& by,
                                   const VectorXd& bz, VectorXd& x, VectorXd& y,
                                   VectorXd& z) const {
  const int m = lay_.length;
  VectorXd rhs(n_ + p_ + m);
  rhs.head(n_) = bx;
  if (p_ > 0) rhs.segment(n_, p_) = by;
  rhs.tail(m) = bz;
  const VectorXd sol = ldlt_.solve(rhs);
  x = sol.head(n_);
  y = sol.segment(n_, p_);
  z = sol.tail(m);
}

void InteriorPoint::kkt_solve(const Scaling& sc, const VectorXd& bx, const VectorXd& by,
                              const VectorXd& bz, VectorXd& x, VectorXd& y, VectorXd& z) const {
  kkt_solve_once(sc, bx, by, bz, x, y, z);
  // Refine against the unregularized system.
  auto residual = [&](VectorXd& r1, VectorXd& r2, VectorXd& r3) {
    r1 = bx - gt_ * z;
    if (p_ > 0) r1 -= a_.transpose() * y;
    r2 = p_ > 0 ? VectorXd(by - a_ * x) : VectorXd(0);
    r3 = bz - (g_ * x - apply(lay_, sc, Op::WTW, z));
    return std::sqrt(r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm());
  };
  const double target =
      1e-14 * (1.0 + std::sqrt(bx.squaredNorm() + by.squaredNorm() + bz.squaredNorm()));
  VectorXd r1, r2, r3;
  double norm = residual(r1, r2, r3);
  for (int it = 0; it < settings_.refinement_steps && norm > target; ++it) {
    VectorXd dx, dy, dz;
    kkt_solve_once(sc, r1, r2, r3, dx, dy, dz);
    x += dx;
    y += dy;
    z += dz;
    const double next = residual(r1, r2, r3);
    if (!(next < norm)) {
      x -= dx;
      y -= dy;
      z -= dz;
      break;
    }
    norm = next;
  }
}

ConicSolution InteriorPoint::run() {
  ConicSolution result;
  const int m = lay_.length;
  const VectorXd e = identity_element(lay_);
  const double resx0 = std::max(1.0, c_.norm());
  const double resy0 = std::max(1.0, b_.norm());
  const double resz0 = std::max(1.0, h_.norm());

  Scaling sc = Scaling::identity(lay_);
  factor(sc);
  VectorXd x, y, z, s;
  {
    VectorXd zp;
    kkt_solve(sc, VectorXd::Zero(n_), b_, h_, x, y, zp);
    s = -zp;
    VectorXd xd;
    kkt_solve(sc, -c_, VectorXd::Zero(p_), VectorXd::Zero(m), xd, y, z);
  }
  auto shift = [&](VectorXd& u) {
    double nrm = u.norm();
    double t = negative_extent(lay_, u);
    if (t >= -1e-8 * std::max(nrm, 1.0)) u += (1.0 + t) * e;
  };
  shift(s);
  shift(z);
  double tau = 1.0, kappa = 1.0;
  double best_score = kInf;
  ConicSolution best;

  for (int iter = 0; iter <= settings_.max_iters; ++iter) {
    result.iterations = iter;
    VectorXd hrx = gt_ * z;
    if (p_ > 0) hrx += a_.transpose() * y;
    VectorXd rx = hrx + c_ * tau;
    VectorXd hry = p_ > 0 ? VectorXd(a_ * x) : VectorXd(0);
    VectorXd ry = hry - b_ * tau;
    VectorXd hrz = s + g_ * x;
    VectorXd rz = hrz - h_ * tau;
    double cx = c_.dot(x), by = b_.dot(y), hz = h_.dot(z);
    double rt = kappa + cx + by + hz;

    double gap = s.dot(z) / (tau * tau);
    double pcost = cx / tau, dcost = -(by + hz) / tau;
    double relgap = kInf;
    if (pcost < 0) relgap = gap / -pcost;
    else if (dcost > 0) relgap = gap / dcost;
    double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau;
    double dres = rx.norm() / resx0 / tau;
    double pinf = (by + hz < 0) ? hrx.norm() / resx0 / -(by + hz) : kInf;
    double dinf = (cx < 0) ? std::max(hry.norm() / resy0, hrz.norm() / resz0) / -cx : kInf;
    result.primal_residual = pres;
    result.dual_residual = dres;
    result.gap = gap;
    if (settings_.verbose)
      std::fprintf(stderr, "%3d pcost % .8e dcost % .8e gap %.2e pres %.2e dres %.2e tau %.2e kappa %.2e x %.2e z %.2e\n",
                   iter, pcost, dcost, gap, pres, dres, tau, kappa, x.norm() / tau, z.norm() / tau);

    if (pres <= settings_.feastol && dres <= settings_.feastol &&
        (gap <= settings_.abstol || relgap <= settings_.reltol)) {
      result.status = Status::Optimal;
      result.x = x / tau;
      result.objective = pcost;
      return result;
    }
    // Fallback candidates: primal feasible with a small gap. The dual may
    // diverge when the primal has no strictly feasible point.
    double score = std::min(relgap, gap);
    if (pres <= settings_.inaccurate_tol && score < best_score && x.allFinite()) {
      best_score = score;
      best = result;
      best.x = x / tau;
      best.objective = pcost;
    }
    if (pinf <= settings_.feastol) {
      result.status = Status::Infeasible;
      return result;
    }
    if (dinf <= settings_.feastol) {
      result.status = Status::Unbounded;
      return result;
    }
    if (iter == settings_.max_iters) break;

    if (!compute_scaling(lay_, s, z, sc)) {
      if (settings_.verbose) std::fprintf(stderr, "scaling failed\n");
      break;
    }
    factor(sc);
    const double mu = (s.dot(z) + tau * kappa) / (lay_.degree() + 1);

    VectorXd x1, y1, z1;
    kkt_solve(sc, -c_, b_, h_, x1, y1, z1);
    const double denom_base = c_.dot(x1) + b_.dot(y1) + h_.dot(z1) - kappa / tau;

    VectorXd lam_sq = lambda_prod(lay_, sc, sc.lambda);
    VectorXd dsa, dza;
    double dtaua = 0, dkappaa = 0;
    double sigma = 0.0;
    bool ok = true;
    VectorXd dx, dy, dz, ds;
    double dtau = 0, dkappa = 0, step = 0;

    for (int pass = 0; pass < 2; ++pass) {
      double eta = pass == 0 ? 1.0 : 1.0 - sigma;
      VectorXd rsz = -lam_sq;
      double rtk = -tau * kappa;
      if (pass == 1) {
        rsz += sigma * mu * e - jordan(lay_, dsa, dza);
        rtk += sigma * mu - dtaua * dkappaa;
      }
      VectorXd lrsz = lambda_div(lay_, sc, rsz);
      VectorXd b1 = -eta * rx;
      VectorXd b2 = -eta * ry;
      VectorXd b3 = -eta * rz - apply(lay_, sc, Op::WT, lrsz);
      double b4 = -eta * rt - rtk / tau;
      VectorXd x0, y0, z0;
      kkt_solve(sc, b1, b2, b3, x0, y0, z0);
      dtau = (b4 - (c_.dot(x0) + b_.dot(y0) + h_.dot(z0))) / denom_base;
      if (!std::isfinite(dtau)) {
        ok = false;
        break;
      }
      dx = x0 + dtau * x1;
      dy = y0 + dtau * y1;
      dz = z0 + dtau * z1;
      dkappa = (rtk - kappa * dtau) / tau;
      VectorXd dzs = apply(lay_, sc, Op::W, dz);
      VectorXd dss = lrsz - dzs;
      ds = apply(lay_, sc, Op::WT, dss);

      double alpha = std::min(step_limit(lay_, sc, dss), step_limit(lay_, sc, dzs));
      if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
      if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
      if (pass == 0) {
        double a_aff = std::min(1.0, alpha);
        sigma = std::pow(1.0 - a_aff, 3);
        dsa = dss;
        dza = dzs;
        dtaua = dtau;
        dkappaa = dkappa;
      } else {
        step = std::min(1.0, 0.99 * alpha);
      }
    }
    if (!ok || !(step > 0)) {
      if (settings_.verbose) std::fprintf(stderr, "step failed (ok=%d step=%g)\n", ok, step);
      break;
    }
    x += step * dx;
    y += step * dy;
    s += step * ds;
    z += step * dz;
    tau += step * dtau;
    kappa += step * dkappa;
    if (!(tau > 0) || !(kappa > 0) || !x.allFinite()) break;
  }
  if (best_score <= settings_.inaccurate_gap) {
    best.status = Status::Inaccurate;
    best.iterations = result.iterations;
    return best;
  }
  result.status = Status::Indeterminate;
  return result;
}

}  // namespace

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::Inaccurate: return "Inaccurate";
    case Status::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

VectorXd svec(const MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  VectorXd v(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) v[k++] = (i == j) ? m(i, j) : kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  return v;
}

MatrixXd smat(const Eigen::Ref<const VectorXd>& v, int n) {
  MatrixXd m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      double value = (i == j) ? v[k] : v[k] / kSqrt2;
      m(i, j) = value;
      m(j, i) = value;
      ++k;
    }
  return m;
}

double min_eigenvalue(const MatrixXd& m) {
  if (m.rows() == 0) return kInf;
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool psd_check(const MatrixXd& m, double tol) { return min_eigenvalue(m) >= -tol; }

ConicSolution solve(const ConicProblem& problem, const Settings& settings) {
  const int nv = static_cast<int>(problem.c.size());

  // Partition rows into equalities, orthant rows and semidefinite blocks.
  std::vector<int> eq_rows, lp_rows;
  std::vector<std::pair<int, int>> sdp_blocks;  // (first row, order)
  int row = 0;
  for (const Cone& cone : problem.cones) {
    switch (cone.kind) {
      case Cone::Kind::Zero:
        for (int i = 0; i < cone.size; ++i) eq_rows.push_back(row + i);
        break;
      case Cone::Kind::Nonneg:
        for (int i = 0; i < cone.size; ++i) lp_rows.push_back(row + i);
        break;
      case Cone::Kind::Psd: sdp_blocks.emplace_back(row, cone.size); break;
    }
    row += cone.length();
  }

  Layout lay;
  lay.nonneg = static_cast<int>(lp_rows.size());
  lay.length = lay.nonneg;
  for (auto [first, order] : sdp_blocks) {
    lay.order.push_back(order);
    lay.offset.push_back(lay.length);
    lay.length += order * (order + 1) / 2;
  }
  std::vector<int> cone_rows = lp_rows;
  for (auto [first, order] : sdp_blocks)
    for (int i = 0; i < order * (order + 1) / 2; ++i) cone_rows.push_back(first + i);

  MatrixXd aeq(eq_rows.size(), nv);
  VectorXd beq(eq_rows.size());
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    aeq.row(i) = problem.A.row(eq_rows[i]);
    beq[i] = problem.b[eq_rows[i]];
  }

  // Columns untouched by every constraint.
  std::vector<int> keep;
  bool free_direction = false;
  for (int j = 0; j < nv; ++j) {
    if (problem.A.col(j).cwiseAbs().maxCoeff() > 0) keep.push_back(j);
    else if (problem.c[j] != 0.0) free_direction = true;
  }
  const int n = static_cast<int>(keep.size());

  std::vector<Eigen::Triplet<double>> trip;
  VectorXd h(lay.length);
  for (int r = 0; r < lay.length; ++r) {
    int src = cone_rows[r];
    h[r] = problem.b[src];
    for (int q = 0; q < n; ++q) {
      double v = problem.A(src, keep[q]);
      if (v != 0.0) trip.emplace_back(r, q, v);
    }
  }
  SpMat g(lay.length, n);
  g.setFromTriplets(trip.begin(), trip.end());
  VectorXd c(n);
  MatrixXd a(aeq.rows(), n);
  for (int q = 0; q < n; ++q) {
    c[q] = problem.c[keep[q]];
    a.col(q) = aeq.col(keep[q]);
  }

  ConicSolution result;
  // Drop redundant equality rows; inconsistent ones certify infeasibility.
  if (a.rows() > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < a.rows()) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(a);
      VectorXd xls = cod.solve(beq);
      if ((a * xls - beq).norm() > 1e-9 * std::max(1.0, beq.norm())) {
        result.status = Status::Infeasible;
        return result;
      }
      MatrixXd ar(rank, n);
      VectorXd br(rank);
      for (int i = 0; i < rank; ++i) {
        int src = qr.colsPermutation().indices()[i];
        ar.row(i) = a.row(src);
        br[i] = beq[src];
      }
      a = std::move(ar);
      beq = std::move(br);
    }
  }

  if (n == 0) {
    bool ok = beq.size() == 0 || beq.norm() <= settings.feastol;
    ok = ok && negative_extent(lay, h) <= settings.feastol;
    result.status = ok ? (free_direction ? Status::Unbounded : Status::Optimal) : Status::Infeasible;
    if (result.status == Status::Optimal) result.x = VectorXd::Zero(nv);
    return result;
  }

  InteriorPoint ipm(std::move(g), std::move(h), std::move(a), std::move(beq), std::move(c), lay,
                    settings);
  ConicSolution reduced = ipm.run();
  result = reduced;
  if (reduced.status == Status::Optimal) {
    if (free_direction) {
      result.status = Status::Unbounded;
      result.x.resize(0);
      return result;
    }
    result.x = VectorXd::Zero(nv);
    for (int q = 0; q < n; ++q) result.x[keep[q]] = reduced.x[q];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Modeling layer.

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  constant_ += other.constant_;
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  constant_ -= other.constant_;
  for (auto [i, v] : other.terms_) terms_.emplace_back(i, -v);
  return *this;
}

LinExpr& LinExpr::operator*=(double scale) {
  constant_ *= scale;
  for (auto& t : terms_) t.second *= scale;
  return *this;
}

double LinExpr::evaluate(const VectorXd& x) const {
  double v = constant_;
  for (auto [i, coef] : terms_) v += coef * x[i];
  return v;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

LinExpr& SymExpr::at(int i, int j) { return entries_[tri_index(i, j, n_)]; }
const LinExpr& SymExpr::at(int i, int j) const { return entries_[tri_index(i, j, n_)]; }

void SymExpr::add_constant(const MatrixXd& m, double scale) {
  for (int j = 0; j < n_; ++j)
    for (int i = j; i < n_; ++i) at(i, j).add_constant(scale * m(i, j));
}

void SymExpr::add_variable_times(int var, const MatrixXd& m, double scale) {
  for (int j = 0; j < n_; ++j)
    for (int i = j; i < n_; ++i) at(i, j).add_term(var, scale * m(i, j));
}

void SymExpr::add_congruence(const MatrixXd& e, const SymVar& y, double scale) {
  const int k = y.size();
  for (int q = 0; q < n_; ++q)
    for (int p = q; p < n_; ++p) {
      LinExpr& entry = at(p, q);
      for (int b = 0; b < k; ++b)
        for (int a = b; a < k; ++a) {
          double coef = e(a, p) * e(b, q);
          if (a != b) coef += e(b, p) * e(a, q);
          entry.add_term(y.index(a, b), scale * coef);
        }
    }
}

MatrixXd SymExpr::evaluate(const VectorXd& x) const {
  MatrixXd m(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = j; i < n_; ++i) {
      m(i, j) = at(i, j).evaluate(x);
      m(j, i) = m(i, j);
    }
  return m;
}

int SymVar::index(int i, int j) const { return first_ + tri_index(i, j, n_); }

MatrixXd SymVar::value(const VectorXd& x) const {
  MatrixXd m(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = j; i < n_; ++i) {
      m(i, j) = x[index(i, j)];
      m(j, i) = m(i, j);
    }
  return m;
}

int Model::add_variable() { return nvars_++; }

int Model::add_variables(int count) {
  int first = nvars_;
  nvars_ += count;
  return first;
}

SymVar Model::add_symmetric(int n) {
  SymVar v(n, nvars_);
  nvars_ += v.count();
  return v;
}

SymVar Model::add_nonneg_symmetric(int n) {
  SymVar v = add_symmetric(n);
  Block blk{{Cone::Kind::Nonneg, v.count()}, {}};
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) blk.rows.push_back(LinExpr::variable(v.index(i, j)));
  blocks_.push_back(std::move(blk));
  return v;
}

SymVar Model::add_psd_symmetric(int n) {
  SymVar v = add_symmetric(n);
  SymExpr e(n);
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) e.at(i, j).add_term(v.index(i, j), 1.0);
  add_psd(e);
  return v;
}

void Model::add_nonneg(const LinExpr& e) { blocks_.push_back({{Cone::Kind::Nonneg, 1}, {e}}); }

void Model::add_equal(const LinExpr& e) { blocks_.push_back({{Cone::Kind::Zero, 1}, {e}}); }

void Model::add_psd(const SymExpr& e) {
  const int n = e.size();
  Block blk{{Cone::Kind::Psd, n}, {}};
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      LinExpr row = e.at(i, j);
      if (i != j) row *= kSqrt2;
      blk.rows.push_back(std::move(row));
    }
  blocks_.push_back(std::move(blk));
}

ConicProblem Model::build() const {
  // Merge consecutive scalar blocks of the same kind.
  ConicProblem p;
  int rows = 0;
  for (const Block& b : blocks_) rows += static_cast<int>(b.rows.size());
  p.c = VectorXd::Zero(nvars_);
  for (auto [i, v] : objective_.terms()) p.c[i] += v;
  p.A = MatrixXd::Zero(rows, nvars_);
  p.b = VectorXd::Zero(rows);
  int r = 0;
  for (const Block& b : blocks_) {
    if (b.cone.kind != Cone::Kind::Psd && !p.cones.empty() && p.cones.back().kind == b.cone.kind)
      p.cones.back().size += b.cone.size;
    else
      p.cones.push_back(b.cone);
    for (const LinExpr& e : b.rows) {
      // s = e  =>  -coeffs x + s = constant
      p.b[r] = e.constant();
      for (auto [i, v] : e.terms()) p.A(r, i) -= v;
      ++r;
    }
  }
  return p;
}

}  // namespace pwacert::conic
