#include "pwacert/polyhedral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "pwacert/errors.hpp"

namespace pwacert {

bool SwitchSets::has_pair(CellPair p) const {
  return std::binary_search(sw_bar.begin(), sw_bar.end(), p);
}

bool SwitchSets::is_initial(std::size_t i) const {
  return std::binary_search(in_set.begin(), in_set.end(), i);
}

std::vector<ConstraintRow> preimage_rows(const Polyhedron& target, const AffineMap& f) {
  std::vector<ConstraintRow> out;
  for (const auto& r : target.rows())
    out.push_back({f.A.transpose() * r.a, r.b - r.a.dot(f.b), r.strict});
  return out;
}

bool rows_nonempty(std::span<const ConstraintRow> rows, int dim, const conic::Settings& settings) {
  // Strict stack rows (1, 0) and (c_s, -T_s); weak stack rows (c_w, -T_w).
  std::vector<VectorXd> strict_stack, weak_stack;
  VectorXd hom = VectorXd::Zero(dim + 1);
  hom[0] = 1.0;
  strict_stack.push_back(hom);
  for (const auto& r : rows) {
    VectorXd v(dim + 1);
    v[0] = r.b;
    v.tail(dim) = -r.a;
    (r.strict ? strict_stack : weak_stack).push_back(std::move(v));
  }
  const int ns = static_cast<int>(strict_stack.size());
  const int nw = static_cast<int>(weak_stack.size());

  conic::Model model;
  const int ps = model.add_variables(ns);
  const int pw = model.add_variables(nw);
  for (int k = 0; k < ns + nw; ++k) model.add_nonneg(conic::LinExpr::variable(ps + k));
  for (int col = 0; col <= dim; ++col) {
    conic::LinExpr e;
    for (int k = 0; k < ns; ++k) e.add_term(ps + k, strict_stack[k][col]);
    for (int k = 0; k < nw; ++k) e.add_term(pw + k, weak_stack[k][col]);
    model.add_equal(e);
  }
  conic::LinExpr norm(-1.0);
  for (int k = 0; k < ns; ++k) norm.add_term(ps + k, 1.0);
  model.add_equal(norm);

  conic::ConicSolution sol = conic::solve(model.build(), settings);
  if (sol.status == conic::Status::Infeasible) return true;
  if (sol.status == conic::Status::Optimal) {
    // Re-check the alternative system before declaring emptiness.
    VectorXd combo = VectorXd::Zero(dim + 1);
    double total = 0.0, most_negative = 0.0;
    for (int k = 0; k < ns; ++k) {
      combo += sol.x[ps + k] * strict_stack[k];
      total += sol.x[ps + k];
      most_negative = std::min(most_negative, sol.x[ps + k]);
    }
    for (int k = 0; k < nw; ++k) {
      combo += sol.x[pw + k] * weak_stack[k];
      most_negative = std::min(most_negative, sol.x[pw + k]);
    }
    const double tol = 1e-7;
    if (combo.cwiseAbs().maxCoeff() <= tol && std::abs(total - 1.0) <= tol && most_negative >= -tol)
      return false;
  }
  throw Error(ErrorKind::AnalysisIndeterminate,
              std::string("emptiness LP ended with status ") + std::string(conic::to_string(sol.status)));
}

bool pair_nonempty(const PwaSystem& sys, std::size_t i, std::size_t j,
                   const conic::Settings& settings) {
  std::vector<ConstraintRow> rows = sys.cell(i).guard.rows();
  auto pre = preimage_rows(sys.cell(j).guard, sys.cell(i).dynamics);
  rows.insert(rows.end(), pre.begin(), pre.end());
  return rows_nonempty(rows, sys.dim(), settings);
}

bool initial_nonempty(const PwaSystem& sys, std::size_t i, const conic::Settings& settings) {
  std::vector<ConstraintRow> rows = sys.cell(i).guard.rows();
  const auto& init = sys.initial().rows();
  rows.insert(rows.end(), init.begin(), init.end());
  return rows_nonempty(rows, sys.dim(), settings);
}

std::vector<std::size_t> initial_cells(const PwaSystem& sys, const conic::Settings& settings) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sys.cell_count(); ++i)
    if (initial_nonempty(sys, i, settings)) out.push_back(i);
  return out;
}

SwitchSets compute_switch_sets(const PwaSystem& sys, const conic::Settings& settings) {
  const std::size_t n = sys.cell_count();
  std::vector<std::future<bool>> jobs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      jobs.push_back(std::async(std::launch::async, [&sys, &settings, i, j] {
        return pair_nonempty(sys, i, j, settings);
      }));
  SwitchSets sw;
  for (std::size_t k = 0; k < jobs.size(); ++k)
    if (jobs[k].get()) sw.sw_bar.push_back({k / n, k % n});
  sw.in_set = initial_cells(sys, settings);
  return sw;
}

std::vector<DisjointPair> guards_disjoint(const PwaSystem& sys, const conic::Settings& settings) {
  std::vector<DisjointPair> out;
  for (std::size_t i = 0; i < sys.cell_count(); ++i)
    for (std::size_t j = i + 1; j < sys.cell_count(); ++j) {
      std::vector<ConstraintRow> rows = sys.cell(i).guard.rows();
      const auto& other = sys.cell(j).guard.rows();
      rows.insert(rows.end(), other.begin(), other.end());
      out.push_back({i, j, !rows_nonempty(rows, sys.dim(), settings)});
    }
  return out;
}

X0Bounds x0_coordinate_bounds(const PwaSystem& sys, const conic::Settings& settings) {
  const int d = sys.dim();
  X0Bounds out;
  out.lower.resize(d);
  out.upper.resize(d);
  out.values = VectorXd::Zero(d + 1);
  for (int k = 0; k < d; ++k) {
    for (double sign : {1.0, -1.0}) {
      conic::Model model;
      const int x = model.add_variables(d);
      for (const auto& r : sys.initial().rows()) {
        conic::LinExpr e(r.b);
        for (int q = 0; q < d; ++q) e.add_term(x + q, -r.a[q]);
        model.add_nonneg(e);
      }
      model.minimize(conic::LinExpr::variable(x + k, sign));
      conic::ConicSolution sol = conic::solve(model.build(), settings);
      if (sol.status == conic::Status::Unbounded)
        throw Error(ErrorKind::UnboundedInitialSet,
                    "initial set is unbounded along coordinate " + std::to_string(k + 1));
      if (sol.status == conic::Status::Infeasible)
        throw Error(ErrorKind::AnalysisIndeterminate, "initial set is empty");
      if (sol.status != conic::Status::Optimal)
        throw Error(ErrorKind::AnalysisIndeterminate,
                    "initial-set bound LP ended with status " + std::string(conic::to_string(sol.status)));
      if (sign > 0) out.lower[k] = sol.x[x + k];
      else out.upper[k] = sol.x[x + k];
    }
    out.values[k] = std::max(out.lower[k] * out.lower[k], out.upper[k] * out.upper[k]);
  }
  return out;
}

std::optional<std::vector<VectorXd>> closure_vertices(std::span<const ConstraintRow> rows, int dim,
                                                      std::size_t max_subsets) {
  const int n = static_cast<int>(rows.size());
  if (n < dim) return std::vector<VectorXd>{};
  // Binomial count guard.
  double count = 1.0;
  for (int k = 0; k < dim; ++k) count = count * (n - k) / (k + 1);
  if (count > static_cast<double>(max_subsets)) return std::nullopt;

  std::vector<VectorXd> verts;
  std::vector<int> idx(dim);
  for (int k = 0; k < dim; ++k) idx[k] = k;
  double scale = 1.0;
  for (const auto& r : rows) scale = std::max(scale, std::abs(r.b));
  const double tol = 1e-9 * scale;
  while (true) {
    MatrixXd m(dim, dim);
    VectorXd rhs(dim);
    for (int k = 0; k < dim; ++k) {
      m.row(k) = rows[idx[k]].a.transpose();
      rhs[k] = rows[idx[k]].b;
    }
    Eigen::FullPivLU<MatrixXd> lu(m);
    if (lu.rank() == dim) {
      VectorXd v = lu.solve(rhs);
      bool inside = true;
      for (const auto& r : rows)
        if (r.a.dot(v) > r.b + tol) {
          inside = false;
          break;
        }
      if (inside) {
        bool dup = false;
        for (const auto& u : verts)
          if ((u - v).cwiseAbs().maxCoeff() <= tol) dup = true;
        if (!dup) verts.push_back(v);
      }
    }
    int k = dim - 1;
    while (k >= 0 && idx[k] == n - dim + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int q = k + 1; q < dim; ++q) idx[q] = idx[q - 1] + 1;
  }
  return verts;
}

}  // namespace pwacert
