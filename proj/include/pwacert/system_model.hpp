#ifndef PWACERT_SYSTEM_MODEL_HPP
#define PWACERT_SYSTEM_MODEL_HPP

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pwacert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// a.x < b when strict, a.x <= b otherwise.
struct ConstraintRow {
  VectorXd a;
  double b = 0.0;
  bool strict = false;

  bool holds(const VectorXd& x) const;
  bool holds_closed(const VectorXd& x, double tol = 0.0) const;
};

class Polyhedron {
 public:
  Polyhedron() = default;
  Polyhedron(int dim, std::vector<ConstraintRow> rows);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<ConstraintRow>& rows() const { return rows_; }

  // Full stack T x (<|<=) c in file order.
  MatrixXd T() const;
  VectorXd c() const;
  MatrixXd strict_T() const;
  VectorXd strict_c() const;
  MatrixXd weak_T() const;
  VectorXd weak_c() const;

  bool contains(const VectorXd& x) const;
  bool closure_contains(const VectorXd& x, double tol = 0.0) const;

 private:
  MatrixXd stack_T(int which) const;
  VectorXd stack_c(int which) const;

  int dim_ = 0;
  std::vector<ConstraintRow> rows_;
};

struct AffineMap {
  MatrixXd A;
  VectorXd b;

  VectorXd operator()(const VectorXd& x) const { return A * x + b; }
  // Homogeneous form [[1, 0], [b, A]].
  MatrixXd homogeneous() const;
};

struct Cell {
  std::string name;
  Polyhedron guard;
  AffineMap dynamics;
};

class PwaSystem {
 public:
  PwaSystem(int dim, Polyhedron initial, std::vector<Cell> cells);

  int dim() const { return dim_; }
  const Polyhedron& initial() const { return initial_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_.at(i); }

 private:
  int dim_;
  Polyhedron initial_;
  std::vector<Cell> cells_;
};

// Cell indices are 0-based in code and printed 1-based.
struct StepResult {
  std::size_t cell;
  VectorXd next;
};

// Index of the unique cell containing x; throws NoCell / AmbiguousCell.
std::size_t locate(const PwaSystem& sys, const VectorXd& x);
StepResult step(const PwaSystem& sys, const VectorXd& x);

PwaSystem load_system(std::istream& in);
PwaSystem load_system_text(const std::string& text);
PwaSystem load_system_file(const std::string& path);
std::string serialize_system(const PwaSystem& sys);

bool same_system(const PwaSystem& a, const PwaSystem& b);

}  // namespace pwacert

#endif  // PWACERT_SYSTEM_MODEL_HPP
