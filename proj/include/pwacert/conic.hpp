#ifndef PWACERT_CONIC_HPP
#define PWACERT_CONIC_HPP

#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pwacert::conic {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Cone {
  enum class Kind { Zero, Nonneg, Psd };
  Kind kind;
  int size;  // row count for Zero/Nonneg, matrix order for Psd

  int length() const { return kind == Kind::Psd ? size * (size + 1) / 2 : size; }
};

using ConeSpec = std::vector<Cone>;

// minimize c'x subject to A x + s = b, s in the product cone. Psd blocks hold
// the scaled lower-triangle vectorization of a symmetric matrix.
struct ConicProblem {
  VectorXd c;
  MatrixXd A;
  VectorXd b;
  ConeSpec cones;
};

// Inaccurate: the run stalled; x is the best iterate whose primal residual is
// within inaccurate_tol and whose gap is within inaccurate_gap.
enum class Status { Optimal, Inaccurate, Infeasible, Unbounded, Indeterminate };

std::string_view to_string(Status status);

struct ConicSolution {
  Status status = Status::Indeterminate;
  VectorXd x;  // empty unless Optimal or Inaccurate
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

struct Settings {
  double feastol = 1e-7;
  double abstol = 1e-7;
  double reltol = 1e-7;
  int max_iters = 120;
  int refinement_steps = 10;
  double inaccurate_tol = 1e-6;
  double inaccurate_gap = 1e-2;
  bool verbose = false;
};

ConicSolution solve(const ConicProblem& problem, const Settings& settings = {});

// Scaled symmetric vectorization: column-major lower triangle, off-diagonal
// entries multiplied by sqrt(2).
VectorXd svec(const MatrixXd& m);
MatrixXd smat(const Eigen::Ref<const VectorXd>& v, int n);

bool psd_check(const MatrixXd& m, double tol);
double min_eigenvalue(const MatrixXd& m);

// Affine expression in the decision variables.
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}

  static LinExpr variable(int index, double coefficient = 1.0) {
    LinExpr e;
    e.terms_.emplace_back(index, coefficient);
    return e;
  }

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double scale);
  void add_term(int index, double coefficient) {
    if (coefficient != 0.0) terms_.emplace_back(index, coefficient);
  }
  void add_constant(double value) { constant_ += value; }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double evaluate(const VectorXd& x) const;

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

// Symmetric matrix of affine expressions, lower triangle stored.
class SymExpr {
 public:
  explicit SymExpr(int n) : n_(n), entries_(n * (n + 1) / 2) {}

  int size() const { return n_; }
  LinExpr& at(int i, int j);
  const LinExpr& at(int i, int j) const;

  void add_constant(const MatrixXd& m, double scale = 1.0);
  void add_variable_times(int var, const MatrixXd& m, double scale = 1.0);
  // Adds scale * E' Y E for a symmetric matrix variable Y given by its
  // lower-triangle variable indices.
  void add_congruence(const MatrixXd& e, const class SymVar& y, double scale);

  MatrixXd evaluate(const VectorXd& x) const;

 private:
  int n_;
  std::vector<LinExpr> entries_;
};

// Symmetric matrix whose lower-triangle entries are decision variables.
class SymVar {
 public:
  SymVar() = default;
  SymVar(int n, int first) : n_(n), first_(first) {}

  int size() const { return n_; }
  int index(int i, int j) const;
  int count() const { return n_ * (n_ + 1) / 2; }
  MatrixXd value(const VectorXd& x) const;

 private:
  int n_ = 0;
  int first_ = 0;
};

// Incremental builder for ConicProblem instances.
class Model {
 public:
  int add_variable();
  int add_variables(int count);
  SymVar add_symmetric(int n);
  // Entrywise-nonnegative symmetric matrix variable.
  SymVar add_nonneg_symmetric(int n);
  // Positive semidefinite matrix variable.
  SymVar add_psd_symmetric(int n);

  void add_nonneg(const LinExpr& e);  // e >= 0
  void add_equal(const LinExpr& e);   // e == 0
  void add_psd(const SymExpr& e);     // e is positive semidefinite
  void minimize(const LinExpr& objective) { objective_ = objective; }

  int variable_count() const { return nvars_; }
  ConicProblem build() const;

 private:
  struct Block {
    Cone cone;
    std::vector<LinExpr> rows;  // row value = s
  };
  int nvars_ = 0;
  LinExpr objective_;
  std::vector<Block> blocks_;
};

}  // namespace pwacert::conic

#endif  // PWACERT_CONIC_HPP
