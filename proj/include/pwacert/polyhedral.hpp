#ifndef PWACERT_POLYHEDRAL_HPP
#define PWACERT_POLYHEDRAL_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pwacert/conic.hpp"
#include "pwacert/system_model.hpp"

namespace pwacert {

// Ordered transition (from, to) between cells, 0-based.
struct CellPair {
  std::size_t from = 0;
  std::size_t to = 0;
  auto operator<=>(const CellPair&) const = default;
};

struct SwitchSets {
  std::vector<CellPair> sw_bar;
  std::vector<std::size_t> in_set;

  bool has_pair(CellPair p) const;
  bool is_initial(std::size_t i) const;
};

struct DisjointPair {
  std::size_t first;
  std::size_t second;
  bool disjoint;
};

// Squared-coordinate suprema over the closure of the initial set; the last
// slot is reserved for the level of the Lyapunov template.
struct X0Bounds {
  VectorXd lower;   // inf x_k
  VectorXd upper;   // sup x_k
  VectorXd values;  // size d + 1

  int dim() const { return static_cast<int>(lower.size()); }
};

// Rows of {x : f(x) in target}.
std::vector<ConstraintRow> preimage_rows(const Polyhedron& target, const AffineMap& f);

// Decides whether the set cut out by the rows (strictness honoured) is
// nonempty by solving the theorem-of-the-alternative LP.
bool rows_nonempty(std::span<const ConstraintRow> rows, int dim,
                   const conic::Settings& settings = {});

bool pair_nonempty(const PwaSystem& sys, std::size_t i, std::size_t j,
                   const conic::Settings& settings = {});
bool initial_nonempty(const PwaSystem& sys, std::size_t i, const conic::Settings& settings = {});
std::vector<std::size_t> initial_cells(const PwaSystem& sys, const conic::Settings& settings = {});
SwitchSets compute_switch_sets(const PwaSystem& sys, const conic::Settings& settings = {});
std::vector<DisjointPair> guards_disjoint(const PwaSystem& sys,
                                          const conic::Settings& settings = {});

X0Bounds x0_coordinate_bounds(const PwaSystem& sys, const conic::Settings& settings = {});

// Vertices of the closure of a bounded polyhedron by enumeration of active
// sets. Returns nullopt when the enumeration would exceed max_subsets.
std::optional<std::vector<VectorXd>> closure_vertices(std::span<const ConstraintRow> rows, int dim,
                                                      std::size_t max_subsets = 2000000);

}  // namespace pwacert

#endif  // PWACERT_POLYHEDRAL_HPP
