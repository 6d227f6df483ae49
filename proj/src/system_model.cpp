#include "pwacert/system_model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "pwacert/errors.hpp"

namespace pwacert {

using nlohmann::json;

bool ConstraintRow::holds(const VectorXd& x) const {
  double v = a.dot(x);
  return strict ? v < b : v <= b;
}

bool ConstraintRow::holds_closed(const VectorXd& x, double tol) const { return a.dot(x) <= b + tol; }

Polyhedron::Polyhedron(int dim, std::vector<ConstraintRow> rows) : dim_(dim), rows_(std::move(rows)) {
  for (const auto& r : rows_)
    if (r.a.size() != dim_)
      throw Error(ErrorKind::DimensionMismatch, "constraint row has length " +
                                                    std::to_string(r.a.size()) + ", expected " +
                                                    std::to_string(dim_));
}

MatrixXd Polyhedron::stack_T(int which) const {
  std::vector<const ConstraintRow*> picked;
  for (const auto& r : rows_)
    if (which < 0 || r.strict == (which == 1)) picked.push_back(&r);
  MatrixXd t(picked.size(), dim_);
  for (std::size_t i = 0; i < picked.size(); ++i) t.row(i) = picked[i]->a.transpose();
  return t;
}

VectorXd Polyhedron::stack_c(int which) const {
  std::vector<double> picked;
  for (const auto& r : rows_)
    if (which < 0 || r.strict == (which == 1)) picked.push_back(r.b);
  return Eigen::Map<VectorXd>(picked.data(), picked.size());
}

MatrixXd Polyhedron::T() const { return stack_T(-1); }
VectorXd Polyhedron::c() const { return stack_c(-1); }
MatrixXd Polyhedron::strict_T() const { return stack_T(1); }
VectorXd Polyhedron::strict_c() const { return stack_c(1); }
MatrixXd Polyhedron::weak_T() const { return stack_T(0); }
VectorXd Polyhedron::weak_c() const { return stack_c(0); }

bool Polyhedron::contains(const VectorXd& x) const {
  for (const auto& r : rows_)
    if (!r.holds(x)) return false;
  return true;
}

bool Polyhedron::closure_contains(const VectorXd& x, double tol) const {
  for (const auto& r : rows_)
    if (!r.holds_closed(x, tol)) return false;
  return true;
}

MatrixXd AffineMap::homogeneous() const {
  const auto d = A.rows();
  MatrixXd f = MatrixXd::Zero(d + 1, d + 1);
  f(0, 0) = 1.0;
  f.block(1, 0, d, 1) = b;
  f.block(1, 1, d, d) = A;
  return f;
}

PwaSystem::PwaSystem(int dim, Polyhedron initial, std::vector<Cell> cells)
    : dim_(dim), initial_(std::move(initial)), cells_(std::move(cells)) {
  if (dim_ < 1) throw Error(ErrorKind::DimensionMismatch, "dimension must be at least 1");
  if (cells_.empty()) throw Error(ErrorKind::EmptyCells, "system has no cells");
  if (initial_.dim() != dim_)
    throw Error(ErrorKind::DimensionMismatch, "initial set dimension differs from system dimension");
  for (const auto& c : cells_) {
    if (c.guard.dim() != dim_)
      throw Error(ErrorKind::DimensionMismatch, "guard of " + c.name + " has wrong dimension");
    if (c.dynamics.A.rows() != dim_ || c.dynamics.A.cols() != dim_ || c.dynamics.b.size() != dim_)
      throw Error(ErrorKind::DimensionMismatch, "dynamics of " + c.name + " must be " +
                                                    std::to_string(dim_) + "x" +
                                                    std::to_string(dim_));
  }
}

std::size_t locate(const PwaSystem& sys, const VectorXd& x) {
  std::size_t found = sys.cell_count();
  for (std::size_t i = 0; i < sys.cell_count(); ++i) {
    if (!sys.cell(i).guard.contains(x)) continue;
    if (found != sys.cell_count()) {
      std::ostringstream msg;
      msg << "point (" << x.transpose() << ") lies in cells " << found + 1 << " and " << i + 1;
      throw Error(ErrorKind::AmbiguousCell, msg.str());
    }
    found = i;
  }
  if (found == sys.cell_count()) {
    std::ostringstream msg;
    msg << "point (" << x.transpose() << ") lies in no cell";
    throw Error(ErrorKind::NoCell, msg.str());
  }
  return found;
}

StepResult step(const PwaSystem& sys, const VectorXd& x) {
  std::size_t i = locate(sys, x);
  return {i, sys.cell(i).dynamics(x)};
}

namespace {

// Parse context carrying the JSON pointer of the current node.
struct Cursor {
  const json& node;
  std::string path;

  Cursor child(const std::string& key) const {
    if (!node.is_object() || !node.contains(key))
      throw Error(ErrorKind::Parse, "missing field '" + key + "' at " + (path.empty() ? "/" : path));
    return {node.at(key), path + "/" + key};
  }
  Cursor child(std::size_t i) const { return {node.at(i), path + "/" + std::to_string(i)}; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse, what + " at " + (path.empty() ? "/" : path));
  }

  double number() const {
    if (!node.is_number()) fail("expected a number");
    double v = node.get<double>();
    if (!std::isfinite(v)) fail("non-finite number");
    return v;
  }
  const json& array() const {
    if (!node.is_array()) fail("expected an array");
    return node;
  }
};

VectorXd read_vector(const Cursor& cur) {
  const json& arr = cur.array();
  VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = cur.child(i).number();
  return v;
}

Polyhedron read_polyhedron(const Cursor& cur, int dim) {
  Cursor rows = cur.child("rows");
  std::vector<ConstraintRow> out;
  for (std::size_t i = 0; i < rows.array().size(); ++i) {
    Cursor r = rows.child(i);
    ConstraintRow row;
    row.a = read_vector(r.child("a"));
    if (row.a.size() != dim)
      throw Error(ErrorKind::DimensionMismatch, "row length " + std::to_string(row.a.size()) +
                                                    " differs from dimension " + std::to_string(dim) +
                                                    " at " + r.path + "/a");
    row.b = r.child("b").number();
    if (r.node.contains("strict")) {
      Cursor s = r.child("strict");
      if (!s.node.is_boolean()) s.fail("expected a boolean");
      row.strict = s.node.get<bool>();
    }
    out.push_back(std::move(row));
  }
  return Polyhedron(dim, std::move(out));
}

std::string locate_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json row_json(const ConstraintRow& r) {
  return {{"a", std::vector<double>(r.a.data(), r.a.data() + r.a.size())},
          {"b", r.b},
          {"strict", r.strict}};
}

json poly_json(const Polyhedron& p) {
  json rows = json::array();
  for (const auto& r : p.rows()) rows.push_back(row_json(r));
  return {{"rows", rows}};
}

}  // namespace

PwaSystem load_system_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "malformed JSON at " + locate_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  Cursor root{doc, ""};
  if (!doc.is_object()) root.fail("expected an object");
  Cursor dcur = root.child("dimension");
  if (!dcur.node.is_number_integer()) dcur.fail("expected an integer");
  const int dim = dcur.node.get<int>();
  if (dim < 1) dcur.fail("dimension must be at least 1");

  Polyhedron initial = read_polyhedron(root.child("initial"), dim);
  Cursor cells = root.child("cells");
  if (cells.array().empty()) throw Error(ErrorKind::EmptyCells, "'cells' is empty at /cells");
  std::vector<Cell> out;
  for (std::size_t i = 0; i < cells.node.size(); ++i) {
    Cursor c = cells.child(i);
    Cell cell;
    cell.name = "X" + std::to_string(i + 1);
    if (c.node.contains("name")) {
      Cursor n = c.child("name");
      if (!n.node.is_string()) n.fail("expected a string");
      cell.name = n.node.get<std::string>();
    }
    cell.guard = read_polyhedron(c.child("guard"), dim);
    Cursor a = c.child("A");
    if (a.array().size() != static_cast<std::size_t>(dim))
      throw Error(ErrorKind::DimensionMismatch, "matrix must have " + std::to_string(dim) +
                                                    " rows at " + a.path);
    cell.dynamics.A.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
      VectorXd row = read_vector(a.child(r));
      if (row.size() != dim)
        throw Error(ErrorKind::DimensionMismatch, "matrix row must have " + std::to_string(dim) +
                                                      " entries at " + a.path + "/" + std::to_string(r));
      cell.dynamics.A.row(r) = row.transpose();
    }
    if (c.node.contains("b")) {
      cell.dynamics.b = read_vector(c.child("b"));
      if (cell.dynamics.b.size() != dim)
        throw Error(ErrorKind::DimensionMismatch, "offset must have " + std::to_string(dim) +
                                                      " entries at " + c.path + "/b");
    } else {
      cell.dynamics.b = VectorXd::Zero(dim);
    }
    out.push_back(std::move(cell));
  }
  return PwaSystem(dim, std::move(initial), std::move(out));
}

PwaSystem load_system(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_system_text(buf.str());
}

PwaSystem load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  return load_system(in);
}

std::string serialize_system(const PwaSystem& sys) {
  json cells = json::array();
  for (const auto& c : sys.cells()) {
    json a = json::array();
    for (int r = 0; r < sys.dim(); ++r) {
      VectorXd row = c.dynamics.A.row(r).transpose();
      a.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    cells.push_back({{"name", c.name},
                     {"guard", poly_json(c.guard)},
                     {"A", a},
                     {"b", std::vector<double>(c.dynamics.b.data(),
                                               c.dynamics.b.data() + c.dynamics.b.size())}});
  }
  json doc = {{"dimension", sys.dim()}, {"initial", poly_json(sys.initial())}, {"cells", cells}};
  return doc.dump(2);
}

bool same_system(const PwaSystem& a, const PwaSystem& b) {
  auto same_poly = [](const Polyhedron& p, const Polyhedron& q) {
    if (p.size() != q.size() || p.dim() != q.dim()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& r = p.rows()[i];
      const auto& s = q.rows()[i];
      if (r.a != s.a || r.b != s.b || r.strict != s.strict) return false;
    }
    return true;
  };
  if (a.dim() != b.dim() || a.cell_count() != b.cell_count()) return false;
  if (!same_poly(a.initial(), b.initial())) return false;
  for (std::size_t i = 0; i < a.cell_count(); ++i) {
    const Cell& x = a.cell(i);
    const Cell& y = b.cell(i);
    if (x.name != y.name || !same_poly(x.guard, y.guard) || x.dynamics.A != y.dynamics.A ||
        x.dynamics.b != y.dynamics.b)
      return false;
  }
  return true;
}

}  // namespace pwacert
