#include <filesystem>
#include <random>

#include "doctest.h"
#include "pwacert/errors.hpp"
#include "pwacert/system_model.hpp"
#include "support.hpp"

using namespace pwacert;

namespace {

ErrorKind load_error_kind(const std::string& text) {
  try {
    load_system_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("load succeeded");
  return ErrorKind::InvalidArgument;
}

std::string load_error_message(const std::string& text) {
  try {
    load_system_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("step on the quadrant fixture") {
  const PwaSystem sys = support::quadrants();
  CHECK(sys.dim() == 2);
  CHECK(sys.cell_count() == 4);

  const StepResult r = step(sys, Eigen::Vector2d(1, 1));
  CHECK(r.cell == 0);
  CHECK(r.next[0] == doctest::Approx(-0.501).epsilon(1e-12));
  CHECK(r.next[1] == doctest::Approx(0.202).epsilon(1e-12));

  const StepResult origin = step(sys, Eigen::Vector2d(0, 0));
  CHECK(origin.cell == 0);
  CHECK(origin.next.norm() == 0.0);

  CHECK(locate(sys, Eigen::Vector2d(-1, 0.5)) == 3);
  CHECK(locate(sys, Eigen::Vector2d(-1, -0.5)) == 2);
  CHECK(locate(sys, Eigen::Vector2d(1, -0.5)) == 1);
  CHECK(locate(sys, Eigen::Vector2d(0.5, 0)) == 0);
  CHECK(locate(sys, Eigen::Vector2d(-0.5, 0)) == 3);
}

TEST_CASE("one-cell system in dimension one") {
  const PwaSystem sys = load_system_text(R"({"dimension": 1,
    "initial": {"rows": [{"a": [1], "b": 1, "strict": false}, {"a": [-1], "b": 1, "strict": false}]},
    "cells": [{"name": "R", "guard": {"rows": []}, "A": [[0.5]], "b": [0.25]}]})");
  CHECK(sys.dim() == 1);
  const StepResult r = step(sys, VectorXd::Constant(1, 2.0));
  CHECK(r.cell == 0);
  CHECK(r.next[0] == doctest::Approx(1.25));
}

TEST_CASE("locate reports missing and overlapping cells") {
  const PwaSystem gap = load_system_text(R"({"dimension": 1, "initial": {"rows": []},
    "cells": [{"name": "P", "guard": {"rows": [{"a": [-1], "b": 0, "strict": true}]}, "A": [[1]], "b": [0]}]})");
  CHECK_THROWS_AS(locate(gap, VectorXd::Constant(1, -1.0)), Error);
  try {
    locate(gap, VectorXd::Constant(1, 0.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoCell);
  }

  const PwaSystem overlap = load_system_text(R"({"dimension": 1, "initial": {"rows": []},
    "cells": [{"name": "P", "guard": {"rows": [{"a": [-1], "b": 0, "strict": false}]}, "A": [[1]], "b": [0]},
              {"name": "N", "guard": {"rows": [{"a": [1], "b": 0, "strict": false}]}, "A": [[1]], "b": [0]}]})");
  try {
    locate(overlap, VectorXd::Constant(1, 0.0));
    FAIL("expected AmbiguousCell");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AmbiguousCell);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  CHECK(load_error_kind(R"({"dimension": 2, "initial": {"rows": []},
    "cells": [{"name": "X", "guard": {"rows": [{"a": [1, 0, 0], "b": 0, "strict": false}]},
               "A": [[1, 0], [0, 1]], "b": [0, 0]}]})") == ErrorKind::DimensionMismatch);
  CHECK(load_error_kind(R"({"dimension": 2, "initial": {"rows": []},
    "cells": [{"name": "X", "guard": {"rows": []}, "A": [[1, 0], [0, 1]], "b": [0]}]})") ==
        ErrorKind::DimensionMismatch);
  CHECK(load_error_kind(R"({"dimension": 1, "initial": {"rows": []}, "cells": []})") ==
        ErrorKind::EmptyCells);
}

TEST_CASE("parse errors carry a location") {
  const std::string missing = load_error_message(R"({"dimension": 2, "initial": {"rows": []}})");
  CHECK(missing.find("cells") != std::string::npos);

  const std::string nested = load_error_message(R"({"dimension": 1, "initial": {"rows": []},
    "cells": [{"name": "X", "guard": {"rows": []}, "b": [0]}]})");
  CHECK(nested.find("/cells/0") != std::string::npos);

  const std::string truncated = load_error_message("{\"dimension\": 2,\n \"cells\": [");
  CHECK_FALSE(truncated.empty());
  CHECK(load_error_kind("{\"dimension\": 2,\n \"cells\": [") == ErrorKind::Parse);
}

TEST_CASE("every file of the malformed corpus fails at the parse stage") {
  namespace fs = std::filesystem;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(PWC_TEST_DATA_DIR) / "malformed")) {
    CAPTURE(entry.path().string());
    ++files;
    try {
      load_system_file(entry.path().string());
      FAIL("load succeeded");
    } catch (const Error& e) {
      CHECK(e.stage() == Stage::Parse);
      CHECK(static_cast<int>(e.stage()) == 10);
    }
  }
  CHECK(files >= 5);
}

TEST_CASE("serialization round trip") {
  for (const PwaSystem& sys : {support::quadrants(), support::affine2(), support::random_system(4),
                               support::random_system(5)}) {
    const std::string text = serialize_system(sys);
    const PwaSystem back = load_system_text(text);
    CHECK(same_system(sys, back));
    CHECK(serialize_system(back) == text);
  }
  CHECK_FALSE(same_system(support::quadrants(), support::affine2()));
}

TEST_CASE("sampled points of the fixtures lie in exactly one cell") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (const PwaSystem& sys : {support::quadrants(), support::affine2()}) {
    for (int i = 0; i < 2000; ++i) {
      const Eigen::Vector2d x(u(rng), u(rng));
      std::size_t hits = 0;
      for (const Cell& c : sys.cells()) hits += c.guard.contains(x) ? 1 : 0;
      CHECK(hits == 1);
      CHECK_NOTHROW(locate(sys, x));
    }
  }
}
