#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "pwacert/report.hpp"
#include "support.hpp"

using namespace pwacert;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PWC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const AnalysisReport& quadrant_report() {
  static const AnalysisReport r = [] {
    PipelineOptions options;
    options.certificate_path = support::data_path("quadrants_reference_cert.json");
    options.grid = 11;
    options.steps = 20;
    return run_pipeline(support::data_path("quadrants.json"), options);
  }();
  return r;
}

}  // namespace

TEST_CASE("pipeline report on the quadrant fixture") {
  const AnalysisReport& r = quadrant_report();
  CHECK(r.exit_code == 0);
  CHECK_FALSE(r.error.has_value());
  CHECK(r.dimension == 2);
  CHECK(r.cells.size() == 4);
  REQUIRE(r.certificate.has_value());
  CHECK(r.certificate->accepted);
  REQUIRE(r.trace.has_value());
  CHECK(r.trace->termination == Termination::FixedPoint);
  REQUIRE(r.validation.has_value());
  CHECK(r.validation->points > 0);
  CHECK(r.validation->level_violations.empty());
  CHECK(r.validation->bound_violations.empty());
  CHECK_FALSE(r.conclusions.empty());
  REQUIRE(r.final_bounds().has_value());
  CHECK(*r.final_bounds() == r.trace->final_omega);
}

TEST_CASE("report JSON round trip and determinism") {
  const AnalysisReport& r = quadrant_report();
  const std::string text = report_to_json(r);
  const AnalysisReport back = report_from_json(text);
  CHECK(report_to_json(back) == text);

  PipelineOptions options;
  options.certificate_path = support::data_path("quadrants_reference_cert.json");
  options.grid = 11;
  options.steps = 20;
  const AnalysisReport again = run_pipeline(support::data_path("quadrants.json"), options);
  CHECK(report_to_json(without_timings(again)) == report_to_json(without_timings(r)));
  for (const StageTiming& t : without_timings(r).timings) CHECK(t.seconds == 0.0);
}

TEST_CASE("malformed input stops at the parse stage") {
  namespace fs = std::filesystem;
  for (const auto& entry : fs::directory_iterator(fs::path(PWC_TEST_DATA_DIR) / "malformed")) {
    CAPTURE(entry.path().string());
    const AnalysisReport r = run_pipeline(entry.path().string(), PipelineOptions{});
    CHECK(r.exit_code == 10);
    CHECK(r.failed_stage == std::optional<std::string>("parse"));
    CHECK(r.error.has_value());
    CHECK(run_cli("check " + entry.path().string()) == 10);
  }
  CHECK(run_pipeline("/nonexistent/system.json", PipelineOptions{}).exit_code == 10);
}

TEST_CASE("command-line exit codes") {
  CHECK(run_cli("check " + support::data_path("quadrants.json")) == 0);
  CHECK(run_cli("switches " + support::data_path("affine2.json")) == 0);
  CHECK(run_cli("no-such-command") == 1);
  CHECK(run_cli("") == 1);
  // The rounded reference certificate fails the switch (2,2) decrease check.
  CHECK(run_cli("iterate --no-simulate --cert " + support::data_path("affine2_reference_cert.json") +
                " " + support::data_path("affine2.json")) == 30);
}

TEST_CASE("plot data for a unit quadratic form") {
  const PwaSystem sys(2, support::box(-1, 1, -1, 1),
                      {{"R", Polyhedron(2, {}), AffineMap{0.5 * Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()}}});
  PqlCertificate cert;
  cert.forms.push_back({Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()});
  cert.alpha = 2.0;
  cert.beta = 2.0;
  const VectorXd omega = Eigen::Vector3d(1, 4, 2);

  const std::vector<std::string> empty = lines_of(emit_plot_data(sys, cert, omega, ReachSample{}, 3));
  REQUIRE(empty.size() == 1 + 9);
  CHECK(empty[0] == "section,x1,x2,generation,L,ratio");
  for (std::size_t i = 1; i < empty.size(); ++i) {
    const auto f = fields_of(empty[i]);
    REQUIRE(f.size() == 6);
    CHECK(f[0] == "field");
    const double x1 = std::stod(f[1]), x2 = std::stod(f[2]);
    CHECK(std::stod(f[4]) == doctest::Approx(x1 * x1 + x2 * x2).epsilon(1e-9));
    CHECK(std::stod(f[5]) == doctest::Approx(std::max(x1 * x1, x2 * x2 / 4.0)).epsilon(1e-9));
  }
  // Grid corners cover [-1, 1] x [-2, 2] with a 5 % margin.
  const auto first = fields_of(empty[1]);
  CHECK(std::stod(first[1]) == doctest::Approx(-1.1));
  CHECK(std::stod(first[2]) == doctest::Approx(-2.2));

  const ReachSample sample = simulate(sys, 3, 2);
  const std::vector<std::string> with_reach = lines_of(emit_plot_data(sys, cert, omega, sample, 3));
  CHECK(with_reach.size() == 1 + sample.size() + 9);
  CHECK(with_reach[1].rfind("reach,", 0) == 0);
}
