#include <cstdlib>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "pwacert/pwacert.h"
#include "support.hpp"

namespace {

std::string take(char* text) {
  REQUIRE(text != nullptr);
  std::string out(text);
  pwc_string_free(text);
  return out;
}

pwc_options defaults() {
  pwc_options o;
  pwc_options_init(&o);
  return o;
}

}  // namespace

TEST_CASE("C API: option defaults and environment override") {
  unsetenv("PWA_CERTIFY_SOLVER_TOL");
  pwc_options o = defaults();
  CHECK(o.homogeneous == -1);
  CHECK(o.max_iters == 50);
  CHECK(o.tol == 1e-6);
  CHECK(o.grid == 41);
  CHECK(o.steps == 60);
  CHECK(o.solver_tol == 1e-7);
  CHECK(o.last_stage == PWC_ERR_VALIDATION);

  setenv("PWA_CERTIFY_SOLVER_TOL", "1e-8", 1);
  CHECK(defaults().solver_tol == 1e-8);
  unsetenv("PWA_CERTIFY_SOLVER_TOL");
}

TEST_CASE("C API: system handles") {
  pwc_system* sys = nullptr;
  REQUIRE(pwc_system_load(support::data_path("quadrants.json").c_str(), &sys) == PWC_OK);
  CHECK(pwc_system_dimension(sys) == 2);
  CHECK(pwc_system_cell_count(sys) == 4);

  char* text = nullptr;
  REQUIRE(pwc_system_to_json(sys, &text) == PWC_OK);
  const std::string json_text = take(text);
  CHECK(pwacert::same_system(pwacert::load_system_text(json_text), support::quadrants()));

  const pwc_options o = defaults();
  REQUIRE(pwc_switches(sys, &o, &text) == PWC_OK);
  const auto sw = nlohmann::json::parse(take(text));
  CHECK(sw["sw_bar"].size() == 9);
  CHECK(sw["in"] == nlohmann::json::array({1, 2, 3, 4}));
  CHECK(sw["disjoint"] == true);
  pwc_system_free(sys);

  pwc_system* bad = nullptr;
  CHECK(pwc_system_load("/nonexistent.json", &bad) == PWC_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(std::string(pwc_last_error()).size() > 0);
}

TEST_CASE("C API: certificates") {
  pwc_system* sys = nullptr;
  REQUIRE(pwc_system_load(support::data_path("quadrants.json").c_str(), &sys) == PWC_OK);
  const pwc_options o = defaults();

  const std::string reference = support::read_text(support::data_path("quadrants_reference_cert.json"));
  pwc_certificate* cert = nullptr;
  REQUIRE(pwc_certificate_from_json(sys, reference.c_str(), &cert) == PWC_OK);
  double alpha = 0, beta = 0;
  CHECK(pwc_certificate_levels(cert, &alpha, &beta) == PWC_OK);
  CHECK(alpha == 2.0);
  CHECK(beta == 2.0);
  char* checks = nullptr;
  CHECK(pwc_verify(sys, cert, &o, &checks) == PWC_OK);
  const auto verdict = nlohmann::json::parse(take(checks));
  CHECK(verdict["accepted"] == true);
  CHECK(verdict["checks"].is_array());
  CHECK_FALSE(verdict["checks"].empty());
  pwc_certificate_free(cert);

  REQUIRE(pwc_synthesize(sys, &o, &cert) == PWC_OK);
  pwc_certificate_levels(cert, &alpha, &beta);
  CHECK(alpha == doctest::Approx(2.0).epsilon(0.025));
  char* text = nullptr;
  REQUIRE(pwc_certificate_to_json(sys, cert, &text) == PWC_OK);
  CHECK(nlohmann::json::parse(take(text))["cells"].size() == 4);
  pwc_certificate_free(cert);

  CHECK(pwc_certificate_from_json(sys, "{", &cert) != PWC_OK);
  pwc_system_free(sys);
}

TEST_CASE("C API: pipeline, simulation and plot") {
  pwc_options o = defaults();
  o.grid = 11;
  o.steps = 20;
  const std::string cert = support::data_path("quadrants_reference_cert.json");
  char* text = nullptr;
  REQUIRE(pwc_run_pipeline(support::data_path("quadrants.json").c_str(), cert.c_str(), &o, &text) ==
          PWC_OK);
  const std::string report = take(text);
  CHECK(nlohmann::json::parse(report)["status"]["exit_code"] == 0);

  char* violations = nullptr;
  CHECK(pwc_simulate_check(report.c_str(), &o, &violations) == PWC_OK);
  if (violations) CHECK(take(violations).empty());

  char* csv = nullptr;
  REQUIRE(pwc_plot(report.c_str(), &o, 5, &csv) == PWC_OK);
  CHECK(take(csv).rfind("section,", 0) == 0);

  o.last_stage = PWC_ERR_ANALYSIS;
  REQUIRE(pwc_run_pipeline(support::data_path("affine2.json").c_str(), nullptr, &o, &text) == PWC_OK);
  const auto partial = nlohmann::json::parse(take(text));
  CHECK_FALSE(partial.contains("certificate"));

  const std::string malformed = std::string(PWC_TEST_DATA_DIR) + "/malformed/truncated.json";
  CHECK(pwc_run_pipeline(malformed.c_str(), nullptr, &o, &text) == PWC_ERR_PARSE);
  if (text) CHECK(nlohmann::json::parse(take(text))["status"]["exit_code"] == 10);
}
