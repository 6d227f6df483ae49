// pwa-certify: command-line front end over the C interface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pwacert/pwacert.h"

namespace {

struct Flags {
  std::string system;
  std::string out;
  std::string cert;
  std::string report;
  bool json = false;
  std::optional<bool> homogeneous;
  bool simulate = true;
  int resolution = 101;
};

struct StringDeleter {
  void operator()(char* s) const { pwc_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct SystemDeleter {
  void operator()(pwc_system* s) const { pwc_system_free(s); }
};
struct CertDeleter {
  void operator()(pwc_certificate* c) const { pwc_certificate_free(c); }
};

int fail(int code) {
  std::cerr << "pwa-certify: " << pwc_last_error() << "\n";
  return code;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path);
  if (!in) return false;
  std::stringstream buf;
  buf << in.rdbuf();
  text = buf.str();
  return true;
}

// Writes to --out when given, stdout otherwise.
int emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return 0;
  }
  std::ofstream out(f.out);
  if (!out) {
    std::cerr << "pwa-certify: cannot write " << f.out << "\n";
    return PWC_ERR_USAGE;
  }
  out << text;
  return 0;
}

std::unique_ptr<pwc_system, SystemDeleter> load(const Flags& f, int& code) {
  pwc_system* sys = nullptr;
  code = pwc_system_load(f.system.c_str(), &sys);
  return std::unique_ptr<pwc_system, SystemDeleter>(sys);
}

int run_check(const Flags& f, const pwc_options&) {
  int code = 0;
  auto sys = load(f, code);
  if (code) return fail(code);
  if (f.json) {
    char* text = nullptr;
    if (int rc = pwc_system_to_json(sys.get(), &text)) return fail(rc);
    return emit(f, OwnedString(text).get());
  }
  std::cout << f.system << ": dimension " << pwc_system_dimension(sys.get()) << ", "
            << pwc_system_cell_count(sys.get()) << " cells\n";
  return 0;
}

int run_switches(const Flags& f, const pwc_options& o) {
  int code = 0;
  auto sys = load(f, code);
  if (code) return fail(code);
  char* text = nullptr;
  if (int rc = pwc_switches(sys.get(), &o, &text)) return fail(rc);
  return emit(f, OwnedString(text).get());
}

int run_synthesize(const Flags& f, const pwc_options& o) {
  int code = 0;
  auto sys = load(f, code);
  if (code) return fail(code);
  pwc_certificate* raw = nullptr;
  if (int rc = pwc_synthesize(sys.get(), &o, &raw)) return fail(rc);
  std::unique_ptr<pwc_certificate, CertDeleter> cert(raw);
  char* checks = nullptr;
  const int verified = pwc_verify(sys.get(), cert.get(), &o, &checks);
  OwnedString checks_text(checks);
  char* text = nullptr;
  if (int rc = pwc_certificate_to_json(sys.get(), cert.get(), &text)) return fail(rc);
  OwnedString cert_text(text);
  double alpha = 0, beta = 0;
  pwc_certificate_levels(cert.get(), &alpha, &beta);
  if (!f.out.empty() || f.json) {
    if (int rc = emit(f, cert_text.get())) return rc;
  }
  if (!f.json) std::cout << "alpha " << alpha << "\nbeta " << beta << "\n";
  if (verified) return fail(verified);
  return 0;
}

int summarize(const std::string& report_text) {
  const auto j = nlohmann::json::parse(report_text);
  if (j.contains("certificate"))
    std::cout << "alpha " << j["certificate"]["alpha"] << "  beta " << j["certificate"]["beta"]
              << "\n";
  if (j.contains("iteration")) {
    const auto& it = j["iteration"];
    std::cout << "iterations " << it["iterations"].size() << " (" << it["termination"].get<std::string>()
              << ")\nfinal bounds " << it["final"].dump() << "\n";
  }
  for (const auto& c : j["conclusions"]) std::cout << c.get<std::string>() << "\n";
  if (j.contains("validation"))
    std::cout << "simulated points " << j["validation"]["points"] << ", violations "
              << j["validation"]["level_violations"].size() + j["validation"]["bound_violations"].size()
              << "\n";
  return 0;
}

int run_iterate(const Flags& f, pwc_options o) {
  if (!f.simulate) o.last_stage = PWC_ERR_ITERATION;
  char* text = nullptr;
  const int code =
      pwc_run_pipeline(f.system.c_str(), f.cert.empty() ? nullptr : f.cert.c_str(), &o, &text);
  if (!text) return fail(code);
  OwnedString report(text);
  if (f.json || !f.out.empty()) {
    if (int rc = emit(f, report.get())) return rc;
  }
  if (!f.json) summarize(report.get());
  if (code) return fail(code);
  return 0;
}

int run_simulate(const Flags& f, const pwc_options& o) {
  std::string report;
  if (!read_file(f.report, report)) {
    std::cerr << "pwa-certify: cannot read " << f.report << "\n";
    return PWC_ERR_USAGE;
  }
  char* text = nullptr;
  const int code = pwc_simulate_check(report.c_str(), &o, &text);
  if (text) std::cout << OwnedString(text).get();
  if (code) return fail(code);
  return 0;
}

int run_plot(const Flags& f, pwc_options o) {
  std::string report;
  if (!f.report.empty()) {
    if (!read_file(f.report, report)) {
      std::cerr << "pwa-certify: cannot read " << f.report << "\n";
      return PWC_ERR_USAGE;
    }
  } else {
    o.last_stage = PWC_ERR_ITERATION;
    char* text = nullptr;
    const int code =
        pwc_run_pipeline(f.system.c_str(), f.cert.empty() ? nullptr : f.cert.c_str(), &o, &text);
    OwnedString owned(text);
    if (code) return fail(code);
    report = owned.get();
  }
  char* csv = nullptr;
  if (int rc = pwc_plot(report.c_str(), &o, f.resolution, &csv)) return fail(rc);
  return emit(f, OwnedString(csv).get());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify bounds on the reachable values of piecewise affine systems"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  pwc_options o;
  pwc_options_init(&o);

  app.add_option("--max-iters", o.max_iters, "Policy iteration limit")->capture_default_str();
  app.add_option("--tol", o.tol, "Fixed-point tolerance")->capture_default_str();
  app.add_option("--grid", o.grid, "Simulation seeds per axis")->capture_default_str();
  app.add_option("--steps", o.steps, "Simulation horizon")->capture_default_str();
  app.add_option("--solver-tol", o.solver_tol,
                 "Conic solver tolerance (env PWA_CERTIFY_SOLVER_TOL)")
      ->capture_default_str();
  app.add_option("--out", f.out, "Write the main output to this file");
  app.add_flag("--json", f.json, "Print JSON instead of a summary");
  app.add_flag("--homogeneous,!--no-homogeneous", f.homogeneous,
               "Force homogeneous (or inhomogeneous) forms; default follows the system offsets");

  auto* check = app.add_subcommand("check", "Parse and validate a system file");
  check->add_option("system", f.system, "System JSON")->required();

  auto* switches = app.add_subcommand("switches", "Feasible switches and initial cells");
  switches->add_option("system", f.system, "System JSON")->required();

  auto* synth = app.add_subcommand("synthesize", "Compute and verify a quadratic certificate");
  synth->add_option("system", f.system, "System JSON")->required();

  auto* iter = app.add_subcommand("iterate", "Run the full analysis and print the report");
  iter->add_option("system", f.system, "System JSON")->required();
  iter->add_option("--cert", f.cert, "Use this certificate instead of synthesizing");
  iter->add_flag("!--no-simulate", f.simulate, "Skip the simulation check");

  auto* sim = app.add_subcommand("simulate", "Check simulated trajectories against a report");
  sim->add_option("--check", f.report, "Report JSON")->required();

  auto* plot = app.add_subcommand("plot", "Emit CSV plot data");
  plot->add_option("system", f.system, "System JSON");
  plot->add_option("--cert", f.cert, "Use this certificate instead of synthesizing");
  plot->add_option("--report", f.report, "Plot an existing report");
  plot->add_option("--resolution", f.resolution, "Field grid nodes per axis")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : PWC_ERR_USAGE;
  }
  if (f.homogeneous) o.homogeneous = *f.homogeneous ? 1 : 0;

  if (*check) return run_check(f, o);
  if (*switches) return run_switches(f, o);
  if (*synth) return run_synthesize(f, o);
  if (*iter) return run_iterate(f, o);
  if (*sim) return run_simulate(f, o);
  if (f.system.empty() && f.report.empty()) {
    std::cerr << "pwa-certify: plot needs a system file or --report\n";
    return PWC_ERR_USAGE;
  }
  return run_plot(f, o);
}
