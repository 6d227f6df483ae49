#include "pwacert/pwacert.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "json.hpp"
#include "pwacert/report.hpp"

struct pwc_system {
  pwacert::PwaSystem sys;
};

struct pwc_certificate {
  pwacert::PqlCertificate cert;
};

namespace {

thread_local std::string last_error;

void set_error(std::string message) { last_error = std::move(message); }

char* copy_out(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

template <class Body>
int guarded(Body&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const pwacert::Error& e) {
    set_error(e.what());
    return static_cast<int>(e.stage());
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return PWC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PWC_ERR_INTERNAL;
  }
}

int usage(const char* message) {
  set_error(message);
  return PWC_ERR_USAGE;
}

pwc_options resolve(const pwc_options* options) {
  pwc_options out;
  if (options) {
    out = *options;
  } else {
    pwc_options_init(&out);
  }
  return out;
}

pwacert::conic::Settings settings_of(const pwc_options& o) {
  pwacert::conic::Settings s;
  if (o.solver_tol > 0) {
    s.feastol = o.solver_tol;
    s.abstol = o.solver_tol;
    s.reltol = o.solver_tol;
  }
  return s;
}

pwacert::PipelineOptions pipeline_of(const pwc_options& o) {
  pwacert::PipelineOptions p;
  if (o.homogeneous >= 0) p.homogeneous = o.homogeneous != 0;
  p.max_iters = o.max_iters;
  p.tol = o.tol;
  p.grid = o.grid;
  p.steps = o.steps;
  p.settings = settings_of(o);
  switch (o.last_stage) {
    case PWC_ERR_PARSE: p.until = pwacert::Stage::Parse; break;
    case PWC_ERR_ANALYSIS: p.until = pwacert::Stage::Analysis; break;
    case PWC_ERR_SYNTHESIS: p.until = pwacert::Stage::Synthesis; break;
    case PWC_ERR_ITERATION: p.until = pwacert::Stage::Iteration; break;
    default: p.until = pwacert::Stage::Validation; break;
  }
  return p;
}

}  // namespace

extern "C" {

void pwc_options_init(pwc_options* options) {
  if (!options) return;
  options->homogeneous = -1;
  options->max_iters = 50;
  options->tol = 1e-6;
  options->grid = 41;
  options->steps = 60;
  options->solver_tol = 1e-7;
  options->last_stage = PWC_ERR_VALIDATION;
  if (const char* env = std::getenv("PWA_CERTIFY_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0) options->solver_tol = v;
  }
}

const char* pwc_last_error(void) { return last_error.c_str(); }

void pwc_string_free(char* text) { std::free(text); }

int pwc_system_load(const char* path, pwc_system** out) {
  if (!path || !out) return usage("pwc_system_load: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pwc_system{pwacert::load_system_file(path)};
    return PWC_OK;
  });
}

void pwc_system_free(pwc_system* sys) { delete sys; }

int pwc_system_dimension(const pwc_system* sys) { return sys ? sys->sys.dim() : 0; }

int pwc_system_cell_count(const pwc_system* sys) {
  return sys ? static_cast<int>(sys->sys.cell_count()) : 0;
}

int pwc_system_to_json(const pwc_system* sys, char** out) {
  if (!sys || !out) return usage("pwc_system_to_json: null argument");
  return guarded([&] {
    *out = copy_out(pwacert::serialize_system(sys->sys));
    return PWC_OK;
  });
}

int pwc_switches(const pwc_system* sys, const pwc_options* options, char** out) {
  if (!sys || !out) return usage("pwc_switches: null argument");
  return guarded([&] {
    const pwc_options o = resolve(options);
    const auto settings = settings_of(o);
    const pwacert::SwitchSets sw = pwacert::compute_switch_sets(sys->sys, settings);
    const auto disjoint = pwacert::guards_disjoint(sys->sys, settings);
    nlohmann::json j;
    j["sw_bar"] = nlohmann::json::array();
    for (auto p : sw.sw_bar) j["sw_bar"].push_back({p.from + 1, p.to + 1});
    j["in"] = nlohmann::json::array();
    for (auto i : sw.in_set) j["in"].push_back(i + 1);
    bool all = true;
    for (const auto& p : disjoint) all = all && p.disjoint;
    j["disjoint"] = all;
    *out = copy_out(j.dump());
    return PWC_OK;
  });
}

int pwc_synthesize(const pwc_system* sys, const pwc_options* options, pwc_certificate** out) {
  if (!sys || !out) return usage("pwc_synthesize: null argument");
  *out = nullptr;
  return guarded([&] {
    const pwc_options o = resolve(options);
    pwacert::SynthesisOptions synth;
    synth.homogeneous =
        o.homogeneous >= 0 ? o.homogeneous != 0 : pwacert::default_homogeneous(sys->sys);
    synth.settings = settings_of(o);
    const auto sw = pwacert::compute_switch_sets(sys->sys, synth.settings);
    const auto lifted = pwacert::build_lifted(sys->sys, sw);
    *out = new pwc_certificate{pwacert::synthesize(sys->sys, sw, lifted, synth)};
    return PWC_OK;
  });
}

int pwc_certificate_from_json(const pwc_system* sys, const char* text, pwc_certificate** out) {
  if (!sys || !text || !out) return usage("pwc_certificate_from_json: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pwc_certificate{pwacert::certificate_from_json(text, sys->sys)};
    return PWC_OK;
  });
}

int pwc_certificate_to_json(const pwc_system* sys, const pwc_certificate* cert, char** out) {
  if (!sys || !cert || !out) return usage("pwc_certificate_to_json: null argument");
  return guarded([&] {
    *out = copy_out(pwacert::certificate_to_json(cert->cert, sys->sys));
    return PWC_OK;
  });
}

int pwc_certificate_levels(const pwc_certificate* cert, double* alpha, double* beta) {
  if (!cert) return usage("pwc_certificate_levels: null certificate");
  if (alpha) *alpha = cert->cert.alpha;
  if (beta) *beta = cert->cert.beta;
  return PWC_OK;
}

void pwc_certificate_free(pwc_certificate* cert) { delete cert; }

int pwc_verify(const pwc_system* sys, const pwc_certificate* cert, const pwc_options* options,
               char** out) {
  if (!sys || !cert || !out) return usage("pwc_verify: null argument");
  return guarded([&] {
    const pwc_options o = resolve(options);
    pwacert::VerifyOptions verify;
    verify.settings = settings_of(o);
    const auto sw = pwacert::compute_switch_sets(sys->sys, verify.settings);
    const auto lifted = pwacert::build_lifted(sys->sys, sw);
    const auto report = pwacert::check_certificate(cert->cert, sys->sys, sw, lifted, verify);
    nlohmann::json j;
    j["accepted"] = report.accepted;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : report.checks)
      j["checks"].push_back({{"name", c.name},
                             {"passed", c.passed},
                             {"fatal", c.fatal},
                             {"value", c.value},
                             {"detail", c.detail}});
    *out = copy_out(j.dump(2));
    if (!report.accepted) {
      std::string msg = "certificate rejected:";
      for (const auto& f : report.failures()) msg += "\n  " + f;
      set_error(msg);
      return PWC_ERR_SYNTHESIS;
    }
    return PWC_OK;
  });
}

int pwc_run_pipeline(const char* system_path, const char* cert_path, const pwc_options* options,
                     char** report_json) {
  if (!system_path || !report_json) return usage("pwc_run_pipeline: null argument");
  *report_json = nullptr;
  return guarded([&] {
    pwacert::PipelineOptions p = pipeline_of(resolve(options));
    if (cert_path) p.certificate_path = cert_path;
    const pwacert::AnalysisReport report = pwacert::run_pipeline(system_path, p);
    *report_json = copy_out(pwacert::report_to_json(report));
    if (report.error) set_error(*report.error);
    return report.exit_code;
  });
}

int pwc_simulate_check(const char* report_json, const pwc_options* options, char** violations) {
  if (!report_json || !violations) return usage("pwc_simulate_check: null argument");
  *violations = nullptr;
  return guarded([&] {
    const pwc_options o = resolve(options);
    const pwacert::AnalysisReport report = pwacert::report_from_json(report_json);
    if (!report.certificate)
      throw pwacert::Error(pwacert::ErrorKind::Parse, "report carries no certificate");
    const pwacert::PwaSystem sys = pwacert::load_system_file(report.system_path);
    const pwacert::PqlCertificate cert = report.certificate->certificate();
    const pwacert::ReachSample sample = pwacert::simulate(sys, o.grid, o.steps);
    auto found = pwacert::check_level_bounds(sample, sys, cert);
    auto against = pwacert::check_membership(sample, sys, cert, *report.final_bounds());
    found.insert(found.end(), against.begin(), against.end());
    *violations = copy_out(pwacert::violations_to_jsonl(found));
    if (!found.empty()) {
      set_error(std::to_string(found.size()) + " simulated points violate the reported bounds");
      return PWC_ERR_VALIDATION;
    }
    return PWC_OK;
  });
}

int pwc_plot(const char* report_json, const pwc_options* options, int resolution, char** csv) {
  if (!report_json || !csv) return usage("pwc_plot: null argument");
  *csv = nullptr;
  return guarded([&] {
    const pwc_options o = resolve(options);
    const pwacert::AnalysisReport report = pwacert::report_from_json(report_json);
    if (!report.certificate)
      throw pwacert::Error(pwacert::ErrorKind::Parse, "report carries no certificate");
    const pwacert::PwaSystem sys = pwacert::load_system_file(report.system_path);
    const pwacert::ReachSample sample = pwacert::simulate(sys, o.grid, o.steps);
    *csv = copy_out(pwacert::emit_plot_data(sys, report.certificate->certificate(),
                                            *report.final_bounds(), sample, resolution));
    return PWC_OK;
  });
}

}  // extern "C"
