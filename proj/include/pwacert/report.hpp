#ifndef PWACERT_REPORT_HPP
#define PWACERT_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "pwacert/errors.hpp"
#include "pwacert/policy.hpp"
#include "pwacert/validation.hpp"

namespace pwacert {

struct PipelineOptions {
  // Unset: homogeneous forms exactly when every offset of the system is zero.
  std::optional<bool> homogeneous;
  // Load the certificate instead of synthesizing one.
  std::optional<std::string> certificate_path;
  int max_iters = 50;
  double tol = 1e-6;
  int grid = 41;
  int steps = 60;
  conic::Settings settings;
  // Last stage to run.
  Stage until = Stage::Validation;
};

bool default_homogeneous(const PwaSystem& sys);

struct CertificateSummary {
  std::string source;  // "synthesized" or the file it was read from
  bool homogeneous = false;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<CellForm> forms;
  bool accepted = false;
  std::vector<std::string> failures;

  // Forms and levels only; multipliers are not kept in reports.
  PqlCertificate certificate() const;
};

struct ValidationSummary {
  int grid = 0;
  int steps = 0;
  std::size_t points = 0;
  std::vector<Violation> level_violations;  // against alpha and beta
  std::vector<Violation> bound_violations;  // against the final bound vector
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct AnalysisReport {
  std::string system_path;
  int dimension = 0;
  std::vector<std::string> cells;

  bool switches_computed = false;
  std::vector<CellPair> sw_bar;
  std::vector<std::size_t> in_set;
  bool guards_disjoint = false;
  std::vector<double> x0_bounds;  // squared-coordinate suprema

  std::optional<CertificateSummary> certificate;
  std::optional<IterationTrace> trace;
  // Cells a trajectory can visit given the switches that survived.
  std::vector<std::size_t> reachable_cells;
  std::vector<std::string> conclusions;
  std::optional<ValidationSummary> validation;
  std::vector<StageTiming> timings;

  int exit_code = 0;
  std::optional<std::string> failed_stage;
  std::optional<std::string> error;

  // Bound vector to report: the iteration result, else (beta, ..., alpha).
  std::optional<VectorXd> final_bounds() const;
};

std::string_view stage_name(Stage stage);

// Cells reachable from In over the remaining switches and the report's
// conclusion lines for a finished trace.
struct TraceConclusions {
  std::vector<std::size_t> reachable_cells;
  std::vector<std::string> lines;
};
TraceConclusions trace_conclusions(const PwaSystem& sys, const SwitchSets& sw,
                                   const IterationTrace& tr, double alpha);

AnalysisReport run_pipeline(const std::string& system_path, const PipelineOptions& options);

std::string report_to_json(const AnalysisReport& report, int indent = 2);
AnalysisReport report_from_json(const std::string& text);
// Same report with every stage time set to zero.
AnalysisReport without_timings(AnalysisReport report);

std::string violations_to_jsonl(const std::vector<Violation>& violations);

// CSV with a reach section (sample points) and a field section (L and the
// largest template ratio x_k^2 / omega_k on a regular grid).
std::string emit_plot_data(const PwaSystem& sys, const PqlCertificate& cert, const VectorXd& omega,
                           const ReachSample& sample, int resolution);

}  // namespace pwacert

#endif  // PWACERT_REPORT_HPP
