#ifndef PWACERT_PQL_HPP
#define PWACERT_PQL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwacert/conic.hpp"
#include "pwacert/lifting.hpp"
#include "pwacert/polyhedral.hpp"
#include "pwacert/system_model.hpp"

namespace pwacert {

// x -> x' P x + 2 q' x on one cell.
struct CellForm {
  MatrixXd P;
  VectorXd q;

  double operator()(const VectorXd& x) const { return x.dot(P * x) + 2.0 * q.dot(x); }
  MatrixXd lifted() const;
};

// Entrywise-nonnegative part plus semidefinite part.
struct Multiplier {
  MatrixXd nonneg;
  MatrixXd psd;

  MatrixXd sum() const { return nonneg + psd; }
};

struct PqlCertificate {
  std::vector<CellForm> forms;
  double alpha = 0.0;
  double beta = 0.0;
  bool homogeneous = false;
  std::map<std::size_t, Multiplier> cell_multipliers;
  std::map<CellPair, Multiplier> switch_multipliers;
  std::map<std::size_t, Multiplier> initial_multipliers;

  bool has_multipliers() const {
    return !cell_multipliers.empty() || !switch_multipliers.empty() || !initial_multipliers.empty();
  }
};

struct SynthesisOptions {
  bool homogeneous = false;
  double alpha_weight = 1.0;
  double beta_weight = 1.0;
  // Weight of sum(nonneg entries) + trace(psd part) over all multipliers.
  double multiplier_weight = 0.0;
  conic::Settings settings;
};

PqlCertificate synthesize(const PwaSystem& sys, const SwitchSets& sw, const LiftedSystem& lifted,
                          const SynthesisOptions& options);

// Constraint matrices before the multiplier term is subtracted.
MatrixXd level_matrix(const PqlCertificate& cert, std::size_t i, int dim);
MatrixXd decrease_matrix(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p);
MatrixXd initial_matrix(const PqlCertificate& cert, std::size_t i, int dim);

// Full residuals using the stored multipliers.
MatrixXd level_residual(const PqlCertificate& cert, const LiftedSystem& lifted, std::size_t i);
MatrixXd decrease_residual(const PqlCertificate& cert, const LiftedSystem& lifted, CellPair p);
MatrixXd initial_residual(const PqlCertificate& cert, const LiftedSystem& lifted, std::size_t i);

struct CheckResult {
  std::string name;
  bool passed = false;
  // Fatal checks reject the certificate; the others are diagnostics.
  bool fatal = true;
  double value = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool accepted = false;
  std::optional<double> initial_level_sup;

  std::vector<std::string> failures() const;
};

struct VerifyOptions {
  double psd_tol = 1e-6;           // relative to max(1, largest entry)
  double norm_tol = 1e-6;
  double level_rel_tol = 1e-4;
  int samples_per_axis = 201;
  conic::Settings settings;
};

// Runs every check and never throws on a failed check.
VerificationReport check_certificate(const PqlCertificate& cert, const PwaSystem& sys,
                                     const SwitchSets& sw, const LiftedSystem& lifted,
                                     const VerifyOptions& options = {});
// As check_certificate but throws CertificateRejected on failure.
VerificationReport verify_certificate(const PqlCertificate& cert, const PwaSystem& sys,
                                      const SwitchSets& sw, const LiftedSystem& lifted,
                                      const VerifyOptions& options = {});

// Searches multipliers Y >= 0 (entrywise) and Z psd maximizing the smallest
// eigenvalue of Q - E'(Y + Z)E, capped at 1. Returns nullopt when the solver
// does not reach a verdict.
struct MarginResult {
  double margin;
  Multiplier multiplier;
};
std::optional<MarginResult> best_margin(const MatrixXd& Q, const MatrixXd& E,
                                        const conic::Settings& settings);

double evaluate_L(const PqlCertificate& cert, const PwaSystem& sys, const VectorXd& x);

// Level shift: a certificate with negative alpha becomes (0, beta - alpha).
PqlCertificate shift_level(const PqlCertificate& cert);

std::string certificate_to_json(const PqlCertificate& cert, const PwaSystem& sys);
PqlCertificate certificate_from_json(const std::string& text, const PwaSystem& sys);

}  // namespace pwacert

#endif  // PWACERT_PQL_HPP
