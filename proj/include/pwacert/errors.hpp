#ifndef PWACERT_ERRORS_HPP
#define PWACERT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace pwacert {

enum class ErrorKind {
  Parse,
  DimensionMismatch,
  EmptyCells,
  NoCell,
  AmbiguousCell,
  AnalysisIndeterminate,
  UnboundedInitialSet,
  NoPqlFound,
  SynthesisFailed,
  CertificateRejected,
  AlphaNonpositive,
  SelectionFailure,
  PolicyLpFailure,
  Validation,
  InvalidArgument,
};

// Pipeline stage an error belongs to; the numeric value is the process exit
// code used by the command-line tool.
enum class Stage : int {
  Parse = 10,
  Analysis = 20,
  Synthesis = 30,
  Iteration = 40,
  Validation = 50,
};

Stage stage_of(ErrorKind kind);
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  Stage stage() const { return stage_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace pwacert

#endif  // PWACERT_ERRORS_HPP
