#include "pwacert/errors.hpp"

namespace pwacert {

Stage stage_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::EmptyCells:
    case ErrorKind::InvalidArgument: return Stage::Parse;
    case ErrorKind::NoCell:
    case ErrorKind::AmbiguousCell:
    case ErrorKind::AnalysisIndeterminate:
    case ErrorKind::UnboundedInitialSet: return Stage::Analysis;
    case ErrorKind::NoPqlFound:
    case ErrorKind::SynthesisFailed:
    case ErrorKind::CertificateRejected: return Stage::Synthesis;
    case ErrorKind::AlphaNonpositive:
    case ErrorKind::SelectionFailure:
    case ErrorKind::PolicyLpFailure: return Stage::Iteration;
    case ErrorKind::Validation: return Stage::Validation;
  }
  return Stage::Validation;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyCells: return "EmptyCells";
    case ErrorKind::NoCell: return "NoCell";
    case ErrorKind::AmbiguousCell: return "AmbiguousCell";
    case ErrorKind::AnalysisIndeterminate: return "AnalysisIndeterminate";
    case ErrorKind::UnboundedInitialSet: return "UnboundedInitialSet";
    case ErrorKind::NoPqlFound: return "NoPqlFound";
    case ErrorKind::SynthesisFailed: return "SynthesisFailed";
    case ErrorKind::CertificateRejected: return "CertificateRejected";
    case ErrorKind::AlphaNonpositive: return "AlphaNonpositive";
    case ErrorKind::SelectionFailure: return "SelectionFailure";
    case ErrorKind::PolicyLpFailure: return "PolicyLpFailure";
    case ErrorKind::Validation: return "ValidationFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace pwacert
