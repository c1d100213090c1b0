#include "gtrans/common.hpp"

namespace gtrans {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownGraphon: return "unknown-graphon";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::TooFewNodes: return "too-few-nodes";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::DegenerateColumn: return "degenerate-column";
    case ErrorKind::UndefinedAuc: return "undefined-auc";
    case ErrorKind::Input: return "input";
    case ErrorKind::Usage: return "usage";
  }
  return "internal";
}

}  // namespace gtrans
