#include "pwlqp/report.hpp"

namespace pwlqp {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kIterationLimit: return "iteration-limit";
    case SolveStatus::kStalled: return "stalled";
    case SolveStatus::kNumericalBreakdown: return "numerical-breakdown";
  }
  return "unknown";
}

std::string SolveReport::ledger() const {
  return std::to_string(pmm_iters) + "(" + std::to_string(ssn_iters) + ")[" +
         std::to_string(factorizations) + "]{" + std::to_string(krylov_iters) + "}";
}

}  // namespace pwlqp
