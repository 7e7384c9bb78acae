#include "stable_tmle/scoring.hpp"

namespace stable_tmle {

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged:
      return "converged";
    case FitStatus::kMaxIterations:
      return "max_iterations";
    case FitStatus::kStalled:
      return "stalled";
    case FitStatus::kSingularInformation:
      return "singular_information";
  }
  return "unknown";
}

}  // namespace stable_tmle
