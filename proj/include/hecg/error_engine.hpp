#pragma once

#include <optional>

#include "hecg/env.hpp"
#include "hecg/error_matrix.hpp"
#include "hecg/history.hpp"

namespace hecg {

struct ErrorValue {
    double value = 0.0;  // in [0,1]
};

class NoFailurePresent : public EngineError {
public:
    NoFailurePresent() : EngineError("classify called without a failure") {}
};

// Normalized predicate mismatch: unsatisfied expected predicates / expected.
// Zero when the expected set is empty.
ErrorValue compute_error(const WorldState& observed, const PredicateSet& expected);

// Deterministic decision order:
//   1. parse failures -> Script-Parsing / Action-Name-Mismatch
//   2. hardware halt flag -> Hardware-Fault
//   3. prior unrecovered failure in history -> Cascading-Execution-Failure
//   4. injected/diagnosed type from the environment message
//   5. otherwise Action-Execution-Error
// Fields come verbatim from the matrix row.
ErrorClass classify(const StepOutcome& outcome,
                    const std::optional<ParseIssue>& parse_error,
                    const EpisodeHistory& history);

// Maps a classified failure to the correction level to dispatch.
CorrectionLevel level_for(const ErrorClass& cls, ErrorValue error,
                          const TaskNode& node, const TaskGraph& graph,
                          const EpisodeHistory& history);

}  // namespace hecg
