#pragma once

#include <array>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "hecg/env.hpp"

namespace hecg {

enum class Severity { Low, Medium, High, Critical };
enum class Recoverable { Yes, Partial, No };
enum class CorrectionLevel { L1, L2, L3, L4 };

const char* to_string(Severity s);
const char* to_string(Recoverable r);
const char* to_string(CorrectionLevel l);

// One row of the ten-type error matrix.
struct ErrorClass {
    ErrorType name = ErrorType::ActionExecution;
    Severity severity = Severity::Medium;
    Recoverable recoverable = Recoverable::Yes;
    bool transition_needed = true;
    std::string suggested_strategy;
};

// The full ten-row matrix, fixed at compile time.
const std::array<ErrorClass, kErrorTypeCount>& error_matrix();
const ErrorClass& matrix_row(ErrorType type);

// Machine-readable export of the matrix for docs and tests.
nlohmann::json error_matrix_to_json();

}  // namespace hecg
