#include "hecg/error_matrix.hpp"

#include <nlohmann/json.hpp>

namespace hecg {

const char* to_string(Severity s) {
    switch (s) {
        case Severity::Low: return "Low";
        case Severity::Medium: return "Medium";
        case Severity::High: return "High";
        case Severity::Critical: return "Critical";
    }
    return "Medium";
}

const char* to_string(Recoverable r) {
    switch (r) {
        case Recoverable::Yes: return "Yes";
        case Recoverable::Partial: return "Partially Yes";
        case Recoverable::No: return "No";
    }
    return "Yes";
}

const char* to_string(CorrectionLevel l) {
    switch (l) {
        case CorrectionLevel::L1: return "L1";
        case CorrectionLevel::L2: return "L2";
        case CorrectionLevel::L3: return "L3";
        case CorrectionLevel::L4: return "L4";
    }
    return "L1";
}

const std::array<ErrorClass, kErrorTypeCount>& error_matrix() {
    static const std::array<ErrorClass, kErrorTypeCount> rows = {{
        {ErrorType::ActionNameMismatch, Severity::High, Recoverable::Yes, true,
         "<walk/walktowards>, <lookat>"},
        {ErrorType::ScriptParsing, Severity::High, Recoverable::No, false,
         "[putin] <obj1> <obj2>"},
        {ErrorType::ActionExecution, Severity::Medium, Recoverable::Partial, true,
         "[switchon] <microwave>"},
        {ErrorType::CascadingExecution, Severity::Low, Recoverable::No, true,
         "[open] <fridge> [putin] <bananas> <fridge>"},
        {ErrorType::SensorFailure, Severity::Medium, Recoverable::Partial, true,
         "Reinitialize sensor pipeline; use redundant sensor data for fusion."},
        {ErrorType::CollisionDetected, Severity::High, Recoverable::Yes, true,
         "Drop Action"},
        {ErrorType::Timeout, Severity::Medium, Recoverable::Partial, true,
         "Retry Action"},
        {ErrorType::HardwareFault, Severity::Critical, Recoverable::No, false,
         "Emergency stop; notify human operator."},
        {ErrorType::PerceptionMismatch, Severity::Medium, Recoverable::Yes, true,
         "[close] <fridge> [open] <fridge>"},
        {ErrorType::AgentPositioning, Severity::Medium, Recoverable::Yes, true,
         "<walk> kitchen, <lookat> <kitchentable>"},
    }};
    return rows;
}

const ErrorClass& matrix_row(ErrorType type) {
    for (const auto& row : error_matrix())
        if (row.name == type) return row;
    throw EngineError("no matrix row for error type");
}

nlohmann::json error_matrix_to_json() {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : error_matrix())
        out.push_back({{"type", to_string(row.name)},
                       {"severity", to_string(row.severity)},
                       {"recoverable", to_string(row.recoverable)},
                       {"transition_needed", row.transition_needed},
                       {"correction_strategy", row.suggested_strategy}});
    return out;
}

}  // namespace hecg
