#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hecg {

// Base for all engine-level failures. In-band execution failures (faults,
// precondition misses) are data, not exceptions; see StepOutcome.
class EngineError : public std::runtime_error {
public:
    explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

// A ground predicate in canonical text form, e.g. "open(fridge)",
// "inside(bananas,fridge)", "agent_in(kitchen)". Kept as a string so
// predicate sets are plain token sets for overlap scoring.
using Predicate = std::string;
using PredicateSet = std::set<Predicate>;

// One parsed script line: "[verb] <arg> (id)? (<arg2> (id)?)?".
struct ActionScript {
    std::string verb;
    std::vector<std::string> args;  // 1..2 object/room tokens
    std::string raw;

    bool operator==(const ActionScript& o) const {
        return verb == o.verb && args == o.args;
    }
    std::string text() const;  // canonical "[verb] <a> <b>" form
};

}  // namespace hecg
