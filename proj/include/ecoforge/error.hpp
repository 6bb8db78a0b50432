#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecoforge {

// One code per failure mode across all modules. The service maps each code to
// exactly one HTTP status (see service.cpp).
enum class ErrorCode {
    Syntax,
    Schema,
    Validation,
    UnknownInteraction,
    MissingSign,
    EndpointKindMismatch,
    EmptyQuery,
    UnknownTaxon,
    BackendUnavailable,
    UnsupportedUnit,
    UnresolvedProperties,
    UnsupportedConstruct,
    CapacityExceeded,
    IllegalTransition,
    InvariantBreach,
    NotFound,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string subject = {})
        : std::runtime_error(std::move(message)), code_(code), subject_(std::move(subject))
    {
    }

    ErrorCode code() const noexcept { return code_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    ErrorCode code_;
    std::string subject_;
};

} // namespace ecoforge
