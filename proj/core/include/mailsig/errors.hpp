#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mailsig {

/// Invalid or inconsistent configuration (bad paths, empty lexicon, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input data that cannot be processed.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pipeline stage was invoked before the stage producing its inputs.
struct MissingArtifactError : std::runtime_error {
    std::string stage_required;

    MissingArtifactError(std::string stage, const std::string& message)
        : std::runtime_error(message), stage_required(std::move(stage)) {}
};

}  // namespace mailsig
