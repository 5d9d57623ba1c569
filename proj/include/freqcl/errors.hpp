#pragma once

#include <stdexcept>
#include <string>

namespace freqcl {

// Exit-code mapping in the CLI: ConfigError -> 2, FormatError/DataError -> 3,
// NumericError -> 4.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedCodecError : FormatError {
    using FormatError::FormatError;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace freqcl
