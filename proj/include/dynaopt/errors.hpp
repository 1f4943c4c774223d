#pragma once

#include <stdexcept>
#include <string>

namespace dynaopt {

// Invalid user-supplied configuration: bad JSON, unknown keys, out-of-range
// values, incompatible checkpoints. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runtime failures that abort a run: I/O errors, malformed files, evaluator
// misuse, empty training data. Maps to CLI exit code 3.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dynaopt
