#pragma once

#include <stdexcept>
#include <string>

namespace nn2c {

// Error categories map 1:1 onto CLI exit codes (see tools/nn2c.cpp --help).
enum class ErrorKind {
    Parse,             // malformed architecture document
    Validation,        // graph/layer invariant violation
    Format,            // parameter container framing/content errors
    TensorFormat,      // tensor container framing/content errors
    InfeasibleBudget,  // even the minimal plan exceeds the budget
    Deadlock,          // pipeline made no progress (FIFO sizing bug)
    Mismatch,          // cross-check between two compute routes failed
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace nn2c
