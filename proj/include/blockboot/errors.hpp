#pragma once

#include <stdexcept>
#include <string>

namespace blockboot {

// Every library error derives from std::invalid_argument (bad inputs) or
// std::runtime_error (resource limits), so callers can catch coarsely.

struct InvalidLengthError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonstationaryParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidCoefficientError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InsufficientSampleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidPartitionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidCdfError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace blockboot
