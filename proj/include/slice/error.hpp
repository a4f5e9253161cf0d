#pragma once

#include <stdexcept>
#include <string>

namespace slice {

// Domain-level failure (bad file, invalid layout, missing descriptor, ...).
// Precondition violations on in-memory arguments throw std::invalid_argument.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace slice
