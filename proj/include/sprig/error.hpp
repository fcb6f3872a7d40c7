#pragma once

#include <stdexcept>
#include <string>

namespace sprig {

/// Raised for every contract violation or malformed input in the library.
/// The message is prefixed with the component that detected the problem.
class Error : public std::runtime_error {
public:
    Error(const std::string& component, const std::string& message)
        : std::runtime_error(component + ": " + message), component_(component) {}

    const std::string& component() const noexcept { return component_; }

private:
    std::string component_;
};

}  // namespace sprig
