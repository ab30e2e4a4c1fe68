#pragma once

#include <stdexcept>
#include <string>

namespace mta {

/// Bad user input: malformed files, inconsistent dimensions, invalid parameters.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// The data does not identify the requested object (boundary CCPs, unvisited states).
class identification_error : public std::runtime_error {
public:
    explicit identification_error(const std::string& what) : std::runtime_error(what) {}
};

/// A solver failed to reach its tolerance (cycling guard, non-convergence).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

inline const char* version() { return "0.1.0"; }

} // namespace mta
