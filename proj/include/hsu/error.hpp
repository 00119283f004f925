#pragma once

#include <stdexcept>
#include <string>

namespace hsu {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files or JSON that does not match the expected schema.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Tensor or matrix dimensions that do not line up.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Semantically invalid values: empty inputs, out-of-range targets,
// unknown labels, mismatched vocabularies.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

} // namespace hsu
