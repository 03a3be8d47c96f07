#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace noisepair {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A parameter outside its documented range (sigma <= 0, bad percentile, ...).
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

// An estimation support (mask, bin, sample set) too small to be usable.
class InsufficientSupportError : public Error {
public:
    using Error::Error;
};

// An image that cannot anchor an estimate (all-zero reference, zero mean, ...).
class DegenerateImageError : public Error {
public:
    using Error::Error;
};

// Malformed file content; carries the byte offset where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// Filesystem and subprocess failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace noisepair
