#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dupviper {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input bytes are not valid UTF-8.
class IngestError : public Error {
public:
    IngestError(const std::string& what, std::size_t byte_offset)
        : Error(what + " at byte offset " + std::to_string(byte_offset)), byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// Out-of-range k, lengths, bounds.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition (e.g. fragments of different documents).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Fixture generator could not honor the requested parameters.
class GenerationError : public Error {
public:
    using Error::Error;
};

// A search was stopped between window steps; no partial ResultSet escapes.
class SearchCancelled : public Error {
public:
    explicit SearchCancelled(std::size_t windows_scanned)
        : Error("search cancelled after " + std::to_string(windows_scanned) + " window steps"),
          windows_scanned_(windows_scanned) {}

    std::size_t windows_scanned() const noexcept { return windows_scanned_; }

private:
    std::size_t windows_scanned_;
};

}  // namespace dupviper
