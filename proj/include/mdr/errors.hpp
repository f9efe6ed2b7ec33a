#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdr {

/// Input that violates a documented contract (bad file contents, bad
/// parameters, broken invariants). Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A line of an input file that could not be parsed.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& field,
               const std::string& what)
        : ValidationError(path + ":" + std::to_string(line) + ": field '" + field + "': " + what),
          line_(line), field_(field) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// The remote scorer or embedder could not be reached or spoke garbage.
/// Maps to CLI exit code 3.
class RemoteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mdr
