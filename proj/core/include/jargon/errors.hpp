#pragma once

#include <stdexcept>
#include <string>

namespace jargon {

// Base of every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: malformed files, contract violations, inconsistent data.
// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Corpus line-format problems, with a position when one is known.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
    FormatError(const std::string& what, int line, int column)
        : ValidationError(what + " (line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_ = 0;
    int column_ = 0;
};

// Misconfiguration: missing axes, impossible sampling setups, unknown keys.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Anything that went wrong talking to a completion endpoint.
// The CLI maps these to exit code 2.
class TransportError : public Error {
public:
    using Error::Error;
};

class CredentialError : public TransportError {
public:
    using TransportError::TransportError;
};

// Cache-only mode hit a request that was never recorded.
class CacheMissError : public TransportError {
public:
    explicit CacheMissError(const std::string& request_key)
        : TransportError("cache miss for request_key " + request_key),
          request_key_(request_key) {}

    const std::string& request_key() const { return request_key_; }

private:
    std::string request_key_;
};

}  // namespace jargon
