#pragma once

#include <stdexcept>
#include <string>

namespace bvib {

// Invalid configuration or dimension mismatch detected before any work is done.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered during numeric work; the run must abort.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Protocol violation between simulated nodes (stale or mismatched messages).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation attempted by a node whose role does not permit it.
class AuthorizationError : public std::runtime_error {
public:
    explicit AuthorizationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace bvib
