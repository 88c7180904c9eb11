#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advml {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed corpus, vocabulary or model file.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Caller supplied a value outside the operation's domain.
class InputError : public Error {
public:
    using Error::Error;
};

// Data that would make a fit degenerate (single class, missing ground truth).
class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class RateLimitedError : public Error {
public:
    explicit RateLimitedError(int retry_after_days = 1)
        : Error("rate limited"), retry_after_days_(retry_after_days) {}

    int retry_after_days() const { return retry_after_days_; }

private:
    int retry_after_days_;
};

// Transport or protocol failure talking to a remote oracle.
class ProtocolError : public Error {
public:
    using Error::Error;
};

} // namespace advml
