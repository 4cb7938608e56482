#ifndef SATPROBE_ERROR_HPP
#define SATPROBE_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace satprobe {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, truncated-in-the-middle or otherwise unreadable activation log.
/// Carries the byte offset at which the problem was detected.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// A caller passed something that violates an operation's precondition
/// (dimension mismatch, non-finite value, bad threshold, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Numerical failure while turning statistics into spectra.
class AnalysisError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace satprobe

#endif
