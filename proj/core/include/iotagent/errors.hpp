#pragma once

#include <stdexcept>
#include <string>

namespace iotagent {

/// Base for every error the library raises on bad input or state.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model, configuration, payload or world description failed validation.
/// `path` names the offending field or feature id when one is known.
class ValidationError : public Error {
public:
    ValidationError(const std::string& message, std::string path = {})
        : Error(path.empty() ? message : path + ": " + message), message_(message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }
    /// The message without the path prefix.
    const std::string& detail() const noexcept { return message_; }

private:
    std::string message_;
    std::string path_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class CorruptFileError : public Error {
public:
    using Error::Error;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class EnumerationOverflow : public Error {
public:
    using Error::Error;
};

}  // namespace iotagent
