#pragma once

#include <stdexcept>
#include <string>

namespace roboaug {

enum class ErrorKind { config, schema, validation, backend, protocol, io };

/// Base of every error thrown by the library. The kind maps onto the CLI exit
/// code: 2 for config/schema/validation, 3 for backend/protocol, 4 for I/O.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept
    {
        switch (kind_) {
        case ErrorKind::backend:
        case ErrorKind::protocol: return 3;
        case ErrorKind::io: return 4;
        default: return 2;
        }
    }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::schema, w) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};
struct BackendError : Error {
    explicit BackendError(const std::string& w) : Error(ErrorKind::backend, w) {}
};
struct ProtocolError : Error {
    explicit ProtocolError(const std::string& w) : Error(ErrorKind::protocol, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

/// Throws an error of the same type as `e` with `context` prepended.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context)
{
    const std::string msg = context + ": " + e.what();
    switch (e.kind()) {
    case ErrorKind::config: throw ConfigError(msg);
    case ErrorKind::schema: throw SchemaError(msg);
    case ErrorKind::validation: throw ValidationError(msg);
    case ErrorKind::backend: throw BackendError(msg);
    case ErrorKind::protocol: throw ProtocolError(msg);
    case ErrorKind::io: throw IoError(msg);
    }
    throw Error(e.kind(), msg);
}

} // namespace roboaug
