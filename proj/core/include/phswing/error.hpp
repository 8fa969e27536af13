#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phswing {

enum class ErrorCode {
    ConfigNotFound,
    Config,
    Data,
    Domain,
    Cfl,
    NonFinite,
    GridMismatch,
    Io,
};

std::string_view error_code_name(ErrorCode code);

// Validation failures map to exit status 1, numerical failures to 2.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, ErrorCode code = ErrorCode::Config)
        : Error(code, message) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& message, ErrorCode code = ErrorCode::Data)
        : Error(code, message) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error(ErrorCode::Domain, message) {}
};

class CflError : public Error {
public:
    explicit CflError(const std::string& message) : Error(ErrorCode::Cfl, message) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message) : Error(ErrorCode::NonFinite, message) {}
};

}  // namespace phswing
