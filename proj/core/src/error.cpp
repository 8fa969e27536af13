#include "phswing/error.hpp"

namespace phswing {

std::string_view error_code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ConfigNotFound: return "CONFIG_NOT_FOUND";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Data: return "DATA";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::Cfl: return "CFL";
    case ErrorCode::NonFinite: return "NON_FINITE";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

bool is_numerical(ErrorCode code)
{
    return code == ErrorCode::Cfl || code == ErrorCode::NonFinite;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code)
{
}

}  // namespace phswing
