#include "dcload/error.hpp"

namespace dcload {

ParseError::ParseError(std::size_t line, const std::string& what)
    : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

} // namespace dcload
