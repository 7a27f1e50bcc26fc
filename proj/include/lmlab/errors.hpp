#pragma once

#include <stdexcept>
#include <string>

namespace lmlab {

// Error taxonomy mirrored by the CLI exit codes:
//   ValidationError -> 2, NumericError -> 3, ClientError -> 4.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class ClientError : public std::runtime_error {
public:
    explicit ClientError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lmlab
