#pragma once

#include <stdexcept>
#include <string>

namespace surfgen {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct EmptyMeshError : Error {
    EmptyMeshError() : Error("mesh has no vertices") {}
};

struct OutOfDomainError : Error {
    explicit OutOfDomainError(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatchError : Error {
    explicit ShapeMismatchError(const std::string& msg) : Error(msg) {}
};

}  // namespace surfgen
