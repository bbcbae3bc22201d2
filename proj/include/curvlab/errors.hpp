#pragma once

#include <stdexcept>
#include <string>

namespace curvlab {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NonSmoothActivation : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    using Error::Error;
};

class NoBoundaryFound : public Error {
public:
    using Error::Error;
};

class DegenerateNormal : public Error {
public:
    using Error::Error;
};

class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

class InvalidQuery : public Error {
public:
    using Error::Error;
};

class LanczosError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace curvlab
