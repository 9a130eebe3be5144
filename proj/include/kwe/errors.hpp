#pragma once

#include <stdexcept>
#include <string>

namespace kwe {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidRange : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NonpositiveSpectrum : public Error {
public:
    using Error::Error;
};

class LocalityViolation : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class NoContraction : public Error {
public:
    using Error::Error;
};

class WindowTooSmall : public Error {
public:
    using Error::Error;
};

class AmbiguousWinding : public Error {
public:
    using Error::Error;
};

class StepUnderflow : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace kwe
