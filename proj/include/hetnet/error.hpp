#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: network specs, configs, inconsistent parameters.
class SpecError : public Error {
public:
    using Error::Error;
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

}  // namespace hetnet
