#pragma once

#include <stdexcept>
#include <string>

namespace rspline {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (mismatched base points,
/// grid mismatch, wrong manifold).
class ContractError : public Error {
public:
    using Error::Error;
};

/// The request lies outside the domain where the operation is defined
/// (cut locus, singular boundary value problem, evaluation outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration: unknown names, too few grid nodes, bad ladders.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rspline
