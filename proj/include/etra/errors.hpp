// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace etra {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A vector-variable was missing or had the wrong length.
/// Carries the name of the offending variable.
class DimensionError : public Error {
public:
    DimensionError(std::string variable, const std::string& what)
        : Error(what), variable_(std::move(variable)) {}

    const std::string& variable() const noexcept { return variable_; }

private:
    std::string variable_;
};

/// Malformed instance files, schema violations, out-of-range parameters.
/// `field` points at the offending input field when known.
class InputError : public Error {
public:
    explicit InputError(const std::string& what, std::string field = {})
        : Error(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Arithmetic left the representable range of the active number mode.
class OverflowError : public Error {
public:
    using Error::Error;
};

} // namespace etra
