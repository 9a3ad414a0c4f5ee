// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_ERRORS_HPP
#define AFEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace afem
{

// Base class for all errors thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: unknown problem names, malformed configs, bad parameters.
// The CLI maps this to exit code 2.
class ConfigError : public Error
{
public:
  using Error::Error;
};

// Numerical failure: singular factorizations, non-converged eigensolves, residual
// certification failures. The CLI maps this to exit code 1.
class NumericalError : public Error
{
public:
  using Error::Error;
};

} // namespace afem

#endif // AFEM_ERRORS_HPP
