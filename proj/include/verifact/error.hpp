// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace verifact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files (collections, queries, runs, records).
class InputError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation's precondition (empty question, k == 0, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace verifact
