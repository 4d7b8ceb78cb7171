/*
 * Copyright (C) 2026 flucast contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FLUCAST_ERRORS_HPP
#define FLUCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flucast {

/// Malformed or unusable input data (CSV schema, parse failures, bad fields).
class DataFormatError : public std::runtime_error {
public:
    explicit DataFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-finite states, rank deficiency, failed adaptation.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller violated a documented precondition (bad week index, unsorted
/// probabilities, missing lag anchor, ...).
class InvalidArgumentError : public std::invalid_argument {
public:
    explicit InvalidArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

} // namespace flucast

#endif // FLUCAST_ERRORS_HPP
