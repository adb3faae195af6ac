/*
 *  Copyright 2026 The cordpipe Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace cordpipe {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Contract violations on in-memory data (bad dims, bad config values,
/// degenerate inputs). The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Failures reading or decoding external data. The CLI maps these to exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

#define CORDPIPE_DEFINE_ERROR(Name, Base, tag)                                 \
    class Name : public Base {                                                 \
    public:                                                                    \
        explicit Name(const std::string& what) : Base(tag, what) {}            \
    }

CORDPIPE_DEFINE_ERROR(DimensionError, ValidationError, "dimension");
CORDPIPE_DEFINE_ERROR(IndexError, ValidationError, "index");
CORDPIPE_DEFINE_ERROR(ValueError, ValidationError, "value");
CORDPIPE_DEFINE_ERROR(ConfigError, ValidationError, "config");
CORDPIPE_DEFINE_ERROR(DegenerateError, ValidationError, "degenerate");
CORDPIPE_DEFINE_ERROR(GeometryError, ValidationError, "geometry");
CORDPIPE_DEFINE_ERROR(TransformError, ValidationError, "transform");

CORDPIPE_DEFINE_ERROR(FormatError, IoError, "format");
CORDPIPE_DEFINE_ERROR(UnsupportedDatatypeError, IoError, "datatype");
CORDPIPE_DEFINE_ERROR(TruncatedError, IoError, "truncated");
CORDPIPE_DEFINE_ERROR(LabelRangeError, IoError, "label_range");
CORDPIPE_DEFINE_ERROR(FileError, IoError, "file");
CORDPIPE_DEFINE_ERROR(PredictorError, IoError, "predictor");

#undef CORDPIPE_DEFINE_ERROR

}  // namespace cordpipe
