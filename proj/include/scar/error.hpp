// SPDX-License-Identifier: Apache-2.0
//
// scar-channel: LiDAR-driven scatterer recognition and V2V channel synthesis
// Copyright (C) 2026 The scar-channel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scar
{

// Base class for every error raised by the library. Derived types carry the
// offending datum (line number, file name, ...) where one exists.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

#define SCAR_DEFINE_ERROR(Name)            \
    class Name : public Error              \
    {                                      \
    public:                                \
        using Error::Error;                \
    };

SCAR_DEFINE_ERROR(EmptyCloud)
SCAR_DEFINE_ERROR(InvalidRange)
SCAR_DEFINE_ERROR(InvalidConfig)
SCAR_DEFINE_ERROR(SnapshotMismatch)
SCAR_DEFINE_ERROR(DegenerateVR)
SCAR_DEFINE_ERROR(DegenerateBounds)
SCAR_DEFINE_ERROR(DimMismatch)
SCAR_DEFINE_ERROR(NoScatterers)
SCAR_DEFINE_ERROR(NegativeDensity)
SCAR_DEFINE_ERROR(BoundsMismatch)
SCAR_DEFINE_ERROR(CoincidentTransceivers)
SCAR_DEFINE_ERROR(BelowGround)
SCAR_DEFINE_ERROR(EmptyScene)
SCAR_DEFINE_ERROR(LagOutOfRange)
SCAR_DEFINE_ERROR(NonUniformGrid)
SCAR_DEFINE_ERROR(FormatError)
SCAR_DEFINE_ERROR(IoError)

#undef SCAR_DEFINE_ERROR

class MalformedRow : public Error
{
public:
    MalformedRow(std::size_t line, const std::string &detail)
        : Error("malformed row at line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateVehicle : public Error
{
public:
    explicit DuplicateVehicle(const std::string &name)
        : Error("duplicate vehicle '" + name + "'"), name_(name) {}
    const std::string &name() const noexcept { return name_; }

private:
    std::string name_;
};

class MissingPrediction : public Error
{
public:
    explicit MissingPrediction(int snapshot)
        : Error("missing prediction for snapshot " + std::to_string(snapshot)), snapshot_(snapshot) {}
    int snapshot() const noexcept { return snapshot_; }

private:
    int snapshot_;
};

class FileSetMismatch : public Error
{
public:
    explicit FileSetMismatch(const std::string &file)
        : Error("file set mismatch: no counterpart for '" + file + "'"), file_(file) {}
    const std::string &file() const noexcept { return file_; }

private:
    std::string file_;
};

} // namespace scar
