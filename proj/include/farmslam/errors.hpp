// Copyright (c) 2026 The farmslam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file errors.hpp
 * @brief Exception types raised by the farmslam library.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace farmslam
{

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define FARMSLAM_DEFINE_ERROR(Name)        \
  class Name : public Error                \
  {                                        \
  public:                                  \
    using Error::Error;                    \
  };

// Geometry
FARMSLAM_DEFINE_ERROR(InvalidArgument)
FARMSLAM_DEFINE_ERROR(InfeasibleGeometry)
FARMSLAM_DEFINE_ERROR(DegenerateRange)
FARMSLAM_DEFINE_ERROR(DegenerateRope)

// Factor graph
FARMSLAM_DEFINE_ERROR(UnknownVariable)
FARMSLAM_DEFINE_ERROR(ArityMismatch)
FARMSLAM_DEFINE_ERROR(NoiseNotSPD)
FARMSLAM_DEFINE_ERROR(SingularSystem)

// Evaluation
FARMSLAM_DEFINE_ERROR(MissingBuoy)
FARMSLAM_DEFINE_ERROR(MissingPose)
FARMSLAM_DEFINE_ERROR(InsufficientPoints)

// Files and configuration
FARMSLAM_DEFINE_ERROR(DataError)
FARMSLAM_DEFINE_ERROR(ConfigError)

#undef FARMSLAM_DEFINE_ERROR

}  // namespace farmslam
