// Copyright 2026 The Hypercast Authors
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

#ifndef HYPERCAST_ERRORS_HPP_
#define HYPERCAST_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hypercast
{

// Base type for every error raised by the library.
struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

#define HYPERCAST_DEFINE_ERROR(NAME)           \
  struct NAME : Error                          \
  {                                            \
    explicit NAME(const std::string & msg)     \
    : Error(std::string(#NAME ": ") + msg)     \
    {                                          \
    }                                          \
  }

HYPERCAST_DEFINE_ERROR(TrackTooShort);
HYPERCAST_DEFINE_ERROR(UnknownAgent);
HYPERCAST_DEFINE_ERROR(ShapeMismatch);
HYPERCAST_DEFINE_ERROR(InvalidS);
HYPERCAST_DEFINE_ERROR(NoGroundTruth);
HYPERCAST_DEFINE_ERROR(MissingComponent);
HYPERCAST_DEFINE_ERROR(CheckpointStageMismatch);
HYPERCAST_DEFINE_ERROR(EmptyPrediction);
HYPERCAST_DEFINE_ERROR(EmptyBatch);
HYPERCAST_DEFINE_ERROR(InvalidSpec);
HYPERCAST_DEFINE_ERROR(MalformedCsv);
HYPERCAST_DEFINE_ERROR(TooShort);
HYPERCAST_DEFINE_ERROR(SchemaViolation);
HYPERCAST_DEFINE_ERROR(DegenerateTrajectory);
HYPERCAST_DEFINE_ERROR(NonFiniteCost);
HYPERCAST_DEFINE_ERROR(IoError);
HYPERCAST_DEFINE_ERROR(ConfigError);

#undef HYPERCAST_DEFINE_ERROR

}  // namespace hypercast

#endif  // HYPERCAST_ERRORS_HPP_
