// Copyright 2026 The rabiq Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace rabiq {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RABIQ_DEFINE_ERROR(Name)         \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

RABIQ_DEFINE_ERROR(InvalidDimension);
RABIQ_DEFINE_ERROR(TruncationOverflow);
RABIQ_DEFINE_ERROR(InvalidState);
RABIQ_DEFINE_ERROR(NotHermitian);
RABIQ_DEFINE_ERROR(InvalidIndex);
RABIQ_DEFINE_ERROR(DimensionMismatch);
RABIQ_DEFINE_ERROR(ZeroPopulation);
RABIQ_DEFINE_ERROR(NumericalDrift);
RABIQ_DEFINE_ERROR(InvalidGap);
RABIQ_DEFINE_ERROR(IntegrationDiverged);
RABIQ_DEFINE_ERROR(EpisodeFinished);
RABIQ_DEFINE_ERROR(GradientOverflow);
RABIQ_DEFINE_ERROR(ConfigError);

#undef RABIQ_DEFINE_ERROR

}  // namespace rabiq
