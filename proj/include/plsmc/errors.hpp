// Copyright 2026 The plsmc Authors
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

namespace plsmc {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration / input validation problems (bad key, bad value, missing file).
struct ConfigError : Error {
  using Error::Error;
};

// Every log weight is -inf, or a weight is NaN; normalization is undefined.
struct AllWeightsDegenerate : Error {
  using Error::Error;
};

// The requested filter needs a closed form the model does not expose for the
// supplied particle contents (e.g. a Rao-Blackwellized step without state
// sufficient statistics).
struct UnsupportedConditioningSet : Error {
  using Error::Error;
};

// Innovation covariance in a Kalman-type update is singular or non-finite.
struct SingularInnovation : Error {
  using Error::Error;
};

// Liu-West kernel covariance is not positive definite (fewer distinct theta
// atoms than dimensions).
struct SingularKernelCovariance : Error {
  using Error::Error;
};

// Smoothing requested but the forward pass did not store per-step clouds.
struct MissingHistory : Error {
  using Error::Error;
};

// Component vectors of a particle cloud (or paired traces) disagree in length.
struct LengthMismatch : Error {
  using Error::Error;
};

// Observations empty, non-finite where finiteness is required, or otherwise
// unusable.
struct InvalidData : Error {
  using Error::Error;
};

// A metric table was requested against an oracle that was not supplied.
struct MissingOracle : Error {
  using Error::Error;
};

// Every grid cell has zero posterior mass after log-domain accumulation.
struct GridUnderflow : Error {
  using Error::Error;
};

// A file could not be opened, read, or written.
struct IoError : Error {
  using Error::Error;
};

}  // namespace plsmc
