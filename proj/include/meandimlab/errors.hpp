// Copyright 2026 The meandimlab Authors
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

namespace meandimlab {

// Invalid or inconsistent configuration (bad parameter ranges, mismatched
// system specs, unsatisfiable preconditions). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A query needs data outside the represented window of a point, sequence or
// tiling. Raised instead of extrapolating.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A construction produced an object that violates its own invariants
// (e.g. marker support times closer than M).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A verified property failed on concrete data. Maps to CLI exit code 1.
class LemmaViolation : public std::runtime_error {
 public:
  LemmaViolation(std::string property, const std::string& what)
      : std::runtime_error(property + ": " + what), property_(std::move(property)) {}

  const std::string& property() const { return property_; }

 private:
  std::string property_;
};

}  // namespace meandimlab
