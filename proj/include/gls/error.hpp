/*
 * Copyright 2026 The GLS Correction Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GLS_ERROR_HPP_
#define GLS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gls {

// Invalid input: wrong shapes, broken simplex, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or a solver that failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A class with positive weight has no samples on one side of a
// class-conditional comparison.
class ClassAbsentError : public std::runtime_error {
 public:
  ClassAbsentError(int label, const std::string& side)
      : std::runtime_error("class " + std::to_string(label) +
                           " absent from " + side + " samples"),
        label_(label) {}
  int label() const { return label_; }

 private:
  int label_;
};

}  // namespace gls

#endif  // GLS_ERROR_HPP_
