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

#ifndef GLS_DATASET_IO_HPP_
#define GLS_DATASET_IO_HPP_

// CSV form of a SampleSet: header f0,...,f{d-1},label,domain[,pseudo], one
// sample per row, floats at 9 significant digits.

#include <iosfwd>
#include <string>

#include "gls/shiftgen.hpp"

namespace gls {

// Shortest "%.9g" rendering of a finite double.
std::string format_float9(double v);

void write_csv(std::ostream& out, const SampleSet& s);
void write_csv_file(const std::string& path, const SampleSet& s);

// Parses a SampleSet. `num_classes` <= 0 infers it from the largest label or
// pseudo-label. Malformed input throws ValidationError naming the line.
SampleSet read_csv(std::istream& in, int num_classes = 0);
SampleSet read_csv_file(const std::string& path, int num_classes = 0);

}  // namespace gls

#endif  // GLS_DATASET_IO_HPP_
