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

#include "gls/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "gls/error.hpp"

namespace gls {

std::string format_float9(double v) {
  if (!std::isfinite(v)) throw ValidationError("cannot write non-finite value");
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::string(buf, len);
}

void write_csv(std::ostream& out, const SampleSet& s) {
  s.validate();
  const int d = s.dim();
  for (int j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label,domain";
  if (s.pseudo_labels) out << ",pseudo";
  out << '\n';
  const std::string domain = to_string(s.domain);
  for (int i = 0; i < s.size(); ++i) {
    for (int j = 0; j < d; ++j) out << format_float9(s.features(i, j)) << ',';
    out << s.labels[i] << ',' << domain;
    if (s.pseudo_labels) out << ',' << (*s.pseudo_labels)[i];
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const SampleSet& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_csv(out, s);
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ValidationError("csv line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& field, int line, const char* what) {
  T value{};
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    fail(line, std::string("bad ") + what + " '" + field + "'");
  }
  return value;
}

}  // namespace

SampleSet read_csv(std::istream& in, int num_classes) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) fail(line_no, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line);
  int d = 0;
  while (d < static_cast<int>(header.size()) &&
         header[d] == "f" + std::to_string(d)) {
    ++d;
  }
  if (d == 0) fail(line_no, "header must start with f0");
  const int rest = static_cast<int>(header.size()) - d;
  const bool has_pseudo = rest == 3 && header[d + 2] == "pseudo";
  if (rest < 2 || rest > 3 || header[d] != "label" ||
      header[d + 1] != "domain" || (rest == 3 && !has_pseudo)) {
    fail(line_no, "expected header f0,...,f{d-1},label,domain[,pseudo]");
  }

  std::vector<double> values;
  std::vector<int> labels, pseudo;
  std::optional<DomainTag> domain;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    for (int j = 0; j < d; ++j) {
      const double v = parse_number<double>(fields[j], line_no, "feature");
      if (!std::isfinite(v)) fail(line_no, "non-finite feature");
      values.push_back(v);
    }
    const int y = parse_number<int>(fields[d], line_no, "label");
    if (y < 0) fail(line_no, "negative label");
    labels.push_back(y);
    DomainTag tag;
    try {
      tag = domain_tag_from_string(fields[d + 1]);
    } catch (const ValidationError&) {
      fail(line_no, "bad domain '" + fields[d + 1] + "'");
    }
    if (domain && *domain != tag) fail(line_no, "mixed domains in one file");
    domain = tag;
    if (has_pseudo) {
      const int p = parse_number<int>(fields[d + 2], line_no, "pseudo-label");
      if (p < 0) fail(line_no, "negative pseudo-label");
      pseudo.push_back(p);
    }
  }
  if (labels.empty()) fail(line_no, "no data rows");

  SampleSet s;
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  s.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  s.labels = std::move(labels);
  s.domain = *domain;
  if (has_pseudo) s.pseudo_labels = std::move(pseudo);
  int k = num_classes;
  if (k <= 0) {
    k = 0;
    for (int y : s.labels) k = std::max(k, y + 1);
    if (s.pseudo_labels) {
      for (int y : *s.pseudo_labels) k = std::max(k, y + 1);
    }
  }
  s.num_classes = k;
  s.validate();
  return s;
}

SampleSet read_csv_file(const std::string& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return read_csv(in, num_classes);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace gls
