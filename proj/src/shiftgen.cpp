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

#include "gls/shiftgen.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "gls/error.hpp"
#include "gls/random.hpp"

namespace gls {

std::string to_string(DomainTag tag) {
  return tag == DomainTag::kSource ? "source" : "target";
}

DomainTag domain_tag_from_string(const std::string& name) {
  if (name == "source") return DomainTag::kSource;
  if (name == "target") return DomainTag::kTarget;
  throw ValidationError("unknown domain tag '" + name + "'");
}

std::string to_string(ShiftDirections d) {
  return d == ShiftDirections::kShared ? "shared" : "per_class";
}

ShiftDirections shift_directions_from_string(const std::string& name) {
  if (name == "shared") return ShiftDirections::kShared;
  if (name == "per_class") return ShiftDirections::kPerClass;
  throw ValidationError("unknown shift directions '" + name + "'");
}

void DomainSpec::validate() const {
  if (class_conditionals.empty()) {
    throw ValidationError("domain needs at least one class");
  }
  if (label_dist.size() != num_classes()) {
    throw ValidationError("label distribution size does not match classes");
  }
  for (const auto& c : class_conditionals) {
    if (c.dim() != dim()) {
      throw ValidationError("class conditionals differ in dimension");
    }
  }
}

DomainSpec DomainSpec::reweighted(const std::vector<double>& w) const {
  if (static_cast<int>(w.size()) != num_classes()) {
    throw ValidationError("weight vector size does not match classes");
  }
  std::vector<double> masses(w.size());
  for (std::size_t y = 0; y < w.size(); ++y) masses[y] = w[y] * label_dist[y];
  return {class_conditionals, DiscreteDistribution::normalized(masses)};
}

DomainSpec DomainSpec::pushforward(const AffineMap& map) const {
  DomainSpec out{{}, label_dist};
  out.class_conditionals.reserve(class_conditionals.size());
  for (const auto& c : class_conditionals) {
    out.class_conditionals.push_back(c.pushforward(map));
  }
  return out;
}

MixtureDensity DomainSpec::marginal() const {
  return MixtureDensity::combine(label_dist.span(), class_conditionals);
}

Eigen::VectorXd lattice_mean(int y, int dim) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
  m[y % dim] = 3.0 * (1 + y / dim);
  return m;
}

ShiftScenario make_scenario(const ScenarioParams& p) {
  if (p.num_classes < 2) throw ValidationError("scenario needs K >= 2");
  if (p.dim < 1) throw ValidationError("scenario needs dim >= 1");
  if (!(p.shift >= 0.0) || !std::isfinite(p.shift)) {
    throw ValidationError("shift magnitude must be finite and >= 0");
  }
  if (!(p.variance > 0.0)) throw ValidationError("variance must be > 0");
  if (p.source_labels.size() != p.num_classes ||
      p.target_labels.size() != p.num_classes) {
    throw ValidationError("label distributions must have K entries");
  }
  Rng rng = Rng(p.seed).child("directions");
  Eigen::MatrixXd dirs(p.num_classes, p.dim);
  auto unit = [&rng, &p]() {
    Eigen::VectorXd u(p.dim);
    do {
      for (int a = 0; a < p.dim; ++a) u[a] = rng.normal();
    } while (u.norm() < 1e-12);
    return (u / u.norm()).eval();
  };
  if (p.directions == ShiftDirections::kShared) {
    const Eigen::VectorXd u = unit();
    for (int y = 0; y < p.num_classes; ++y) dirs.row(y) = u.transpose();
  } else {
    for (int y = 0; y < p.num_classes; ++y) dirs.row(y) = unit().transpose();
  }
  ShiftScenario sc{p, {{}, p.source_labels}, {{}, p.target_labels}, dirs};
  for (int y = 0; y < p.num_classes; ++y) {
    const Eigen::VectorXd mu = lattice_mean(y, p.dim);
    sc.source.class_conditionals.push_back(
        MixtureDensity::isotropic(mu, p.variance));
    sc.target.class_conditionals.push_back(MixtureDensity::isotropic(
        mu + p.shift * dirs.row(y).transpose(), p.variance));
  }
  return sc;
}

void SampleSet::validate() const {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ValidationError("sample set: label count does not match rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ValidationError("sample set: label " + std::to_string(y) +
                            " outside [0, " + std::to_string(num_classes) +
                            ")");
    }
  }
  if (pseudo_labels && pseudo_labels->size() != labels.size()) {
    throw ValidationError("sample set: pseudo-label count does not match rows");
  }
}

std::vector<int> SampleSet::class_counts() const {
  std::vector<int> counts(num_classes, 0);
  for (int y : labels) ++counts[y];
  return counts;
}

DiscreteDistribution SampleSet::label_frequencies() const {
  const auto counts = class_counts();
  return DiscreteDistribution::normalized(
      std::vector<double>(counts.begin(), counts.end()));
}

bool SampleSet::operator==(const SampleSet& other) const {
  return features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() &&
         features == other.features && labels == other.labels &&
         domain == other.domain && pseudo_labels == other.pseudo_labels &&
         num_classes == other.num_classes;
}

SampleSet sample(const DomainSpec& spec, int n, std::uint64_t seed,
                 DomainTag domain) {
  spec.validate();
  if (n < 1) throw ValidationError("sample size must be >= 1");
  Rng root(seed);
  Rng label_rng = root.child("labels");
  Rng feature_rng = root.child("features");

  const int k = spec.num_classes();
  const int d = spec.dim();
  std::vector<double> cdf(k);
  double acc = 0.0;
  for (int y = 0; y < k; ++y) cdf[y] = (acc += spec.label_dist[y]);

  // Cholesky factors per (class, component).
  std::vector<std::vector<Eigen::MatrixXd>> chol(k);
  for (int y = 0; y < k; ++y) {
    for (const auto& c : spec.class_conditionals[y].components()) {
      chol[y].push_back(Eigen::LLT<Eigen::MatrixXd>(c.covariance).matrixL());
    }
  }

  SampleSet out;
  out.features.resize(n, d);
  out.labels.resize(n);
  out.domain = domain;
  out.num_classes = k;
  Eigen::VectorXd noise(d);
  for (int i = 0; i < n; ++i) {
    const double u = label_rng.uniform();
    int y = 0;
    while (y < k - 1 && u >= cdf[y]) ++y;
    // Never pick a zero-probability class via round-off.
    while (spec.label_dist[y] == 0.0 && y > 0) --y;
    out.labels[i] = y;

    const auto& comps = spec.class_conditionals[y].components();
    std::size_t c = 0;
    if (comps.size() > 1) {
      const double v = feature_rng.uniform();
      double cum = 0.0;
      while (c + 1 < comps.size() && v >= (cum += comps[c].weight)) ++c;
    }
    for (int a = 0; a < d; ++a) noise[a] = feature_rng.normal();
    out.features.row(i) = (comps[c].mean + chol[y][c] * noise).transpose();
  }
  return out;
}

SampleSet subsample_protocol(const SampleSet& s, int k1, double rate,
                             std::uint64_t seed) {
  s.validate();
  if (k1 < 0 || k1 > s.num_classes) {
    throw ValidationError("subsample: K1 must lie in [0, K]");
  }
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ValidationError("subsample: rate must lie in (0, 1]");
  }
  std::vector<std::vector<int>> rows(s.num_classes);
  for (int i = 0; i < s.size(); ++i) rows[s.labels[i]].push_back(i);

  Rng rng = Rng(seed).child("subsample");
  std::vector<char> keep(s.size(), 1);
  for (int y = 0; y < k1; ++y) {
    auto& r = rows[y];
    const auto target = static_cast<std::size_t>(
        std::ceil(rate * static_cast<double>(r.size()) - 1e-9));
    if (target == 0) {
      throw ValidationError("subsample: class " + std::to_string(y) +
                            " would be emptied");
    }
    for (std::size_t i = 0; i < target; ++i) {
      const std::size_t j = i + rng.below(r.size() - i);
      std::swap(r[i], r[j]);
    }
    for (std::size_t i = target; i < r.size(); ++i) keep[r[i]] = 0;
  }

  SampleSet out;
  out.domain = s.domain;
  out.num_classes = s.num_classes;
  std::vector<int> kept;
  for (int i = 0; i < s.size(); ++i) {
    if (keep[i]) kept.push_back(i);
  }
  out.features.resize(kept.size(), s.dim());
  out.labels.resize(kept.size());
  if (s.pseudo_labels) out.pseudo_labels.emplace(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.features.row(i) = s.features.row(kept[i]);
    out.labels[i] = s.labels[kept[i]];
    if (s.pseudo_labels) (*out.pseudo_labels)[i] = (*s.pseudo_labels)[kept[i]];
  }
  return out;
}

}  // namespace gls
