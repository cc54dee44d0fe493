/* Copyright 2026 The hlight Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef HLIGHT_GMM_H_
#define HLIGHT_GMM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hlight {

inline constexpr double kDefaultVarFloor = 1e-4;

// Diagonal-covariance Gaussian mixture:
//   p(c) = sum_i w_i N(c; mu_i, diag(var_i)).
struct GmmModel {
  std::string label;
  int dim = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;
  double var_floor = kDefaultVarFloor;

  int num_components() const { return static_cast<int>(weights.size()); }

  // Weights positive and summing to 1 within 1e-9, variances >= var_floor,
  // consistent dimensions. Throws kInvariantViolation.
  void Validate() const;
};

// Numerically stable log(sum(exp(x))). Returns -inf for an empty or all
// -inf input.
double LogSumExp(std::span<const double> x);

// Caches per-component normalizers and inverse variances so repeated
// evaluation costs one pass over the means.
class GmmEvaluator {
 public:
  explicit GmmEvaluator(const GmmModel& model);

  int dim() const { return dim_; }
  int num_components() const { return static_cast<int>(log_weights_.size()); }

  // log w_i + log N(c; mu_i, var_i) for each component.
  void WeightedComponentLogDensities(std::span<const double> c,
                                     std::span<double> out) const;
  double LogLikelihood(std::span<const double> c) const;

 private:
  int dim_;
  std::vector<double> log_weights_;
  std::vector<double> log_norms_;
  std::vector<double> means_;         // flattened M x d
  std::vector<double> inv_variances_;  // flattened M x d
};

// log p(c | model). Throws kDimensionMismatch.
double LogLikelihood(const GmmModel& model, std::span<const double> c);

using DataSet = std::vector<std::vector<double>>;

// k-means++ seeding followed by at most 50 Lloyd iterations. Weights are the
// cluster fractions, variances the per-cluster diagonal variances floored at
// var_floor. Deterministic for a given seed.
GmmModel KMeansInit(const DataSet& data, int num_components, std::uint64_t seed,
                    double var_floor = kDefaultVarFloor);

struct EmOptions {
  int num_components = 16;
  int max_iters = 200;
  double rel_tol = 1e-5;
  double var_floor = kDefaultVarFloor;
  std::uint64_t seed = 0;

  bool operator==(const EmOptions&) const = default;
};

struct EmResult {
  GmmModel model;
  // Mean per-vector log-likelihood of every parameter set visited, starting
  // with the k-means initialization and ending with the returned model.
  std::vector<double> mean_log_likelihood;
  int iterations = 0;
  bool converged = false;
};

// Throws kInsufficientData when |data| < num_components and kNonFiniteInput
// for NaN/inf components.
EmResult TrainEm(const DataSet& data, const EmOptions& options);

nlohmann::json GmmToJson(const GmmModel& model);
// Validates invariants; throws kMalformedFile or kInvariantViolation.
GmmModel GmmFromJson(const nlohmann::json& j);

void SaveModel(const std::string& path, const GmmModel& model);
GmmModel LoadModel(const std::string& path);

}  // namespace hlight

#endif  // HLIGHT_GMM_H_
