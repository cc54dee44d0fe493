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

#include "hlight/gmm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "hlight/error.h"

namespace hlight {
namespace {

constexpr int kMaxLloydIterations = 50;
constexpr double kMinWeight = 1e-12;

void ValidateData(const DataSet& data, int num_components) {
  if (num_components < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one component");
  }
  if (data.size() < static_cast<std::size_t>(num_components)) {
    throw Error(ErrorCode::kInsufficientData,
                std::to_string(data.size()) + " vectors for " +
                    std::to_string(num_components) + " components");
  }
  const std::size_t dim = data[0].size();
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "zero-dimensional data");
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (data[n].size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector " + std::to_string(n) + " has dimension " +
                      std::to_string(data[n].size()) + ", expected " +
                      std::to_string(dim));
    }
    for (double v : data[n]) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteInput,
                    "vector " + std::to_string(n) + " has a non-finite component");
      }
    }
  }
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t Nearest(std::span<const double> x,
                    const std::vector<std::vector<double>>& centers,
                    double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double d = SquaredDistance(x, centers[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (dist != nullptr) *dist = best_d;
  return best;
}

std::vector<double> ReadVector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kMalformedFile, std::string(what) + " is not an array");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw Error(ErrorCode::kMalformedFile, std::string(what) + " holds a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void GmmModel::Validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kInvariantViolation, "gmm '" + label + "': " + what);
  };
  const auto m = weights.size();
  if (m == 0) fail("no components");
  if (dim <= 0) fail("non-positive dimension");
  if (means.size() != m || variances.size() != m) {
    fail("component count differs between weights, means and variances");
  }
  if (!(var_floor > 0.0) || !std::isfinite(var_floor)) fail("variance floor must be positive");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) fail("non-positive weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("weights sum to " + std::to_string(sum));
  for (std::size_t i = 0; i < m; ++i) {
    if (means[i].size() != static_cast<std::size_t>(dim) ||
        variances[i].size() != static_cast<std::size_t>(dim)) {
      fail("component " + std::to_string(i) + " has the wrong dimension");
    }
    for (int k = 0; k < dim; ++k) {
      if (!std::isfinite(means[i][k])) fail("non-finite mean");
      if (!std::isfinite(variances[i][k]) || variances[i][k] < var_floor) {
        fail("variance " + std::to_string(variances[i][k]) + " below floor");
      }
    }
  }
}

double LogSumExp(std::span<const double> x) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : x) s += std::exp(v - hi);
  return hi + std::log(s);
}

GmmEvaluator::GmmEvaluator(const GmmModel& model) : dim_(model.dim) {
  const int m = model.num_components();
  log_weights_.resize(static_cast<std::size_t>(m));
  log_norms_.resize(static_cast<std::size_t>(m));
  means_.resize(static_cast<std::size_t>(m) * dim_);
  inv_variances_.resize(static_cast<std::size_t>(m) * dim_);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (int i = 0; i < m; ++i) {
    log_weights_[i] = std::log(model.weights[i]);
    double log_det = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const std::size_t idx = static_cast<std::size_t>(i) * dim_ + k;
      means_[idx] = model.means[i][k];
      inv_variances_[idx] = 1.0 / model.variances[i][k];
      log_det += std::log(model.variances[i][k]);
    }
    log_norms_[i] = -0.5 * (dim_ * log_2pi + log_det);
  }
}

void GmmEvaluator::WeightedComponentLogDensities(std::span<const double> c,
                                                 std::span<double> out) const {
  const int m = num_components();
  for (int i = 0; i < m; ++i) {
    const double* mu = means_.data() + static_cast<std::size_t>(i) * dim_;
    const double* iv = inv_variances_.data() + static_cast<std::size_t>(i) * dim_;
    double q = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double d = c[k] - mu[k];
      q += d * d * iv[k];
    }
    out[i] = log_weights_[i] + log_norms_[i] - 0.5 * q;
  }
}

double GmmEvaluator::LogLikelihood(std::span<const double> c) const {
  if (static_cast<int>(c.size()) != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector of dimension " + std::to_string(c.size()) +
                    " for a model of dimension " + std::to_string(dim_));
  }
  constexpr int kStack = 64;
  const int m = num_components();
  if (m <= kStack) {
    double buf[kStack];
    WeightedComponentLogDensities(c, std::span<double>(buf, m));
    return LogSumExp(std::span<const double>(buf, m));
  }
  std::vector<double> buf(static_cast<std::size_t>(m));
  WeightedComponentLogDensities(c, buf);
  return LogSumExp(buf);
}

double LogLikelihood(const GmmModel& model, std::span<const double> c) {
  if (static_cast<int>(c.size()) != model.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector of dimension " + std::to_string(c.size()) +
                    " for a model of dimension " + std::to_string(model.dim));
  }
  return GmmEvaluator(model).LogLikelihood(c);
}

GmmModel KMeansInit(const DataSet& data, int num_components, std::uint64_t seed,
                    double var_floor) {
  ValidateData(data, num_components);
  const std::size_t n = data.size();
  const std::size_t dim = data[0].size();
  const auto m = static_cast<std::size_t>(num_components);
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  std::vector<std::vector<double>> centers;
  centers.reserve(m);
  std::vector<char> chosen(n, 0);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  centers.push_back(data[first]);
  chosen[first] = 1;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = SquaredDistance(data[i], centers[0]);
  while (centers.size() < m) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc >= r) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a center; pick an unused one.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      pick = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
    }
    chosen[pick] = 1;
    centers.push_back(data[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(data[i], centers.back()));
    }
  }

  // Lloyd iterations.
  std::vector<std::size_t> assign(n, m);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(m);
  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = Nearest(data[i], centers, &dist[i]);
      if (k != assign[i]) {
        assign[i] = k;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(m, std::vector<double>(dim, 0.0));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t k = 0; k < dim; ++k) sums[assign[i]][k] += data[i][k];
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (counts[c] == 0) {
        // Move an empty center onto the worst-served point.
        const auto far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        centers[c] = data[far];
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t k = 0; k < dim; ++k) {
        centers[c][k] = sums[c][k] / static_cast<double>(counts[c]);
      }
    }
  }

  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    assign[i] = Nearest(data[i], centers, nullptr);
    ++counts[assign[i]];
  }
  GmmModel model;
  model.dim = static_cast<int>(dim);
  model.var_floor = var_floor;
  model.means = centers;
  model.variances.assign(m, std::vector<double>(dim, 0.0));
  model.weights.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = assign[i];
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = data[i][k] - centers[c][k];
      model.variances[c][k] += d * d;
    }
  }
  double wsum = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = counts[c] > 0 ? model.variances[c][k] / counts[c] : 0.0;
      model.variances[c][k] = std::max(v, var_floor);
    }
    model.weights[c] = std::max(static_cast<double>(counts[c]) / n, kMinWeight);
    wsum += model.weights[c];
  }
  for (double& w : model.weights) w /= wsum;
  return model;
}

EmResult TrainEm(const DataSet& data, const EmOptions& options) {
  ValidateData(data, options.num_components);
  if (options.max_iters < 0 || !(options.rel_tol >= 0.0) ||
      !(options.var_floor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad EM options");
  }
  const std::size_t n = data.size();
  const std::size_t dim = data[0].size();
  const auto m = static_cast<std::size_t>(options.num_components);

  EmResult result;
  result.model = KMeansInit(data, options.num_components, options.seed,
                            options.var_floor);
  GmmModel& model = result.model;

  std::vector<double> resp(n * m);
  std::vector<double> nk(m);
  for (int iter = 0;; ++iter) {
    // E-step.
    const GmmEvaluator eval(model);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::span<double> r(resp.data() + i * m, m);
      eval.WeightedComponentLogDensities(data[i], r);
      const double lse = LogSumExp(r);
      total += lse;
      for (double& v : r) v = std::exp(v - lse);
    }
    const double mean_ll = total / static_cast<double>(n);
    result.mean_log_likelihood.push_back(mean_ll);
    if (iter > 0) {
      const double prev = result.mean_log_likelihood[result.mean_log_likelihood.size() - 2];
      const double rel = (mean_ll - prev) / std::max(std::abs(prev), 1e-300);
      if (rel < options.rel_tol) {
        result.converged = true;
        break;
      }
    }
    if (iter == options.max_iters) break;

    // M-step.
    std::fill(nk.begin(), nk.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < m; ++c) nk[c] += resp[i * m + c];
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (!(nk[c] > 0.0)) continue;  // starved component keeps its shape
      std::vector<double> mu(dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * m + c];
        if (r == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) mu[k] += r * data[i][k];
      }
      for (double& v : mu) v /= nk[c];
      std::vector<double> var(dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * m + c];
        if (r == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) {
          const double d = data[i][k] - mu[k];
          var[k] += r * d * d;
        }
      }
      for (double& v : var) v = std::max(v / nk[c], options.var_floor);
      model.means[c] = std::move(mu);
      model.variances[c] = std::move(var);
    }
    double wsum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      model.weights[c] = std::max(nk[c] / static_cast<double>(n), kMinWeight);
      wsum += model.weights[c];
    }
    for (double& w : model.weights) w /= wsum;
    result.iterations = iter + 1;
  }
  return result;
}

nlohmann::json GmmToJson(const GmmModel& model) {
  return nlohmann::json{{"label", model.label},
                        {"dim", model.dim},
                        {"var_floor", model.var_floor},
                        {"weights", model.weights},
                        {"means", model.means},
                        {"variances", model.variances}};
}

GmmModel GmmFromJson(const nlohmann::json& j) {
  GmmModel model;
  try {
    if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, "model is not an object");
    model.label = j.at("label").get<std::string>();
    model.dim = j.at("dim").get<int>();
    model.var_floor = j.at("var_floor").get<double>();
    model.weights = ReadVector(j.at("weights"), "weights");
    for (const auto& row : j.at("means")) model.means.push_back(ReadVector(row, "means"));
    for (const auto& row : j.at("variances")) {
      model.variances.push_back(ReadVector(row, "variances"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
  model.Validate();
  return model;
}

void SaveModel(const std::string& path, const GmmModel& model) {
  model.Validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << GmmToJson(model).dump(1) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

GmmModel LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  return GmmFromJson(j);
}

}  // namespace hlight
