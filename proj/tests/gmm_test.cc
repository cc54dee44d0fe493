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

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace hlight {
namespace {

using testing::TempDir;

GmmModel Single(double mean, double var) {
  GmmModel m;
  m.label = "x";
  m.dim = 1;
  m.weights = {1.0};
  m.means = {{mean}};
  m.variances = {{var}};
  return m;
}

GmmModel RandomModel(std::mt19937_64& rng, int m, int d) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::normal_distribution<double> g;
  GmmModel model;
  model.label = "random";
  model.dim = d;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    model.weights.push_back(u(rng));
    total += model.weights.back();
    model.means.emplace_back(d);
    model.variances.emplace_back(d);
    for (int j = 0; j < d; ++j) {
      model.means[i][j] = 3.0 * g(rng);
      model.variances[i][j] = u(rng);
    }
  }
  for (double& w : model.weights) w /= total;
  return model;
}

// Direct evaluation of the mixture density, no log-space tricks.
double NaiveDensity(const GmmModel& m, const std::vector<double>& c) {
  double p = 0.0;
  for (int i = 0; i < m.num_components(); ++i) {
    double g = 1.0;
    for (int j = 0; j < m.dim; ++j) {
      const double z = c[j] - m.means[i][j];
      g *= std::exp(-0.5 * z * z / m.variances[i][j]) /
           std::sqrt(2 * std::numbers::pi * m.variances[i][j]);
    }
    p += m.weights[i] * g;
  }
  return p;
}

TEST(LogSumExpTest, StableAndEdgeCases) {
  const std::vector<double> big = {-700.0, -701.0, -702.0};
  EXPECT_NEAR(LogSumExp(big),
              -700.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2.0)), 1e-12);
  const std::vector<double> huge = {1000.0, 1000.0};
  EXPECT_NEAR(LogSumExp(huge), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_EQ(LogSumExp({}), -std::numeric_limits<double>::infinity());
  const std::vector<double> ninf(2, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(LogSumExp(ninf), -std::numeric_limits<double>::infinity());
}

TEST(LogLikelihoodTest, StandardNormalAtMean) {
  const std::vector<double> c = {0.0};
  EXPECT_NEAR(LogLikelihood(Single(0.0, 1.0), c), -0.5 * std::log(2 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(LogLikelihood(Single(0.0, 1.0), c), -0.918939, 1e-6);
}

TEST(LogLikelihoodTest, MatchesNaiveDensity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  const GmmModel m = RandomModel(rng, 5, 3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> c = {g(rng), g(rng), g(rng)};
    EXPECT_NEAR(LogLikelihood(m, c), std::log(NaiveDensity(m, c)), 1e-10);
  }
}

TEST(LogLikelihoodTest, TranslationInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  GmmModel m = RandomModel(rng, 4, 6);
  std::vector<double> c(6), shift(6);
  for (int j = 0; j < 6; ++j) {
    c[j] = g(rng);
    shift[j] = 10.0 * g(rng);
  }
  const double before = LogLikelihood(m, c);
  for (auto& mu : m.means) {
    for (int j = 0; j < 6; ++j) mu[j] += shift[j];
  }
  for (int j = 0; j < 6; ++j) c[j] += shift[j];
  EXPECT_NEAR(LogLikelihood(m, c), before, 1e-9);
}

TEST(LogLikelihoodTest, SeparatedPairAtMean) {
  GmmModel m;
  m.label = "pair";
  m.dim = 1;
  m.weights = {0.5, 0.5};
  m.means = {{-50.0}, {50.0}};
  m.variances = {{1.0}, {1.0}};
  const std::vector<double> at = {50.0};
  const double peak = 1.0 / std::sqrt(2 * std::numbers::pi);
  const double other = std::exp(-0.5 * 100.0 * 100.0) / std::sqrt(2 * std::numbers::pi);
  EXPECT_NEAR(LogLikelihood(m, at), std::log(0.5 * peak + 0.5 * other), 1e-6);
  EXPECT_NEAR(LogLikelihood(m, at), std::log(0.5) + std::log(peak), 1e-6);
}

TEST(LogLikelihoodTest, DensityIntegratesToOne) {
  std::mt19937_64 rng(3);
  const GmmModel m = RandomModel(rng, 3, 1);
  double integral = 0.0;
  const double step = 1e-3;
  for (double x = -40.0; x <= 40.0; x += step) {
    const std::vector<double> c = {x};
    integral += std::exp(LogLikelihood(m, c)) * step;
  }
  EXPECT_NEAR(integral, 1.0, 1e-3);
}

TEST(LogLikelihoodTest, FarPointsStayFinite) {
  const GmmModel m = Single(0.0, 1e-4);
  const std::vector<double> far = {1.0};  // log density about -5000
  const double ll = LogLikelihood(m, far);
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_LT(ll, -4000.0);
}

TEST(LogLikelihoodTest, DimensionMismatch) {
  const std::vector<double> c = {0.0, 1.0};
  EXPECT_HLIGHT_ERROR(LogLikelihood(Single(0.0, 1.0), c), ErrorCode::kDimensionMismatch);
}

TEST(GmmModelTest, ValidateRejectsBrokenModels) {
  GmmModel m = Single(0.0, 1.0);
  m.Validate();
  m.weights = {0.9};
  EXPECT_HLIGHT_ERROR(m.Validate(), ErrorCode::kInvariantViolation);
  m = Single(0.0, -1.0);
  EXPECT_HLIGHT_ERROR(m.Validate(), ErrorCode::kInvariantViolation);
  m = Single(0.0, 1e-6);
  EXPECT_HLIGHT_ERROR(m.Validate(), ErrorCode::kInvariantViolation);
  m = Single(0.0, 1.0);
  m.means[0].push_back(1.0);
  EXPECT_HLIGHT_ERROR(m.Validate(), ErrorCode::kInvariantViolation);
}

DataSet TwoClusters(std::mt19937_64& rng, int per, double sep, int d = 2) {
  std::normal_distribution<double> g;
  DataSet data;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < per; ++i) {
      std::vector<double> x(d);
      for (double& v : x) v = (c == 0 ? -sep : sep) + g(rng);
      data.push_back(x);
    }
  }
  return data;
}

TEST(KMeansInitTest, OnePointPerComponent) {
  const DataSet data = {{0.0}, {5.0}, {10.0}};
  const GmmModel m = KMeansInit(data, 3, 1);
  std::vector<double> means;
  for (const auto& mu : m.means) means.push_back(mu[0]);
  std::sort(means.begin(), means.end());
  EXPECT_EQ(means, (std::vector<double>{0.0, 5.0, 10.0}));
  for (double w : m.weights) EXPECT_NEAR(w, 1.0 / 3, 1e-12);
  for (const auto& v : m.variances) EXPECT_EQ(v[0], kDefaultVarFloor);
}

TEST(KMeansInitTest, RecoversSeparatedClusters) {
  std::mt19937_64 rng(4);
  const DataSet data = TwoClusters(rng, 100, 10.0);
  const GmmModel m = KMeansInit(data, 2, 9);
  // Compare against the sample means of the generating halves.
  std::vector<double> lo(2, 0.0), hi(2, 0.0);
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 2; ++j) {
      lo[j] += data[i][j] / 100;
      hi[j] += data[100 + i][j] / 100;
    }
  }
  for (const auto& mu : m.means) {
    const auto& want = mu[0] < 0 ? lo : hi;
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(mu[j], want[j], 0.1);
  }
  EXPECT_NE(m.means[0][0] < 0, m.means[1][0] < 0);
}

TEST(KMeansInitTest, DeterministicAndChecksSize) {
  std::mt19937_64 rng(5);
  const DataSet data = TwoClusters(rng, 50, 3.0, 4);
  const GmmModel a = KMeansInit(data, 4, 77);
  const GmmModel b = KMeansInit(data, 4, 77);
  EXPECT_EQ(a.means, b.means);
  EXPECT_EQ(a.variances, b.variances);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_HLIGHT_ERROR(KMeansInit(DataSet{{1.0}}, 2, 0), ErrorCode::kInsufficientData);
}

TEST(TrainEmTest, SingleGaussianMatchesSampleStatistics) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(3.0, 2.0);
  DataSet data(5000, std::vector<double>(1));
  double mean = 0.0;
  for (auto& x : data) {
    x[0] = g(rng);
    mean += x[0] / data.size();
  }
  double var = 0.0;
  for (const auto& x : data) var += (x[0] - mean) * (x[0] - mean) / data.size();
  EmOptions opt;
  opt.num_components = 1;
  const EmResult r = TrainEm(data, opt);
  EXPECT_NEAR(r.model.means[0][0], mean, 3.0 * std::sqrt(var / data.size()));
  EXPECT_NEAR(r.model.variances[0][0], var, 0.2 * var);
  EXPECT_NEAR(r.model.weights[0], 1.0, 1e-12);
}

TEST(TrainEmTest, RecoversTwoComponents) {
  std::mt19937_64 rng(7);
  const DataSet data = TwoClusters(rng, 1000, 5.0);
  EmOptions opt;
  opt.num_components = 2;
  const GmmModel m = TrainEm(data, opt).model;
  for (int k = 0; k < 2; ++k) {
    const double target = m.means[k][0] < 0 ? -5.0 : 5.0;
    EXPECT_NEAR(m.means[k][0], target, 0.2);
    EXPECT_NEAR(m.means[k][1], target, 0.2);
    EXPECT_NEAR(m.weights[k], 0.5, 0.05);
  }
}

TEST(TrainEmTest, MonotoneAndFloored) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  DataSet data(600, std::vector<double>(5));
  for (auto& x : data) {
    for (double& v : x) v = g(rng);
    x[4] = 0.0;  // degenerate dimension exercises the floor
  }
  EmOptions opt;
  opt.num_components = 6;
  const EmResult r = TrainEm(data, opt);
  ASSERT_GE(r.mean_log_likelihood.size(), 2u);
  EXPECT_EQ(static_cast<int>(r.mean_log_likelihood.size()), r.iterations + 1);
  for (std::size_t i = 1; i < r.mean_log_likelihood.size(); ++i) {
    EXPECT_GE(r.mean_log_likelihood[i], r.mean_log_likelihood[i - 1] - 1e-8);
  }
  r.model.Validate();
  for (const auto& v : r.model.variances) EXPECT_GE(v[4], opt.var_floor);
}

TEST(TrainEmTest, StopsAtMaxIterations) {
  std::mt19937_64 rng(9);
  const DataSet data = TwoClusters(rng, 200, 0.5, 3);
  EmOptions opt;
  opt.num_components = 4;
  opt.max_iters = 3;
  opt.rel_tol = 0.0;
  const EmResult r = TrainEm(data, opt);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_FALSE(r.converged);
}

TEST(TrainEmTest, Errors) {
  EmOptions opt;
  opt.num_components = 3;
  EXPECT_HLIGHT_ERROR(TrainEm(DataSet{{1.0}, {2.0}}, opt), ErrorCode::kInsufficientData);
  DataSet bad = {{1.0}, {2.0}, {std::numeric_limits<double>::infinity()}, {3.0}};
  EXPECT_HLIGHT_ERROR(TrainEm(bad, opt), ErrorCode::kNonFiniteInput);
  DataSet ragged = {{1.0}, {2.0, 3.0}, {4.0}};
  EXPECT_HLIGHT_ERROR(TrainEm(ragged, opt), ErrorCode::kDimensionMismatch);
}

TEST(TrainEmTest, Deterministic) {
  std::mt19937_64 rng(10);
  const DataSet data = TwoClusters(rng, 150, 2.0, 3);
  EmOptions opt;
  opt.num_components = 3;
  opt.seed = 42;
  const EmResult a = TrainEm(data, opt);
  const EmResult b = TrainEm(data, opt);
  EXPECT_EQ(a.model.means, b.model.means);
  EXPECT_EQ(a.mean_log_likelihood, b.mean_log_likelihood);
}

TEST(ModelFileTest, RoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const GmmModel m = RandomModel(rng, 7, 10);
  SaveModel(dir.File("m.json"), m);
  const GmmModel back = LoadModel(dir.File("m.json"));
  EXPECT_EQ(back.means, m.means);
  EXPECT_EQ(back.variances, m.variances);
  EXPECT_EQ(back.weights, m.weights);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> c(10);
    for (double& v : c) v = 3.0 * g(rng);
    EXPECT_NEAR(LogLikelihood(back, c), LogLikelihood(m, c), 1e-12);
  }
}

TEST(ModelFileTest, RejectsInvalidFiles) {
  TempDir dir;
  GmmModel m = Single(0.0, 1.0);
  auto j = GmmToJson(m);
  j["weights"] = {0.9};
  std::ofstream(dir.File("w.json")) << j.dump();
  EXPECT_HLIGHT_ERROR(LoadModel(dir.File("w.json")), ErrorCode::kInvariantViolation);

  j = GmmToJson(m);
  j["variances"] = {{-1.0}};
  std::ofstream(dir.File("v.json")) << j.dump();
  EXPECT_HLIGHT_ERROR(LoadModel(dir.File("v.json")), ErrorCode::kInvariantViolation);

  std::ofstream(dir.File("junk.json")) << "{not json";
  EXPECT_HLIGHT_ERROR(LoadModel(dir.File("junk.json")), ErrorCode::kMalformedFile);
  EXPECT_HLIGHT_ERROR(LoadModel(dir.File("none.json")), ErrorCode::kFileNotFound);
}

}  // namespace
}  // namespace hlight
