/*
 * Copyright 2026 The divrec Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "divrec/factorization.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "divrec/error.hpp"
#include "support/fixtures.hpp"

namespace divrec {
namespace {

using testing::Entry;
using testing::make_dataset;

FactorModel model_with(const std::vector<std::vector<double>>& q,
                       const std::vector<std::vector<double>>& p) {
  FactorModel model;
  const auto d = static_cast<Eigen::Index>(q.front().size());
  model.user_factors.resize(static_cast<Eigen::Index>(q.size()), d);
  model.item_factors.resize(d, static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (Eigen::Index f = 0; f < d; ++f) model.user_factors(static_cast<Eigen::Index>(i), f) = q[i][f];
  }
  for (std::size_t j = 0; j < p.size(); ++j) {
    for (Eigen::Index f = 0; f < d; ++f) model.item_factors(f, static_cast<Eigen::Index>(j)) = p[j][f];
  }
  model.config.dim = static_cast<std::size_t>(d);
  return model;
}

// Dense system solved by Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    std::swap(a[c], a[pivot]);
    std::swap(b[c], b[pivot]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

// Random sparse dataset with every row and column non-empty.
RatingsDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t m, double density) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> value(1, 5);
  std::vector<Entry> entries;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j == u % m || u == j % n || keep(rng)) {
        entries.push_back({u, j, static_cast<double>(value(rng))});
      }
    }
  }
  return make_dataset(n, m, entries);
}

TEST(InitFactors, DeterministicAndShaped) {
  TrainConfig config;
  config.dim = 2;
  config.seed = 7;
  const auto a = init_factors(2, 3, config);
  const auto b = init_factors(2, 3, config);
  EXPECT_EQ(a.user_factors, b.user_factors);
  EXPECT_EQ(a.item_factors, b.item_factors);
  EXPECT_EQ(a.user_factors.rows(), 2);
  EXPECT_EQ(a.item_factors.cols(), 3);
  const double bound = 1.0 / std::sqrt(2.0);
  EXPECT_GE(a.user_factors.minCoeff(), 0.0);
  EXPECT_LE(a.user_factors.maxCoeff(), bound);
  EXPECT_LE(a.item_factors.maxCoeff(), bound);

  config.seed = 8;
  EXPECT_NE(init_factors(2, 3, config).user_factors, a.user_factors);
}

TEST(InitFactors, ZeroScaleAndMinimalShape) {
  TrainConfig config;
  config.dim = 3;
  config.init_scale = 0.0;
  const auto zero = init_factors(4, 5, config);
  EXPECT_TRUE(zero.user_factors.isZero(0.0));
  EXPECT_TRUE(zero.item_factors.isZero(0.0));

  config.dim = 1;
  const auto tiny = init_factors(1, 1, config);
  EXPECT_EQ(tiny.user_factors.rows(), 1);
  EXPECT_EQ(tiny.user_factors.cols(), 1);
  EXPECT_EQ(tiny.item_factors.rows(), 1);
  EXPECT_EQ(tiny.item_factors.cols(), 1);
}

TEST(TrainConfig, Validation) {
  TrainConfig config;
  EXPECT_NO_THROW(config.validate());
  config.dim = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = {};
  config.lambda_p = -1.0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = {};
  config.tolerance = 0.0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = {};
  config.init_scale = -0.5;
  EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(Loss, ZeroFactorsSumSquares) {
  const auto ds = make_dataset(2, 2, {{0, 0, 4}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}});
  const auto model = model_with({{0}, {0}}, {{0}, {0}});
  EXPECT_DOUBLE_EQ(loss(ds, model, 0.0, 0.0), 25.0);
}

TEST(Loss, ExactFactorizationIsZero) {
  const auto ds = make_dataset(2, 2, {{0, 0, 4}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}});
  const auto model = model_with({{2}, {1}}, {{2}, {1}});
  EXPECT_DOUBLE_EQ(loss(ds, model, 0.0, 0.0), 0.0);
}

TEST(Loss, HandArithmetic) {
  const auto ds = make_dataset(1, 1, {{0, 0, 3}});
  const auto model = model_with({{1}}, {{1}});
  EXPECT_DOUBLE_EQ(loss(ds, model, 1.0, 1.0), 6.0);
  EXPECT_THROW(loss(ds, model_with({{1}, {1}}, {{1}}), 1.0, 1.0), std::invalid_argument);
}

TEST(HalfStep, ScalarLeastSquares) {
  const auto ds = make_dataset(1, 1, {{0, 0, 4}});
  const auto q = solve_user_factors(ds, model_with({{0}}, {{2}}).item_factors, 0.0);
  EXPECT_DOUBLE_EQ(q(0, 0), 2.0);
  const auto p = solve_item_factors(ds, model_with({{2}}, {{0}}).user_factors, 0.0);
  EXPECT_DOUBLE_EQ(p(0, 0), 2.0);
}

TEST(HalfStep, OrthonormalDesign) {
  const auto ds = make_dataset(1, 2, {{0, 0, 3}, {0, 1, 5}});
  const auto q = solve_user_factors(ds, model_with({{0, 0}}, {{1, 0}, {0, 1}}).item_factors, 0.0);
  EXPECT_DOUBLE_EQ(q(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(q(0, 1), 5.0);

  const auto items = make_dataset(2, 1, {{0, 0, 3}, {1, 0, 5}});
  const auto p =
      solve_item_factors(items, model_with({{1, 0}, {0, 1}}, {{0, 0}}).user_factors, 0.0);
  EXPECT_DOUBLE_EQ(p(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(p(1, 0), 5.0);
}

TEST(HalfStep, HeavyRegularizationShrinksToZero) {
  const auto ds = make_dataset(1, 2, {{0, 0, 3}, {0, 1, 5}});
  const auto model = model_with({{1, 1}}, {{1, 0.5}, {0.2, 1}});
  EXPECT_LT(solve_user_factors(ds, model.item_factors, 1e12).norm(), 1e-9);
  EXPECT_LT(solve_item_factors(ds, model.user_factors, 1e12).norm(), 1e-9);
}

TEST(HalfStep, SingularSystemRaises) {
  // d = 2 with a single observation per row and no regularization.
  const auto ds = make_dataset(1, 1, {{0, 0, 3}});
  const auto model = model_with({{1, 1}}, {{1, 2}});
  EXPECT_THROW(solve_user_factors(ds, model.item_factors, 0.0), SolveError);
}

TEST(HalfStep, MatchesNormalEquationOracle) {
  std::mt19937_64 rng(42);
  const auto ds = random_dataset(rng, 6, 9, 0.5);
  TrainConfig config;
  config.dim = 3;
  config.seed = 5;
  const auto init = init_factors(6, 9, config);
  const double lambda = 0.3;
  const auto q = solve_user_factors(ds, init.item_factors, lambda, 3);
  for (std::size_t u = 0; u < 6; ++u) {
    std::vector<std::vector<double>> a(3, std::vector<double>(3, 0.0));
    std::vector<double> b(3, 0.0);
    for (const auto& obs : ds.user_ratings(u)) {
      for (int f = 0; f < 3; ++f) {
        b[f] += obs.value * init.item_factors(f, static_cast<Eigen::Index>(obs.other));
        for (int g = 0; g < 3; ++g) {
          a[f][g] += init.item_factors(f, static_cast<Eigen::Index>(obs.other)) *
                     init.item_factors(g, static_cast<Eigen::Index>(obs.other));
        }
      }
    }
    for (int f = 0; f < 3; ++f) a[f][f] += lambda;
    const auto x = gauss_solve(a, b);
    for (int f = 0; f < 3; ++f) {
      EXPECT_NEAR(q(static_cast<Eigen::Index>(u), f), x[f], 1e-10);
    }
  }
}

TEST(Train, RankOneRecovery) {
  const auto ds = make_dataset(2, 2, {{0, 0, 4}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}});
  TrainConfig config;
  config.dim = 1;
  config.lambda_q = config.lambda_p = 1e-6;
  config.tolerance = 1e-10;
  config.max_iters = 500;
  const auto model = train(ds, config);
  EXPECT_LT(model.report.final_train_rmse, 1e-3);
  EXPECT_NEAR(predict(model, 0, 0), 4.0, 1e-2);
}

TEST(Train, MaxItersZeroReturnsInit) {
  const auto ds = make_dataset(2, 2, {{0, 0, 4}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}});
  TrainConfig config;
  config.dim = 2;
  config.max_iters = 0;
  const auto model = train(ds, config);
  const auto init = init_factors(2, 2, config);
  EXPECT_EQ(model.user_factors, init.user_factors);
  EXPECT_EQ(model.item_factors, init.item_factors);
  EXPECT_TRUE(model.report.loss_history.empty());
  EXPECT_EQ(model.report.iterations_run, 0u);
}

TEST(Train, LossNonIncreasingAndDeterministic) {
  std::mt19937_64 rng(9);
  const auto ds = random_dataset(rng, 15, 12, 0.4);
  TrainConfig config;
  config.dim = 4;
  config.max_iters = 30;
  config.tolerance = 1e-12;
  config.seed = 3;
  const auto a = train(ds, config);
  ASSERT_EQ(a.report.loss_history.size(), a.report.iterations_run);
  for (std::size_t t = 1; t < a.report.loss_history.size(); ++t) {
    EXPECT_LE(a.report.loss_history[t], a.report.loss_history[t - 1] * (1 + 1e-9));
  }
  config.threads = 4;
  const auto b = train(ds, config);
  EXPECT_EQ(a.user_factors, b.user_factors);
  EXPECT_EQ(a.item_factors, b.item_factors);
  EXPECT_EQ(a.report, b.report);
}

TEST(Predict, DotProducts) {
  EXPECT_DOUBLE_EQ(predict(model_with({{1, 2}}, {{3, 0.5}}), 0, 0), 4.0);
  EXPECT_DOUBLE_EQ(predict(model_with({{1, 2}}, {{0, 0}}), 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(predict(model_with({{2}}, {{2}}), 0, 0), 4.0);
  EXPECT_THROW(predict(model_with({{2}}, {{2}}), 1, 0), std::out_of_range);
  const auto scores = predict_user(model_with({{1, 2}}, {{3, 0.5}, {1, 1}}), 0);
  EXPECT_DOUBLE_EQ(scores(1), 3.0);
}

TEST(Rmse, HandValues) {
  EXPECT_DOUBLE_EQ(rmse(model_with({{2}}, {{2}}), make_dataset(1, 1, {{0, 0, 4}})), 0.0);
  EXPECT_DOUBLE_EQ(rmse(model_with({{1}}, {{3}}), make_dataset(1, 1, {{0, 0, 5}})), 2.0);
  // Predictions 1 for both entries, ratings 4 and 5.
  const auto two = make_dataset(1, 2, {{0, 0, 4}, {0, 1, 5}});
  EXPECT_NEAR(rmse(model_with({{1}}, {{1}, {1}}), two), std::sqrt(12.5), 1e-15);
  const auto empty = make_dataset(1, 1, {}, RatingsDataset::Coverage::partial);
  EXPECT_THROW(rmse(model_with({{1}}, {{1}}), empty), std::invalid_argument);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  const auto ds = random_dataset(rng, 7, 8, 0.5);
  TrainConfig config;
  config.dim = 3;
  config.seed = 4;
  config.init_scale = 1.0;
  const auto model = init_factors(7, 8, config);
  const double lq = 0.2, lp = 0.3, h = 1e-5;
  for (std::size_t u = 0; u < 7; ++u) {
    const auto g = user_gradient(ds, model, u, lq);
    for (Eigen::Index f = 0; f < 3; ++f) {
      auto plus = model, minus = model;
      plus.user_factors(static_cast<Eigen::Index>(u), f) += h;
      minus.user_factors(static_cast<Eigen::Index>(u), f) -= h;
      const double fd = (loss(ds, plus, lq, lp) - loss(ds, minus, lq, lp)) / (2 * h);
      EXPECT_LT(std::abs(fd - g(f)), 1e-4 * std::max(1.0, std::abs(g(f))));
    }
  }
  for (std::size_t j = 0; j < 8; ++j) {
    const auto g = item_gradient(ds, model, j, lp);
    for (Eigen::Index f = 0; f < 3; ++f) {
      auto plus = model, minus = model;
      plus.item_factors(f, static_cast<Eigen::Index>(j)) += h;
      minus.item_factors(f, static_cast<Eigen::Index>(j)) -= h;
      const double fd = (loss(ds, plus, lq, lp) - loss(ds, minus, lq, lp)) / (2 * h);
      EXPECT_LT(std::abs(fd - g(f)), 1e-4 * std::max(1.0, std::abs(g(f))));
    }
  }
}

TEST(ModelArtifact, RoundTripIsBitExact) {
  std::mt19937_64 rng(2);
  const auto ds = random_dataset(rng, 5, 6, 0.5);
  TrainConfig config;
  config.dim = 2;
  config.max_iters = 5;
  config.init_scale = 0.37;
  ModelArtifact artifact{train(ds, config), ds.users(), ds.items(), 0.2, 99};
  std::stringstream buffer;
  save_model(buffer, artifact);
  const auto text = buffer.str();
  EXPECT_EQ(text.rfind("divrec-model 1", 0), 0u);

  const auto loaded = load_model(buffer);
  EXPECT_EQ(loaded.model.user_factors, artifact.model.user_factors);
  EXPECT_EQ(loaded.model.item_factors, artifact.model.item_factors);
  EXPECT_EQ(loaded.model.config, artifact.model.config);
  EXPECT_EQ(loaded.model.report, artifact.model.report);
  EXPECT_EQ(loaded.users, artifact.users);
  EXPECT_EQ(loaded.items, artifact.items);
  EXPECT_EQ(loaded.split_fraction, 0.2);
  EXPECT_EQ(loaded.split_seed, 99u);

  std::stringstream again;
  save_model(again, loaded);
  EXPECT_EQ(again.str(), text);
}

TEST(ModelArtifact, RejectsForeignInput) {
  std::istringstream wrong("not-a-model 1\n");
  EXPECT_THROW(load_model(wrong), Error);
  std::istringstream truncated("divrec-model 1\n");
  EXPECT_THROW(load_model(truncated), Error);
}

}  // namespace
}  // namespace divrec
