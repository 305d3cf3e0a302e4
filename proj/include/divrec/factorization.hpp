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

#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "divrec/dataset.hpp"

namespace divrec {

// n x d, row i is the user vector q_i.
using UserFactors = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
// d x m, column j is the item vector p_j (contiguous in memory).
using ItemFactors = Eigen::MatrixXd;

struct TrainConfig {
  std::size_t dim = 16;
  // Ridge weights on the user and item factors.
  double lambda_q = 0.05;
  double lambda_p = 0.05;
  std::size_t max_iters = 50;
  // Stop once |L_prev - L| / L_prev drops below this.
  double tolerance = 1e-5;
  // Upper bound of the uniform initialization; 1/sqrt(dim) when unset.
  std::optional<double> init_scale;
  std::uint64_t seed = 0;
  // Worker threads for the half-steps; results do not depend on it.
  std::size_t threads = 1;

  double effective_init_scale() const;
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

struct TrainReport {
  std::size_t iterations_run = 0;
  // Loss and train RMSE after each full iteration.
  std::vector<double> loss_history;
  std::vector<double> rmse_history;
  double final_train_rmse = 0.0;

  bool operator==(const TrainReport&) const = default;
};

struct FactorModel {
  UserFactors user_factors;
  ItemFactors item_factors;
  TrainConfig config;
  TrainReport report;

  std::size_t n_users() const { return static_cast<std::size_t>(user_factors.rows()); }
  std::size_t n_items() const { return static_cast<std::size_t>(item_factors.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(item_factors.rows()); }

  std::span<const double> item_vector(std::size_t item) const {
    return {item_factors.col(static_cast<Eigen::Index>(item)).data(), dim()};
  }
};

// Entries i.i.d. uniform on [0, init_scale], Q row by row then P column by
// column, from a generator seeded with config.seed.
FactorModel init_factors(std::size_t n_users, std::size_t n_items, const TrainConfig& config);

// Sum over observed entries of (r - q_i.p_j)^2 plus lambda_q * sum ||q_i||^2
// plus lambda_p * sum ||p_j||^2.
double loss(const RatingsDataset& ratings, const FactorModel& model, double lambda_q,
            double lambda_p);

// Exact minimizer of the loss over every q_i with P fixed: each row solves
// (P_i P_i^T + lambda_q I) q_i = P_i r_i. Throws SolveError on a singular
// system.
UserFactors solve_user_factors(const RatingsDataset& ratings, const ItemFactors& items,
                               double lambda_q, std::size_t threads = 1);

// Mirror of solve_user_factors with Q fixed.
ItemFactors solve_item_factors(const RatingsDataset& ratings, const UserFactors& users,
                               double lambda_p, std::size_t threads = 1);

// Alternates user and item half-steps from init_factors until the relative
// loss change falls below config.tolerance or config.max_iters is reached.
FactorModel train(const RatingsDataset& ratings, const TrainConfig& config);

// q_i . p_j, unclamped.
double predict(const FactorModel& model, std::size_t user, std::size_t item);

// Predicted scores of one user for every item.
Eigen::VectorXd predict_user(const FactorModel& model, std::size_t user);

double rmse(const FactorModel& model, const RatingsDataset& ratings);

// Gradient of loss() with respect to q_i, resp. p_j.
Eigen::VectorXd user_gradient(const RatingsDataset& ratings, const FactorModel& model,
                              std::size_t user, double lambda_q);
Eigen::VectorXd item_gradient(const RatingsDataset& ratings, const FactorModel& model,
                              std::size_t item, double lambda_p);

// Text artifact with hex-float payload; load(save(m)) reproduces m bit for
// bit. The id maps of the training data travel with the model so that
// evaluation can refuse data indexed differently.
struct ModelArtifact {
  FactorModel model;
  IdMap users;
  IdMap items;
  // Holdout used to produce the training split, when there was one.
  std::optional<double> split_fraction;
  std::optional<std::uint64_t> split_seed;
};

void save_model(std::ostream& out, const ModelArtifact& artifact);
ModelArtifact load_model(std::istream& in);

}  // namespace divrec
