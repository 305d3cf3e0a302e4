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
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "divrec/error.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace divrec {

namespace {

void check_shape(const RatingsDataset& ratings, const FactorModel& model) {
  if (model.n_users() != ratings.n_users() || model.n_items() != ratings.n_items() ||
      static_cast<std::size_t>(model.user_factors.cols()) != model.dim()) {
    throw std::invalid_argument(
        "model shape (" + std::to_string(model.n_users()) + " users, " +
        std::to_string(model.n_items()) + " items) does not match ratings (" +
        std::to_string(ratings.n_users()) + " users, " + std::to_string(ratings.n_items()) +
        " items)");
  }
}

// Ridge solve for one row/column. `vector_of(other)` yields the fixed factor
// vector paired with an observation.
template <typename VectorOf>
Eigen::VectorXd solve_ridge(std::span<const Observation> observed, Eigen::Index dim,
                            double lambda, VectorOf&& vector_of, const char* what,
                            std::size_t index) {
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(dim, dim) * lambda;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (const auto& obs : observed) {
    const auto v = vector_of(obs.other);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(v);
    rhs.noalias() += obs.value * v;
  }
  const Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > std::numeric_limits<double>::epsilon())) {
    throw SolveError(std::string("singular ridge system for ") + what + " " +
                     std::to_string(index) + " (" + std::to_string(observed.size()) +
                     " observations, d=" + std::to_string(dim) +
                     "); use a positive regularization weight");
  }
  Eigen::VectorXd solution = llt.solve(rhs);
  if (!solution.allFinite()) {
    throw SolveError(std::string("non-finite solution for ") + what + " " +
                     std::to_string(index));
  }
  return solution;
}

}  // namespace

double TrainConfig::effective_init_scale() const {
  return init_scale.value_or(1.0 / std::sqrt(static_cast<double>(dim)));
}

void TrainConfig::validate() const {
  if (dim == 0) throw std::invalid_argument("dim must be positive");
  if (!(lambda_q >= 0.0) || !(lambda_p >= 0.0)) {
    throw std::invalid_argument("regularization weights must be non-negative");
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (init_scale && !(*init_scale >= 0.0 && std::isfinite(*init_scale))) {
    throw std::invalid_argument("init_scale must be finite and non-negative");
  }
}

FactorModel init_factors(std::size_t n_users, std::size_t n_items, const TrainConfig& config) {
  if (n_users == 0 || n_items == 0) {
    throw std::invalid_argument("init_factors needs at least one user and one item");
  }
  config.validate();
  const auto n = static_cast<Eigen::Index>(n_users);
  const auto m = static_cast<Eigen::Index>(n_items);
  const auto d = static_cast<Eigen::Index>(config.dim);
  const double scale = config.effective_init_scale();

  std::mt19937_64 rng(config.seed);
  FactorModel model{UserFactors(n, d), ItemFactors(d, m), config, {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index f = 0; f < d; ++f) model.user_factors(i, f) = scale * detail::uniform_unit(rng);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index f = 0; f < d; ++f) model.item_factors(f, j) = scale * detail::uniform_unit(rng);
  }
  return model;
}

double loss(const RatingsDataset& ratings, const FactorModel& model, double lambda_q,
            double lambda_p) {
  check_shape(ratings, model);
  double total = 0.0;
  for (const auto& r : ratings.ratings()) {
    const double residual = r.value - predict(model, r.user, r.item);
    total += residual * residual;
  }
  return total + lambda_q * model.user_factors.squaredNorm() +
         lambda_p * model.item_factors.squaredNorm();
}

UserFactors solve_user_factors(const RatingsDataset& ratings, const ItemFactors& items,
                               double lambda_q, std::size_t threads) {
  if (static_cast<std::size_t>(items.cols()) != ratings.n_items()) {
    throw std::invalid_argument("item factor count does not match ratings");
  }
  const Eigen::Index d = items.rows();
  UserFactors users(static_cast<Eigen::Index>(ratings.n_users()), d);
  detail::parallel_for(ratings.n_users(), threads, [&](std::size_t u) {
    users.row(static_cast<Eigen::Index>(u)) =
        solve_ridge(
            ratings.user_ratings(u), d, lambda_q,
            [&](std::size_t item) { return items.col(static_cast<Eigen::Index>(item)); }, "user",
            u)
            .transpose();
  });
  return users;
}

ItemFactors solve_item_factors(const RatingsDataset& ratings, const UserFactors& users,
                               double lambda_p, std::size_t threads) {
  if (static_cast<std::size_t>(users.rows()) != ratings.n_users()) {
    throw std::invalid_argument("user factor count does not match ratings");
  }
  const Eigen::Index d = users.cols();
  ItemFactors items(d, static_cast<Eigen::Index>(ratings.n_items()));
  detail::parallel_for(ratings.n_items(), threads, [&](std::size_t j) {
    items.col(static_cast<Eigen::Index>(j)) = solve_ridge(
        ratings.item_ratings(j), d, lambda_p,
        [&](std::size_t user) { return users.row(static_cast<Eigen::Index>(user)).transpose(); },
        "item", j);
  });
  return items;
}

FactorModel train(const RatingsDataset& ratings, const TrainConfig& config) {
  config.validate();
  FactorModel model = init_factors(ratings.n_users(), ratings.n_items(), config);
  auto& report = model.report;

  double previous = loss(ratings, model, config.lambda_q, config.lambda_p);
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    model.user_factors =
        solve_user_factors(ratings, model.item_factors, config.lambda_q, config.threads);
    model.item_factors =
        solve_item_factors(ratings, model.user_factors, config.lambda_p, config.threads);

    const double current = loss(ratings, model, config.lambda_q, config.lambda_p);
    report.loss_history.push_back(current);
    report.rmse_history.push_back(rmse(model, ratings));
    report.iterations_run = iter + 1;

    if (previous <= 0.0 || std::abs(previous - current) / previous < config.tolerance) break;
    previous = current;
  }
  report.final_train_rmse =
      report.rmse_history.empty() ? rmse(model, ratings) : report.rmse_history.back();
  return model;
}

double predict(const FactorModel& model, std::size_t user, std::size_t item) {
  if (user >= model.n_users() || item >= model.n_items()) {
    throw std::out_of_range("predict: index out of range");
  }
  return model.user_factors.row(static_cast<Eigen::Index>(user))
      .dot(model.item_factors.col(static_cast<Eigen::Index>(item)));
}

Eigen::VectorXd predict_user(const FactorModel& model, std::size_t user) {
  if (user >= model.n_users()) throw std::out_of_range("predict_user: user out of range");
  Eigen::VectorXd scores(model.item_factors.cols());
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    scores[j] = predict(model, user, static_cast<std::size_t>(j));
  }
  return scores;
}

double rmse(const FactorModel& model, const RatingsDataset& ratings) {
  if (ratings.empty()) throw std::invalid_argument("rmse of an empty dataset");
  if (ratings.n_users() > model.n_users() || ratings.n_items() > model.n_items()) {
    throw std::invalid_argument("rmse: model does not cover the dataset");
  }
  double total = 0.0;
  for (const auto& r : ratings.ratings()) {
    const double residual = r.value - predict(model, r.user, r.item);
    total += residual * residual;
  }
  return std::sqrt(total / static_cast<double>(ratings.size()));
}

Eigen::VectorXd user_gradient(const RatingsDataset& ratings, const FactorModel& model,
                              std::size_t user, double lambda_q) {
  check_shape(ratings, model);
  const auto q = model.user_factors.row(static_cast<Eigen::Index>(user)).transpose();
  Eigen::VectorXd grad = 2.0 * lambda_q * q;
  for (const auto& obs : ratings.user_ratings(user)) {
    const auto p = model.item_factors.col(static_cast<Eigen::Index>(obs.other));
    grad.noalias() -= 2.0 * (obs.value - q.dot(p)) * p;
  }
  return grad;
}

Eigen::VectorXd item_gradient(const RatingsDataset& ratings, const FactorModel& model,
                              std::size_t item, double lambda_p) {
  check_shape(ratings, model);
  const auto p = model.item_factors.col(static_cast<Eigen::Index>(item));
  Eigen::VectorXd grad = 2.0 * lambda_p * p;
  for (const auto& obs : ratings.item_ratings(item)) {
    const auto q = model.user_factors.row(static_cast<Eigen::Index>(obs.other)).transpose();
    grad.noalias() -= 2.0 * (obs.value - q.dot(p)) * q;
  }
  return grad;
}

}  // namespace divrec
