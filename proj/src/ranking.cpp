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

#include "divrec/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace divrec {

Truth truth_for_user(const RatingsDataset& held_out, std::size_t user) {
  Truth truth;
  if (user >= held_out.n_users()) return truth;
  for (const auto& obs : held_out.user_ratings(user)) truth.emplace(obs.other, obs.value);
  return truth;
}

RecommendationList top_k(std::size_t user, std::span<const double> scores, std::size_t k,
                         std::span<const char> eligible) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (!eligible.empty() && eligible.size() != scores.size()) {
    throw std::invalid_argument("eligibility mask size does not match the score vector");
  }
  std::vector<std::size_t> pool;
  pool.reserve(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (eligible.empty() || eligible[j]) pool.push_back(j);
  }
  if (k > pool.size()) {
    throw std::invalid_argument("k=" + std::to_string(k) + " exceeds the " +
                                std::to_string(pool.size()) + " eligible items of user " +
                                std::to_string(user));
  }
  const auto by_rank = [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], a, scores[b], b);
  };
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                    by_rank);

  RecommendationList rec;
  rec.user = user;
  rec.items.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  for (const auto j : rec.items) rec.scores.push_back(scores[j]);
  return rec;
}

std::vector<char> eligible_items(const RatingsDataset& train, std::size_t user,
                                 bool exclude_observed) {
  std::vector<char> eligible(train.n_items(), 1);
  if (exclude_observed) {
    for (const auto& obs : train.user_ratings(user)) eligible[obs.other] = 0;
  }
  return eligible;
}

RecommendationList top_k(const FactorModel& model, const RatingsDataset& train, std::size_t user,
                         std::size_t k, bool exclude_observed) {
  if (model.n_items() != train.n_items() || model.n_users() != train.n_users()) {
    throw std::invalid_argument("top_k: model does not match the training data");
  }
  const Eigen::VectorXd scores = predict_user(model, user);
  const auto eligible = eligible_items(train, user, exclude_observed);
  return top_k(user, std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
               k, eligible);
}

std::optional<double> ndcg_at_k(const RecommendationList& rec, const Truth& truth,
                                std::size_t k) {
  if (truth.empty()) return std::nullopt;
  const std::size_t depth = std::min(k, rec.items.size());

  double dcg = 0.0;
  for (std::size_t r = 0; r < depth; ++r) {
    const auto it = truth.find(rec.items[r]);
    if (it != truth.end()) dcg += it->second / std::log2(static_cast<double>(r) + 2.0);
  }

  std::vector<double> ideal;
  ideal.reserve(truth.size());
  for (const auto& [item, rating] : truth) ideal.push_back(rating);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) {
    idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
  }
  if (idcg <= 0.0) return 0.0;
  return std::min(1.0, dcg / idcg);
}

namespace {

std::size_t relevant_hits(const RecommendationList& rec, const Truth& truth, std::size_t k,
                          double threshold) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < std::min(k, rec.items.size()); ++r) {
    const auto it = truth.find(rec.items[r]);
    if (it != truth.end() && it->second >= threshold) ++hits;
  }
  return hits;
}

std::size_t relevant_total(const Truth& truth, double threshold) {
  return static_cast<std::size_t>(std::count_if(
      truth.begin(), truth.end(), [&](const auto& entry) { return entry.second >= threshold; }));
}

}  // namespace

double precision_at_k(const RecommendationList& rec, const Truth& truth, std::size_t k,
                      double relevance_threshold) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  return static_cast<double>(relevant_hits(rec, truth, k, relevance_threshold)) /
         static_cast<double>(k);
}

std::optional<double> recall_at_k(const RecommendationList& rec, const Truth& truth,
                                  std::size_t k, double relevance_threshold) {
  const auto total = relevant_total(truth, relevance_threshold);
  if (total == 0) return std::nullopt;
  return static_cast<double>(relevant_hits(rec, truth, k, relevance_threshold)) /
         static_cast<double>(total);
}

std::optional<int> hit_rate_at_k(const RecommendationList& rec, const Truth& truth, std::size_t k,
                                 double relevance_threshold) {
  if (relevant_total(truth, relevance_threshold) == 0) return std::nullopt;
  return relevant_hits(rec, truth, k, relevance_threshold) > 0 ? 1 : 0;
}

Scorer::Scorer(FactorModel model) : model_(std::move(model)) {}

Scorer::Scorer(FactorModel model, Eigen::MatrixXd score_table)
    : model_(std::move(model)), table_(std::move(score_table)) {
  if (static_cast<std::size_t>(table_->rows()) != model_.n_users() ||
      static_cast<std::size_t>(table_->cols()) != model_.n_items()) {
    throw std::invalid_argument("score table shape does not match the model");
  }
}

std::vector<double> Scorer::user_scores(std::size_t user) const {
  if (user >= n_users()) throw std::out_of_range("user index out of range");
  std::vector<double> scores(n_items());
  if (table_) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      scores[j] = (*table_)(static_cast<Eigen::Index>(user), static_cast<Eigen::Index>(j));
    }
  } else {
    const Eigen::VectorXd predicted = predict_user(model_, user);
    std::copy(predicted.begin(), predicted.end(), scores.begin());
  }
  return scores;
}

}  // namespace divrec
