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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "divrec/dataset.hpp"
#include "divrec/factorization.hpp"

namespace divrec {

// top(i, k): k distinct items for one user with their predicted scores.
// Scores are non-increasing unless `reranked` is set.
struct RecommendationList {
  std::size_t user = 0;
  std::vector<std::size_t> items;
  std::vector<double> scores;
  bool reranked = false;

  std::size_t size() const { return items.size(); }
  bool operator==(const RecommendationList&) const = default;
};

// Held-out ratings of one user, item index -> rating.
using Truth = std::map<std::size_t, double>;

Truth truth_for_user(const RatingsDataset& held_out, std::size_t user);

// Strict ranking order: higher score first, then lower item index.
inline bool ranks_before(double score_a, std::size_t item_a, double score_b, std::size_t item_b) {
  return score_a > score_b || (score_a == score_b && item_a < item_b);
}

// Highest-scoring k items among those with eligible[j] != 0 (all items when
// `eligible` is empty). Throws std::invalid_argument when fewer than k items
// are eligible.
RecommendationList top_k(std::size_t user, std::span<const double> scores, std::size_t k,
                         std::span<const char> eligible = {});

RecommendationList top_k(const FactorModel& model, const RatingsDataset& train, std::size_t user,
                         std::size_t k, bool exclude_observed = true);

// Per-item eligibility of a user: everything, or everything not rated in
// `train` when exclude_observed is set.
std::vector<char> eligible_items(const RatingsDataset& train, std::size_t user,
                                 bool exclude_observed);

// Raw-rating gains, log2(rank+1) discount, ideal ordering from the user's
// truth. nullopt when the truth is empty (the user is skipped, which is not
// the same as scoring 0).
std::optional<double> ndcg_at_k(const RecommendationList& rec, const Truth& truth, std::size_t k);

double precision_at_k(const RecommendationList& rec, const Truth& truth, std::size_t k,
                      double relevance_threshold = 4.0);

// nullopt when the truth holds no relevant item.
std::optional<double> recall_at_k(const RecommendationList& rec, const Truth& truth,
                                  std::size_t k, double relevance_threshold = 4.0);

// 1 iff a relevant item is in the top k; nullopt as for recall.
std::optional<int> hit_rate_at_k(const RecommendationList& rec, const Truth& truth, std::size_t k,
                                 double relevance_threshold = 4.0);

// Source of per-user predicted scores and item latent vectors. Scores come
// from the factor model unless an explicit n x m score table is supplied,
// which lets fixtures and external scorers drive ranking while distances
// still use the model's item factors.
class Scorer {
 public:
  explicit Scorer(FactorModel model);
  Scorer(FactorModel model, Eigen::MatrixXd score_table);

  std::size_t n_users() const { return model_.n_users(); }
  std::size_t n_items() const { return model_.n_items(); }
  const FactorModel& model() const { return model_; }
  const ItemFactors& item_factors() const { return model_.item_factors; }

  std::vector<double> user_scores(std::size_t user) const;

 private:
  FactorModel model_;
  std::optional<Eigen::MatrixXd> table_;
};

}  // namespace divrec
