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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace divrec {
namespace {

using testing::make_dataset;

RecommendationList list_of(std::vector<std::size_t> items) {
  RecommendationList rec;
  rec.items = std::move(items);
  rec.scores.assign(rec.items.size(), 0.0);
  return rec;
}

TEST(TopK, SortsByScore) {
  const std::vector<double> scores{0.1, 0.9, 0.5};
  const auto rec = top_k(0, scores, 2);
  EXPECT_EQ(rec.items, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(rec.scores, (std::vector<double>{0.9, 0.5}));
  EXPECT_FALSE(rec.reranked);
}

TEST(TopK, TiesByIndex) {
  const std::vector<double> scores{3, 3, 3};
  EXPECT_EQ(top_k(0, scores, 2).items, (std::vector<std::size_t>{0, 1}));
}

TEST(TopK, ExcludesRatedItems) {
  // Item 1 rated in train, user scores [0.1, 0.9, 0.5].
  auto model = testing::line_model(1, {0.1, 0.9, 0.5});
  model.user_factors(0, 0) = 1.0;
  const auto train = make_dataset(1, 3, {{0, 1, 4}}, RatingsDataset::Coverage::partial);
  EXPECT_EQ(top_k(model, train, 0, 2, true).items, (std::vector<std::size_t>{2, 0}));
  EXPECT_EQ(top_k(model, train, 0, 2, false).items, (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(top_k(model, train, 0, 3, true), std::invalid_argument);
}

TEST(TopK, KBounds) {
  const std::vector<double> scores{1, 2};
  EXPECT_THROW(top_k(0, scores, 3), std::invalid_argument);
  const std::vector<char> mask{1, 0};
  EXPECT_THROW(top_k(0, scores, 2, mask), std::invalid_argument);
  EXPECT_EQ(top_k(0, scores, 1, mask).items, (std::vector<std::size_t>{0}));
}

TEST(TopK, MatchesFullSortOnRandomScores) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coarse(0, 6);  // plenty of ties
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(25);
    for (auto& s : scores) s = coarse(rng);
    std::vector<std::size_t> order(25);
    for (std::size_t j = 0; j < 25; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(7);
    EXPECT_EQ(top_k(0, scores, 7).items, order);
  }
}

TEST(Ndcg, IdealOrderIsOne) {
  const Truth truth{{0, 5}, {1, 3}, {2, 1}};
  EXPECT_EQ(ndcg_at_k(list_of({0, 1, 2}), truth, 3), 1.0);
}

TEST(Ndcg, ReversedPair) {
  const Truth truth{{0, 3}, {1, 2}};  // A = 0, B = 1
  const auto value = ndcg_at_k(list_of({1, 0}), truth, 2);
  ASSERT_TRUE(value);
  const double dcg = 2.0 + 3.0 / std::log2(3.0);
  const double idcg = 3.0 + 2.0 / std::log2(3.0);
  EXPECT_NEAR(*value, dcg / idcg, 1e-15);
  EXPECT_NEAR(*value, 0.9134, 1e-4);
}

TEST(Ndcg, NoOverlapAndEmptyTruth) {
  EXPECT_EQ(ndcg_at_k(list_of({4, 5}), Truth{{0, 3}}, 2), 0.0);
  EXPECT_FALSE(ndcg_at_k(list_of({4, 5}), Truth{}, 2));
}

TEST(Ndcg, IdealTruncatedToK) {
  // Three truth items, list of two holding the best two in order.
  const Truth truth{{0, 5}, {1, 4}, {2, 3}};
  EXPECT_EQ(ndcg_at_k(list_of({0, 1}), truth, 2), 1.0);
}

TEST(Precision, Examples) {
  const Truth truth{{0, 5}, {1, 3}, {2, 4}};
  EXPECT_EQ(precision_at_k(list_of({0, 1}), truth, 2), 0.5);
  EXPECT_EQ(precision_at_k(list_of({0, 2}), truth, 2), 1.0);
  EXPECT_EQ(precision_at_k(list_of({7, 8}), truth, 2), 0.0);
}

TEST(Recall, Examples) {
  EXPECT_EQ(recall_at_k(list_of({0, 9}), Truth{{0, 4}}, 2), 1.0);
  const Truth four{{0, 4}, {1, 5}, {2, 4}, {3, 5}};
  EXPECT_EQ(recall_at_k(list_of({0, 9}), four, 2), 0.25);
  const Truth three{{0, 4}, {1, 5}, {2, 4}};
  EXPECT_EQ(recall_at_k(list_of({7, 8}), three, 2), 0.0);
  EXPECT_FALSE(recall_at_k(list_of({0}), Truth{{0, 2}}, 1));
}

TEST(HitRate, Examples) {
  const Truth truth{{2, 5}, {5, 1}};
  EXPECT_EQ(hit_rate_at_k(list_of({0, 1, 2}), truth, 3), 1);
  EXPECT_EQ(hit_rate_at_k(list_of({0, 1, 5}), truth, 3), 0);
  EXPECT_EQ(hit_rate_at_k(list_of({0, 1}), Truth{{0, 4}, {1, 5}}, 2), 1);
  EXPECT_FALSE(hit_rate_at_k(list_of({0}), Truth{{0, 1}}, 1));
}

TEST(Metrics, StayInUnitInterval) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> item(0, 19), rating(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    Truth truth;
    for (int t = 0; t < 6; ++t) truth[item(rng)] = rating(rng);
    std::vector<double> scores(20);
    for (auto& s : scores) s = rating(rng) + 0.01 * item(rng);
    const auto rec = top_k(0, scores, 5);
    const double n = *ndcg_at_k(rec, truth, 5);
    EXPECT_GE(n, 0.0);
    EXPECT_LE(n, 1.0 + 1e-12);
    const double p = precision_at_k(rec, truth, 5);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    if (const auto r = recall_at_k(rec, truth, 5)) {
      EXPECT_GE(*r, 0.0);
      EXPECT_LE(*r, 1.0);
      EXPECT_EQ(*hit_rate_at_k(rec, truth, 5), *r > 0.0 ? 1 : 0);
    }
  }
}

TEST(Truth, FromHeldOut) {
  const auto train = make_dataset(2, 3, {{0, 0, 4}, {1, 1, 2}, {1, 2, 3}});
  const auto test = testing::make_held_out(train, {{0, 2, 5}, {1, 0, 1}});
  EXPECT_EQ(truth_for_user(test, 0), (Truth{{2, 5}}));
  EXPECT_EQ(eligible_items(train, 1, true), (std::vector<char>{1, 0, 0}));
  EXPECT_EQ(eligible_items(train, 1, false), (std::vector<char>{1, 1, 1}));
}

TEST(Scorer, ModelOrTable) {
  auto model = testing::line_model(2, {1.0, 2.0});
  model.user_factors(0, 0) = 3.0;
  const Scorer from_model(model);
  EXPECT_EQ(from_model.user_scores(0), (std::vector<double>{3.0, 6.0}));

  Eigen::MatrixXd table(2, 2);
  table << 5, 4, 1, 2;
  const Scorer from_table(model, table);
  EXPECT_EQ(from_table.user_scores(1), (std::vector<double>{1.0, 2.0}));
  EXPECT_THROW(Scorer(model, Eigen::MatrixXd::Zero(3, 2)), std::invalid_argument);
}

}  // namespace
}  // namespace divrec
