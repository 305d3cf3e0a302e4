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
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "divrec/dataset.hpp"
#include "divrec/diversity.hpp"
#include "divrec/ranking.hpp"

namespace divrec {

struct DiversifyConfig {
  std::size_t k = 10;
  double alpha = 0.5;
  DistanceKind metric = DistanceKind::euclidean;
  // Multiplies the rating floor whenever the removed item is re-selected.
  double discount = 0.9;
  // Loop iterations per user; 50 * k when unset.
  std::optional<std::size_t> max_iters;

  std::size_t effective_max_iters() const { return max_iters.value_or(50 * k); }
  void validate() const;
};

enum class DiversifyStatus { already_satisfied, satisfied, fixed_point, max_iters_exceeded };
std::string_view to_string(DiversifyStatus status);

struct DiversifyOutcome {
  std::size_t user = 0;
  // Re-sorted by score with `reranked` set, unless already satisfied.
  RecommendationList final_list;
  std::size_t iterations = 0;
  std::size_t swaps = 0;
  double final_floor = 0.0;
  // nILLD before the loop, then after every iteration.
  std::vector<double> nilld_trace;
  DiversifyStatus status = DiversifyStatus::already_satisfied;

  bool succeeded() const {
    return status == DiversifyStatus::already_satisfied || status == DiversifyStatus::satisfied;
  }
  bool operator==(const DiversifyOutcome&) const = default;
};

// The member with the smallest distance sum to the rest of the list; ties
// go to the lower item index.
std::size_t least_diverse_member(std::span<const std::size_t> items, const ItemSpace& space);

// Among candidates whose score clears `floor`, the one farthest (by distance
// sum) from `remaining`, compared through the ILLD of `remaining` plus the
// candidate; equal values go to the lower item index. nullopt when no
// candidate clears the floor. `scores` is indexed by item.
std::optional<std::size_t> best_replacement(std::span<const std::size_t> remaining,
                                            std::span<const std::size_t> candidates,
                                            const ItemSpace& space,
                                            std::span<const double> scores, double floor);

// Swap loop for one user. `scores` holds the user's predicted score for every
// item and `eligible` marks the items the list may draw from (empty = all).
//
// Starting from floor = min score in the list, each iteration drops the
// least-diverse member, inserts the best replacement clearing the floor, and
// discounts the floor when the dropped item comes straight back. The loop
// ends once nILLD >= alpha, at a fixed point (the dropped item came back and
// discounting can no longer admit a new candidate), or after max_iters.
DiversifyOutcome diversify_user(const ItemSpace& space, std::span<const double> scores,
                                std::span<const char> eligible, const RecommendationList& rec,
                                const DiversifyConfig& config, const MaxIlld& normalizer);

// diversify_user for every list, sharing one normalizer. Output order follows
// `recs`; identical for any thread count.
std::vector<DiversifyOutcome> diversify_all(const Scorer& scorer, const RatingsDataset& train,
                                            std::span<const RecommendationList> recs,
                                            const DiversifyConfig& config,
                                            const MaxIlld& normalizer, bool exclude_observed,
                                            std::size_t threads = 1);

// `user,status,iterations,swaps,final_floor,final_nilld`, users by external id.
void write_outcomes_csv(std::ostream& out, std::span<const DiversifyOutcome> outcomes,
                        const IdMap& users);

}  // namespace divrec
