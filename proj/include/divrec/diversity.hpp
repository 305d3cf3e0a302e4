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
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "divrec/dataset.hpp"
#include "divrec/factorization.hpp"
#include "divrec/ranking.hpp"

namespace divrec {

enum class DistanceKind { euclidean, cosine };

std::optional<DistanceKind> parse_distance_kind(std::string_view name);
std::string_view to_string(DistanceKind kind);

// Distance between two latent item vectors.
//   euclidean: ||x - y||
//   cosine:    1 - x.y / (||x|| ||y||), in [0, 2]; throws on a zero vector.
// Symmetric bit for bit.
double distance(DistanceKind kind, std::span<const double> x, std::span<const double> y);

// Pairwise distances between columns of an item-factor matrix.
class ItemSpace {
 public:
  ItemSpace(const ItemFactors& items, DistanceKind kind) : items_(&items), kind_(kind) {}

  std::size_t size() const { return static_cast<std::size_t>(items_->cols()); }
  DistanceKind kind() const { return kind_; }
  std::span<const double> vector(std::size_t item) const {
    return {items_->col(static_cast<Eigen::Index>(item)).data(),
            static_cast<std::size_t>(items_->rows())};
  }
  double operator()(std::size_t a, std::size_t b) const {
    return distance(kind_, vector(a), vector(b));
  }

 private:
  const ItemFactors* items_;
  DistanceKind kind_;
};

// Sum of dist(p_j, p_j') over unordered pairs of distinct members. Members
// are summed in ascending index order, so the value does not depend on the
// order of `items`.
double illd_sum(std::span<const std::size_t> items, const ItemSpace& space);

// Sum of distances from `item` to each member of `group` (ascending order).
double distance_to_group(std::size_t item, std::span<const std::size_t> group,
                         const ItemSpace& space);

enum class NormalizerMethod { exact, greedy_swap };
std::string_view to_string(NormalizerMethod method);

// maxILLD(k): the largest pairwise-distance sum of any k-subset of items.
struct MaxIlld {
  double value = 0.0;
  std::vector<std::size_t> subset;  // ascending
  NormalizerMethod method = NormalizerMethod::exact;
  DistanceKind kind = DistanceKind::euclidean;

  std::size_t k() const { return subset.size(); }
};

inline constexpr std::uint64_t kDefaultExhaustiveBudget = 2'000'000;

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Exhaustive search over all C(m, k) subsets; ties go to the
// lexicographically smallest subset. Throws BudgetExceeded when C(m, k)
// exceeds `budget`.
MaxIlld max_illd_exact(const ItemSpace& space, std::size_t k,
                       std::uint64_t budget = kDefaultExhaustiveBudget);

// Farthest pair, greedy growth by largest distance sum to the chosen set,
// then best-improvement single swaps until none helps. Never above the exact
// value; at least half of it for metric distances.
MaxIlld max_illd_greedy(const ItemSpace& space, std::size_t k);

// Exact when C(m, k) fits the budget, greedy otherwise.
MaxIlld max_illd(const ItemSpace& space, std::size_t k,
                 std::uint64_t budget = kDefaultExhaustiveBudget);

// illd_sum(items) / normalizer.value without clamping; 1 when the normalizer
// is 0 (every list is equally diverse).
double nilld_ratio(std::span<const std::size_t> items, const ItemSpace& space,
                   const MaxIlld& normalizer);

// nILLD(i, k): the ratio clamped to at most 1. A greedy normalizer can sit
// below the true maximum, which is the only way the clamp engages.
double nilld_user(const RecommendationList& rec, const ItemSpace& space,
                  const MaxIlld& normalizer);

struct DiversityReport {
  std::size_t k = 0;
  DistanceKind kind = DistanceKind::euclidean;
  MaxIlld normalizer;
  std::vector<std::size_t> users;
  std::vector<double> per_user;
  double overall = 0.0;
  // Users whose unclamped ratio exceeded 1.
  std::size_t clamp_count = 0;
};

// Per-user nILLD for every list and their mean.
DiversityReport nilld_overall(std::span<const RecommendationList> recs, const ItemSpace& space,
                              const MaxIlld& normalizer);

// Overall nILLD >= alpha.
bool satisfies_alpha(const DiversityReport& report, double alpha);

struct IndividualAlphaCheck {
  bool satisfied = true;
  std::vector<std::size_t> violators;  // user indexes with nILLD < alpha
};

// Every user's nILLD >= alpha.
IndividualAlphaCheck satisfies_individual_alpha(const DiversityReport& report, double alpha);

// `# key=value` header lines with the normalizer, then `user,nilld` rows and
// a closing `overall,<mean>` row. Users and items appear by external id.
void write_diversity_csv(std::ostream& out, const DiversityReport& report, const IdMap& users,
                         const IdMap& items);

}  // namespace divrec
