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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace divrec {

enum class RatingsFormat {
  movielens_tab,  // user\titem\trating\ttimestamp, no header (u.data)
  csv_header,     // userId,movieId,rating,timestamp with that exact header
};

std::optional<RatingsFormat> parse_ratings_format(std::string_view name);
std::string_view to_string(RatingsFormat format);

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;

// Bijection between external ids and dense indexes, assigned in
// first-appearance order.
class IdMap {
 public:
  std::size_t add(std::string_view id);
  std::optional<std::size_t> find(std::string_view id) const;
  const std::string& id(std::size_t index) const { return ids_.at(index); }
  std::span<const std::string> ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

  bool operator==(const IdMap& other) const { return ids_ == other.ids_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> ids_;
};

struct Rating {
  std::size_t user;
  std::size_t item;
  double value;

  bool operator==(const Rating&) const = default;
};

// One observed entry seen from a row (other = item) or a column (other = user).
struct Observation {
  std::size_t other;
  double value;
};

// Sparse observed ratings with their id maps. Immutable once built.
//
// A dataset built with Coverage::full additionally guarantees that no user
// row and no item column is empty; held-out test sets use Coverage::partial.
class RatingsDataset {
 public:
  enum class Coverage { full, partial };

  RatingsDataset(std::shared_ptr<const IdMap> users,
                 std::shared_ptr<const IdMap> items,
                 std::vector<Rating> ratings,
                 Coverage coverage = Coverage::full);

  std::size_t n_users() const { return users_->size(); }
  std::size_t n_items() const { return items_->size(); }
  std::size_t size() const { return ratings_.size(); }
  bool empty() const { return ratings_.empty(); }
  Coverage coverage() const { return coverage_; }

  // Ratings in source order.
  std::span<const Rating> ratings() const { return ratings_; }

  // Entries of a user's row sorted by item index.
  std::span<const Observation> user_ratings(std::size_t user) const;
  // Entries of an item's column sorted by user index.
  std::span<const Observation> item_ratings(std::size_t item) const;

  std::optional<double> rating(std::size_t user, std::size_t item) const;

  const IdMap& users() const { return *users_; }
  const IdMap& items() const { return *items_; }
  const std::shared_ptr<const IdMap>& shared_users() const { return users_; }
  const std::shared_ptr<const IdMap>& shared_items() const { return items_; }

  bool operator==(const RatingsDataset& other) const;

 private:
  std::shared_ptr<const IdMap> users_;
  std::shared_ptr<const IdMap> items_;
  std::vector<Rating> ratings_;
  Coverage coverage_;

  std::vector<std::size_t> user_offsets_;
  std::vector<Observation> by_user_;
  std::vector<std::size_t> item_offsets_;
  std::vector<Observation> by_item_;
};

// Lists every invariant the dataset breaks; empty when valid. The
// constructor throws on the first of these, so this is mostly useful for
// checking datasets assembled by other means.
std::vector<std::string> find_violations(std::span<const Rating> ratings,
                                         std::size_t n_users,
                                         std::size_t n_items,
                                         RatingsDataset::Coverage coverage);

// Parses a ratings file, assigning dense ids in first-appearance order.
// Throws ParseError naming the offending line.
RatingsDataset parse_ratings(std::istream& source, RatingsFormat format);

// Parses a ratings file whose ids must already exist in the given maps (a
// held-out file evaluated against a model trained on another file). The
// result has partial coverage.
RatingsDataset parse_ratings(std::istream& source, RatingsFormat format,
                             std::shared_ptr<const IdMap> users,
                             std::shared_ptr<const IdMap> items);

RatingsDataset load_ratings(const std::string& path, RatingsFormat format);

struct SplitPair {
  RatingsDataset train;
  RatingsDataset test;
};

// Per-user holdout: floor(test_fraction * row size) of each user's ratings
// are drawn uniformly and moved to test, except that a draw which would empty
// an item column of train is skipped rather than redrawn.
SplitPair split_holdout(const RatingsDataset& dataset, double test_fraction,
                        std::uint64_t seed);

}  // namespace divrec
