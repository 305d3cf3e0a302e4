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
#include <filesystem>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "divrec/dataset.hpp"
#include "divrec/factorization.hpp"

namespace divrec::testing {

struct Entry {
  std::size_t user;
  std::size_t item;
  double value;
};

inline std::shared_ptr<const IdMap> make_ids(std::size_t count, const std::string& prefix) {
  auto ids = std::make_shared<IdMap>();
  for (std::size_t idx = 0; idx < count; ++idx) ids->add(prefix + std::to_string(idx));
  return ids;
}

inline RatingsDataset make_dataset(std::size_t n, std::size_t m, const std::vector<Entry>& entries,
                                   RatingsDataset::Coverage coverage =
                                       RatingsDataset::Coverage::full) {
  std::vector<Rating> ratings;
  for (const auto& e : entries) ratings.push_back({e.user, e.item, e.value});
  return RatingsDataset(make_ids(n, "u"), make_ids(m, "i"), std::move(ratings), coverage);
}

// Same id maps as `like`, for held-out sets.
inline RatingsDataset make_held_out(const RatingsDataset& like, const std::vector<Entry>& entries) {
  std::vector<Rating> ratings;
  for (const auto& e : entries) ratings.push_back({e.user, e.item, e.value});
  return RatingsDataset(like.shared_users(), like.shared_items(), std::move(ratings),
                        RatingsDataset::Coverage::partial);
}

// A model with the given item latent values (d = 1) and zero user factors.
inline FactorModel line_model(std::size_t n_users, const std::vector<double>& latent) {
  FactorModel model;
  model.user_factors = UserFactors::Zero(static_cast<Eigen::Index>(n_users), 1);
  model.item_factors = ItemFactors(1, static_cast<Eigen::Index>(latent.size()));
  for (std::size_t j = 0; j < latent.size(); ++j) {
    model.item_factors(0, static_cast<Eigen::Index>(j)) = latent[j];
  }
  model.config.dim = 1;
  return model;
}

inline ItemFactors line_items(const std::vector<double>& latent) {
  return line_model(1, latent).item_factors;
}

inline std::filesystem::path movielens_path() {
  return std::filesystem::path(DIVREC_MOVIELENS_DIR) / "u.data";
}

inline std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(DIVREC_TEST_DATA_DIR) / name;
}

}  // namespace divrec::testing
