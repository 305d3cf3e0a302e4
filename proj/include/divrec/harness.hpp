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
#include <vector>

#include "divrec/dataset.hpp"
#include "divrec/diversity.hpp"
#include "divrec/postprocess.hpp"
#include "divrec/ranking.hpp"

namespace divrec {

struct EvaluationSettings {
  std::size_t k = 10;
  DistanceKind metric = DistanceKind::euclidean;
  bool exclude_observed = true;
  double relevance_threshold = 4.0;
  std::uint64_t exhaustive_budget = kDefaultExhaustiveBudget;
  std::size_t threads = 1;
};

// One line of the trade-off report. Relevance means run over users with at
// least one held-out rating (recall and hit rate: at least one relevant
// one); a mean over no users is 0.
struct SweepRow {
  double alpha = 0.0;
  double mean_ndcg = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_hit_rate = 0.0;
  double overall_nilld = 0.0;
  double min_user_nilld = 0.0;
  double max_user_nilld = 0.0;
  double std_user_nilld = 0.0;  // population standard deviation
  double fraction_satisfied = 0.0;
  double mean_swaps = 0.0;
  double mean_iterations = 0.0;
  std::size_t clamp_count = 0;

  bool operator==(const SweepRow&) const = default;
};

struct Baseline {
  std::vector<RecommendationList> lists;  // one per user, in user order
  MaxIlld normalizer;
  DiversityReport diversity;
  SweepRow row;  // alpha = 0, no post-processing
};

// Top-k lists for every user, their relevance against split.test and their
// diversity.
Baseline run_baseline(const Scorer& scorer, const SplitPair& split,
                      const EvaluationSettings& settings);

struct SweepResult {
  Baseline baseline;
  std::vector<SweepRow> rows;
  // Outcomes per alpha, aligned with rows.
  std::vector<std::vector<DiversifyOutcome>> outcomes;

  // How many lists each item appears in, before post-processing and after
  // post-processing at the largest alpha.
  std::vector<std::size_t> baseline_exposure;
  std::vector<std::size_t> postprocessed_exposure;
};

// Post-processes fresh copies of the baseline lists at every alpha (which
// must be ascending within [0, 1]) and scores the results against
// split.test.
SweepResult run_sweep(const Scorer& scorer, const SplitPair& split,
                      const EvaluationSettings& settings, std::span<const double> alphas,
                      double discount = 0.9, std::optional<std::size_t> max_iters = {});

SweepResult run_sweep(const Scorer& scorer, const SplitPair& split,
                      const EvaluationSettings& settings, Baseline baseline,
                      std::span<const double> alphas, double discount = 0.9,
                      std::optional<std::size_t> max_iters = {});

// Aggregates final lists (and the outcomes that produced them, if any).
SweepRow summarize(double alpha, std::span<const RecommendationList> lists,
                   const RatingsDataset& test, const DiversityReport& diversity,
                   std::span<const DiversifyOutcome> outcomes, double relevance_threshold);

std::vector<std::size_t> exposure_counts(std::span<const RecommendationList> lists,
                                         std::size_t n_items);

// 0.1, 0.2, ..., 0.9.
std::vector<double> default_alpha_grid();

void write_sweep_header(std::ostream& out);
void write_sweep_row(std::ostream& out, const SweepRow& row);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

// `item,baseline_count,postprocessed_count`, items by external id.
void write_exposure_csv(std::ostream& out, const IdMap& items,
                        std::span<const std::size_t> baseline_counts,
                        std::span<const std::size_t> postprocessed_counts);

}  // namespace divrec
