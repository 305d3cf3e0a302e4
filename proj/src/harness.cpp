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

#include "divrec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "divrec/format.hpp"
#include "parallel.hpp"

namespace divrec {

namespace {

double mean_of(double total, std::size_t count) {
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

void check_split(const Scorer& scorer, const SplitPair& split) {
  if (scorer.n_users() != split.train.n_users() || scorer.n_items() != split.train.n_items()) {
    throw std::invalid_argument("model does not cover the split (" +
                                std::to_string(scorer.n_users()) + "x" +
                                std::to_string(scorer.n_items()) + " vs " +
                                std::to_string(split.train.n_users()) + "x" +
                                std::to_string(split.train.n_items()) + ")");
  }
}

}  // namespace

SweepRow summarize(double alpha, std::span<const RecommendationList> lists,
                   const RatingsDataset& test, const DiversityReport& diversity,
                   std::span<const DiversifyOutcome> outcomes, double relevance_threshold) {
  SweepRow row;
  row.alpha = alpha;

  double ndcg = 0.0, precision = 0.0, recall = 0.0, hits = 0.0;
  std::size_t judged = 0, with_relevant = 0;
  for (const auto& rec : lists) {
    const Truth truth = truth_for_user(test, rec.user);
    const std::size_t k = rec.size();
    if (const auto value = ndcg_at_k(rec, truth, k)) {
      ndcg += *value;
      precision += precision_at_k(rec, truth, k, relevance_threshold);
      ++judged;
    }
    if (const auto value = recall_at_k(rec, truth, k, relevance_threshold)) {
      recall += *value;
      hits += *hit_rate_at_k(rec, truth, k, relevance_threshold);
      ++with_relevant;
    }
  }
  row.mean_ndcg = mean_of(ndcg, judged);
  row.mean_precision = mean_of(precision, judged);
  row.mean_recall = mean_of(recall, with_relevant);
  row.mean_hit_rate = mean_of(hits, with_relevant);

  const auto& values = diversity.per_user;
  row.overall_nilld = diversity.overall;
  if (!values.empty()) {
    row.min_user_nilld = *std::min_element(values.begin(), values.end());
    row.max_user_nilld = *std::max_element(values.begin(), values.end());
    double squares = 0.0;
    std::size_t satisfied = 0;
    for (const double v : values) {
      squares += (v - diversity.overall) * (v - diversity.overall);
      if (v >= alpha) ++satisfied;
    }
    row.std_user_nilld = std::sqrt(squares / static_cast<double>(values.size()));
    row.fraction_satisfied = mean_of(static_cast<double>(satisfied), values.size());
  }
  row.clamp_count = diversity.clamp_count;

  double swaps = 0.0, iterations = 0.0;
  for (const auto& o : outcomes) {
    swaps += static_cast<double>(o.swaps);
    iterations += static_cast<double>(o.iterations);
  }
  row.mean_swaps = mean_of(swaps, outcomes.size());
  row.mean_iterations = mean_of(iterations, outcomes.size());
  return row;
}

Baseline run_baseline(const Scorer& scorer, const SplitPair& split,
                      const EvaluationSettings& settings) {
  check_split(scorer, split);
  if (settings.k == 0 || settings.k > scorer.n_items()) {
    throw std::invalid_argument("k=" + std::to_string(settings.k) + " must lie in [1, " +
                                std::to_string(scorer.n_items()) + "]");
  }
  Baseline baseline;
  baseline.lists.resize(scorer.n_users());
  detail::parallel_for(scorer.n_users(), settings.threads, [&](std::size_t user) {
    const auto scores = scorer.user_scores(user);
    const auto eligible = eligible_items(split.train, user, settings.exclude_observed);
    baseline.lists[user] = top_k(user, scores, settings.k, eligible);
  });

  const ItemSpace space(scorer.item_factors(), settings.metric);
  baseline.normalizer = max_illd(space, settings.k, settings.exhaustive_budget);
  baseline.diversity = nilld_overall(baseline.lists, space, baseline.normalizer);
  baseline.row = summarize(0.0, baseline.lists, split.test, baseline.diversity, {},
                           settings.relevance_threshold);
  return baseline;
}

SweepResult run_sweep(const Scorer& scorer, const SplitPair& split,
                      const EvaluationSettings& settings, std::span<const double> alphas,
                      double discount, std::optional<std::size_t> max_iters) {
  return run_sweep(scorer, split, settings, run_baseline(scorer, split, settings), alphas,
                   discount, max_iters);
}

SweepResult run_sweep(const Scorer& scorer, const SplitPair& split,
                      const EvaluationSettings& settings, Baseline baseline,
                      std::span<const double> alphas, double discount,
                      std::optional<std::size_t> max_iters) {
  check_split(scorer, split);
  for (std::size_t idx = 0; idx < alphas.size(); ++idx) {
    if (!(alphas[idx] >= 0.0 && alphas[idx] <= 1.0)) {
      throw std::invalid_argument("alphas must lie in [0, 1]");
    }
    if (idx > 0 && alphas[idx] < alphas[idx - 1]) {
      throw std::invalid_argument("alphas must be sorted ascending");
    }
  }

  SweepResult result;
  const ItemSpace space(scorer.item_factors(), settings.metric);
  for (std::size_t step = 0; step < alphas.size(); ++step) {
    const double alpha = alphas[step];
    DiversifyConfig config;
    config.k = settings.k;
    config.alpha = alpha;
    config.metric = settings.metric;
    config.discount = discount;
    config.max_iters = max_iters;

    auto outcomes = diversify_all(scorer, split.train, baseline.lists, config,
                                  baseline.normalizer, settings.exclude_observed,
                                  settings.threads);
    std::vector<RecommendationList> lists;
    lists.reserve(outcomes.size());
    for (const auto& o : outcomes) lists.push_back(o.final_list);

    const auto diversity = nilld_overall(lists, space, baseline.normalizer);
    result.rows.push_back(summarize(alpha, lists, split.test, diversity, outcomes,
                                    settings.relevance_threshold));
    if (step + 1 == alphas.size()) {
      result.postprocessed_exposure = exposure_counts(lists, scorer.n_items());
    }
    result.outcomes.push_back(std::move(outcomes));
  }

  result.baseline_exposure = exposure_counts(baseline.lists, scorer.n_items());
  if (alphas.empty()) result.postprocessed_exposure = result.baseline_exposure;
  result.baseline = std::move(baseline);
  return result;
}

std::vector<std::size_t> exposure_counts(std::span<const RecommendationList> lists,
                                         std::size_t n_items) {
  std::vector<std::size_t> counts(n_items, 0);
  for (const auto& rec : lists) {
    for (const auto j : rec.items) ++counts.at(j);
  }
  return counts;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int step = 1; step <= 9; ++step) grid.push_back(step / 10.0);
  return grid;
}

void write_sweep_header(std::ostream& out) {
  out << "alpha,mean_ndcg,mean_precision,mean_recall,mean_hit_rate,overall_nilld,"
         "min_user_nilld,max_user_nilld,std_user_nilld,fraction_satisfied,mean_swaps,"
         "mean_iterations,clamp_count\n";
}

void write_sweep_row(std::ostream& out, const SweepRow& row) {
  out << format_number(row.alpha) << ',' << format_number(row.mean_ndcg) << ','
      << format_number(row.mean_precision) << ',' << format_number(row.mean_recall) << ','
      << format_number(row.mean_hit_rate) << ',' << format_number(row.overall_nilld) << ','
      << format_number(row.min_user_nilld) << ',' << format_number(row.max_user_nilld) << ','
      << format_number(row.std_user_nilld) << ',' << format_number(row.fraction_satisfied) << ','
      << format_number(row.mean_swaps) << ',' << format_number(row.mean_iterations) << ','
      << row.clamp_count << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  write_sweep_header(out);
  for (const auto& row : rows) write_sweep_row(out, row);
}

void write_exposure_csv(std::ostream& out, const IdMap& items,
                        std::span<const std::size_t> baseline_counts,
                        std::span<const std::size_t> postprocessed_counts) {
  if (baseline_counts.size() != items.size() || postprocessed_counts.size() != items.size()) {
    throw std::invalid_argument("exposure counts must cover every item");
  }
  out << "item,baseline_count,postprocessed_count\n";
  for (std::size_t j = 0; j < items.size(); ++j) {
    out << items.id(j) << ',' << baseline_counts[j] << ',' << postprocessed_counts[j] << '\n';
  }
}

}  // namespace divrec
