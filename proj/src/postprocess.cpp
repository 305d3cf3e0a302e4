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

#include "divrec/postprocess.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "divrec/format.hpp"
#include "parallel.hpp"

namespace divrec {

namespace {

std::vector<std::size_t> sorted_copy(std::span<const std::size_t> items) {
  std::vector<std::size_t> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

RecommendationList ranked_list(std::size_t user, std::vector<std::size_t> items,
                               std::span<const double> scores) {
  std::sort(items.begin(), items.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], a, scores[b], b);
  });
  RecommendationList list;
  list.user = user;
  list.items = std::move(items);
  for (const auto j : list.items) list.scores.push_back(scores[j]);
  list.reranked = true;
  return list;
}

// ILLD of remaining + {candidate} for each candidate, summed in the same
// association as illd_sum so that the removed member reproduces the current
// list's value bit for bit. Candidates are ranked by these totals rather
// than by their distance sums alone; both orders agree up to rounding, and
// this one keeps the nILLD trace non-decreasing in floating point.
class CandidateTotals {
 public:
  CandidateTotals(std::span<const std::size_t> remaining, const ItemSpace& space)
      : remaining_(sorted_copy(remaining)), space_(&space) {
    const std::size_t r = remaining_.size();
    pairs_.assign(r * r, 0.0);
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        pairs_[a * r + b] = pairs_[b * r + a] = space(remaining_[b], remaining_[a]);
      }
    }
  }

  double operator()(std::size_t candidate) {
    const std::size_t r = remaining_.size();
    to_candidate_.resize(r);
    for (std::size_t s = 0; s < r; ++s) to_candidate_[s] = (*space_)(remaining_[s], candidate);
    const std::size_t slot = static_cast<std::size_t>(
        std::lower_bound(remaining_.begin(), remaining_.end(), candidate) - remaining_.begin());

    // Merged position t maps to the candidate at `slot`, else to a remaining
    // member.
    const auto dist = [&](std::size_t t, std::size_t u) {
      if (t == slot) return to_candidate_[u < slot ? u : u - 1];
      if (u == slot) return to_candidate_[t < slot ? t : t - 1];
      const std::size_t a = t < slot ? t : t - 1;
      const std::size_t b = u < slot ? u : u - 1;
      return pairs_[a * r + b];
    };
    double total = 0.0;
    for (std::size_t t = 1; t <= r; ++t) {
      double group = 0.0;
      for (std::size_t u = 0; u < t; ++u) group += dist(u, t);
      total += group;
    }
    return total;
  }

 private:
  std::vector<std::size_t> remaining_;
  const ItemSpace* space_;
  std::vector<double> pairs_;
  std::vector<double> to_candidate_;
};

}  // namespace

void DiversifyConfig::validate() const {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("discount must lie strictly between 0 and 1");
  }
  if (max_iters && *max_iters == 0) throw std::invalid_argument("max_iters must be positive");
}

std::string_view to_string(DiversifyStatus status) {
  switch (status) {
    case DiversifyStatus::already_satisfied: return "already_satisfied";
    case DiversifyStatus::satisfied: return "satisfied";
    case DiversifyStatus::fixed_point: return "fixed_point";
    case DiversifyStatus::max_iters_exceeded: return "max_iters_exceeded";
  }
  return "unknown";
}

std::size_t least_diverse_member(std::span<const std::size_t> items, const ItemSpace& space) {
  if (items.size() < 2) throw std::invalid_argument("least_diverse_member needs two items");
  const auto sorted = sorted_copy(items);
  std::size_t best = sorted.front();
  double best_sum = distance_to_group(best, sorted, space);
  for (std::size_t pos = 1; pos < sorted.size(); ++pos) {
    const double sum = distance_to_group(sorted[pos], sorted, space);
    if (sum < best_sum) {
      best_sum = sum;
      best = sorted[pos];
    }
  }
  return best;
}

std::optional<std::size_t> best_replacement(std::span<const std::size_t> remaining,
                                            std::span<const std::size_t> candidates,
                                            const ItemSpace& space,
                                            std::span<const double> scores, double floor) {
  CandidateTotals totals(remaining, space);
  std::optional<std::size_t> best;
  double best_total = 0.0;
  for (const auto c : sorted_copy(candidates)) {
    if (!(scores[c] >= floor)) continue;
    const double total = totals(c);
    if (!best || total > best_total) {
      best = c;
      best_total = total;
    }
  }
  return best;
}

DiversifyOutcome diversify_user(const ItemSpace& space, std::span<const double> scores,
                                std::span<const char> eligible, const RecommendationList& rec,
                                const DiversifyConfig& config, const MaxIlld& normalizer) {
  config.validate();
  const std::size_t m = space.size();
  if (rec.size() != config.k || normalizer.k() != config.k) {
    throw std::invalid_argument("list length, config.k and normalizer k must agree");
  }
  if (space.kind() != config.metric || normalizer.kind != config.metric) {
    throw std::invalid_argument("distance of the item space, config and normalizer must agree");
  }
  if (scores.size() != m || (!eligible.empty() && eligible.size() != m)) {
    throw std::invalid_argument("score vector and eligibility mask must cover every item");
  }
  const auto is_eligible = [&](std::size_t c) { return eligible.empty() || eligible[c] != 0; };

  DiversifyOutcome outcome;
  outcome.user = rec.user;
  std::vector<std::size_t> list = rec.items;
  double floor = *std::min_element(rec.scores.begin(), rec.scores.end());
  double current = std::min(1.0, nilld_ratio(list, space, normalizer));
  outcome.nilld_trace.push_back(current);

  if (current >= config.alpha) {
    outcome.final_list = rec;
    outcome.final_floor = floor;
    outcome.status = DiversifyStatus::already_satisfied;
    return outcome;
  }

  std::vector<char> in_list(m, 0);
  for (const auto j : list) in_list[j] = 1;

  // ILLD the list would have with each candidate in place of its
  // least-diverse member. Only valid while the list is unchanged, and
  // re-selection of the removed item leaves it unchanged.
  std::vector<double> swapped_total(m, 0.0);
  bool totals_stale = true;
  std::size_t removed = 0;

  const std::size_t max_iters = config.effective_max_iters();
  outcome.status = DiversifyStatus::max_iters_exceeded;
  while (outcome.iterations < max_iters) {
    ++outcome.iterations;

    if (totals_stale) {
      removed = least_diverse_member(list, space);
      std::vector<std::size_t> remaining;
      for (const auto j : list) {
        if (j != removed) remaining.push_back(j);
      }
      CandidateTotals totals(remaining, space);
      for (std::size_t c = 0; c < m; ++c) {
        if (c == removed || (is_eligible(c) && !in_list[c])) swapped_total[c] = totals(c);
      }
      totals_stale = false;
    }

    // Candidates: eligible items outside the list, plus the removed one.
    std::size_t inserted = removed;
    bool found = false;
    for (std::size_t c = 0; c < m; ++c) {
      const bool candidate = c == removed || (is_eligible(c) && !in_list[c]);
      if (!candidate || !(scores[c] >= floor)) continue;
      if (!found || swapped_total[c] > swapped_total[inserted]) {
        inserted = c;
        found = true;
      }
    }

    if (inserted != removed) {
      *std::find(list.begin(), list.end(), removed) = inserted;
      in_list[removed] = 0;
      in_list[inserted] = 1;
      ++outcome.swaps;
      current = std::min(1.0, nilld_ratio(list, space, normalizer));
      totals_stale = true;
    }
    outcome.nilld_trace.push_back(current);

    if (current >= config.alpha) {
      outcome.status = DiversifyStatus::satisfied;
      break;
    }
    if (inserted == removed) {
      // Discounting only helps if some eligible item sits in (0, floor).
      bool can_grow = false;
      if (floor > 0.0) {
        for (std::size_t c = 0; c < m && !can_grow; ++c) {
          can_grow = is_eligible(c) && !in_list[c] && scores[c] < floor && scores[c] > 0.0;
        }
      }
      if (!can_grow) {
        outcome.status = DiversifyStatus::fixed_point;
        break;
      }
      floor *= config.discount;
    }
  }

  outcome.final_floor = floor;
  outcome.final_list = ranked_list(rec.user, std::move(list), scores);
  return outcome;
}

std::vector<DiversifyOutcome> diversify_all(const Scorer& scorer, const RatingsDataset& train,
                                            std::span<const RecommendationList> recs,
                                            const DiversifyConfig& config,
                                            const MaxIlld& normalizer, bool exclude_observed,
                                            std::size_t threads) {
  if (scorer.n_items() != train.n_items() || scorer.n_users() != train.n_users()) {
    throw std::invalid_argument("diversify_all: model does not match the training data");
  }
  const ItemSpace space(scorer.item_factors(), config.metric);
  std::vector<DiversifyOutcome> outcomes(recs.size());
  detail::parallel_for(recs.size(), threads, [&](std::size_t idx) {
    const auto& rec = recs[idx];
    const auto scores = scorer.user_scores(rec.user);
    const auto eligible = eligible_items(train, rec.user, exclude_observed);
    outcomes[idx] = diversify_user(space, scores, eligible, rec, config, normalizer);
  });
  return outcomes;
}

void write_outcomes_csv(std::ostream& out, std::span<const DiversifyOutcome> outcomes,
                        const IdMap& users) {
  out << "user,status,iterations,swaps,final_floor,final_nilld\n";
  for (const auto& o : outcomes) {
    out << users.id(o.user) << ',' << to_string(o.status) << ',' << o.iterations << ','
        << o.swaps << ',' << format_number(o.final_floor) << ','
        << format_number(o.nilld_trace.back()) << '\n';
  }
}

}  // namespace divrec
