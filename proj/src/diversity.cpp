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

#include "divrec/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

namespace {

std::vector<std::size_t> sorted_copy(std::span<const std::size_t> items) {
  std::vector<std::size_t> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

void check_k(const ItemSpace& space, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > space.size()) {
    throw std::invalid_argument("k=" + std::to_string(k) + " exceeds the item count " +
                                std::to_string(space.size()));
  }
}

// Depth-first enumeration in lexicographic order. `sum` is built with the
// same association as illd_sum, so the winning value is bit-identical to
// illd_sum(best).
struct ExhaustiveSearch {
  const ItemSpace& space;
  std::size_t k;
  std::vector<std::size_t> current;
  std::vector<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();

  void run(std::size_t next, double sum) {
    if (current.size() == k) {
      if (sum > best_value) {
        best_value = sum;
        best = current;
      }
      return;
    }
    const std::size_t m = space.size();
    for (std::size_t c = next; c + (k - current.size()) <= m; ++c) {
      const double added = distance_to_group(c, current, space);
      current.push_back(c);
      run(c + 1, sum + added);
      current.pop_back();
    }
  }
};

}  // namespace

std::optional<DistanceKind> parse_distance_kind(std::string_view name) {
  if (name == "euclidean") return DistanceKind::euclidean;
  if (name == "cosine") return DistanceKind::cosine;
  return std::nullopt;
}

std::string_view to_string(DistanceKind kind) {
  return kind == DistanceKind::euclidean ? "euclidean" : "cosine";
}

std::string_view to_string(NormalizerMethod method) {
  return method == NormalizerMethod::exact ? "exact" : "greedy_swap";
}

double distance(DistanceKind kind, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("distance: dimension mismatch");
  if (kind == DistanceKind::euclidean) {
    double total = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double diff = x[f] - y[f];
      total += diff * diff;
    }
    return std::sqrt(total);
  }

  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t f = 0; f < x.size(); ++f) {
    dot += x[f] * y[f];
    xx += x[f] * x[f];
    yy += y[f] * y[f];
  }
  if (xx == 0.0 || yy == 0.0) {
    throw std::domain_error("cosine distance is undefined for a zero latent vector");
  }
  if (std::equal(x.begin(), x.end(), y.begin())) return 0.0;
  // Norm product written symmetrically so dist(x, y) == dist(y, x) exactly.
  const double norms = std::sqrt(xx) * std::sqrt(yy);
  return std::clamp(1.0 - dot / norms, 0.0, 2.0);
}

double distance_to_group(std::size_t item, std::span<const std::size_t> group,
                         const ItemSpace& space) {
  double total = 0.0;
  for (const auto member : group) total += space(member, item);
  return total;
}

double illd_sum(std::span<const std::size_t> items, const ItemSpace& space) {
  const auto sorted = sorted_copy(items);
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("illd_sum: items must be distinct");
  }
  double total = 0.0;
  for (std::size_t t = 1; t < sorted.size(); ++t) {
    total += distance_to_group(sorted[t], std::span(sorted).first(t), space);
  }
  return total;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(result);
}

MaxIlld max_illd_exact(const ItemSpace& space, std::size_t k, std::uint64_t budget) {
  check_k(space, k);
  const auto subsets = binomial(space.size(), k);
  if (subsets > budget) {
    throw BudgetExceeded("exhaustive maxILLD would visit " + std::to_string(subsets) +
                         " subsets (budget " + std::to_string(budget) + ")");
  }
  ExhaustiveSearch search{space, k, {}, {}};
  search.current.reserve(k);
  search.run(0, 0.0);
  return {search.best_value, std::move(search.best), NormalizerMethod::exact, space.kind()};
}

MaxIlld max_illd_greedy(const ItemSpace& space, std::size_t k) {
  check_k(space, k);
  const std::size_t m = space.size();
  std::vector<std::size_t> chosen;
  std::vector<char> in_set(m, 0);

  if (k == 1) {
    chosen.push_back(0);
  } else {
    std::size_t best_a = 0, best_b = 1;
    double best = -1.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        const double d = space(a, b);
        if (d > best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    chosen = {best_a, best_b};
  }
  for (const auto c : chosen) in_set[c] = 1;

  // contribution[c] = sum of distances from c to the chosen set.
  std::vector<double> contribution(m, 0.0);
  const auto refresh = [&] {
    const auto group = sorted_copy(chosen);
    for (std::size_t c = 0; c < m; ++c) contribution[c] = distance_to_group(c, group, space);
  };
  refresh();

  while (chosen.size() < k) {
    std::size_t pick = m;
    for (std::size_t c = 0; c < m; ++c) {
      if (!in_set[c] && (pick == m || contribution[c] > contribution[pick])) pick = c;
    }
    chosen.push_back(pick);
    in_set[pick] = 1;
    for (std::size_t c = 0; c < m; ++c) contribution[c] += space(c, pick);
  }
  refresh();

  // Best-improvement single swaps. Gains below a relative epsilon are
  // treated as ties so rounding noise cannot cycle.
  double value = illd_sum(chosen, space);
  const std::size_t max_passes = 16 * m * k + 16;
  for (std::size_t pass = 0; pass < max_passes && k < m; ++pass) {
    double best_gain = 0.0;
    std::size_t out_pos = k, in_item = m;
    for (std::size_t pos = 0; pos < k; ++pos) {
      const std::size_t out = chosen[pos];
      for (std::size_t c = 0; c < m; ++c) {
        if (in_set[c]) continue;
        const double gain = (contribution[c] - space(c, out)) - contribution[out];
        if (gain > best_gain) {
          best_gain = gain;
          out_pos = pos;
          in_item = c;
        }
      }
    }
    if (out_pos == k || best_gain <= 1e-12 * std::max(value, 1.0)) break;
    in_set[chosen[out_pos]] = 0;
    chosen[out_pos] = in_item;
    in_set[in_item] = 1;
    refresh();
    value = illd_sum(chosen, space);
  }

  std::sort(chosen.begin(), chosen.end());
  return {illd_sum(chosen, space), std::move(chosen), NormalizerMethod::greedy_swap,
          space.kind()};
}

MaxIlld max_illd(const ItemSpace& space, std::size_t k, std::uint64_t budget) {
  check_k(space, k);
  if (binomial(space.size(), k) <= budget) return max_illd_exact(space, k, budget);
  return max_illd_greedy(space, k);
}

double nilld_ratio(std::span<const std::size_t> items, const ItemSpace& space,
                   const MaxIlld& normalizer) {
  if (items.size() != normalizer.k()) {
    throw std::invalid_argument("list length " + std::to_string(items.size()) +
                                " does not match the normalizer's k=" +
                                std::to_string(normalizer.k()));
  }
  if (normalizer.kind != space.kind()) {
    throw std::invalid_argument("normalizer was computed for a different distance");
  }
  if (normalizer.value <= 0.0) return 1.0;
  return illd_sum(items, space) / normalizer.value;
}

double nilld_user(const RecommendationList& rec, const ItemSpace& space,
                  const MaxIlld& normalizer) {
  return std::min(1.0, nilld_ratio(rec.items, space, normalizer));
}

DiversityReport nilld_overall(std::span<const RecommendationList> recs, const ItemSpace& space,
                              const MaxIlld& normalizer) {
  if (recs.empty()) throw std::invalid_argument("nilld_overall: no users");
  DiversityReport report;
  report.k = normalizer.k();
  report.kind = space.kind();
  report.normalizer = normalizer;
  double total = 0.0;
  for (const auto& rec : recs) {
    const double ratio = nilld_ratio(rec.items, space, normalizer);
    if (ratio > 1.0) ++report.clamp_count;
    const double value = std::min(1.0, ratio);
    report.users.push_back(rec.user);
    report.per_user.push_back(value);
    total += value;
  }
  report.overall = total / static_cast<double>(recs.size());
  return report;
}

namespace {
void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}
}  // namespace

bool satisfies_alpha(const DiversityReport& report, double alpha) {
  check_alpha(alpha);
  return report.overall >= alpha;
}

IndividualAlphaCheck satisfies_individual_alpha(const DiversityReport& report, double alpha) {
  check_alpha(alpha);
  IndividualAlphaCheck check;
  for (std::size_t idx = 0; idx < report.per_user.size(); ++idx) {
    if (report.per_user[idx] < alpha) {
      check.satisfied = false;
      check.violators.push_back(report.users.empty() ? idx : report.users[idx]);
    }
  }
  return check;
}

void write_diversity_csv(std::ostream& out, const DiversityReport& report, const IdMap& users,
                         const IdMap& items) {
  out << "# k=" << report.k << '\n';
  out << "# metric=" << to_string(report.kind) << '\n';
  out << "# max_illd_value=" << format_number(report.normalizer.value) << '\n';
  out << "# max_illd_method=" << to_string(report.normalizer.method) << '\n';
  out << "# max_illd_subset=";
  for (std::size_t idx = 0; idx < report.normalizer.subset.size(); ++idx) {
    out << (idx ? " " : "") << items.id(report.normalizer.subset[idx]);
  }
  out << '\n';
  out << "# clamp_count=" << report.clamp_count << '\n';
  out << "user,nilld\n";
  for (std::size_t idx = 0; idx < report.per_user.size(); ++idx) {
    out << users.id(report.users[idx]) << ',' << format_number(report.per_user[idx]) << '\n';
  }
  out << "overall," << format_number(report.overall) << '\n';
}

}  // namespace divrec
