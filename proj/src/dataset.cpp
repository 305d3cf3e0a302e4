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

#include "divrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "divrec/error.hpp"
#include "random.hpp"

namespace divrec {

namespace {

constexpr std::string_view kCsvHeader = "userId,movieId,rating,timestamp";

std::uint64_t pair_key(std::size_t user, std::size_t item) {
  return (static_cast<std::uint64_t>(user) << 32) | static_cast<std::uint64_t>(item);
}

void build_index(std::span<const Rating> ratings, std::size_t n_rows, bool by_user,
                 std::vector<std::size_t>& offsets, std::vector<Observation>& entries) {
  offsets.assign(n_rows + 1, 0);
  for (const auto& r : ratings) ++offsets[(by_user ? r.user : r.item) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  entries.resize(ratings.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& r : ratings) {
    const std::size_t row = by_user ? r.user : r.item;
    entries[cursor[row]++] = {by_user ? r.item : r.user, r.value};
  }
  for (std::size_t row = 0; row < n_rows; ++row) {
    std::sort(entries.begin() + static_cast<std::ptrdiff_t>(offsets[row]),
              entries.begin() + static_cast<std::ptrdiff_t>(offsets[row + 1]),
              [](const Observation& a, const Observation& b) { return a.other < b.other; });
  }
}

struct Fields {
  std::string_view user, item, rating, timestamp;
};

std::optional<Fields> split_fields(std::string_view line, char sep) {
  std::string_view parts[4];
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (count == 4) return std::nullopt;
    parts[count++] = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (count != 4) return std::nullopt;
  return Fields{parts[0], parts[1], parts[2], parts[3]};
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

// Shared line loop. `resolve` maps the two id fields to indexes or throws.
template <typename Resolve>
std::vector<Rating> parse_lines(std::istream& source, RatingsFormat format, Resolve&& resolve) {
  std::vector<Rating> ratings;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  const char sep = format == RatingsFormat::movielens_tab ? '\t' : ',';

  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);

    if (format == RatingsFormat::csv_header && line_no == 1) {
      if (view != kCsvHeader) {
        throw ParseError(line_no, "expected header '" + std::string(kCsvHeader) + "'");
      }
      continue;
    }

    const auto fields = split_fields(view, sep);
    if (!fields || fields->user.empty() || fields->item.empty()) {
      throw ParseError(line_no, "malformed line, expected 4 fields separated by " +
                                    std::string(sep == '\t' ? "tabs" : "commas"));
    }
    double value = 0.0;
    if (!parse_number(fields->rating, value) || !std::isfinite(value)) {
      throw ParseError(line_no, "malformed rating '" + std::string(fields->rating) + "'");
    }
    std::int64_t timestamp = 0;
    if (!parse_number(fields->timestamp, timestamp)) {
      throw ParseError(line_no, "malformed timestamp '" + std::string(fields->timestamp) + "'");
    }
    if (value < kMinRating || value > kMaxRating) {
      throw ParseError(line_no, "rating " + std::string(fields->rating) + " out of range [1,5]");
    }

    const auto [user, item] = resolve(line_no, fields->user, fields->item);
    if (!seen.insert(pair_key(user, item)).second) {
      throw ParseError(line_no, "duplicate rating for user '" + std::string(fields->user) +
                                    "' and item '" + std::string(fields->item) + "'");
    }
    ratings.push_back({user, item, value});
  }

  if (ratings.empty()) throw ParseError(0, "empty ratings input");
  return ratings;
}

}  // namespace

std::optional<RatingsFormat> parse_ratings_format(std::string_view name) {
  if (name == "movielens_tab") return RatingsFormat::movielens_tab;
  if (name == "csv_header") return RatingsFormat::csv_header;
  return std::nullopt;
}

std::string_view to_string(RatingsFormat format) {
  return format == RatingsFormat::movielens_tab ? "movielens_tab" : "csv_header";
}

std::size_t IdMap::add(std::string_view id) {
  const auto [it, inserted] = index_.try_emplace(std::string(id), ids_.size());
  if (inserted) ids_.emplace_back(id);
  return it->second;
}

std::optional<std::size_t> IdMap::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> find_violations(std::span<const Rating> ratings, std::size_t n_users,
                                         std::size_t n_items,
                                         RatingsDataset::Coverage coverage) {
  std::vector<std::string> problems;
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::size_t> user_counts(n_users, 0);
  std::vector<std::size_t> item_counts(n_items, 0);

  for (std::size_t idx = 0; idx < ratings.size(); ++idx) {
    const auto& r = ratings[idx];
    const std::string where = "rating #" + std::to_string(idx);
    if (r.user >= n_users) {
      problems.push_back(where + ": user index " + std::to_string(r.user) + " out of range");
      continue;
    }
    if (r.item >= n_items) {
      problems.push_back(where + ": item index " + std::to_string(r.item) + " out of range");
      continue;
    }
    if (!(r.value >= kMinRating && r.value <= kMaxRating)) {
      problems.push_back(where + ": rating out of range [1,5]");
    }
    if (!seen.insert(pair_key(r.user, r.item)).second) {
      problems.push_back(where + ": duplicate (user " + std::to_string(r.user) + ", item " +
                         std::to_string(r.item) + ")");
    }
    ++user_counts[r.user];
    ++item_counts[r.item];
  }

  if (coverage == RatingsDataset::Coverage::full) {
    for (std::size_t u = 0; u < n_users; ++u) {
      if (user_counts[u] == 0) problems.push_back("user " + std::to_string(u) + " has no ratings");
    }
    for (std::size_t i = 0; i < n_items; ++i) {
      if (item_counts[i] == 0) problems.push_back("item " + std::to_string(i) + " has no ratings");
    }
  }
  return problems;
}

RatingsDataset::RatingsDataset(std::shared_ptr<const IdMap> users,
                               std::shared_ptr<const IdMap> items, std::vector<Rating> ratings,
                               Coverage coverage)
    : users_(std::move(users)),
      items_(std::move(items)),
      ratings_(std::move(ratings)),
      coverage_(coverage) {
  if (!users_ || !items_) throw std::invalid_argument("RatingsDataset: null id map");
  const auto problems = find_violations(ratings_, n_users(), n_items(), coverage_);
  if (!problems.empty()) throw std::invalid_argument("RatingsDataset: " + problems.front());
  build_index(ratings_, n_users(), true, user_offsets_, by_user_);
  build_index(ratings_, n_items(), false, item_offsets_, by_item_);
}

std::span<const Observation> RatingsDataset::user_ratings(std::size_t user) const {
  if (user >= n_users()) throw std::out_of_range("user index out of range");
  return std::span(by_user_).subspan(user_offsets_[user],
                                     user_offsets_[user + 1] - user_offsets_[user]);
}

std::span<const Observation> RatingsDataset::item_ratings(std::size_t item) const {
  if (item >= n_items()) throw std::out_of_range("item index out of range");
  return std::span(by_item_).subspan(item_offsets_[item],
                                     item_offsets_[item + 1] - item_offsets_[item]);
}

std::optional<double> RatingsDataset::rating(std::size_t user, std::size_t item) const {
  const auto row = user_ratings(user);
  const auto it = std::lower_bound(row.begin(), row.end(), item,
                                   [](const Observation& o, std::size_t j) { return o.other < j; });
  if (it == row.end() || it->other != item) return std::nullopt;
  return it->value;
}

bool RatingsDataset::operator==(const RatingsDataset& other) const {
  return coverage_ == other.coverage_ && *users_ == *other.users_ &&
         *items_ == *other.items_ && ratings_ == other.ratings_;
}

RatingsDataset parse_ratings(std::istream& source, RatingsFormat format) {
  auto users = std::make_shared<IdMap>();
  auto items = std::make_shared<IdMap>();
  auto ratings = parse_lines(source, format,
                             [&](std::size_t, std::string_view user, std::string_view item) {
                               return std::pair{users->add(user), items->add(item)};
                             });
  return RatingsDataset(std::move(users), std::move(items), std::move(ratings));
}

RatingsDataset parse_ratings(std::istream& source, RatingsFormat format,
                             std::shared_ptr<const IdMap> users,
                             std::shared_ptr<const IdMap> items) {
  auto ratings = parse_lines(
      source, format, [&](std::size_t line, std::string_view user, std::string_view item) {
        const auto u = users->find(user);
        if (!u) throw ParseError(line, "unknown user id '" + std::string(user) + "'");
        const auto i = items->find(item);
        if (!i) throw ParseError(line, "unknown item id '" + std::string(item) + "'");
        return std::pair{*u, *i};
      });
  return RatingsDataset(std::move(users), std::move(items), std::move(ratings),
                        RatingsDataset::Coverage::partial);
}

RatingsDataset load_ratings(const std::string& path, RatingsFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ratings file '" + path + "'");
  try {
    return parse_ratings(in, format);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

SplitPair split_holdout(const RatingsDataset& dataset, double test_fraction,
                        std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie strictly between 0 and 1");
  }

  // Source positions of each user's ratings, in source order.
  std::vector<std::vector<std::size_t>> rows(dataset.n_users());
  const auto ratings = dataset.ratings();
  for (std::size_t pos = 0; pos < ratings.size(); ++pos) rows[ratings[pos].user].push_back(pos);

  std::vector<std::size_t> item_left(dataset.n_items(), 0);
  for (const auto& r : ratings) ++item_left[r.item];

  std::mt19937_64 rng(seed);
  std::vector<char> to_test(ratings.size(), 0);
  for (auto& row : rows) {
    const auto quota = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(row.size())));
    // Partial Fisher-Yates: the first `quota` slots become a uniform sample.
    for (std::size_t slot = 0; slot < quota; ++slot) {
      const auto pick = slot + detail::uniform_below(rng, row.size() - slot);
      std::swap(row[slot], row[pick]);
      const std::size_t item = ratings[row[slot]].item;
      if (item_left[item] <= 1) continue;
      --item_left[item];
      to_test[row[slot]] = 1;
    }
  }

  std::vector<Rating> train;
  std::vector<Rating> test;
  for (std::size_t pos = 0; pos < ratings.size(); ++pos) {
    (to_test[pos] ? test : train).push_back(ratings[pos]);
  }
  return {RatingsDataset(dataset.shared_users(), dataset.shared_items(), std::move(train)),
          RatingsDataset(dataset.shared_users(), dataset.shared_items(), std::move(test),
                         RatingsDataset::Coverage::partial)};
}

}  // namespace divrec
