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

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "divrec/error.hpp"
#include "divrec/factorization.hpp"

namespace divrec {

namespace {

constexpr std::string_view kMagic = "divrec-model";
constexpr int kVersion = 1;

std::string hex(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%a", value);
  return buffer;
}

[[noreturn]] void fail(const std::string& what) { throw Error("model artifact: " + what); }

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string token(const char* what) {
    std::string t;
    if (!(in_ >> t)) fail(std::string("truncated while reading ") + what);
    return t;
  }

  void expect(std::string_view keyword) {
    const auto t = token(std::string(keyword).c_str());
    if (t != keyword) fail("expected '" + std::string(keyword) + "', found '" + t + "'");
  }

  double real(const char* what) {
    const auto t = token(what);
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) fail(std::string("bad number for ") + what);
    return value;
  }

  std::uint64_t count(const char* what) {
    const auto t = token(what);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
      fail(std::string("bad count for ") + what);
    }
    return std::stoull(t);
  }

  // Reads `n` ids, one per line, after the current line.
  IdMap ids(std::uint64_t n, const char* what) {
    std::string line;
    std::getline(in_, line);  // rest of the keyword line
    IdMap map;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!std::getline(in_, line)) fail(std::string("truncated ") + what);
      if (map.add(line) != i) fail(std::string("duplicate id in ") + what);
    }
    return map;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const ModelArtifact& artifact) {
  const auto& model = artifact.model;
  const auto& cfg = model.config;
  const auto& report = model.report;
  if (artifact.users.size() != model.n_users() || artifact.items.size() != model.n_items()) {
    throw std::invalid_argument("save_model: id maps do not match the factor shapes");
  }

  out << kMagic << ' ' << kVersion << '\n';
  out << "users " << model.n_users() << '\n';
  out << "items " << model.n_items() << '\n';
  out << "dim " << model.dim() << '\n';
  out << "lambda_q " << hex(cfg.lambda_q) << '\n';
  out << "lambda_p " << hex(cfg.lambda_p) << '\n';
  out << "max_iters " << cfg.max_iters << '\n';
  out << "tolerance " << hex(cfg.tolerance) << '\n';
  out << "init_scale " << (cfg.init_scale ? hex(*cfg.init_scale) : "default") << '\n';
  out << "seed " << cfg.seed << '\n';
  out << "threads " << cfg.threads << '\n';
  if (artifact.split_fraction && artifact.split_seed) {
    out << "split " << hex(*artifact.split_fraction) << ' ' << *artifact.split_seed << '\n';
  } else {
    out << "split none\n";
  }
  out << "iterations " << report.iterations_run << '\n';
  out << "final_train_rmse " << hex(report.final_train_rmse) << '\n';
  out << "history " << report.loss_history.size() << '\n';
  for (std::size_t i = 0; i < report.loss_history.size(); ++i) {
    out << hex(report.loss_history[i]) << ' ' << hex(report.rmse_history.at(i)) << '\n';
  }
  out << "user_ids\n";
  for (const auto& id : artifact.users.ids()) out << id << '\n';
  out << "item_ids\n";
  for (const auto& id : artifact.items.ids()) out << id << '\n';

  const auto write_vector = [&](auto&& vec) {
    for (Eigen::Index f = 0; f < vec.size(); ++f) out << (f ? " " : "") << hex(vec[f]);
    out << '\n';
  };
  out << "user_factors\n";
  for (Eigen::Index i = 0; i < model.user_factors.rows(); ++i) {
    write_vector(model.user_factors.row(i));
  }
  out << "item_factors\n";
  for (Eigen::Index j = 0; j < model.item_factors.cols(); ++j) {
    write_vector(model.item_factors.col(j));
  }
  out << "end\n";
  if (!out) throw Error("model artifact: write failed");
}

ModelArtifact load_model(std::istream& in) {
  Reader reader(in);
  ModelArtifact artifact;
  auto& model = artifact.model;
  auto& cfg = model.config;
  auto& report = model.report;

  if (reader.token("header") != kMagic) fail("not a divrec model (bad magic)");
  if (reader.count("version") != kVersion) fail("unsupported format version");

  reader.expect("users");
  const auto n = reader.count("users");
  reader.expect("items");
  const auto m = reader.count("items");
  reader.expect("dim");
  const auto d = reader.count("dim");
  if (n == 0 || m == 0 || d == 0) fail("empty dimensions");
  cfg.dim = d;

  reader.expect("lambda_q");
  cfg.lambda_q = reader.real("lambda_q");
  reader.expect("lambda_p");
  cfg.lambda_p = reader.real("lambda_p");
  reader.expect("max_iters");
  cfg.max_iters = reader.count("max_iters");
  reader.expect("tolerance");
  cfg.tolerance = reader.real("tolerance");
  reader.expect("init_scale");
  {
    const auto t = reader.token("init_scale");
    if (t != "default") {
      std::istringstream one(t);
      cfg.init_scale = Reader(one).real("init_scale");
    }
  }
  reader.expect("seed");
  cfg.seed = reader.count("seed");
  reader.expect("threads");
  cfg.threads = reader.count("threads");

  reader.expect("split");
  {
    const auto t = reader.token("split");
    if (t != "none") {
      std::istringstream one(t);
      artifact.split_fraction = Reader(one).real("split fraction");
      artifact.split_seed = reader.count("split seed");
    }
  }

  reader.expect("iterations");
  report.iterations_run = reader.count("iterations");
  reader.expect("final_train_rmse");
  report.final_train_rmse = reader.real("final_train_rmse");
  reader.expect("history");
  const auto history = reader.count("history");
  for (std::uint64_t i = 0; i < history; ++i) {
    report.loss_history.push_back(reader.real("loss history"));
    report.rmse_history.push_back(reader.real("rmse history"));
  }

  reader.expect("user_ids");
  artifact.users = reader.ids(n, "user_ids");
  reader.expect("item_ids");
  artifact.items = reader.ids(m, "item_ids");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(m);
  const auto dim = static_cast<Eigen::Index>(d);
  reader.expect("user_factors");
  model.user_factors.resize(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index f = 0; f < dim; ++f) model.user_factors(i, f) = reader.real("user factor");
  }
  reader.expect("item_factors");
  model.item_factors.resize(dim, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index f = 0; f < dim; ++f) model.item_factors(f, j) = reader.real("item factor");
  }
  reader.expect("end");

  if (!model.user_factors.allFinite() || !model.item_factors.allFinite()) {
    fail("non-finite factor entries");
  }
  return artifact;
}

}  // namespace divrec
