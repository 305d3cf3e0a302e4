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

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "divrec/dataset.hpp"
#include "divrec/diversity.hpp"
#include "divrec/error.hpp"
#include "divrec/factorization.hpp"
#include "divrec/format.hpp"
#include "divrec/harness.hpp"
#include "divrec/postprocess.hpp"
#include "divrec/ranking.hpp"

namespace divrec::cli {

namespace {

// Bad flag value discovered after parsing; reported like a parse error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string data;
  std::string format = "movielens_tab";
};

struct TrainOptions {
  DataOptions data;
  double test_fraction = 0.2;
  std::size_t dim = 16;
  std::optional<double> lambda;
  std::optional<double> lambda_q;
  std::optional<double> lambda_p;
  std::size_t max_iters = 50;
  double tolerance = 1e-5;
  std::optional<double> init_scale;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
  std::string log;
};

struct EvalOptions {
  DataOptions data;
  std::string model;
  std::string test;
  std::string scores;
  std::size_t k = 10;
  std::string metric = "euclidean";
  bool include_rated = false;
  double threshold = 4.0;
  std::uint64_t budget = kDefaultExhaustiveBudget;
  std::size_t threads = 1;
  std::string out;
  std::string diversity_out;
  // diversify / sweep
  double alpha = 0.5;
  std::vector<double> alphas;
  double discount = 0.9;
  std::optional<std::size_t> max_iters;
  std::string exposure_out;
};

RatingsFormat format_of(const DataOptions& opts) {
  const auto format = parse_ratings_format(opts.format);
  if (!format) throw UsageError("--format: expected movielens_tab or csv_header");
  return *format;
}

template <typename Body>
void write_file(const std::string& path, Body&& body) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  body(file);
  if (!file) throw Error("write to '" + path + "' failed");
}

// Writes to `path`, or to `out` when path is empty.
template <typename Body>
void emit(const std::string& path, std::ostream& out, Body&& body) {
  if (path.empty()) {
    body(out);
  } else {
    write_file(path, body);
  }
}

int cmd_train(const TrainOptions& opts, std::ostream& err) {
  TrainConfig config;
  config.dim = opts.dim;
  config.lambda_q = opts.lambda_q.value_or(opts.lambda.value_or(config.lambda_q));
  config.lambda_p = opts.lambda_p.value_or(opts.lambda.value_or(config.lambda_p));
  config.max_iters = opts.max_iters;
  config.tolerance = opts.tolerance;
  config.init_scale = opts.init_scale;
  config.seed = opts.seed;
  config.threads = opts.threads;

  const auto full = load_ratings(opts.data.data, format_of(opts.data));
  const auto split = split_holdout(full, opts.test_fraction, opts.seed);
  ModelArtifact artifact{train(split.train, config), full.users(), full.items(),
                         opts.test_fraction, opts.seed};

  write_file(opts.out, [&](std::ostream& file) { save_model(file, artifact); });
  const std::string log = opts.log.empty() ? opts.out + ".train.csv" : opts.log;
  write_file(log, [&](std::ostream& file) {
    file << "iter,loss,train_rmse\n";
    const auto& report = artifact.model.report;
    for (std::size_t i = 0; i < report.loss_history.size(); ++i) {
      file << i + 1 << ',' << format_number(report.loss_history[i]) << ','
           << format_number(report.rmse_history[i]) << '\n';
    }
  });
  err << "trained " << artifact.model.n_users() << " users x " << artifact.model.n_items()
      << " items, d=" << config.dim << ", " << artifact.model.report.iterations_run
      << " iterations, train rmse " << format_number(artifact.model.report.final_train_rmse);
  if (!split.test.empty()) err << ", held-out rmse " << format_number(rmse(artifact.model, split.test));
  err << '\n';
  return 0;
}

Eigen::MatrixXd load_score_table(const std::string& path, const FactorModel& model,
                                 const IdMap& users, const IdMap& items) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open score table '" + path + "'");
  Eigen::MatrixXd table(static_cast<Eigen::Index>(model.n_users()),
                        static_cast<Eigen::Index>(model.n_items()));
  for (std::size_t u = 0; u < model.n_users(); ++u) {
    const auto row = predict_user(model, u);
    table.row(static_cast<Eigen::Index>(u)) = row.transpose();
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "user,item,score") throw ParseError(1, path + ": expected header user,item,score");
      continue;
    }
    std::istringstream fields(line);
    std::string user, item, score;
    if (!std::getline(fields, user, ',') || !std::getline(fields, item, ',') ||
        !std::getline(fields, score)) {
      throw ParseError(line_no, path + ": malformed line");
    }
    const auto u = users.find(user);
    const auto j = items.find(item);
    if (!u || !j) throw ParseError(line_no, path + ": unknown user or item id");
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(score, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != score.size()) throw ParseError(line_no, path + ": malformed score");
    table(static_cast<Eigen::Index>(*u), static_cast<Eigen::Index>(*j)) = value;
  }
  return table;
}

struct Workspace {
  ModelArtifact artifact;
  SplitPair split;
  Scorer scorer;
  EvaluationSettings settings;
};

EvaluationSettings settings_of(const EvalOptions& opts, const FactorModel& model) {
  EvaluationSettings settings;
  const auto metric = parse_distance_kind(opts.metric);
  if (!metric) throw UsageError("--metric: expected euclidean or cosine");
  if (opts.k == 0 || opts.k > model.n_items()) {
    throw UsageError("--k: " + std::to_string(opts.k) + " must lie in [1, " +
                     std::to_string(model.n_items()) + "] (the item count)");
  }
  settings.k = opts.k;
  settings.metric = *metric;
  settings.exclude_observed = !opts.include_rated;
  settings.relevance_threshold = opts.threshold;
  settings.exhaustive_budget = opts.budget;
  settings.threads = opts.threads;
  return settings;
}

SplitPair make_split(const EvalOptions& opts, const ModelArtifact& artifact, std::ostream& err) {
  const auto format = format_of(opts.data);
  auto full = load_ratings(opts.data.data, format);
  if (!(full.users() == artifact.users) || !(full.items() == artifact.items)) {
    throw Error("--data: ratings are indexed differently from the data the model was trained on");
  }
  if (!opts.test.empty()) {
    std::ifstream in(opts.test);
    if (!in) throw Error("cannot open ratings file '" + opts.test + "'");
    auto test = parse_ratings(in, format, full.shared_users(), full.shared_items());
    return {std::move(full), std::move(test)};
  }
  if (artifact.split_fraction && artifact.split_seed) {
    return split_holdout(full, *artifact.split_fraction, *artifact.split_seed);
  }
  err << "note: model records no holdout and --test is absent; relevance metrics are empty\n";
  RatingsDataset empty(full.shared_users(), full.shared_items(), {},
                       RatingsDataset::Coverage::partial);
  return {std::move(full), std::move(empty)};
}

Workspace load_workspace(const EvalOptions& opts, std::ostream& err) {
  std::ifstream in(opts.model);
  if (!in) throw Error("--model: cannot open '" + opts.model + "'");
  auto artifact = load_model(in);
  auto settings = settings_of(opts, artifact.model);
  auto split = make_split(opts, artifact, err);
  Scorer scorer = opts.scores.empty()
                      ? Scorer(artifact.model)
                      : Scorer(artifact.model, load_score_table(opts.scores, artifact.model,
                                                                artifact.users, artifact.items));
  return {std::move(artifact), std::move(split), std::move(scorer), settings};
}

void validate_postprocess(const EvalOptions& opts) {
  if (!(opts.discount > 0.0 && opts.discount < 1.0)) {
    throw UsageError("--discount: must lie strictly between 0 and 1");
  }
  if (opts.max_iters && *opts.max_iters == 0) throw UsageError("--max-iters: must be positive");
}

int cmd_evaluate(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  const auto ws = load_workspace(opts, err);
  const auto baseline = run_baseline(ws.scorer, ws.split, ws.settings);
  emit(opts.out, out, [&](std::ostream& o) {
    write_sweep_header(o);
    write_sweep_row(o, baseline.row);
  });
  if (!opts.diversity_out.empty()) {
    write_file(opts.diversity_out, [&](std::ostream& o) {
      write_diversity_csv(o, baseline.diversity, ws.artifact.users, ws.artifact.items);
    });
  }
  return 0;
}

int cmd_diversify(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  if (!(opts.alpha >= 0.0 && opts.alpha <= 1.0)) throw UsageError("--alpha: must lie in [0, 1]");
  validate_postprocess(opts);
  const auto ws = load_workspace(opts, err);
  const auto baseline = run_baseline(ws.scorer, ws.split, ws.settings);

  DiversifyConfig config;
  config.k = ws.settings.k;
  config.alpha = opts.alpha;
  config.metric = ws.settings.metric;
  config.discount = opts.discount;
  config.max_iters = opts.max_iters;
  const auto outcomes = diversify_all(ws.scorer, ws.split.train, baseline.lists, config,
                                      baseline.normalizer, ws.settings.exclude_observed,
                                      ws.settings.threads);
  emit(opts.out, out, [&](std::ostream& o) { write_outcomes_csv(o, outcomes, ws.artifact.users); });
  return 0;
}

std::string exposure_path_for(const std::string& out) {
  const std::filesystem::path path(out);
  return (path.parent_path() / (path.stem().string() + "_exposure" + path.extension().string()))
      .string();
}

int cmd_sweep(EvalOptions opts, std::ostream& out, std::ostream& err) {
  validate_postprocess(opts);
  if (opts.alphas.empty()) opts.alphas = default_alpha_grid();
  for (const double a : opts.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("--alphas: every value must lie in [0, 1]");
  }
  if (!std::is_sorted(opts.alphas.begin(), opts.alphas.end())) {
    std::sort(opts.alphas.begin(), opts.alphas.end());
    err << "note: --alphas sorted ascending before running\n";
  }

  const auto ws = load_workspace(opts, err);
  const auto result =
      run_sweep(ws.scorer, ws.split, ws.settings, opts.alphas, opts.discount, opts.max_iters);
  emit(opts.out, out, [&](std::ostream& o) { write_sweep_csv(o, result.rows); });

  std::string exposure = opts.exposure_out;
  if (exposure.empty() && !opts.out.empty()) exposure = exposure_path_for(opts.out);
  if (!exposure.empty()) {
    write_file(exposure, [&](std::ostream& o) {
      write_exposure_csv(o, ws.artifact.items, result.baseline_exposure,
                         result.postprocessed_exposure);
    });
  }
  return 0;
}

void add_data_options(CLI::App& cmd, DataOptions& data) {
  cmd.add_option("--data", data.data, "Ratings file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--format", data.format, "movielens_tab or csv_header")
      ->check(CLI::IsMember({"movielens_tab", "csv_header"}))
      ->capture_default_str();
}

void add_eval_options(CLI::App& cmd, EvalOptions& opts) {
  add_data_options(cmd, opts.data);
  cmd.add_option("--model", opts.model, "Model artifact written by `train`")
      ->required()
      ->check(CLI::ExistingFile);
  cmd.add_option("--test", opts.test,
                 "Held-out ratings (same format); replaces the model's recorded holdout")
      ->check(CLI::ExistingFile);
  cmd.add_option("--scores", opts.scores,
                 "CSV user,item,score overriding predicted scores for ranking")
      ->check(CLI::ExistingFile);
  cmd.add_option("--k", opts.k, "List length")->capture_default_str();
  cmd.add_option("--metric", opts.metric, "euclidean or cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}))
      ->capture_default_str();
  cmd.add_flag("--include-rated", opts.include_rated,
               "Allow items the user rated in the training data");
  cmd.add_option("--threshold", opts.threshold, "Relevance threshold on held-out ratings")
      ->capture_default_str();
  cmd.add_option("--budget", opts.budget, "Subset budget for the exact maxILLD search")
      ->capture_default_str();
  cmd.add_option("--threads", opts.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--out", opts.out, "Output CSV (standard output when absent)");
}

void add_postprocess_options(CLI::App& cmd, EvalOptions& opts) {
  cmd.add_option("--discount", opts.discount, "Rating-floor discount, strictly inside (0,1)")
      ->capture_default_str();
  cmd.add_option("--max-iters", opts.max_iters, "Swap-loop iterations per user (default 50 * k)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix-factorization recommender with latent intra-list diversity control",
               "divrec"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Optional config file (key=value, [subcommand] sections)");
  app.fallthrough();  // --config may follow the subcommand

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train an ALS factor model");
  add_data_options(*train_cmd, train_opts.data);
  train_cmd->add_option("--test-fraction", train_opts.test_fraction,
                        "Per-user holdout fraction, strictly inside (0,1)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train_cmd->add_option("--d", train_opts.dim, "Latent dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lambda", train_opts.lambda, "Regularization for both factors")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lambda-q", train_opts.lambda_q, "User-factor regularization")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lambda-p", train_opts.lambda_p, "Item-factor regularization")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--max-iters", train_opts.max_iters, "ALS iterations")
      ->capture_default_str();
  train_cmd->add_option("--tolerance", train_opts.tolerance, "Relative loss-change stop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--init-scale", train_opts.init_scale,
                        "Uniform init upper bound (default 1/sqrt(d))")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", train_opts.seed, "Seed for the holdout and initialization")
      ->capture_default_str();
  train_cmd->add_option("--threads", train_opts.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--out", train_opts.out, "Model artifact path")->required();
  train_cmd->add_option("--log", train_opts.log, "Training CSV (default <out>.train.csv)");

  EvalOptions eval_opts;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Baseline relevance and nILLD report");
  add_eval_options(*evaluate_cmd, eval_opts);
  evaluate_cmd->add_option("--diversity-out", eval_opts.diversity_out, "Per-user nILLD CSV");

  EvalOptions diversify_opts;
  auto* diversify_cmd = app.add_subcommand("diversify", "Enforce individual alpha-diversity");
  add_eval_options(*diversify_cmd, diversify_opts);
  add_postprocess_options(*diversify_cmd, diversify_opts);
  diversify_cmd->add_option("--alpha", diversify_opts.alpha, "Diversity threshold in [0,1]")
      ->capture_default_str();

  EvalOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Relevance/diversity trade-off over alphas");
  add_eval_options(*sweep_cmd, sweep_opts);
  add_postprocess_options(*sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--alphas", sweep_opts.alphas, "Comma-separated alphas (default 0.1..0.9)")
      ->delimiter(',');
  sweep_cmd->add_option("--exposure-out", sweep_opts.exposure_out,
                        "Item exposure CSV (default <out>_exposure.csv)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) {
      if (!(train_opts.test_fraction > 0.0 && train_opts.test_fraction < 1.0)) {
        throw UsageError("--test-fraction: must lie strictly between 0 and 1");
      }
      if (train_opts.max_iters == 0) {
        err << "note: --max-iters 0 keeps the initialization\n";
      }
      return cmd_train(train_opts, err);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(eval_opts, out, err);
    if (diversify_cmd->parsed()) return cmd_diversify(diversify_opts, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace divrec::cli
