// tcb: train and analyze totally-corrective boosted cascades on tabular or
// Haar-featurized data. One subcommand per pipeline stage; every artifact
// embeds the full run configuration and seed.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tcb/booster.hpp"
#include "tcb/cascade.hpp"
#include "tcb/model_io.hpp"
#include "tcb/mpm.hpp"
#include "tcb/simplex_qp.hpp"
#include "tcb/toygen.hpp"

namespace {

using tcb::Json;

constexpr double kThetaGrid[] = {1.0 / 10, 1.0 / 12, 1.0 / 15, 1.0 / 20,
                                 1.0 / 25, 1.0 / 30, 1.0 / 40, 1.0 / 50};

// Cycles the negative rows of a dataset; the trainer's acceptance filter
// turns replayed rows into bootstrapped negatives.
class ReplayNegativePool final : public tcb::NegativePool {
 public:
  ReplayNegativePool(const tcb::Dataset& data, std::int64_t max_draws)
      : data_(data), max_draws_(max_draws) {}

  std::optional<Eigen::RowVectorXd> draw() override {
    if (consumed_ >= max_draws_) return std::nullopt;
    const Eigen::Index row =
        data_.m1 + static_cast<Eigen::Index>(consumed_ % data_.m2);
    ++consumed_;
    return Eigen::RowVectorXd(data_.features.row(row));
  }

 private:
  const tcb::Dataset& data_;
  std::int64_t max_draws_;
};

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string config_path;
};

// --config <file> supersedes flags: overlay its values after parsing.
Json overlay_config(const CommonOpts& opts, Json flags) {
  if (opts.config_path.empty()) return flags;
  std::ifstream in(opts.config_path);
  if (!in) throw std::runtime_error("cannot open config: " + opts.config_path);
  Json file;
  in >> file;
  for (auto& [key, value] : file.items()) flags[key] = value;
  return flags;
}

tcb::BoosterConfig booster_from_json(const Json& j) {
  tcb::BoosterConfig config;
  const std::string mode = j.value("mode", "fisher");
  if (mode == "fisher")
    config.mode = tcb::BoostMode::fisher;
  else if (mode == "lac")
    config.mode = tcb::BoostMode::lac;
  else if (mode != "adaboost")
    throw std::runtime_error("unknown mode: " + mode);
  config.theta = j.value("theta", config.theta);
  config.epsilon = j.value("epsilon", config.epsilon);
  config.n_max = j.value("n-max", config.n_max);
  config.exact_q = j.value("exact-q", config.exact_q);
  config.nonneg_mean_gap = j.value("nonneg-mean-gap", config.nonneg_mean_gap);
  config.delta = j.value("delta", config.delta);
  config.eg.tol = j.value("eg-tol", config.eg.tol);
  config.eg.max_iters = j.value("eg-max-iters", config.eg.max_iters);
  if (j.value("eg-schedule", "fixed") == "theory")
    config.eg.step_schedule = tcb::StepSchedule::theory;

  const std::string offset = j.value("offset", "balanced");
  if (offset == "balanced")
    config.offset_target.kind = tcb::OffsetTarget::Kind::balanced;
  else if (offset == "min-detection")
    config.offset_target.kind = tcb::OffsetTarget::Kind::min_detection;
  else if (offset == "max-fp")
    config.offset_target.kind = tcb::OffsetTarget::Kind::max_fp;
  else
    throw std::runtime_error("unknown offset target: " + offset);
  config.offset_target.min_detection =
      j.value("min-detection", config.offset_target.min_detection);
  config.offset_target.max_fp = j.value("max-fp", config.offset_target.max_fp);
  return config;
}

Json metrics_on(const tcb::StrongClassifier& sc, const tcb::Dataset& data) {
  const auto [det, fp] = tcb::evaluate_node(sc, data);
  Eigen::Index errors = 0;
  const Eigen::VectorXd scores = sc.scores(data.features);
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    errors += sc.predict_score(scores[i]) != data.labels[i];
  return Json{{"detection_rate", det},
              {"fp_rate", fp},
              {"error_count", errors},
              {"error_rate", static_cast<double>(errors) /
                                 static_cast<double>(data.rows())},
              {"examples", data.rows()}};
}

int cmd_gen_toy(const CommonOpts& common, const Json& j,
                const std::string& out) {
  const tcb::Dataset data =
      tcb::gen_toy(tcb::toy_kind_from_name(j.value("kind", "gaussians2d")),
                   j.value("positives", Eigen::Index{100}),
                   j.value("negatives", Eigen::Index{400}), common.seed);
  Json meta{{"command", "gen-toy"}, {"seed", common.seed}, {"config", j}};
  tcb::save_dataset_csv(out, data, meta);
  std::cout << "wrote " << out << " (" << data.m1 << " positives, " << data.m2
            << " negatives)\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const Json& j, const std::string& data_path,
              const std::string& out) {
  const tcb::Dataset data = tcb::load_dataset_csv(data_path);
  tcb::WeakLearnerPool pool(tcb::PoolSource::tabular,
                            j.value("sample-fraction", 1.0), common.seed);

  tcb::ModelMetadata meta;
  meta.mode = j.value("mode", "fisher");
  meta.seed = common.seed;
  meta.config = j;

  tcb::StrongClassifier classifier;
  if (meta.mode == "adaboost") {
    const auto result = tcb::adaboost_train(data, pool, j.value("n-max", 100));
    classifier = result.classifier;
    meta.theta = 0.0;
  } else {
    const tcb::BoosterConfig config = booster_from_json(j);
    const auto result = tcb::train(data, pool, config);
    classifier = result.classifier;
    meta.theta = config.theta;
    meta.training_metrics = Json{{"iterations", result.iterations},
                                 {"stopped_by_epsilon", result.stopped_by_epsilon},
                                 {"truncated", result.truncated}};
    if (j.value("postprocess", std::string{}) == "lac" ||
        j.value("postprocess", std::string{}) == "lda") {
      // Re-fit the coefficients over the selected stumps in closed form.
      Eigen::MatrixXd outputs(data.rows(),
                              static_cast<Eigen::Index>(
                                  classifier.weak_classifiers.size()));
      for (std::size_t k = 0; k < classifier.weak_classifiers.size(); ++k)
        outputs.col(static_cast<Eigen::Index>(k)) =
            classifier.weak_classifiers[k].evaluate(data.features);
      const auto post = tcb::lac_lda_postprocess(
          outputs, data.labels,
          j.value("postprocess", std::string{}) == "lac"
              ? tcb::PostprocessMode::lac
              : tcb::PostprocessMode::lda,
          j.value("delta", 1e-8));
      classifier.w = post.w;
      classifier.b = post.b;
      meta.training_metrics["postprocess"] = j.value("postprocess", std::string{});
    }
  }
  if (classifier.weak_classifiers.empty())
    throw std::runtime_error("training produced no weak classifiers");
  meta.training_metrics["metrics"] = metrics_on(classifier, data);
  tcb::save_model(out, classifier, meta);
  std::cout << "wrote " << out << " ("
            << classifier.weak_classifiers.size() << " weak classifiers)\n"
            << meta.training_metrics["metrics"].dump() << "\n";
  return 0;
}

int cmd_eval(const Json&, const std::string& data_path,
             const std::string& model_path, const std::string& out) {
  const tcb::Dataset data = tcb::load_dataset_csv(data_path);
  const tcb::LoadedModel model = tcb::load_model(model_path);
  const Json metrics = metrics_on(model.classifier, data);
  Json meta{{"command", "eval"},
            {"model", model_path},
            {"data", data_path},
            {"seed", model.meta.seed}};
  tcb::write_csv(out, meta, "detection_rate,fp_rate,error_rate",
                 {{metrics["detection_rate"].get<double>(),
                   metrics["fp_rate"].get<double>(),
                   metrics["error_rate"].get<double>()}});
  std::cout << metrics.dump() << "\n";
  return 0;
}

int cmd_solve_qp(const Json& j, const std::string& problem_path,
                 const std::string& out) {
  std::ifstream in(problem_path);
  if (!in) throw std::runtime_error("cannot open: " + problem_path);
  Json problem;
  in >> problem;
  const auto n = problem.at("n").get<Eigen::Index>();
  tcb::SimplexQP qp;
  qp.p.resize(n, n);
  qp.c.resize(n);
  const auto& p_rows = problem.at("P");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      qp.p(i, k) = p_rows.at(static_cast<std::size_t>(i * n + k)).get<double>();
  for (Eigen::Index i = 0; i < n; ++i)
    qp.c[i] = problem.at("c").at(static_cast<std::size_t>(i)).get<double>();

  tcb::EgConfig config;
  config.tol = j.value("eg-tol", 1e-9);
  config.max_iters = j.value("eg-max-iters", 100000);
  if (j.value("eg-schedule", "fixed") == "theory")
    config.step_schedule = tcb::StepSchedule::theory;
  const tcb::QpSolution sol = tcb::eg_solve(qp, config);

  Json out_json{{"objective", sol.objective},
                {"iters", sol.iters},
                {"converged", sol.converged},
                {"config", j}};
  Json w = Json::array();
  for (Eigen::Index i = 0; i < sol.w.size(); ++i) w.push_back(sol.w[i]);
  out_json["w"] = w;
  std::ofstream of(out);
  of << out_json.dump(2) << "\n";
  std::cout << out_json.dump() << "\n";
  return 0;
}

std::unique_ptr<tcb::NegativePool> make_pool(const Json& j,
                                             const tcb::Dataset* data,
                                             std::uint64_t seed) {
  const std::string source = j.value("neg-source", "data");
  const auto max_draws = j.value("neg-max-draws", std::int64_t{1000000});
  if (source == "data") {
    if (!data) throw std::runtime_error("neg-source=data needs --data");
    return std::make_unique<ReplayNegativePool>(*data, max_draws);
  }
  if (source == "uniform") {
    const auto dims = j.value("neg-dims", Eigen::Index{2});
    const double lo = j.value("neg-lo", -3.0);
    const double hi = j.value("neg-hi", 3.0);
    return std::make_unique<tcb::SyntheticNegativePool>(
        [dims, lo, hi](std::mt19937_64& rng) {
          Eigen::RowVectorXd row(dims);
          for (Eigen::Index k = 0; k < dims; ++k) {
            const double u =
                (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
            row[k] = lo + (hi - lo) * u;
          }
          return row;
        },
        seed + 0x517cc1b727220a95ULL, max_draws);
  }
  if (source == "images") {
    const int win = j.value("window", 12);
    std::vector<Eigen::MatrixXd> backgrounds;
    for (const auto& path : j.at("backgrounds"))
      backgrounds.push_back(tcb::load_pgm(path.get<std::string>()));
    const auto features = tcb::enumerate_haar_features(
        win, win, j.value("haar-stride", 3));
    return std::make_unique<tcb::ImageNegativePool>(
        std::move(backgrounds), features, win, win,
        seed + 0x2545f4914f6cdd1dULL, max_draws);
  }
  throw std::runtime_error("unknown neg-source: " + source);
}

int cmd_train_cascade(const CommonOpts& common, const Json& j,
                      const std::string& data_path, const std::string& out,
                      const std::string& nodes_out) {
  const tcb::Dataset data = tcb::load_dataset_csv(data_path);
  tcb::CascadeConfig config;
  config.booster = booster_from_json(j);
  config.targets.d_min = j.value("d-min", 0.995);
  config.targets.f_max = j.value("f-max", 0.5);
  config.targets.overall_fp = j.value("overall-fp", 1e-3);
  config.lac_start_node = j.value("lac-start-node", 3);
  config.max_nodes = j.value("max-nodes", 20);
  config.negatives_per_node =
      j.value("negatives-per-node", Eigen::Index{200});
  config.pool_sample_fraction = j.value("sample-fraction", 1.0);
  config.pool_seed = common.seed;
  if (j.contains("node-budgets")) {
    config.node_budgets.clear();
    for (const auto& b : j.at("node-budgets"))
      config.node_budgets.push_back(b.get<int>());
  }

  auto pool = make_pool(j, &data, common.seed);
  const tcb::RowMatrixXd positives = data.features.topRows(data.m1);
  const tcb::CascadeTrainResult result =
      tcb::train_cascade(positives, *pool, config);

  Json meta{{"command", "train-cascade"},
            {"seed", common.seed},
            {"config", j},
            {"reached_target", result.reached_target},
            {"pool_exhausted", result.pool_exhausted},
            {"node_budget_exceeded", result.node_budget_exceeded},
            {"negatives_consumed", pool->consumed()}};
  tcb::save_cascade(out, result.model, meta);

  std::vector<std::vector<double>> rows;
  for (const auto& node : result.nodes)
    rows.push_back({static_cast<double>(node.node), node.detection, node.fp});
  tcb::write_csv(nodes_out, meta, "node,detection_rate,fp_rate", rows);

  std::cout << "wrote " << out << " (" << result.model.exits.size()
            << " nodes, " << result.model.classifiers.size()
            << " weak classifiers)\n";
  if (result.pool_exhausted || result.node_budget_exceeded) {
    std::cout << Json{{"error", "training truncated"},
                      {"pool_exhausted", result.pool_exhausted},
                      {"node_budget_exceeded", result.node_budget_exceeded}}
                     .dump()
              << "\n";
    return 2;  // partial artifact written
  }
  return 0;
}

int cmd_roc(const Json& j, const std::string& cascade_path,
            const std::string& data_path, const std::string& out) {
  const tcb::LoadedCascade cascade = tcb::load_cascade(cascade_path);
  const tcb::Dataset data = tcb::load_dataset_csv(data_path);

  std::vector<double> sweep;
  if (j.contains("sweep")) {
    for (const auto& v : j.at("sweep")) sweep.push_back(v.get<double>());
  } else {
    const double b = cascade.model.exits.back().b;
    const int count = j.value("sweep-count", 21);
    for (int k = 0; k < count; ++k)
      sweep.push_back(b - 1.0 + 2.0 * k / (count - 1));
  }
  const auto points = tcb::evaluate_cascade_roc(cascade.model, data, sweep);
  std::vector<std::vector<double>> rows;
  for (const auto& p : points)
    rows.push_back({static_cast<double>(p.fp_count), p.detection_rate});
  Json meta{{"command", "roc"}, {"cascade", cascade_path},
            {"data", data_path}, {"config", j}};
  tcb::write_csv(out, meta, "fp_count,detection_rate", rows);
  std::cout << "wrote " << out << " (" << points.size() << " points)\n";
  return 0;
}

int cmd_analyze(const Json& j, const std::string& data_path,
                const std::string& model_path, const std::string& qq_out,
                const std::string& diag_out) {
  const tcb::Dataset data = tcb::load_dataset_csv(data_path);
  const tcb::LoadedModel model = tcb::load_model(model_path);
  const auto& classifiers = model.classifier.weak_classifiers;

  Eigen::MatrixXd outputs(data.rows(),
                          static_cast<Eigen::Index>(classifiers.size()));
  for (std::size_t k = 0; k < classifiers.size(); ++k)
    outputs.col(static_cast<Eigen::Index>(k)) =
        classifiers[k].evaluate(data.features);

  // Positive-class margins fuel the normality check.
  const Eigen::VectorXd margins =
      outputs.topRows(data.m1) * model.classifier.w;
  const tcb::QqResult qq = tcb::normality_qq(margins);
  Json meta{{"command", "analyze"}, {"model", model_path},
            {"data", data_path}, {"config", j},
            {"qq_correlation", qq.correlation}};
  std::vector<std::vector<double>> qq_rows;
  for (const auto& [theo, sample] : qq.points) qq_rows.push_back({theo, sample});
  tcb::write_csv(qq_out, meta, "theoretical_quantile,sample_quantile", qq_rows);

  const tcb::DiagonalityStats stats =
      tcb::covariance_diagonality(outputs.bottomRows(data.m2));
  tcb::write_csv(diag_out, meta, "mean_abs_diag,mean_abs_offdiag,ratio",
                 {{stats.mean_abs_diag, stats.mean_abs_offdiag, stats.ratio}});
  std::cout << Json{{"qq_correlation", qq.correlation},
                    {"diag_ratio", stats.ratio}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_theta_sweep(const CommonOpts& common, const Json& j,
                    const std::string& data_path, const std::string& out) {
  const tcb::Dataset data = tcb::load_dataset_csv(data_path);
  std::vector<double> grid(std::begin(kThetaGrid), std::end(kThetaGrid));
  if (j.contains("grid")) {
    grid.clear();
    for (const auto& v : j.at("grid")) grid.push_back(v.get<double>());
  }

  double best_accuracy = -1.0;
  double best_theta = grid.front();
  Json results = Json::array();
  for (double theta : grid) {
    Json jj = j;
    jj["theta"] = theta;
    tcb::CascadeConfig config;
    config.booster = booster_from_json(jj);
    config.targets.d_min = j.value("d-min", 0.99);
    config.targets.f_max = j.value("f-max", 0.5);
    config.targets.overall_fp = j.value("overall-fp", 1e-2);
    config.lac_start_node = j.value("lac-start-node", 3);
    config.max_nodes = j.value("max-nodes", 3);  // short cascade
    config.negatives_per_node = j.value(
        "negatives-per-node", std::min<Eigen::Index>(data.m2, 200));
    config.pool_seed = common.seed;

    auto pool = make_pool(jj, &data, common.seed);
    const auto trained = tcb::train_cascade(data.features.topRows(data.m1),
                                            *pool, config);

    // Training accuracy of the whole short cascade on the source dataset.
    const Eigen::VectorXi rejection =
        trained.model.first_rejection(data.features);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const bool accepted = rejection[i] < 0;
      correct += accepted == (data.labels[i] == 1);
    }
    const double accuracy =
        static_cast<double>(correct) / static_cast<double>(data.rows());
    results.push_back({{"theta", theta},
                       {"accuracy", accuracy},
                       {"nodes", trained.model.exits.size()}});
    // Strict improvement required: ties resolve to the smaller theta, and
    // the grid descends from 1/10 downward.
    const bool better = accuracy > best_accuracy ||
                        (accuracy == best_accuracy && theta < best_theta);
    if (better) {
      best_accuracy = accuracy;
      best_theta = theta;
    }
  }

  Json out_json{{"command", "theta-sweep"},
                {"seed", common.seed},
                {"config", j},
                {"results", results},
                {"best_theta", best_theta},
                {"best_accuracy", best_accuracy}};
  std::ofstream of(out);
  of << out_json.dump(2) << "\n";
  std::cout << Json{{"best_theta", best_theta},
                    {"best_accuracy", best_accuracy}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"totally-corrective boosting toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  Json flags = Json::object();
  std::string data_path, model_path, cascade_path, problem_path;
  std::string out = "out.json", nodes_out = "nodes.csv";
  std::string qq_out = "qq.csv", diag_out = "diag.csv";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "run seed");
    cmd->add_option("--config", common.config_path,
                    "JSON config superseding flags");
  };
  auto opt = [&flags](CLI::App* cmd, const std::string& name,
                      const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + name,
        [&flags, name](const std::string& value) {
          // numbers stay numbers, words stay strings
          try {
            std::size_t pos = 0;
            const double d = std::stod(value, &pos);
            if (pos == value.size()) {
              flags[name] = d;
              return;
            }
          } catch (...) {
          }
          if (value == "true" || value == "false")
            flags[name] = value == "true";
          else
            flags[name] = value;
        },
        help);
  };

  CLI::App* gen = app.add_subcommand("gen-toy", "generate a synthetic dataset");
  add_common(gen);
  opt(gen, "kind", "gaussians2d | separable | xor");
  opt(gen, "positives", "positive count");
  opt(gen, "negatives", "negative count");
  gen->add_option("--out", out, "output csv")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "train one node classifier");
  add_common(train_cmd);
  train_cmd->add_option("--data", data_path)->required();
  train_cmd->add_option("--out", out)->required();
  for (const char* name :
       {"mode", "theta", "epsilon", "n-max", "exact-q", "offset",
        "min-detection", "max-fp", "sample-fraction", "nonneg-mean-gap",
        "delta", "eg-tol", "eg-max-iters", "eg-schedule", "postprocess"})
    opt(train_cmd, name, "");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model on data");
  add_common(eval_cmd);
  eval_cmd->add_option("--data", data_path)->required();
  eval_cmd->add_option("--model", model_path)->required();
  eval_cmd->add_option("--out", out, "metrics csv")->required();

  CLI::App* qp_cmd = app.add_subcommand("solve-qp", "solve a simplex QP file");
  add_common(qp_cmd);
  qp_cmd->add_option("--problem", problem_path)->required();
  qp_cmd->add_option("--out", out)->required();
  for (const char* name : {"eg-tol", "eg-max-iters", "eg-schedule"})
    opt(qp_cmd, name, "");

  CLI::App* casc = app.add_subcommand("train-cascade",
                                      "train a multi-exit cascade");
  add_common(casc);
  casc->add_option("--data", data_path, "positives + initial negative source")
      ->required();
  casc->add_option("--out", out, "cascade json")->required();
  casc->add_option("--nodes-out", nodes_out, "per-node metrics csv");
  for (const char* name :
       {"mode", "theta", "epsilon", "exact-q", "d-min", "f-max", "overall-fp",
        "lac-start-node", "max-nodes", "negatives-per-node", "sample-fraction",
        "neg-source", "neg-dims", "neg-lo", "neg-hi", "neg-max-draws",
        "window", "haar-stride"})
    opt(casc, name, "");

  CLI::App* roc_cmd = app.add_subcommand("roc", "cascade ROC sweep");
  add_common(roc_cmd);
  roc_cmd->add_option("--cascade", cascade_path)->required();
  roc_cmd->add_option("--data", data_path)->required();
  roc_cmd->add_option("--out", out)->required();
  opt(roc_cmd, "sweep-count", "");

  CLI::App* analyze_cmd = app.add_subcommand("analyze",
                                             "margin normality + diagonality");
  add_common(analyze_cmd);
  analyze_cmd->add_option("--data", data_path)->required();
  analyze_cmd->add_option("--model", model_path)->required();
  analyze_cmd->add_option("--qq-out", qq_out);
  analyze_cmd->add_option("--diag-out", diag_out);

  CLI::App* sweep_cmd = app.add_subcommand("theta-sweep",
                                           "pick theta on a short cascade");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--data", data_path)->required();
  sweep_cmd->add_option("--out", out)->required();
  for (const char* name :
       {"mode", "epsilon", "d-min", "f-max", "overall-fp", "max-nodes",
        "lac-start-node", "negatives-per-node", "neg-source", "neg-dims",
        "neg-lo", "neg-hi", "neg-max-draws"})
    opt(sweep_cmd, name, "");

  CLI11_PARSE(app, argc, argv);

  try {
    const Json j = overlay_config(common, flags);
    if (gen->parsed()) return cmd_gen_toy(common, j, out);
    if (train_cmd->parsed()) return cmd_train(common, j, data_path, out);
    if (eval_cmd->parsed()) return cmd_eval(j, data_path, model_path, out);
    if (qp_cmd->parsed()) return cmd_solve_qp(j, problem_path, out);
    if (casc->parsed())
      return cmd_train_cascade(common, j, data_path, out, nodes_out);
    if (roc_cmd->parsed()) return cmd_roc(j, cascade_path, data_path, out);
    if (analyze_cmd->parsed())
      return cmd_analyze(j, data_path, model_path, qq_out, diag_out);
    if (sweep_cmd->parsed()) return cmd_theta_sweep(common, j, data_path, out);
  } catch (const std::exception& e) {
    std::cout << Json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
