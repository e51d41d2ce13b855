#include "tcb/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcb/margin.hpp"
#include "tcb/scatter.hpp"

namespace tcb {

void NodeTargets::validate() const {
  if (!(f_max > 0.0 && f_max < 1.0))
    throw std::invalid_argument("targets: f_max must lie in (0,1)");
  if (!(d_min > 0.0 && d_min <= 1.0))
    throw std::invalid_argument("targets: d_min must lie in (0,1]");
  if (!(overall_fp > 0.0 && overall_fp < 1.0))
    throw std::invalid_argument("targets: overall fp must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// Model evaluation

Eigen::MatrixXd CascadeModel::weak_outputs(const RowMatrixXd& features) const {
  Eigen::MatrixXd h(features.rows(),
                    static_cast<Eigen::Index>(classifiers.size()));
  for (std::size_t j = 0; j < classifiers.size(); ++j)
    h.col(static_cast<Eigen::Index>(j)) = classifiers[j].evaluate(features);
  return h;
}

Eigen::VectorXd CascadeModel::exit_scores(std::size_t t,
                                          const Eigen::MatrixXd& outputs) const {
  const CascadeExit& exit = exits.at(t);
  return outputs.leftCols(exit.n_t) * exit.w;
}

StrongClassifier CascadeModel::exit_classifier(std::size_t t) const {
  const CascadeExit& exit = exits.at(t);
  StrongClassifier sc;
  sc.weak_classifiers.assign(classifiers.begin(),
                             classifiers.begin() + exit.n_t);
  sc.w = exit.w;
  sc.b = exit.b;
  return sc;
}

Eigen::VectorXi CascadeModel::first_rejection(const RowMatrixXd& features) const {
  const Eigen::MatrixXd outputs = weak_outputs(features);
  Eigen::VectorXi rejected_at =
      Eigen::VectorXi::Constant(features.rows(), -1);
  for (std::size_t t = 0; t < exits.size(); ++t) {
    const Eigen::VectorXd scores = exit_scores(t, outputs);
    for (Eigen::Index i = 0; i < scores.size(); ++i)
      if (rejected_at[i] < 0 && scores[i] < exits[t].b)
        rejected_at[i] = static_cast<int>(t);
  }
  return rejected_at;
}

bool CascadeModel::accepts(const Eigen::RowVectorXd& features_row) const {
  RowMatrixXd one(1, features_row.size());
  one.row(0) = features_row;
  return first_rejection(one)[0] < 0;
}

// ---------------------------------------------------------------------------
// Negative pools

SyntheticNegativePool::SyntheticNegativePool(Generator generator,
                                             std::uint64_t seed,
                                             std::int64_t max_draws)
    : generator_(std::move(generator)), rng_(seed), max_draws_(max_draws) {
  if (!generator_)
    throw std::invalid_argument("negative pool: missing generator");
}

std::optional<Eigen::RowVectorXd> SyntheticNegativePool::draw() {
  if (consumed_ >= max_draws_) return std::nullopt;
  ++consumed_;
  return generator_(rng_);
}

ImageNegativePool::ImageNegativePool(std::vector<Eigen::MatrixXd> backgrounds,
                                     std::vector<HaarFeature> features,
                                     int win_w, int win_h, std::uint64_t seed,
                                     std::int64_t max_draws)
    : backgrounds_(std::move(backgrounds)),
      features_(std::move(features)),
      win_w_(win_w),
      win_h_(win_h),
      rng_(seed),
      max_draws_(max_draws) {
  if (backgrounds_.empty())
    throw std::invalid_argument("negative pool: no background images");
  if (features_.empty())
    throw std::invalid_argument("negative pool: no haar features");
  for (const auto& bg : backgrounds_)
    if (bg.cols() < win_w_ || bg.rows() < win_h_)
      throw std::invalid_argument(
          "negative pool: background smaller than the window");
}

std::optional<Eigen::RowVectorXd> ImageNegativePool::draw() {
  if (consumed_ >= max_draws_) return std::nullopt;
  ++consumed_;
  std::uniform_int_distribution<std::size_t> pick_bg(0, backgrounds_.size() - 1);
  const Eigen::MatrixXd& bg = backgrounds_[pick_bg(rng_)];
  std::uniform_int_distribution<int> pick_x(0,
                                            static_cast<int>(bg.cols()) - win_w_);
  std::uniform_int_distribution<int> pick_y(0,
                                            static_cast<int>(bg.rows()) - win_h_);
  const Eigen::MatrixXd window =
      bg.block(pick_y(rng_), pick_x(rng_), win_h_, win_w_);
  const IntegralImage img = IntegralImage::build(window);
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(features_.size()));
  for (std::size_t j = 0; j < features_.size(); ++j)
    row[static_cast<Eigen::Index>(j)] = haar_response(features_[j], img);
  return row;
}

// ---------------------------------------------------------------------------
// Training

int CascadeConfig::budget_for_node(int node) const {
  if (node < 1) throw std::invalid_argument("cascade: node index must be >= 1");
  if (node_budgets.empty())
    throw std::invalid_argument("cascade: empty node budget schedule");
  if (node <= static_cast<int>(node_budgets.size()))
    return node_budgets[static_cast<std::size_t>(node - 1)];
  // Keep doubling every second node past the configured schedule.
  const int extra = node - static_cast<int>(node_budgets.size());
  const int doublings = (extra + 1) / 2;
  const double value = node_budgets.back() * std::pow(2.0, doublings);
  return static_cast<int>(std::min(value, 1024.0));
}

namespace {

Dataset make_node_dataset(const RowMatrixXd& positives,
                          const std::vector<Eigen::RowVectorXd>& negatives) {
  const Eigen::Index m1 = positives.rows();
  const auto m2 = static_cast<Eigen::Index>(negatives.size());
  Dataset data;
  data.features.resize(m1 + m2, positives.cols());
  data.features.topRows(m1) = positives;
  for (Eigen::Index i = 0; i < m2; ++i)
    data.features.row(m1 + i) = negatives[static_cast<std::size_t>(i)];
  data.labels.resize(m1 + m2);
  data.labels.head(m1).setConstant(1);
  data.labels.tail(m2).setConstant(-1);
  data.m1 = m1;
  data.m2 = m2;
  data.source_rows.resize(static_cast<std::size_t>(m1 + m2));
  for (std::size_t i = 0; i < data.source_rows.size(); ++i)
    data.source_rows[i] = static_cast<Eigen::Index>(i);
  return data;
}

struct NodeState {
  MarginMatrix a;
  Eigen::MatrixXd p;
  Eigen::VectorXd c;

  NodeState(const Dataset& data, const std::vector<DecisionStump>& stumps,
            const ScatterMatrix& q, const ClassMeanVectors& e, double theta)
      : a(data.rows()) {
    const auto n = static_cast<Eigen::Index>(stumps.size());
    p.resize(n, n);
    c.resize(n);
    std::vector<Eigen::VectorXd> q_cols;
    q_cols.reserve(stumps.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd col =
          MarginMatrix::margin_column(data, stumps[static_cast<std::size_t>(j)]);
      a.append_column(col);
      q_cols.push_back(q.apply(col));
      c[j] = theta * e.combined.dot(col);
    }
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k <= j; ++k) {
        p(j, k) = a.matrix().col(j).dot(q_cols[static_cast<std::size_t>(k)]);
        p(k, j) = p(j, k);
      }
  }

  void append(const Dataset& data, const DecisionStump& stump,
              const ScatterMatrix& q, const ClassMeanVectors& e, double theta) {
    const Eigen::VectorXd col = MarginMatrix::margin_column(data, stump);
    const Eigen::VectorXd q_col = q.apply(col);
    const Eigen::Index n = a.cols() + 1;
    p.conservativeResize(n, n);
    if (n > 1) {
      const Eigen::VectorXd cross = a.matrix().transpose() * q_col;
      p.col(n - 1).head(n - 1) = cross;
      p.row(n - 1).head(n - 1) = cross.transpose();
    }
    p(n - 1, n - 1) = col.dot(q_col);
    c.conservativeResize(n);
    c[n - 1] = theta * e.combined.dot(col);
    a.append_column(col);
  }
};

}  // namespace

CascadeTrainResult train_cascade(const RowMatrixXd& positives,
                                 NegativePool& pool,
                                 const CascadeConfig& config) {
  config.targets.validate();
  config.booster.validate();
  if (positives.rows() < 2)
    throw std::invalid_argument("cascade: need at least 2 positives");
  if (config.negatives_per_node < 2)
    throw std::invalid_argument("cascade: negatives_per_node must be >= 2");

  CascadeTrainResult result;
  result.model.lac_start_node = config.lac_start_node;
  result.model.targets = config.targets;

  std::vector<Eigen::RowVectorXd> negatives;

  // Draws pool candidates until `want` of them pass the current cascade.
  auto bootstrap = [&](Eigen::Index want) -> bool {
    RowMatrixXd audit(want, positives.cols());
    Eigen::Index got = 0;
    while (got < want) {
      std::optional<Eigen::RowVectorXd> cand = pool.draw();
      if (!cand) {
        result.pool_exhausted = true;
        audit.conservativeResize(got, Eigen::NoChange);
        result.bootstrap_audit.push_back(std::move(audit));
        return false;
      }
      if (result.model.exits.empty() || result.model.accepts(*cand)) {
        audit.row(got++) = *cand;
        negatives.push_back(std::move(*cand));
      }
    }
    result.bootstrap_audit.push_back(std::move(audit));
    return true;
  };

  if (!bootstrap(config.negatives_per_node)) return result;

  double cum_d = 1.0;
  double cum_f = 1.0;
  int node = 0;

  while (cum_f > config.targets.overall_fp && node < config.max_nodes) {
    ++node;
    const int budget = config.budget_for_node(node);

    BoosterConfig node_cfg = config.booster;
    if (node < config.lac_start_node) node_cfg.mode = BoostMode::fisher;

    const Dataset data = make_node_dataset(positives, negatives);
    const ScatterMode smode = node_cfg.mode == BoostMode::fisher
                                  ? ScatterMode::lda
                                  : ScatterMode::lac;
    const ScatterMatrix q = ScatterMatrix::build(
        data.m1, data.m2, smode, node_cfg.exact_q, node_cfg.delta);
    const ClassMeanVectors e = ClassMeanVectors::build(data.m1, data.m2);

    NodeState state(data, result.model.classifiers, q, e, node_cfg.theta);
    WeakLearnerPool learner_pool(PoolSource::tabular,
                                 config.pool_sample_fraction,
                                 config.pool_seed +
                                     static_cast<std::uint64_t>(node));

    // Dual weights reset at node start: the negative set just changed.
    Eigen::VectorXd u = node_cfg.theta * e.combined;
    double r = 0.0;
    bool have_r = false;
    Eigen::VectorXd w = result.model.exits.empty()
                            ? Eigen::VectorXd()
                            : result.model.exits.back().w;

    double d_t = 0.0;
    double f_t = 1.0;
    double b_t = 0.0;
    int added = 0;
    bool node_ok = false;

    while (true) {
      if (added == budget) break;
      const BestStump cand = best_stump(learner_pool, data, u);
      if (cand.edge <= 0.0) break;
      if (have_r && cand.edge < r + node_cfg.epsilon) break;

      state.append(data, cand.stump, q, e, node_cfg.theta);
      result.model.classifiers.push_back(cand.stump);
      ++added;

      SimplexQP qp{state.p, state.c};
      EgConfig eg = node_cfg.eg;
      if (state.a.cols() > 1) {
        Eigen::VectorXd w0(state.a.cols());
        w0.head(state.a.cols() - 1) = w;
        w0[state.a.cols() - 1] = 1e-4;
        w0 /= w0.sum();
        eg.warm_start = std::move(w0);
      }
      const QpSolution sol = eg_solve(qp, eg);
      w = sol.w;

      const Eigen::VectorXd rho = state.a.margins(w);
      const DualState dual = recover_dual(q, rho, node_cfg.theta, e, state.a);
      u = dual.example_weights;
      r = dual.max_edge;
      have_r = true;

      Eigen::VectorXd scores(data.rows());
      for (Eigen::Index i = 0; i < data.rows(); ++i)
        scores[i] = data.labels[i] * rho[i];

      // f_t <= f_max holds unconditionally; when detection falls short the
      // loop adds another weak classifier instead of loosening the rate.
      OffsetTarget target;
      target.kind = OffsetTarget::Kind::max_fp;
      target.max_fp = config.targets.f_max;
      b_t = find_offset(scores, data.labels, target).b;

      const auto accepted = (scores.array() >= b_t).cast<double>();
      d_t = accepted.head(data.m1).sum() / static_cast<double>(data.m1);
      f_t = accepted.tail(data.m2).sum() / static_cast<double>(data.m2);

      if (d_t >= config.targets.d_min) {
        node_ok = true;
        break;
      }
    }

    if (added == 0) {
      // No usable weak classifier at all; drop the empty node.
      result.node_budget_exceeded = true;
      --node;
      break;
    }

    result.model.exits.push_back(
        {static_cast<Eigen::Index>(result.model.classifiers.size()), w, b_t});
    cum_d *= d_t;
    cum_f *= f_t;
    result.nodes.push_back({node,
                            static_cast<Eigen::Index>(
                                result.model.classifiers.size()),
                            added, d_t, f_t, cum_d, cum_f});

    if (!node_ok) {
      result.node_budget_exceeded = true;
      break;
    }

    // Keep only negatives the new node still accepts (false positives of
    // the cascade so far), then refill by bootstrapping.
    const Eigen::VectorXd last_scores = [&] {
      const Eigen::MatrixXd outputs = result.model.weak_outputs(data.features);
      return result.model.exit_scores(result.model.exits.size() - 1, outputs);
    }();
    std::vector<Eigen::RowVectorXd> survivors;
    for (Eigen::Index i = 0; i < data.m2; ++i)
      if (last_scores[data.m1 + i] >= b_t)
        survivors.push_back(negatives[static_cast<std::size_t>(i)]);
    negatives = std::move(survivors);

    if (cum_f > config.targets.overall_fp) {
      const Eigen::Index want =
          config.negatives_per_node -
          static_cast<Eigen::Index>(negatives.size());
      if (want > 0 && !bootstrap(want)) break;
    }
  }

  result.reached_target = cum_f <= config.targets.overall_fp;
  return result;
}

// ---------------------------------------------------------------------------
// Rate composition and evaluation

std::pair<double, double> compose_rates(const std::vector<double>& d,
                                        const std::vector<double>& f) {
  if (d.empty() || f.empty())
    throw std::invalid_argument("compose rates: empty rate vector");
  auto product = [](const std::vector<double>& v) {
    double p = 1.0;
    for (double x : v) {
      if (!(x > 0.0 && x <= 1.0))
        throw std::invalid_argument("compose rates: rates must lie in (0,1]");
      p *= x;
    }
    return p;
  };
  return {product(d), product(f)};
}

std::pair<double, double> evaluate_node(const StrongClassifier& exit,
                                        const Dataset& data) {
  data.validate();  // guarantees both classes are present
  const Eigen::VectorXd scores = exit.scores(data.features);
  double det = 0.0, fp = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const bool accepted = scores[i] >= exit.b;
    if (data.labels[i] == 1)
      det += accepted;
    else
      fp += accepted;
  }
  return {det / static_cast<double>(data.m1),
          fp / static_cast<double>(data.m2)};
}

std::vector<RocPoint> evaluate_cascade_roc(const CascadeModel& model,
                                           const Dataset& data,
                                           const std::vector<double>& sweep) {
  if (model.exits.empty())
    throw std::invalid_argument("roc: cascade has no exits");
  if (sweep.empty()) throw std::invalid_argument("roc: empty offset sweep");
  data.validate();

  const Eigen::MatrixXd outputs = model.weak_outputs(data.features);
  // Acceptance by all exits before the last.
  std::vector<char> prefix_ok(static_cast<std::size_t>(data.rows()), 1);
  for (std::size_t t = 0; t + 1 < model.exits.size(); ++t) {
    const Eigen::VectorXd scores = model.exit_scores(t, outputs);
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (scores[i] < model.exits[t].b)
        prefix_ok[static_cast<std::size_t>(i)] = 0;
  }
  const Eigen::VectorXd final_scores =
      model.exit_scores(model.exits.size() - 1, outputs);

  std::vector<RocPoint> points;
  points.reserve(sweep.size());
  for (double offset : sweep) {
    std::int64_t fp_count = 0;
    std::int64_t det_count = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const bool accepted =
          prefix_ok[static_cast<std::size_t>(i)] && final_scores[i] >= offset;
      if (!accepted) continue;
      if (data.labels[i] == 1)
        ++det_count;
      else
        ++fp_count;
    }
    points.push_back(
        {fp_count, static_cast<double>(det_count) /
                       static_cast<double>(data.m1)});
  }
  std::sort(points.begin(), points.end(), [](const RocPoint& a,
                                             const RocPoint& b) {
    if (a.fp_count != b.fp_count) return a.fp_count < b.fp_count;
    return a.detection_rate < b.detection_rate;
  });
  return points;
}

}  // namespace tcb
