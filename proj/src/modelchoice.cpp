#include "lgcps/modelchoice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lgcps/error.hpp"
#include "lgcps/parallel.hpp"

namespace lgcps {

ReferenceTable build_reference_table(const PriorSpec& prior, const Window& window,
                                     const ReferenceTableOptions& options, std::uint64_t seed) {
  if (options.n < 1) throw InvalidArgument("reference table size must be >= 1");
  if (options.models.empty()) throw InvalidArgument("reference table needs at least one model");
  prior.validate();
  options.summary.validate();
  struct Row {
    Model model = Model::LgcpStrauss;
    SummaryVector summary;
    std::size_t failures = 0;
  };
  std::vector<Row> rows(options.n);
  parallel_for(options.n, options.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, stream::kReferenceTable, i));
    Row& row = rows[i];
    row.model = options.models[std::uniform_int_distribution<std::size_t>(0, options.models.size() - 1)(rng)];
    for (;;) {
      const ModelParams theta = sample_model_params(row.model, prior, rng);
      const PointPattern x = simulate(row.model, theta, window, options.simulation, rng());
      if (x.size() > options.m) {
        row.summary = summary_vector(x, options.summary);
        return;
      }
      if (++row.failures >= options.max_attempts_per_row) {
        std::ostringstream os;
        os << "reference table row " << i << " (" << model_name(row.model) << "): "
           << row.failures << " consecutive simulations had n <= " << options.m;
        throw ScreenFailure(os.str());
      }
    }
  });
  ReferenceTable table;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.n_screen_failures += rows[i].failures;
    if (rows[i].summary.finite) keep.push_back(i);
    else ++table.n_excluded;
  }
  const auto d = static_cast<Eigen::Index>(options.summary.dimension());
  table.features.resize(static_cast<Eigen::Index>(keep.size()), d);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Row& row = rows[keep[r]];
    table.labels.push_back(row.model);
    for (Eigen::Index j = 0; j < d; ++j)
      table.features(static_cast<Eigen::Index>(r), j) = row.summary.values[static_cast<std::size_t>(j)];
  }
  return table;
}

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& node = nodes[static_cast<std::size_t>(at)];
    at = x(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

// Builds one tree on `rows` (a bootstrap multiset). Classification maximizes
// the Gini criterion sum_c n_c^2 / n over the two children; regression
// maximizes sum^2 / n, i.e. minimizes the within-node squared error.
template <bool Classify>
Tree build_tree(const Eigen::MatrixXd& X, const std::vector<double>& y, int n_classes,
                std::vector<std::size_t> rows, int mtry, int min_split, Rng& rng) {
  const int d = static_cast<int>(X.cols());
  Tree tree;
  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, std::move(rows)});
  std::vector<int> features(static_cast<std::size_t>(d));
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, double>> column;
  std::vector<double> left_counts(static_cast<std::size_t>(std::max(n_classes, 1)));
  std::vector<double> right_counts(left_counts.size());

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const auto& idx = job.rows;
    const double n = static_cast<double>(idx.size());

    double parent_score = 0.0;
    double leaf_value = 0.0;
    bool pure = true;
    if constexpr (Classify) {
      std::fill(right_counts.begin(), right_counts.end(), 0.0);
      for (std::size_t r : idx) right_counts[static_cast<std::size_t>(y[r])] += 1.0;
      int best = 0;
      for (int c = 0; c < n_classes; ++c) {
        parent_score += right_counts[static_cast<std::size_t>(c)] * right_counts[static_cast<std::size_t>(c)];
        if (right_counts[static_cast<std::size_t>(c)] > right_counts[static_cast<std::size_t>(best)]) best = c;
      }
      parent_score /= n;
      leaf_value = best;
      pure = right_counts[static_cast<std::size_t>(best)] == n;
    } else {
      double sum = 0.0;
      for (std::size_t r : idx) {
        sum += y[r];
        if (y[r] != y[idx.front()]) pure = false;
      }
      parent_score = sum * sum / n;
      leaf_value = sum / n;
    }
    tree.nodes[static_cast<std::size_t>(job.node)].value = leaf_value;
    if (pure || static_cast<int>(idx.size()) < min_split) continue;

    // Partial Fisher-Yates: the first mtry entries are the sampled features.
    for (int k = 0; k < mtry; ++k) {
      const int j = std::uniform_int_distribution<int>(k, d - 1)(rng);
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(j)]);
    }
    Split best;
    best.score = parent_score + 1e-10 * std::max(1.0, std::abs(parent_score));
    for (int k = 0; k < mtry; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      column.clear();
      for (std::size_t r : idx) column.emplace_back(X(static_cast<Eigen::Index>(r), f), y[r]);
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      double left_n = 0.0, right_n = n;
      double left_sq = 0.0, right_sq = 0.0, left_sum = 0.0, right_sum = 0.0;
      if constexpr (Classify) {
        std::fill(left_counts.begin(), left_counts.end(), 0.0);
        std::fill(right_counts.begin(), right_counts.end(), 0.0);
        for (const auto& p : column) right_counts[static_cast<std::size_t>(p.second)] += 1.0;
        for (double c : right_counts) right_sq += c * c;
      } else {
        for (const auto& p : column) right_sum += p.second;
      }
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const double v = column[i].second;
        left_n += 1.0;
        right_n -= 1.0;
        if constexpr (Classify) {
          const auto c = static_cast<std::size_t>(v);
          left_sq += 2.0 * left_counts[c] + 1.0;
          left_counts[c] += 1.0;
          right_sq -= 2.0 * right_counts[c] - 1.0;
          right_counts[c] -= 1.0;
        } else {
          left_sum += v;
          right_sum -= v;
        }
        if (column[i].first == column[i + 1].first) continue;
        const double score = Classify ? left_sq / left_n + right_sq / right_n
                                      : left_sum * left_sum / left_n + right_sum * right_sum / right_n;
        if (score > best.score) {
          const double a = column[i].first, b = column[i + 1].first;
          double thr = a + (b - a) / 2.0;
          if (!(thr < b)) thr = a;
          best = {f, thr, score};
        }
      }
    }
    if (best.feature < 0) continue;

    std::vector<std::size_t> left, right;
    for (std::size_t r : idx)
      (X(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    Tree::Node& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({left_id + 1, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return tree;
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

template <bool Classify>
std::vector<Tree> grow(const Eigen::MatrixXd& X, const std::vector<double>& y, int n_classes,
                       const ForestOptions& options, int mtry, std::uint64_t seed,
                       std::vector<std::vector<std::size_t>>* bags) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto T = static_cast<std::size_t>(options.n_trees);
  if (!options.bootstrap.empty() && options.bootstrap.size() != T)
    throw InvalidArgument("fixed bootstrap list must have one entry per tree");
  std::vector<Tree> trees(T);
  if (bags) bags->assign(T, {});
  parallel_for(T, options.workers, [&](std::size_t t) {
    Rng rng(derive_seed(seed, stream::kForest, t));
    std::vector<std::size_t> rows =
        options.bootstrap.empty() ? bootstrap_rows(n, rng) : options.bootstrap[t];
    for (std::size_t r : rows)
      if (r >= n) throw InvalidArgument("bootstrap row index out of range");
    if (bags) (*bags)[t] = rows;
    trees[t] = build_tree<Classify>(X, y, n_classes, std::move(rows), mtry, options.min_split, rng);
  });
  return trees;
}

int resolve_mtry(int requested, int d, bool classify) {
  if (requested > 0) return std::min(requested, d);
  if (classify) return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)))));
  return std::max(1, d / 3);
}

void check_matrix(const Eigen::MatrixXd& X, std::size_t n) {
  if (X.rows() < 1 || X.cols() < 1) throw InvalidArgument("forest needs a nonempty design");
  if (static_cast<std::size_t>(X.rows()) != n) throw InvalidArgument("labels do not match rows");
  if (!X.allFinite()) throw InvalidArgument("forest features must be finite");
}

}  // namespace

ClassificationForest ClassificationForest::train(const Eigen::MatrixXd& X,
                                                 const std::vector<int>& labels, int n_classes,
                                                 const ForestOptions& options, std::uint64_t seed) {
  check_matrix(X, labels.size());
  if (options.n_trees < 1) throw InvalidArgument("forest needs at least one tree");
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) throw InvalidArgument("class label out of range");
    y[i] = labels[i];
  }
  ClassificationForest forest;
  forest.n_classes_ = n_classes;
  std::vector<std::vector<std::size_t>> bags;
  const int mtry = resolve_mtry(options.mtry, static_cast<int>(X.cols()), true);
  forest.trees_ = grow<true>(X, y, n_classes, options, mtry, seed, &bags);

  const auto n = labels.size();
  std::vector<std::vector<double>> votes(n, std::vector<double>(static_cast<std::size_t>(n_classes), 0.0));
  std::vector<char> in_bag(n);
  for (std::size_t t = 0; t < forest.trees_.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (std::size_t r : bags[t]) in_bag[r] = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_bag[i])
        votes[i][static_cast<std::size_t>(forest.trees_[t].predict(X.row(static_cast<Eigen::Index>(i))))] += 1.0;
  }
  forest.oob_prediction_.assign(n, -1);
  std::size_t counted = 0, wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = votes[i];
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total == 0.0) continue;
    const int pred = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    forest.oob_prediction_[i] = pred;
    ++counted;
    if (pred != labels[i]) ++wrong;
  }
  forest.oob_error_ = counted ? static_cast<double>(wrong) / static_cast<double>(counted) : 0.0;
  return forest;
}

ClassificationForest ClassificationForest::from_trees(std::vector<Tree> trees, int n_classes) {
  ClassificationForest forest;
  forest.n_classes_ = n_classes;
  forest.trees_ = std::move(trees);
  return forest;
}

std::vector<double> ClassificationForest::vote_fractions(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::vector<double> out(static_cast<std::size_t>(n_classes_), 0.0);
  if (trees_.empty()) return out;
  for (const Tree& t : trees_) out[static_cast<std::size_t>(t.predict(x))] += 1.0;
  for (double& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

RegressionForest RegressionForest::train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const ForestOptions& options, std::uint64_t seed) {
  check_matrix(X, static_cast<std::size_t>(y.size()));
  if (options.n_trees < 1) throw InvalidArgument("forest needs at least one tree");
  RegressionForest forest;
  const std::vector<double> yy(y.data(), y.data() + y.size());
  const int mtry = resolve_mtry(options.mtry, static_cast<int>(X.cols()), false);
  forest.trees_ = grow<false>(X, yy, 0, options, mtry, seed, nullptr);
  return forest;
}

double RegressionForest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double sum = 0.0;
  for (const Tree& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

ModelChoiceForest train_forest(const ReferenceTable& table, const ForestOptions& options,
                               std::uint64_t seed) {
  if (table.size() == 0) throw InvalidArgument("reference table is empty");
  ModelChoiceForest out;
  out.n_excluded = table.n_excluded;
  out.n_features = static_cast<std::size_t>(table.features.cols());
  for (Model m : {Model::LgcpStrauss, Model::Lgcp, Model::Strauss})
    if (std::find(table.labels.begin(), table.labels.end(), m) != table.labels.end())
      out.classes.push_back(m);
  out.degenerate = out.classes.size() < 2;
  std::vector<int> labels(table.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    labels[i] = static_cast<int>(std::find(out.classes.begin(), out.classes.end(), table.labels[i]) -
                                 out.classes.begin());
  out.classifier = ClassificationForest::train(table.features, labels,
                                               static_cast<int>(out.classes.size()), options, seed);

  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (out.classifier.oob_prediction()[i] >= 0) rows.push_back(static_cast<Eigen::Index>(i));
  if (rows.empty()) {
    for (std::size_t i = 0; i < table.size(); ++i) rows.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::VectorXd err(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<std::size_t>(rows[k]);
    const int pred = out.classifier.oob_prediction()[i];
    err(static_cast<Eigen::Index>(k)) = (pred >= 0 && pred != labels[i]) ? 1.0 : 0.0;
  }
  ForestOptions reg = options;
  reg.mtry = 0;
  reg.min_split = 5;
  reg.bootstrap.clear();
  const Eigen::MatrixXd Xr = table.features(rows, Eigen::all);
  out.error_regression = RegressionForest::train(Xr, err, reg, derive_seed(seed, stream::kForest, 1ULL << 32));
  return out;
}

ModelChoice choose_model(const ModelChoiceForest& forest, const SummaryVector& t_obs) {
  if (forest.classifier.trees().empty()) throw InvalidArgument("forest is not trained");
  if (!t_obs.finite) throw InvalidArgument("observed summary vector is not finite");
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(t_obs.size()));
  for (std::size_t j = 0; j < t_obs.size(); ++j) x(static_cast<Eigen::Index>(j)) = t_obs[j];
  if (static_cast<std::size_t>(x.size()) != forest.n_features)
    throw InvalidArgument("summary dimension does not match the reference table");
  const auto votes = forest.classifier.vote_fractions(x);
  ModelChoice out;
  for (std::size_t c = 0; c < votes.size(); ++c)
    out.vote_fractions[static_cast<std::size_t>(forest.classes[c])] = votes[c];
  const double top = *std::max_element(votes.begin(), votes.end());
  std::vector<Model> leaders;
  for (std::size_t c = 0; c < votes.size(); ++c)
    if (votes[c] == top) leaders.push_back(forest.classes[c]);
  out.tie = leaders.size() > 1;
  std::sort(leaders.begin(), leaders.end(), [](Model a, Model b) {
    const auto pa = free_parameters(a).size(), pb = free_parameters(b).size();
    return pa != pb ? pa < pb : static_cast<int>(a) < static_cast<int>(b);
  });
  out.selected = leaders.front();
  out.posterior_probability = std::clamp(1.0 - forest.error_regression.predict(x), 0.0, 1.0);
  out.oob_error = forest.classifier.oob_error();
  out.n_excluded = forest.n_excluded;
  return out;
}

}  // namespace lgcps
