#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lgcps/abc.hpp"

namespace lgcps {

struct ReferenceTable {
  std::vector<Model> labels;
  Eigen::MatrixXd features;  // one row per retained simulation
  std::size_t n_excluded = 0;
  std::size_t n_screen_failures = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

struct ReferenceTableOptions {
  std::vector<Model> models = {Model::LgcpStrauss, Model::Lgcp, Model::Strauss};
  std::size_t n = 30000;
  std::size_t m = 10;
  std::size_t max_attempts_per_row = 100;
  SimulationOptions simulation;
  SummaryOptions summary;
  int workers = 1;
};

/// Row i: a model drawn uniformly, parameters from the prior restricted to
/// that model, a simulation passing n > m, and its summary vector. Rows with
/// non-finite summaries are dropped and counted.
ReferenceTable build_reference_table(const PriorSpec& prior, const Window& window,
                                     const ReferenceTableOptions& options, std::uint64_t seed);

/// A binary tree with axis-aligned splits x[feature] <= threshold. Leaves
/// store a class index (classification) or a mean response (regression).
struct Tree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::size_t leaf_count() const;
};

struct ForestOptions {
  int n_trees = 500;
  /// Features tried per split; 0 means ceil(sqrt(d)) for classification and
  /// max(1, floor(d / 3)) for regression.
  int mtry = 0;
  /// Nodes with fewer rows than this are not split.
  int min_split = 2;
  int workers = 1;
  /// Optional fixed bootstrap resample (row indices) per tree.
  std::vector<std::vector<std::size_t>> bootstrap;
};

class ClassificationForest {
 public:
  int n_classes() const noexcept { return n_classes_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }
  /// Fraction of trees voting for each class.
  std::vector<double> vote_fractions(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  /// Out-of-bag predicted class per training row; -1 for rows never out of bag.
  const std::vector<int>& oob_prediction() const noexcept { return oob_prediction_; }
  double oob_error() const noexcept { return oob_error_; }

  static ClassificationForest train(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                    int n_classes, const ForestOptions& options,
                                    std::uint64_t seed);
  static ClassificationForest from_trees(std::vector<Tree> trees, int n_classes);

 private:
  int n_classes_ = 0;
  std::vector<Tree> trees_;
  std::vector<int> oob_prediction_;
  double oob_error_ = 0.0;
};

class RegressionForest {
 public:
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  const std::vector<Tree>& trees() const noexcept { return trees_; }

  static RegressionForest train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const ForestOptions& options, std::uint64_t seed);

 private:
  std::vector<Tree> trees_;
};

struct ModelChoiceForest {
  std::vector<Model> classes;  // class index -> model
  ClassificationForest classifier;
  RegressionForest error_regression;
  bool degenerate = false;  // only one model present in the table
  std::size_t n_features = 0;
  std::size_t n_excluded = 0;
};

/// Classification forest on the table plus a regression forest (min node
/// size 5) on the out-of-bag misclassification indicator.
ModelChoiceForest train_forest(const ReferenceTable& table, const ForestOptions& options,
                               std::uint64_t seed);

struct ModelChoice {
  Model selected = Model::LgcpStrauss;
  std::array<double, 3> vote_fractions{};  // indexed by Model
  double posterior_probability = 0.0;
  double oob_error = 0.0;
  bool tie = false;
  std::size_t n_excluded = 0;
};

/// Majority vote; exact ties go to the model with fewer parameters, then the
/// earlier model in enum order.
ModelChoice choose_model(const ModelChoiceForest& forest, const SummaryVector& t_obs);

}  // namespace lgcps
