#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace lgcps {

struct LassoOptions {
  /// Convergence when the largest coefficient change in a sweep (on the
  /// standardized scale) falls below tol.
  double tol = 1e-7;
  int max_sweeps = 100000;
};

struct LassoFit {
  double lambda = 0.0;
  double intercept = 0.0;
  Eigen::VectorXd beta;      // original predictor scale
  Eigen::VectorXd beta_std;  // standardized predictor scale
  bool converged = false;
  double achieved_tol = 0.0;
  int sweeps = 0;

  std::vector<std::size_t> support() const;
};

/// Minimizes (1/2k)|y - a - Xb|^2 + lambda |b_std|_1 by cyclic coordinate
/// descent on predictors centered and scaled to unit (population) standard
/// deviation. Constant columns get coefficient 0.
LassoFit lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   const LassoOptions& options = {});

/// The penalized objective minimized by lasso_fit, evaluated at `fit`.
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoFit& fit);

/// Smallest lambda giving the all-zero solution.
double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// n_lambda log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_lambda,
                                double ratio);

/// Warm-started fits along a decreasing lambda sequence.
std::vector<LassoFit> lasso_path_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const std::vector<double>& lambdas,
                                     const LassoOptions& options = {});

struct CvOptions {
  int n_folds = 10;
  int n_lambda = 100;
  double lambda_min_ratio = 1e-4;
  LassoOptions lasso;
  int workers = 1;
};

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> cv_mean;  // mean squared prediction error per lambda
  std::vector<double> cv_se;    // standard error of cv_mean across folds
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
};

/// K-fold cross-validation over the lambda path with fold assignment by a
/// seeded permutation. index_1se is the largest lambda whose CV error is
/// within one standard error of the minimum.
CvResult cv_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CvOptions& options,
                  std::uint64_t seed);
double cv_lambda_1se(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CvOptions& options,
                     std::uint64_t seed);

/// Lasso for support selection at the one-standard-error lambda, followed by
/// ordinary least squares on the selected predictors.
struct ProjectionModel {
  double intercept = 0.0;
  Eigen::VectorXd coef;  // zero outside the support
  Eigen::VectorXd standardized_coef;
  std::vector<std::size_t> support;
  double fitted_variance = 0.0;
  double lambda = 0.0;
  bool lasso_converged = true;

  bool empty_support() const noexcept { return support.empty(); }
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

ProjectionModel ols_on_support(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const std::vector<std::size_t>& support);
ProjectionModel relaxed_lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const CvOptions& options, std::uint64_t seed);

}  // namespace lgcps
