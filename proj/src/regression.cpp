#include "lgcps/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgcps/error.hpp"
#include "lgcps/parallel.hpp"
#include "lgcps/random.hpp"

namespace lgcps {

namespace {

struct Standardized {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // 0 marks a constant column
  double y_mean = 0.0;
  Eigen::MatrixXd gram;  // Xs' Xs / k
  Eigen::VectorXd xty;   // Xs' (y - y_mean) / k
};

void check_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw InvalidArgument("design and response have different lengths");
  if (X.rows() < 2) throw InvalidArgument("regression needs at least two observations");
  if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("regression data must be finite");
}

Standardized prepare(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const double k = static_cast<double>(X.rows());
  Standardized s;
  s.mean = X.colwise().mean().transpose();
  s.sd.resize(X.cols());
  Eigen::MatrixXd Xs = X.rowwise() - s.mean.transpose();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt(Xs.col(j).squaredNorm() / k);
    const double scale = std::max(1.0, std::abs(s.mean(j)));
    if (sd > 1e-12 * scale) {
      s.sd(j) = sd;
      Xs.col(j) /= sd;
    } else {
      s.sd(j) = 0.0;
      Xs.col(j).setZero();
    }
  }
  s.y_mean = y.mean();
  s.gram = Xs.transpose() * Xs / k;
  s.xty = Xs.transpose() * (y.array() - s.y_mean).matrix() / k;
  return s;
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Coordinate descent on the standardized problem, warm-started from beta_std.
LassoFit solve(const Standardized& s, double lambda, const LassoOptions& options,
               Eigen::VectorXd beta_std) {
  const Eigen::Index d = s.gram.rows();
  Eigen::VectorXd grad = s.xty - s.gram * beta_std;
  LassoFit fit;
  fit.lambda = lambda;
  double max_change = 0.0;
  int sweep = 0;
  while (sweep < options.max_sweeps) {
    ++sweep;
    max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (s.sd(j) == 0.0) continue;
      const double gjj = s.gram(j, j);
      const double old = beta_std(j);
      const double updated = soft_threshold(grad(j) + gjj * old, lambda) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta_std(j) = updated;
        grad.noalias() -= s.gram.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < options.tol) break;
  }
  fit.sweeps = sweep;
  fit.achieved_tol = max_change;
  fit.converged = max_change < options.tol;
  fit.beta_std = beta_std;
  fit.beta = Eigen::VectorXd::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j)
    if (s.sd(j) > 0.0) fit.beta(j) = beta_std(j) / s.sd(j);
  fit.intercept = s.y_mean - s.mean.dot(fit.beta);
  return fit;
}

std::vector<LassoFit> solve_path(const Standardized& s, const std::vector<double>& lambdas,
                                 const LassoOptions& options) {
  std::vector<LassoFit> fits;
  fits.reserve(lambdas.size());
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(s.gram.rows());
  for (double lambda : lambdas) {
    fits.push_back(solve(s, lambda, options, warm));
    warm = fits.back().beta_std;
  }
  return fits;
}

double max_abs(const Standardized& s) {
  return s.xty.size() == 0 ? 0.0 : s.xty.cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<std::size_t> LassoFit::support() const {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) out.push_back(static_cast<std::size_t>(j));
  return out;
}

LassoFit lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   const LassoOptions& options) {
  check_data(X, y);
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  const Standardized s = prepare(X, y);
  return solve(s, lambda, options, Eigen::VectorXd::Zero(X.cols()));
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoFit& fit) {
  const Eigen::VectorXd resid = (y - X * fit.beta).array() - fit.intercept;
  return resid.squaredNorm() / (2.0 * static_cast<double>(X.rows())) +
         fit.lambda * fit.beta_std.lpNorm<1>();
}

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_data(X, y);
  return max_abs(prepare(X, y));
}

std::vector<double> lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_lambda,
                                double ratio) {
  if (n_lambda < 1 || !(ratio > 0.0 && ratio < 1.0))
    throw InvalidArgument("lambda path needs n_lambda >= 1 and 0 < ratio < 1");
  const double top = lambda_max(X, y);
  if (n_lambda == 1) return {top};
  std::vector<double> path(static_cast<std::size_t>(n_lambda));
  const double log_step = std::log(ratio) / (n_lambda - 1);
  for (int i = 0; i < n_lambda; ++i) path[i] = top * std::exp(i * log_step);
  path.front() = top;
  return path;
}

std::vector<LassoFit> lasso_path_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const std::vector<double>& lambdas,
                                     const LassoOptions& options) {
  check_data(X, y);
  return solve_path(prepare(X, y), lambdas, options);
}

CvResult cv_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CvOptions& options,
                  std::uint64_t seed) {
  check_data(X, y);
  const Eigen::Index k = X.rows();
  if (options.n_folds < 2 || k < options.n_folds)
    throw InvalidArgument("cross-validation needs 2 <= n_folds <= number of observations");
  CvResult out;
  if (lambda_max(X, y) <= 0.0) {
    out.lambdas = {0.0};
    out.cv_mean = {0.0};
    out.cv_se = {0.0};
    return out;
  }
  out.lambdas = lambda_path(X, y, options.n_lambda, options.lambda_min_ratio);
  const std::size_t L = out.lambdas.size();

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < perm.size(); ++i)
    fold[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % options.n_folds);

  const auto F = static_cast<std::size_t>(options.n_folds);
  std::vector<std::vector<double>> fold_mse(F);
  parallel_for(F, options.workers, [&](std::size_t f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < k; ++i)
      (fold[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test : train).push_back(i);
    const Eigen::MatrixXd Xtr = X(train, Eigen::all);
    const Eigen::VectorXd ytr = y(train);
    const Eigen::MatrixXd Xte = X(test, Eigen::all);
    const Eigen::VectorXd yte = y(test);
    const auto fits = solve_path(prepare(Xtr, ytr), out.lambdas, options.lasso);
    fold_mse[f].resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      const Eigen::VectorXd pred = (Xte * fits[l].beta).array() + fits[l].intercept;
      fold_mse[f][l] = (yte - pred).squaredNorm() / static_cast<double>(test.size());
    }
  });

  out.cv_mean.assign(L, 0.0);
  out.cv_se.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double sum = 0.0;
    for (std::size_t f = 0; f < F; ++f) sum += fold_mse[f][l];
    const double mean = sum / static_cast<double>(F);
    double ss = 0.0;
    for (std::size_t f = 0; f < F; ++f) ss += (fold_mse[f][l] - mean) * (fold_mse[f][l] - mean);
    out.cv_mean[l] = mean;
    out.cv_se[l] = std::sqrt(ss / static_cast<double>(F - 1)) / std::sqrt(static_cast<double>(F));
  }
  out.index_min = static_cast<std::size_t>(
      std::min_element(out.cv_mean.begin(), out.cv_mean.end()) - out.cv_mean.begin());
  const double threshold = out.cv_mean[out.index_min] + out.cv_se[out.index_min];
  out.index_1se = out.index_min;
  for (std::size_t l = 0; l <= out.index_min; ++l) {
    if (out.cv_mean[l] <= threshold) {
      out.index_1se = l;
      break;
    }
  }
  out.lambda_min = out.lambdas[out.index_min];
  out.lambda_1se = out.lambdas[out.index_1se];
  return out;
}

double cv_lambda_1se(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CvOptions& options,
                     std::uint64_t seed) {
  return cv_lasso(X, y, options, seed).lambda_1se;
}

double ProjectionModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return intercept + coef.dot(x);
}

ProjectionModel ols_on_support(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const std::vector<std::size_t>& support) {
  check_data(X, y);
  const Eigen::Index k = X.rows();
  const Eigen::Index p = static_cast<Eigen::Index>(support.size());
  ProjectionModel model;
  model.support = support;
  model.coef = Eigen::VectorXd::Zero(X.cols());
  Eigen::MatrixXd A(k, p + 1);
  A.col(0).setOnes();
  for (Eigen::Index c = 0; c < p; ++c) A.col(c + 1) = X.col(static_cast<Eigen::Index>(support[c]));
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
  model.intercept = sol(0);
  for (Eigen::Index c = 0; c < p; ++c) model.coef(static_cast<Eigen::Index>(support[c])) = sol(c + 1);

  const Eigen::VectorXd fitted = (X * model.coef).array() + model.intercept;
  const double fmean = fitted.mean();
  model.fitted_variance =
      p == 0 ? 0.0 : (fitted.array() - fmean).square().sum() / static_cast<double>(k - 1);

  const double ysd = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(k));
  model.standardized_coef = Eigen::VectorXd::Zero(X.cols());
  if (ysd > 0.0) {
    for (std::size_t j : support) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double xsd =
          std::sqrt((X.col(jj).array() - X.col(jj).mean()).square().sum() / static_cast<double>(k));
      model.standardized_coef(jj) = model.coef(jj) * xsd / ysd;
    }
  }
  return model;
}

ProjectionModel relaxed_lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const CvOptions& options, std::uint64_t seed) {
  const CvResult cv = cv_lasso(X, y, options, seed);
  const LassoFit fit = cv.lambda_1se > 0.0
                           ? lasso_path_fit(X, y,
                                            std::vector<double>(cv.lambdas.begin(),
                                                                cv.lambdas.begin() + cv.index_1se + 1),
                                            options.lasso)
                                 .back()
                           : lasso_fit(X, y, 0.0, options.lasso);
  ProjectionModel model = ols_on_support(X, y, fit.support());
  model.lambda = fit.lambda;
  model.lasso_converged = fit.converged;
  return model;
}

}  // namespace lgcps
