#include <doctest.h>

#include "lgcps/error.hpp"
#include "lgcps/modelchoice.hpp"
#include "support.hpp"

using namespace lgcps;

namespace {

// Three Gaussian blobs in 4 dimensions; `spread` controls overlap.
void blobs(std::size_t n, double spread, Rng& rng, Eigen::MatrixXd& X, std::vector<int>& y) {
  std::normal_distribution<double> z;
  X.resize(static_cast<Eigen::Index>(n), 4);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    y[i] = c;
    for (Eigen::Index j = 0; j < 4; ++j)
      X(static_cast<Eigen::Index>(i), j) = spread * z(rng) + (j == c ? 10.0 : 0.0);
  }
}

Tree leaf(double value) {
  Tree t;
  t.nodes.push_back({-1, 0.0, -1, -1, value});
  return t;
}

ReferenceTableOptions cheap_table(std::size_t n) {
  ReferenceTableOptions o;
  o.n = n;
  o.simulation.nx = 16;
  o.simulation.ny = 16;
  o.simulation.burnin = 1000;
  o.summary.n_r = 8;
  o.summary.quadrat_orders = {2, 3};
  return o;
}

}  // namespace

TEST_CASE("separable classes have almost no out-of-bag error") {
  Rng rng(1);
  Eigen::MatrixXd X;
  std::vector<int> y;
  blobs(600, 1.0, rng, X, y);
  ForestOptions opt;
  opt.n_trees = 100;
  const auto forest = ClassificationForest::train(X, y, 3, opt, 2);
  CHECK(forest.oob_error() < 0.01);
  const auto v = forest.vote_fractions(X.row(1));
  CHECK(v[1] > 0.9);
  CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("shuffled labels give chance-level error") {
  Rng rng(3);
  Eigen::MatrixXd X;
  std::vector<int> y;
  blobs(900, 1.0, rng, X, y);
  std::shuffle(y.begin(), y.end(), rng);
  ForestOptions opt;
  opt.n_trees = 100;
  const auto forest = ClassificationForest::train(X, y, 3, opt, 4);
  CHECK(std::abs(forest.oob_error() - 2.0 / 3.0) < 0.05);
}

TEST_CASE("a single class is always predicted") {
  Rng rng(5);
  Eigen::MatrixXd X;
  std::vector<int> y;
  blobs(60, 1.0, rng, X, y);
  std::fill(y.begin(), y.end(), 0);
  ForestOptions opt;
  opt.n_trees = 20;
  const auto forest = ClassificationForest::train(X, y, 1, opt, 6);
  CHECK(forest.oob_error() == 0.0);
  for (const auto& t : forest.trees()) CHECK(t.leaf_count() == 1);
  CHECK(forest.vote_fractions(X.row(0))[0] == 1.0);
  CHECK_THROWS_AS(ClassificationForest::train(X, std::vector<int>(60, 2), 2, opt, 1), InvalidArgument);
}

TEST_CASE("vote fractions from fixed trees") {
  const auto same = ClassificationForest::from_trees({leaf(2), leaf(2), leaf(2)}, 3);
  const Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(2);
  CHECK(same.vote_fractions(x) == std::vector<double>{0.0, 0.0, 1.0});
  const auto mixed = ClassificationForest::from_trees({leaf(0), leaf(1), leaf(1), leaf(2)}, 3);
  CHECK(mixed.vote_fractions(x) == std::vector<double>{0.25, 0.5, 0.25});

  Tree split;
  split.nodes = {{0, 1.5, 1, 2, 0.0}, {-1, 0, -1, -1, 0.0}, {-1, 0, -1, -1, 1.0}};
  CHECK(split.predict(Eigen::RowVector2d(1.5, 0)) == 0.0);
  CHECK(split.predict(Eigen::RowVector2d(1.6, 0)) == 1.0);
  CHECK(split.leaf_count() == 2);
}

TEST_CASE("forests are invariant to row order under fixed bootstraps") {
  Rng rng(7);
  Eigen::MatrixXd X;
  std::vector<int> y;
  blobs(150, 4.0, rng, X, y);
  ForestOptions opt;
  opt.n_trees = 30;
  std::uniform_int_distribution<std::size_t> pick(0, 149);
  for (int t = 0; t < opt.n_trees; ++t) {
    std::vector<std::size_t> rows(150);
    for (auto& r : rows) r = pick(rng);
    opt.bootstrap.push_back(rows);
  }
  std::vector<std::size_t> perm(150);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> inverse(150);
  for (std::size_t i = 0; i < 150; ++i) inverse[perm[i]] = i;
  Eigen::MatrixXd Xp(150, 4);
  std::vector<int> yp(150);
  for (std::size_t i = 0; i < 150; ++i) {
    Xp.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(perm[i]));
    yp[i] = y[perm[i]];
  }
  ForestOptions optp = opt;
  for (auto& bag : optp.bootstrap)
    for (auto& r : bag) r = inverse[r];
  const auto a = ClassificationForest::train(X, y, 3, opt, 8);
  const auto b = ClassificationForest::train(Xp, yp, 3, optp, 8);
  CHECK(a.oob_error() == b.oob_error());
  for (Eigen::Index i = 0; i < 150; ++i) CHECK(a.vote_fractions(X.row(i)) == b.vote_fractions(X.row(i)));
}

TEST_CASE("forest training is deterministic across worker counts") {
  Rng rng(9);
  Eigen::MatrixXd X;
  std::vector<int> y;
  blobs(200, 3.0, rng, X, y);
  ForestOptions opt;
  opt.n_trees = 40;
  const auto a = ClassificationForest::train(X, y, 3, opt, 10);
  opt.workers = 3;
  const auto b = ClassificationForest::train(X, y, 3, opt, 10);
  CHECK(a.oob_prediction() == b.oob_prediction());
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(a.vote_fractions(X.row(i)) == b.vote_fractions(X.row(i)));
}

TEST_CASE("regression forest fits a step") {
  Rng rng(11);
  Eigen::MatrixXd X(400, 2);
  Eigen::VectorXd y(400);
  for (Eigen::Index i = 0; i < 400; ++i) {
    X(i, 0) = uniform01(rng);
    X(i, 1) = uniform01(rng);
    y(i) = X(i, 0) > 0.5 ? 1.0 : 0.0;
  }
  ForestOptions opt;
  opt.n_trees = 50;
  opt.min_split = 5;
  const auto f = RegressionForest::train(X, y, opt, 12);
  CHECK(f.predict(Eigen::RowVector2d(0.9, 0.5)) > 0.9);
  CHECK(f.predict(Eigen::RowVector2d(0.1, 0.5)) < 0.1);
}

TEST_CASE("ties go to the simpler model") {
  ModelChoiceForest forest;
  forest.classes = {Model::LgcpStrauss, Model::Lgcp, Model::Strauss};
  forest.classifier = ClassificationForest::from_trees({leaf(0), leaf(1), leaf(2), leaf(0), leaf(1)}, 3);
  ForestOptions ro;
  ro.n_trees = 3;
  forest.error_regression = RegressionForest::train(Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4), ro, 1);
  forest.n_features = 3;
  SummaryVector t;
  t.values = {0.0, 0.0, 0.0};
  t.finite = true;
  const auto c = choose_model(forest, t);
  CHECK(c.tie);
  CHECK(c.selected == Model::Lgcp);
  CHECK(c.vote_fractions[0] == doctest::Approx(0.4));
  CHECK(c.posterior_probability == 1.0);

  forest.classifier = ClassificationForest::from_trees({leaf(0), leaf(2)}, 3);
  const auto d = choose_model(forest, t);
  CHECK(d.tie);
  CHECK(d.selected == Model::Strauss);

  t.values = {0.0, 0.0};
  CHECK_THROWS_AS(choose_model(forest, t), InvalidArgument);
}

TEST_CASE("reference table labels are uniform and reproducible") {
  const auto opt = cheap_table(1200);
  const auto table = build_reference_table(prior_p1(), Window::unit_square(), opt, 13);
  CHECK(table.size() + table.n_excluded == 1200);
  CHECK(table.features.rows() == static_cast<Eigen::Index>(table.size()));
  CHECK(table.features.cols() == static_cast<Eigen::Index>(opt.summary.dimension()));
  std::vector<double> counts(3, 0.0);
  for (Model m : table.labels) counts[static_cast<std::size_t>(m)] += 1.0;
  const double each = static_cast<double>(table.size()) / 3.0;
  CHECK(test::chi_square(counts, {each, each, each}) < test::chi_square_quantile(2, 0.99));

  auto par = opt;
  par.n = 60;
  const auto a = build_reference_table(prior_p1(), Window::unit_square(), par, 14);
  par.workers = 3;
  const auto b = build_reference_table(prior_p1(), Window::unit_square(), par, 14);
  CHECK(a.labels == b.labels);
  CHECK(a.features == b.features);

  // Model choice on the table itself runs end to end.
  ForestOptions fo;
  fo.n_trees = 50;
  const auto forest = train_forest(table, fo, 15);
  CHECK_FALSE(forest.degenerate);
  CHECK(forest.classes.size() == 3);
  SummaryVector t;
  t.values.assign(table.features.row(0).data(), table.features.row(0).data() + table.features.cols());
  t.finite = true;
  const auto c = choose_model(forest, t);
  double total = 0.0;
  for (double v : c.vote_fractions) total += v;
  CHECK(total == doctest::Approx(1.0));
  CHECK((c.posterior_probability >= 0.0 && c.posterior_probability <= 1.0));
  CHECK(c.oob_error < 2.0 / 3.0);
}

TEST_CASE("a table with one model gives a degenerate forest") {
  auto opt = cheap_table(40);
  opt.models = {Model::Strauss};
  const auto table = build_reference_table(prior_p1(), Window::unit_square(), opt, 16);
  ForestOptions fo;
  fo.n_trees = 10;
  const auto forest = train_forest(table, fo, 17);
  CHECK(forest.degenerate);
  SummaryVector t;
  t.values.assign(table.features.row(0).data(), table.features.row(0).data() + table.features.cols());
  t.finite = true;
  const auto c = choose_model(forest, t);
  CHECK(c.selected == Model::Strauss);
  CHECK(c.vote_fractions[2] == 1.0);
}
