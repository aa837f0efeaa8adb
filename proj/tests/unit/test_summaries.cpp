#include <doctest.h>

#include <numbers>

#include "lgcps/error.hpp"
#include "lgcps/samplers.hpp"
#include "lgcps/summaries.hpp"
#include "support.hpp"

using namespace lgcps;

namespace {

PointPattern uniform_pattern(std::size_t n, std::uint64_t seed, Window w = Window::unit_square()) {
  Rng rng(seed);
  std::vector<Point> pts(n);
  for (auto& p : pts)
    p = {w.xmin() + w.width() * uniform01(rng), w.ymin() + w.height() * uniform01(rng)};
  return PointPattern(w, pts);
}

// Fraction of the circle inside the window, by splitting the circle at every
// crossing with the four edge lines and testing each arc's midpoint.
double circle_fraction_inside(Point c, double d, const Window& w) {
  std::vector<double> cuts = {0.0, 2.0 * std::numbers::pi};
  auto add = [&](double a) {
    a = std::fmod(a + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    cuts.push_back(a);
  };
  for (double x : {w.xmin(), w.xmax()}) {
    const double t = (x - c.x) / d;
    if (std::abs(t) <= 1.0) {
      add(std::acos(t));
      add(-std::acos(t));
    }
  }
  for (double y : {w.ymin(), w.ymax()}) {
    const double t = (y - c.y) / d;
    if (std::abs(t) <= 1.0) {
      add(std::asin(t));
      add(std::numbers::pi - std::asin(t));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double inside = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const Point p{c.x + d * std::cos(mid), c.y + d * std::sin(mid)};
    if (w.contains(p)) inside += cuts[k + 1] - cuts[k];
  }
  return inside / (2.0 * std::numbers::pi);
}

// Direct O(n^2) K estimate.
std::vector<double> brute_k(const PointPattern& x, const std::vector<double>& r) {
  std::vector<double> k(r.size(), 0.0);
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i == j) continue;
      const double d = distance(x[i], x[j]);
      const double w = 1.0 / circle_fraction_inside(x[i], d, x.window());
      for (std::size_t m = 0; m < r.size(); ++m)
        if (d <= r[m]) k[m] += w;
    }
  for (double& v : k) v *= x.window().area() / (n * (n - 1));
  return k;
}

}  // namespace

TEST_CASE("ripley weight examples") {
  const Window w(0, 2, 0, 2);
  CHECK(*ripley_weight({1.0, 1.0}, 0.5, w) == 1.0);
  // Point on an edge midpoint: half the circle is outside.
  CHECK(*ripley_weight({1.0, 0.0}, 0.5, w) == doctest::Approx(2.0).epsilon(1e-12));
  // Corner: a quarter is inside.
  CHECK(*ripley_weight({0.0, 0.0}, 0.5, w) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("ripley weight matches arc integration") {
  const Window w(0, 3, 0, 2);
  Rng rng(31);
  for (int rep = 0; rep < 500; ++rep) {
    const Point c{3.0 * uniform01(rng), 2.0 * uniform01(rng)};
    const double d = 0.05 + 1.4 * uniform01(rng);
    const auto got = ripley_weight(c, d, w);
    const double frac = circle_fraction_inside(c, d, w);
    REQUIRE(got.has_value());
    CHECK(*got == doctest::Approx(1.0 / frac).epsilon(1e-6));
  }
}

TEST_CASE("k function for two points") {
  const Window w(0, 10, 0, 10);
  const PointPattern x(w, {{5, 5}, {5, 6}});
  const auto K = k_function(x, {0.5, 0.99, 1.0, 2.0});
  REQUIRE(K.all_defined());
  CHECK(K.values[0] == 0.0);
  CHECK(K.values[1] == 0.0);
  CHECK(K.values[2] == doctest::Approx(100.0));
  CHECK(K.values[3] == doctest::Approx(100.0));
  const auto L = l_function(x, {2.0});
  CHECK(L.values[0] == doctest::Approx(std::sqrt(100.0 / std::numbers::pi)));
}

TEST_CASE("k function matches a direct estimate") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = uniform_pattern(80, seed, Window(0, 2, 0, 1));
    const auto r = regular_r_grid(0.3, 15);
    const auto K = k_function(x, r);
    const auto expect = brute_k(x, r);
    REQUIRE(K.all_defined());
    for (std::size_t m = 0; m < r.size(); ++m)
      CHECK(K.values[m] == doctest::Approx(expect[m]).epsilon(1e-9));
  }
}

TEST_CASE("k function is nondecreasing") {
  const auto x = uniform_pattern(300, 7);
  const auto K = k_function(x, regular_r_grid(0.25, 50));
  for (std::size_t m = 1; m < K.size(); ++m) CHECK(K.values[m] >= K.values[m - 1]);
}

TEST_CASE("k function needs two points") {
  const auto K = k_function(PointPattern(Window::unit_square(), {{0.5, 0.5}}), {0.1});
  CHECK_FALSE(K.defined[0]);
  CHECK(std::isnan(K.values[0]));
  CHECK_THROWS_AS(k_function(uniform_pattern(5, 1), {0.2, 0.1}), InvalidArgument);
}

TEST_CASE("hard core patterns have L(r) - r below zero at small r") {
  const auto x = simulate_strauss(6.0, 0.0, 0.03, Window::unit_square(), 30000, 3);
  const auto L = l_function(x, regular_r_grid(0.02, 10));
  for (std::size_t m = 0; m < L.size(); ++m) CHECK(L.values[m] - L.r[m] < 0.0);
}

TEST_CASE("nearest neighbour and empty space functions") {
  const Window w(0, 4, 0, 4);
  const auto single = PointPattern(w, {{2, 2}});
  const auto G = nearest_neighbour_G(single, {0.5, 1.0});
  CHECK_FALSE(G.defined[0]);
  CHECK_FALSE(G.defined[1]);

  // Two points at distance 1 in the middle: G jumps from 0 to 1 at r = 1.
  const PointPattern two(w, {{2, 2}, {2, 3}});
  const auto G2 = nearest_neighbour_G(two, {0.5, 1.0, 1.5});
  CHECK(G2.values[0] == 0.0);
  CHECK(G2.values[1] == 1.0);
  CHECK(G2.values[2] == 1.0);

  const auto x = uniform_pattern(200, 4);
  const auto r = regular_r_grid(0.1, 20);
  const auto F = empty_space_F(x, r);
  const auto Gx = nearest_neighbour_G(x, r);
  for (std::size_t m = 0; m < r.size(); ++m) {
    REQUIRE(F.defined[m]);
    CHECK((F.values[m] >= 0.0 && F.values[m] <= 1.0));
    CHECK((Gx.values[m] >= 0.0 && Gx.values[m] <= 1.0));
  }
  // Poisson: F(r) is close to 1 - exp(-lambda pi r^2).
  const double lambda = 200.0;
  for (std::size_t m = 0; m < r.size(); m += 5)
    CHECK(std::abs(F.values[m] - (1.0 - std::exp(-lambda * std::numbers::pi * r[m] * r[m]))) < 0.1);
}

TEST_CASE("J is defined on a prefix of the grid") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = uniform_pattern(30, seed);
    const auto J = j_function(x, regular_r_grid(0.4, 40));
    bool seen_undefined = false;
    for (std::size_t m = 0; m < J.size(); ++m) {
      if (!J.defined[m]) seen_undefined = true;
      CHECK_FALSE((seen_undefined && J.defined[m]));
    }
  }
  const auto x = uniform_pattern(100, 2);
  CHECK(default_j_rmax(x) == doctest::Approx(std::sqrt(1.0 / (std::numbers::pi * 100.0))));
  CHECK(default_j_rmax(PointPattern(Window(0, 2, 0, 1))) == doctest::Approx(0.2));
}

TEST_CASE("quadrat statistics with one point per quadrant") {
  const PointPattern x(Window::unit_square(), {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}});
  const auto q = quadrat_stats(x, 2);
  CHECK(q.c_max == 0.25);
  CHECK(q.c_min == 0.25);
  CHECK(q.c_logvar == -std::numeric_limits<double>::infinity());
  for (auto c : q.counts) CHECK(c == 1);
}

TEST_CASE("quadrat statistics with all points in one cell") {
  const PointPattern x(Window::unit_square(), {{0.1, 0.1}, {0.2, 0.05}, {0.3, 0.3}});
  const auto q = quadrat_stats(x, 3);
  CHECK(q.c_max == 1.0);
  CHECK(q.c_min == 0.0);
  // Fractions: one 1 and eight 0; variance (1 - 1/9) / 8.
  CHECK(q.c_logvar == doctest::Approx(std::log((1.0 - 1.0 / 9.0) / 8.0)));
  CHECK_THROWS_AS(quadrat_stats(PointPattern(Window::unit_square()), 2), InvalidArgument);
}

TEST_CASE("quadrat counts match a direct count") {
  const Window w(1, 4, -1, 1);
  const auto x = uniform_pattern(500, 12, w);
  for (int q : {2, 3, 4, 5}) {
    const auto s = quadrat_stats(x, q);
    std::size_t total = 0;
    for (int iy = 0; iy < q; ++iy)
      for (int ix = 0; ix < q; ++ix) {
        const double x0 = 1 + 3.0 * ix / q, x1 = 1 + 3.0 * (ix + 1) / q;
        const double y0 = -1 + 2.0 * iy / q, y1 = -1 + 2.0 * (iy + 1) / q;
        std::size_t c = 0;
        for (const auto& p : x.points())
          if (p.x >= x0 && (p.x < x1 || ix == q - 1) && p.y >= y0 && (p.y < y1 || iy == q - 1)) ++c;
        CHECK(s.counts[static_cast<std::size_t>(iy * q + ix)] == c);
        total += c;
      }
    CHECK(total == x.size());
    const double equal = 1.0 / (q * q);
    CHECK(s.c_min <= equal);
    CHECK(s.c_max >= equal);
  }
}

TEST_CASE("summary vector layout") {
  const SummaryOptions opt;
  CHECK(opt.dimension() == 56);
  const auto names = summary_names(opt);
  REQUIRE(names.size() == 56);
  CHECK(names[0] == "n_log");
  CHECK(names[3] == "L_argmin");
  CHECK(names[4] == "L_1");
  CHECK(names[43] == "L_40");
  CHECK(names[55] == "C_logvar_5");

  const auto x = uniform_pattern(150, 5);
  const auto s = summary_vector(x, opt);
  REQUIRE(s.size() == 56);
  CHECK(s.finite);
  CHECK(s[0] == doctest::Approx(std::log(150.0)));
  CHECK(s[1] >= s[2]);
}

TEST_CASE("summary vector is translation invariant") {
  const auto x = uniform_pattern(120, 8);
  std::vector<Point> shifted;
  for (const auto& p : x.points()) shifted.push_back({p.x + 10.0, p.y - 3.0});
  const PointPattern y(Window(10, 11, -3, -2), shifted);
  const auto a = summary_vector(x), b = summary_vector(y);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-8));
}

TEST_CASE("summary vector is not finite for tiny patterns") {
  CHECK_FALSE(summary_vector(PointPattern(Window::unit_square())).finite);
  CHECK_FALSE(summary_vector(PointPattern(Window::unit_square(), {{0.5, 0.5}})).finite);
}

TEST_CASE("L argmin tracks the hard-core radius") {
  const double R = 0.03;
  int close = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = simulate_strauss(6.0, 0.0, R, Window::unit_square(), 20000, 1000 + seed);
    const auto s = summary_vector(x);
    if (s[3] >= R / 2 && s[3] <= 2 * R) ++close;
  }
  CHECK(close >= 50);
}
