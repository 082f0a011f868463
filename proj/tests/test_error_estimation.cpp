#include <catch2/catch_amalgamated.hpp>

#include "contropt/error_estimation.hpp"

using namespace contropt;

namespace {

Matrix pts1d(std::initializer_list<double> xs) {
  Matrix m(xs.size(), 1);
  Eigen::Index r = 0;
  for (double x : xs) m(r++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("fold partitions are balanced, disjoint and complete") {
  Rng rng = make_stream(1, 0);
  auto loo = partition_folds(10, 10, rng);
  REQUIRE(loo.size() == 10);
  for (const auto& f : loo) CHECK(f.size() == 1);

  auto three = partition_folds(10, 3, rng);
  std::vector<std::size_t> sizes;
  for (const auto& f : three) sizes.push_back(f.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{3, 3, 4});

  std::vector<char> seen(10, 0);
  for (const auto& f : three)
    for (std::size_t i : f) {
      REQUIRE(i < 10);
      CHECK(!seen[i]);
      seen[i] = 1;
    }
  for (char c : seen) CHECK(c == 1);

  CHECK_THROWS_AS(partition_folds(3, 4, rng), std::domain_error);
  CHECK_THROWS_AS(partition_folds(5, 1, rng), std::domain_error);
}

TEST_CASE("fold partition is deterministic in the seed") {
  Rng a = make_stream(2, 9), b = make_stream(2, 9);
  auto fa = partition_folds(23, 5, a);
  auto fb = partition_folds(23, 5, b);
  CHECK(fa == fb);
}

TEST_CASE("cv on the zero function has zero residuals") {
  Matrix pts = pts1d({0.0, 0.25, 0.5, 0.75, 1.0});
  Hyperparameters h{1.0, 4.0, 1e-8};
  Rng rng = make_stream(3, 3);
  ErrorStats stats = cv_error_stats(pts, Vector::Zero(5), h, 5, rng);
  CHECK(stats.mean == 0.0);
  CHECK(stats.stddev == 0.0);
  for (double r : stats.residuals) CHECK(r == 0.0);
}

TEST_CASE("two-fold cv matches the 2x2 closed form") {
  Matrix pts = pts1d({0.0, 0.31, 0.62, 1.0});
  Vector vals = (Vector(4) << 0.2, -0.5, 0.9, 0.4).finished();
  Hyperparameters h{1.2, 3.0, 0.01};

  Rng rng = make_stream(5, 0);
  ErrorStats stats = cv_error_stats(pts, vals, h, 2, rng);

  // Replay the same partition and predict each fold from the paired 2x2 system.
  Rng replay = make_stream(5, 0);
  auto folds = partition_folds(4, 2, replay);
  std::vector<double> oracle(4, 0.0);
  for (const auto& fold : folds) {
    std::vector<std::size_t> comp;
    for (std::size_t i = 0; i < 4; ++i)
      if (std::find(fold.begin(), fold.end(), i) == fold.end()) comp.push_back(i);
    REQUIRE(comp.size() == 2);
    const double x1 = pts(static_cast<Eigen::Index>(comp[0]), 0);
    const double x2 = pts(static_cast<Eigen::Index>(comp[1]), 0);
    const double f1 = vals[static_cast<Eigen::Index>(comp[0])];
    const double f2 = vals[static_cast<Eigen::Index>(comp[1])];
    const double k12 = h.signal_var * std::exp(-h.inv_lengthscale_sq * (x1 - x2) * (x1 - x2));
    const double dpsi = h.signal_var + h.noise_var;
    const double det = dpsi * dpsi - k12 * k12;
    const double a1 = (dpsi * f1 - k12 * f2) / det;
    const double a2 = (-k12 * f1 + dpsi * f2) / det;
    for (std::size_t i : fold) {
      const double x = pts(static_cast<Eigen::Index>(i), 0);
      const double k1 = h.signal_var * std::exp(-h.inv_lengthscale_sq * (x - x1) * (x - x1));
      const double k2 = h.signal_var * std::exp(-h.inv_lengthscale_sq * (x - x2) * (x - x2));
      oracle[i] = k1 * a1 + k2 * a2 - vals[static_cast<Eigen::Index>(i)];
    }
  }
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(stats.residuals[i] == Catch::Approx(oracle[i]).margin(1e-10));

  const double mu = std::accumulate(oracle.begin(), oracle.end(), 0.0) / 4.0;
  double ss = 0.0;
  for (double r : oracle) ss += (r - mu) * (r - mu);
  CHECK(stats.mean == Catch::Approx(mu).margin(1e-10));
  CHECK(stats.stddev == Catch::Approx(std::sqrt(ss / 3.0)).margin(1e-10));
}

TEST_CASE("cv residuals are reproducible for a fixed seed") {
  Matrix pts(12, 1);
  Vector vals(12);
  for (int i = 0; i < 12; ++i) {
    pts(i, 0) = static_cast<double>(i) / 11.0;
    vals[i] = std::sin(6.0 * pts(i, 0));
  }
  Hyperparameters h{1.0, 10.0, 1e-6};
  Rng a = make_stream(6, 1), b = make_stream(6, 1);
  ErrorStats sa = cv_error_stats(pts, vals, h, 4, a);
  ErrorStats sb = cv_error_stats(pts, vals, h, 4, b);
  CHECK(sa.residuals == sb.residuals);
}

TEST_CASE("cv statistics scale linearly with the values") {
  Matrix pts(10, 1);
  Vector vals(10);
  for (int i = 0; i < 10; ++i) {
    pts(i, 0) = static_cast<double>(i) / 9.0;
    vals[i] = std::cos(5.0 * pts(i, 0)) + 0.3 * pts(i, 0);
  }
  Hyperparameters h{0.8, 12.0, 1e-4};
  const double c = 3.7;
  Hyperparameters hc{h.signal_var * c * c, h.inv_lengthscale_sq, h.noise_var * c * c};

  Rng a = make_stream(7, 2), b = make_stream(7, 2);
  ErrorStats base = cv_error_stats(pts, vals, h, 5, a);
  ErrorStats scaled = cv_error_stats(pts, c * vals, hc, 5, b);

  CHECK(scaled.mean == Catch::Approx(c * base.mean).epsilon(1e-12));
  CHECK(scaled.stddev == Catch::Approx(c * base.stddev).epsilon(1e-12));
  CHECK(chebyshev_bound(scaled, 3.0).value ==
        Catch::Approx(c * chebyshev_bound(base, 3.0).value).epsilon(1e-12));
}

TEST_CASE("chebyshev bound arithmetic") {
  CHECK(chebyshev_bound(ErrorStats{0.0, 1.0, 0, {}, false}, 2.0).value == Catch::Approx(2.0));
  CHECK(chebyshev_bound(ErrorStats{-0.5, 0.25, 0, {}, false}, 4.0).value == Catch::Approx(1.5));
  CHECK(chebyshev_bound(ErrorStats{-0.7, 0.0, 0, {}, false}, 9.0).value == Catch::Approx(0.7));

  CHECK_FALSE(chebyshev_bound(ErrorStats{0.0, 1.0, 0, {}, false}, 2.0).low_confidence);
  CHECK(chebyshev_bound(ErrorStats{0.0, 1.0, 0, {}, false}, 1.5).low_confidence);
}

TEST_CASE("coverage floor values") {
  CHECK(coverage_floor(2.0) == Catch::Approx(0.75));
  CHECK(coverage_floor_exp(2.0) == Catch::Approx(std::exp(-0.3)));
  CHECK(coverage_floor_exp(2.0) <= coverage_floor(2.0));
  CHECK(coverage_floor(10.0) == Catch::Approx(0.99));
  CHECK(coverage_floor(1e9) == Catch::Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(coverage_floor(0.0), std::domain_error);

  // Union-bound budget of a whole schedule.
  std::vector<double> ts = {2.0, 3.0, 4.0};
  const double sum = 0.25 + 1.0 / 9.0 + 1.0 / 16.0;
  CHECK(schedule_failure_bound(ts) == Catch::Approx(1.0 - std::exp(-1.2 * sum)));
}

TEST_CASE("chebyshev coverage holds for heterogeneous residual laws") {
  const std::size_t draws = 100000;
  for (double t : {2.0, 3.0, 4.0}) {
    for (int law = 0; law < 3; ++law) {
      Rng rng = make_stream(8, static_cast<std::uint64_t>(law * 10 + static_cast<int>(t)));
      std::normal_distribution<double> gauss(1.0, 2.0);
      std::uniform_real_distribution<double> unif(-1.0, 3.0);  // mean 1, sd 2/sqrt(3)
      std::bernoulli_distribution coin(0.5);
      double mu = 1.0;
      double sd = law == 0 ? 2.0 : (law == 1 ? 2.0 / std::sqrt(3.0) : 2.0);
      std::size_t covered = 0;
      for (std::size_t i = 0; i < draws; ++i) {
        double e = law == 0 ? gauss(rng) : (law == 1 ? unif(rng) : (coin(rng) ? 3.0 : -1.0));
        if (std::abs(e - mu) <= t * sd) ++covered;
      }
      const double frac = static_cast<double>(covered) / static_cast<double>(draws);
      CHECK(frac >= coverage_floor(t) - 0.01);
    }
  }
}
