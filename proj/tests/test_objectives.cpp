#include <catch2/catch_amalgamated.hpp>

#include "contropt/objectives.hpp"

using namespace contropt;

namespace {
Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }
}

TEST_CASE("branin values") {
  CHECK(branin(vec2(-M_PI, 12.275)) == Catch::Approx(0.397887).margin(1e-5));
  CHECK(branin(vec2(M_PI, 2.275)) == Catch::Approx(0.397887).margin(1e-5));
  CHECK(branin(vec2(3.0 * M_PI, 2.475)) == Catch::Approx(0.397887).margin(1e-5));

  // direct formula at the origin
  const double b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI;
  const double expect = std::pow(0.0 - b * 0.0 + c * 0.0 - 6.0, 2) +
                        10.0 * (1.0 - 1.0 / (8.0 * M_PI)) * std::cos(0.0) + 10.0;
  CHECK(branin(vec2(0.0, 0.0)) == Catch::Approx(expect).epsilon(1e-14));
  CHECK(branin(vec2(0.0, 0.0)) == Catch::Approx(55.602112642270262).epsilon(1e-12));

  CHECK_THROWS_AS(branin(vec2(-6.0, 0.0)), std::domain_error);
}

TEST_CASE("sin2 values and symmetry") {
  CHECK(sin2(vec2(0.0, 0.0)) == Catch::Approx(0.9));
  CHECK(sin2(vec2(M_PI / 2.0, 0.0)) ==
        Catch::Approx(2.0 - 0.1 * std::exp(-M_PI * M_PI / 4.0)).epsilon(1e-14));
  Rng rng = make_stream(1, 1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng), b2 = u(rng);
    CHECK(sin2(vec2(a, b2)) == Catch::Approx(sin2(vec2(b2, a))).epsilon(1e-13));
    CHECK(sin2(vec2(a, b2)) == Catch::Approx(sin2(vec2(-a, b2))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(sin2(vec2(5.1, 0.0)), std::domain_error);
}

TEST_CASE("ackley values") {
  for (int n : {1, 4, 10}) {
    BoxDomain box = BoxDomain::cube(n, -32.768, 32.768);
    CHECK(std::abs(ackley(Vector::Zero(n), box)) < 1e-12);
  }
  BoxDomain box1 = BoxDomain::cube(1, -32.768, 32.768);
  const double direct = -20.0 * std::exp(-0.2 * std::sqrt(1.0)) - std::exp(std::cos(2.0 * M_PI)) +
                        20.0 + std::exp(1.0);
  CHECK(ackley(Vector::Ones(1), box1) == Catch::Approx(direct).epsilon(1e-14));

  // permutation invariance
  BoxDomain box3 = BoxDomain::cube(3, -32.768, 32.768);
  Vector x(3), y(3);
  x << 1.0, -2.0, 0.5;
  y << -2.0, 0.5, 1.0;
  CHECK(ackley(x, box3) == Catch::Approx(ackley(y, box3)).epsilon(1e-13));
  CHECK_THROWS_AS(ackley(Vector::Constant(3, 40.0), box3), std::domain_error);
}

TEST_CASE("rosenbrock values") {
  BoxDomain box4 = BoxDomain::cube(4, -2.048, 2.048);
  CHECK(rosenbrock(Vector::Ones(4), box4) == 0.0);
  CHECK(rosenbrock(Vector::Zero(4), box4) == Catch::Approx(3.0));
  Vector x(4);
  x << -1.0, 1.0, 1.0, 1.0;
  CHECK(rosenbrock(x, box4) == Catch::Approx(4.0));
  CHECK_THROWS_AS(rosenbrock(Vector::Constant(4, 3.0), box4), std::domain_error);
}

TEST_CASE("lennard-jones cluster energies") {
  CHECK(lj_cluster(Vector::Ones(1), 2) == Catch::Approx(-1.0));
  CHECK(lj_cluster(Vector::Constant(1, 2.4), 2) ==
        Catch::Approx(std::pow(2.4, -12.0) - 2.0 * std::pow(2.4, -6.0)).epsilon(1e-13));
  CHECK(std::abs(lj_cluster(Vector::Constant(1, 2.4), 2)) < 0.02);  // decays toward zero

  // regular tetrahedron with unit edges
  Vector tetra(6);
  tetra << 1.0, 0.5, std::sqrt(3.0) / 2.0, 0.5, std::sqrt(3.0) / 6.0, std::sqrt(6.0) / 3.0;
  CHECK(lj_cluster(tetra, 4) == Catch::Approx(-6.0).margin(1e-9));

  // clamping below r_min flags the singularity and bounds the value
  bool flagged = false;
  const double clamped = lj_cluster(Vector::Constant(1, 0.1), 2, &flagged);
  CHECK(flagged);
  CHECK(clamped == Catch::Approx(std::pow(0.5, -12.0) - 2.0 * std::pow(0.5, -6.0)));

  CHECK_THROWS_AS(lj_cluster(Vector::Ones(2), 2), std::domain_error);
  CHECK_THROWS_AS(lj_cluster(Vector::Ones(1), 1), std::domain_error);
}

TEST_CASE("registry entries are self-consistent") {
  for (const auto& name : objective_names()) {
    ObjectiveSpec spec = make_objective(name);
    CHECK(spec.dim == spec.box.dim());
    for (const auto& xstar : spec.minimizers) {
      REQUIRE(spec.f_star.has_value());
      CHECK(spec.box.contains(xstar));
      const double fx = spec.fn(xstar);
      const double scale = std::max(1.0, std::abs(*spec.f_star));
      CHECK(std::abs(fx - *spec.f_star) <= 1e-6 * scale);
    }
  }
  CHECK_THROWS_AS(make_objective("nosuch"), std::domain_error);
  CHECK_THROWS_AS(make_objective("lj", 9), std::domain_error);

  ObjectiveSpec a10 = make_objective("ackley", 10, std::make_pair(-5.0, 5.0));
  CHECK(a10.dim == 10);
  CHECK(a10.box.lower()[0] == -5.0);

  ObjectiveSpec lj5 = make_objective("lj", 5);
  CHECK(lj5.dim == 9);
  CHECK(lj5.box.lower()[0] == 0.0);    // pinned radial coordinate
  CHECK(lj5.box.lower()[1] == -2.5);
  REQUIRE(lj5.f_star.has_value());
  CHECK(*lj5.f_star == Catch::Approx(-9.103852));
}
