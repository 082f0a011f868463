#pragma once

#include <cmath>
#include <string>

#include "contropt/contraction.hpp"

namespace contropt {

namespace detail {

inline void require_in_box(const Vector& x, const BoxDomain& box, const char* name) {
  if (!box.contains(x)) throw std::domain_error(std::string(name) + ": input outside the domain box");
}

}  // namespace detail

inline const BoxDomain& branin_box() {
  static const BoxDomain box((Vector(2) << -5.0, 0.0).finished(),
                             (Vector(2) << 10.0, 15.0).finished());
  return box;
}

inline double branin(const Vector& x) {
  detail::require_in_box(x, branin_box(), "branin");
  const double a = 1.0, b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI, r = 6.0;
  const double s = 10.0, t = 1.0 / (8.0 * M_PI);
  const double inner = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * inner * inner + s * (1.0 - t) * std::cos(x[0]) + s;
}

inline const BoxDomain& sin2_box() {
  static const BoxDomain box = BoxDomain::cube(2, -5.0, 5.0);
  return box;
}

inline double sin2(const Vector& x) {
  detail::require_in_box(x, sin2_box(), "sin2");
  const double s1 = std::sin(x[0]), s2 = std::sin(x[1]);
  return 1.0 + s1 * s1 + s2 * s2 - 0.1 * std::exp(-x[0] * x[0] - x[1] * x[1]);
}

inline double ackley(const Vector& x, const BoxDomain& box) {
  detail::require_in_box(x, box, "ackley");
  const double a = 20.0, b = 0.2, c = 2.0 * M_PI;
  const double n = static_cast<double>(x.size());
  const double rms = std::sqrt(x.squaredNorm() / n);
  const double mc = (c * x.array()).cos().mean();
  return -a * std::exp(-b * rms) - std::exp(mc) + a + std::exp(1.0);
}

inline double rosenbrock(const Vector& x, const BoxDomain& box) {
  detail::require_in_box(x, box, "rosenbrock");
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double q = x[i + 1] - x[i] * x[i];
    sum += 100.0 * q * q + (x[i] - 1.0) * (x[i] - 1.0);
  }
  return sum;
}

/// Lennard-Jones cluster energy in reduced units over rigid-body-free
/// coordinates: atom 1 at the origin, atom 2 on the +x axis, atom 3 in the
/// xy-plane, so dim = 3s-6 for s >= 3 (dim = 1 for s = 2). Pair distances
/// below r_min = 0.5 are clamped there; `near_singularity` reports clamping.
inline double lj_cluster(const Vector& coords, int atoms, bool* near_singularity = nullptr) {
  if (atoms < 2) throw std::domain_error("lj_cluster: need at least 2 atoms");
  const int expected = atoms == 2 ? 1 : 3 * atoms - 6;
  if (coords.size() != expected) throw std::domain_error("lj_cluster: wrong coordinate count");
  constexpr double r_min = 0.5;

  std::vector<Eigen::Vector3d> pos(static_cast<std::size_t>(atoms), Eigen::Vector3d::Zero());
  pos[1] = {coords[0], 0.0, 0.0};
  if (atoms >= 3) pos[2] = {coords[1], coords[2], 0.0};
  for (int i = 3; i < atoms; ++i)
    pos[static_cast<std::size_t>(i)] = {coords[3 * i - 6], coords[3 * i - 5], coords[3 * i - 4]};

  if (near_singularity) *near_singularity = false;
  double energy = 0.0;
  for (int i = 0; i < atoms; ++i)
    for (int j = i + 1; j < atoms; ++j) {
      double rr = (pos[static_cast<std::size_t>(i)] - pos[static_cast<std::size_t>(j)]).norm();
      if (rr < r_min) {
        rr = r_min;
        if (near_singularity) *near_singularity = true;
      }
      const double r6 = std::pow(rr, -6.0);
      energy += r6 * r6 - 2.0 * r6;
    }
  return energy;
}

inline BoxDomain lj_box(int atoms) {
  const int dim = atoms == 2 ? 1 : 3 * atoms - 6;
  Vector lo = Vector::Constant(dim, -2.5);
  Vector hi = Vector::Constant(dim, 2.5);
  lo[0] = 0.0;  // pinned radial coordinate of atom 2
  return BoxDomain(std::move(lo), std::move(hi));
}

/// A registered benchmark problem.
struct ObjectiveSpec {
  std::string name;
  int dim = 0;
  BoxDomain box;
  std::optional<double> f_star;
  std::vector<Vector> minimizers;
  ObjectiveFn fn;
};

inline std::vector<std::string> objective_names() {
  return {"branin", "sin2", "ackley", "rosenbrock", "lj"};
}

/// Builds a problem by name. For scalable functions `size` is the dimension;
/// for "lj" it is the atom count (2..5). Passing 0 selects the default size.
/// An explicit `box_override` replaces the standard bounds.
inline ObjectiveSpec make_objective(const std::string& name, int size = 0,
                                    std::optional<std::pair<double, double>> box_override = {}) {
  auto cube_or = [&](int dim, double lo, double hi) {
    if (box_override) return BoxDomain::cube(dim, box_override->first, box_override->second);
    return BoxDomain::cube(dim, lo, hi);
  };

  if (name == "branin") {
    ObjectiveSpec s{name, 2, branin_box(), 10.0 / (8.0 * M_PI), {}, branin};
    s.minimizers = {(Vector(2) << -M_PI, 12.275).finished(),
                    (Vector(2) << M_PI, 2.275).finished(),
                    (Vector(2) << 3.0 * M_PI, 2.475).finished()};
    return s;
  }
  if (name == "sin2") {
    ObjectiveSpec s{name, 2, sin2_box(), 0.9, {Vector::Zero(2)}, sin2};
    return s;
  }
  if (name == "ackley") {
    const int dim = size > 0 ? size : 4;
    BoxDomain box = cube_or(dim, -32.768, 32.768);
    ObjectiveSpec s{name, dim, box, 0.0, {Vector::Zero(dim)},
                    [box](const Vector& x) { return ackley(x, box); }};
    return s;
  }
  if (name == "rosenbrock") {
    const int dim = size > 0 ? size : 4;
    BoxDomain box = cube_or(dim, -2.048, 2.048);
    ObjectiveSpec s{name, dim, box, 0.0, {Vector::Ones(dim)},
                    [box](const Vector& x) { return rosenbrock(x, box); }};
    return s;
  }
  if (name == "lj") {
    const int atoms = size > 0 ? size : 4;
    if (atoms < 2 || atoms > 5) throw std::domain_error("make_objective: lj supports 2..5 atoms");
    BoxDomain box = lj_box(atoms);
    ObjectiveSpec s{name, box.dim(), box, std::nullopt, {},
                    [atoms, box](const Vector& x) {
                      detail::require_in_box(x, box, "lj");
                      return lj_cluster(x, atoms);
                    }};
    if (atoms == 2) {
      s.f_star = -1.0;
      s.minimizers = {Vector::Ones(1)};
    } else if (atoms == 3) {
      s.f_star = -3.0;
      s.minimizers = {(Vector(3) << 1.0, 0.5, std::sqrt(3.0) / 2.0).finished()};
    } else if (atoms == 4) {
      s.f_star = -6.0;
      s.minimizers = {(Vector(6) << 1.0, 0.5, std::sqrt(3.0) / 2.0, 0.5, std::sqrt(3.0) / 6.0,
                       std::sqrt(6.0) / 3.0)
                          .finished()};
    } else {
      s.f_star = -9.103852;
    }
    return s;
  }
  throw std::domain_error("make_objective: unknown problem '" + name + "'");
}

}  // namespace contropt
