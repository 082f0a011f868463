#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace contropt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Thrown when rejection sampling cannot find any point of a domain.
class DomainEmptyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a kernel matrix cannot be factorized even at the maximum
/// jitter level; carries the last noise variance that was attempted.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double attempted_jitter)
      : std::runtime_error(what), attempted_jitter_(attempted_jitter) {}
  double attempted_jitter() const { return attempted_jitter_; }

 private:
  double attempted_jitter_;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// splitmix64 finalizer, used to derive independent seed material.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic child stream: distinct (id0, id1) pairs under the same root
/// seed yield independent generators regardless of call order.
inline Rng make_stream(std::uint64_t root, std::uint64_t id0, std::uint64_t id1 = 0) {
  std::uint64_t s = detail::mix64(root ^ detail::mix64(id0 ^ detail::mix64(id1)));
  return Rng(s);
}

/// Radical-inverse Halton point, coordinates in [0,1).
inline Vector halton_point(std::size_t index, int dim) {
  static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                   31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                                   73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
  if (dim < 1 || dim > static_cast<int>(std::size(primes)))
    throw std::domain_error("halton_point: unsupported dimension");
  Vector x(dim);
  for (int d = 0; d < dim; ++d) {
    const std::uint64_t base = primes[d];
    double inv = 1.0 / static_cast<double>(base);
    double scale = inv;
    double v = 0.0;
    std::uint64_t i = index + 1;  // skip the all-zeros point
    while (i > 0) {
      v += static_cast<double>(i % base) * scale;
      i /= base;
      scale *= inv;
    }
    x[d] = v;
  }
  return x;
}

}  // namespace contropt
