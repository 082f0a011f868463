#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "contropt/common.hpp"

namespace contropt {

/// Axis-aligned box, the outermost search region.
class BoxDomain {
 public:
  BoxDomain(Vector lower, Vector upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() < 1)
      throw std::domain_error("BoxDomain: bound dimensions disagree");
    for (Eigen::Index i = 0; i < lower_.size(); ++i)
      if (!(lower_[i] < upper_[i]))
        throw std::domain_error("BoxDomain: lower bound must be below upper");
  }

  static BoxDomain cube(int dim, double lo, double hi) {
    return BoxDomain(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector widths() const { return upper_ - lower_; }
  Vector center() const { return 0.5 * (lower_ + upper_); }
  double diameter() const { return (upper_ - lower_).norm(); }

  bool contains(const Vector& x) const {
    if (x.size() != lower_.size()) return false;
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
  }

  Vector clamp(const Vector& x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  Vector sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector x(dim());
    for (int i = 0; i < dim(); ++i) x[i] = lower_[i] + u(rng) * (upper_[i] - lower_[i]);
    return x;
  }

  /// Centered copy with Euclidean diameter exactly 1, plus the affine maps
  /// between it and this box. Search internals live in the normalized frame.
  BoxDomain normalized() const {
    const double d = diameter();
    Vector half = 0.5 * widths() / d;
    return BoxDomain(-half, half);
  }
  Vector to_normalized(const Vector& x) const { return (x - center()) / diameter(); }
  Vector from_normalized(const Vector& z) const { return center() + diameter() * z; }

 private:
  Vector lower_;
  Vector upper_;
};

/// One link of a contraction chain: keeps x iff value(x) <= threshold.
struct SublevelConstraint {
  std::function<double(const Vector&)> value;
  double threshold = 0.0;
  // Optional vectorized form over row-stacked points; falls back to `value`.
  std::function<Vector(const Matrix&)> value_batch;
};

/// Box intersected with an ordered chain of surrogate sublevel sets.
/// Immutable; contractions produce extended copies via with_constraint.
class ConstrainedDomain {
 public:
  explicit ConstrainedDomain(BoxDomain box) : box_(std::move(box)) {}

  const BoxDomain& box() const { return box_; }
  int dim() const { return box_.dim(); }
  int level() const { return static_cast<int>(constraints_.size()); }
  const std::vector<SublevelConstraint>& constraints() const { return constraints_; }

  ConstrainedDomain with_constraint(SublevelConstraint c) const {
    ConstrainedDomain out(*this);
    out.constraints_.push_back(std::move(c));
    return out;
  }

  // Box first, then constraints newest-first: membership is a conjunction,
  // so the order only affects which test rejects first.
  bool contains(const Vector& x) const {
    if (!box_.contains(x)) return false;
    for (auto it = constraints_.rbegin(); it != constraints_.rend(); ++it)
      if (!(it->value(x) <= it->threshold)) return false;
    return true;
  }

  /// Membership flags for row-stacked points; evaluates each constraint only
  /// on rows still alive, oldest-first so batch model calls stay dense.
  std::vector<char> contains_batch(const Matrix& pts) const {
    const Eigen::Index n = pts.rows();
    std::vector<char> alive(n, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      alive[i] = box_.contains(pts.row(i).transpose()) ? 1 : 0;
    for (const auto& c : constraints_) {
      std::vector<Eigen::Index> idx;
      idx.reserve(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (alive[i]) idx.push_back(i);
      if (idx.empty()) break;
      if (c.value_batch) {
        Matrix sub(static_cast<Eigen::Index>(idx.size()), pts.cols());
        for (std::size_t k = 0; k < idx.size(); ++k) sub.row(k) = pts.row(idx[k]);
        Vector vals = c.value_batch(sub);
        for (std::size_t k = 0; k < idx.size(); ++k)
          if (!(vals[k] <= c.threshold)) alive[idx[k]] = 0;
      } else {
        for (Eigen::Index i : idx)
          if (!(c.value(pts.row(i).transpose()) <= c.threshold)) alive[i] = 0;
      }
    }
    return alive;
  }

  /// Uniform member point by rejection from the box.
  Vector sample(Rng& rng, std::size_t max_attempts = 100000) const {
    for (std::size_t a = 0; a < max_attempts; ++a) {
      Vector x = box_.sample(rng);
      if (contains(x)) return x;
    }
    throw DomainEmptyError("ConstrainedDomain::sample: no member found within attempt budget");
  }

 private:
  BoxDomain box_;
  std::vector<SublevelConstraint> constraints_;
};

}  // namespace contropt
