#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "contropt/geometry.hpp"

namespace contropt {

/// Evaluated sample locations with cached nearest-neighbor distances.
/// Single-writer append; everything else is read-only.
class SampleSet {
 public:
  SampleSet() = default;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& nn_dist() const { return nn_dist_; }
  const Vector& point(std::size_t i) const { return points_[i]; }
  double value(std::size_t i) const { return values_[i]; }

  /// Appends a (point, value) pair, refreshing the nearest-neighbor cache in
  /// O(N). Exact duplicates of an existing point are rejected.
  bool append(const Vector& x, double f) {
    for (const auto& p : points_)
      if (p.size() == x.size() && (p - x).norm() == 0.0) return false;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double d = (points_[i] - x).norm();
      nn_dist_[i] = std::min(nn_dist_[i], d);
      best = std::min(best, d);
    }
    points_.push_back(x);
    values_.push_back(f);
    nn_dist_.push_back(best);
    return true;
  }

  /// Keeps exactly the flagged entries; the cache is rebuilt from scratch.
  SampleSet filter(const std::vector<char>& keep) const {
    SampleSet out;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (keep[i]) {
        out.points_.push_back(points_[i]);
        out.values_.push_back(values_[i]);
      }
    out.rebuild_nn();
    return out;
  }

  double min_value() const {
    if (values_.empty()) throw std::domain_error("SampleSet: empty");
    return *std::min_element(values_.begin(), values_.end());
  }
  double max_value() const {
    if (values_.empty()) throw std::domain_error("SampleSet: empty");
    return *std::max_element(values_.begin(), values_.end());
  }
  std::size_t argmin_value() const {
    if (values_.empty()) throw std::domain_error("SampleSet: empty");
    return static_cast<std::size_t>(
        std::min_element(values_.begin(), values_.end()) - values_.begin());
  }

  Matrix points_matrix() const {
    if (points_.empty()) return Matrix(0, 0);
    Matrix m(points_.size(), points_[0].size());
    for (std::size_t i = 0; i < points_.size(); ++i) m.row(i) = points_[i].transpose();
    return m;
  }

 private:
  void rebuild_nn() {
    const std::size_t n = points_.size();
    nn_dist_.assign(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = (points_[i] - points_[j]).norm();
        nn_dist_[i] = std::min(nn_dist_[i], d);
        nn_dist_[j] = std::min(nn_dist_[j], d);
      }
  }

  std::vector<Vector> points_;
  std::vector<double> values_;
  std::vector<double> nn_dist_;
};

/// Reflected-random-walk parameters.
struct WalkParams {
  int n_c = 100;     // candidates generated per existing point
  int T = 10;        // steps per walk
  double a = 0.5;    // reflection reduction factor, in (0,1)
  int j_max = 50;    // reflection retries before a step is abandoned

  void validate() const {
    if (n_c < 1 || T < 1 || !(a > 0.0 && a < 1.0) || j_max < 1)
      throw std::domain_error("WalkParams: invalid parameters");
  }
};

/// Half the minimum pairwise distance of the sample set.
inline double separation_distance(const SampleSet& s) {
  if (s.size() < 2) throw std::domain_error("separation_distance: needs at least 2 points");
  double m = std::numeric_limits<double>::infinity();
  for (double d : s.nn_dist()) m = std::min(m, d);
  return 0.5 * m;
}

/// Largest nearest-neighbor distance d over the set; the walk scale is d/sqrt(T).
inline double max_nn_distance(const SampleSet& s) {
  if (s.size() < 2) throw std::domain_error("max_nn_distance: needs at least 2 points");
  return *std::max_element(s.nn_dist().begin(), s.nn_dist().end());
}

/// Monte-Carlo lower estimate of the fill distance: max over `probes` uniform
/// member points of the distance to the nearest sample.
inline double fill_distance_probe(const SampleSet& s, const ConstrainedDomain& d,
                                  std::size_t probes, std::uint64_t seed) {
  if (probes < 1) throw std::domain_error("fill_distance_probe: probes must be >= 1");
  if (s.empty()) throw std::domain_error("fill_distance_probe: empty sample set");
  Rng rng = make_stream(seed, 0x66696c6c);
  double h = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    Vector x = d.sample(rng);
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& q : s.points()) nearest = std::min(nearest, (x - q).norm());
    h = std::max(h, nearest);
  }
  return h;
}

/// One reflected random walk; returns Z_T. Steps that exit the domain are
/// re-drawn as Z - (-a)^j s W + a^{j+1} s W' for the smallest j restoring
/// membership; if no j <= j_max works the step is abandoned (Z stays put).
inline Vector rrw_endpoint(const Vector& start, double sigma, const WalkParams& walk,
                           const ConstrainedDomain& d, Rng& rng,
                           std::size_t* abandoned_steps = nullptr) {
  walk.validate();
  if (sigma < 0.0) throw std::domain_error("rrw_endpoint: sigma must be >= 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = d.dim();
  Vector z = start;
  Vector w(n), wp(n);
  for (int t = 0; t < walk.T; ++t) {
    for (int i = 0; i < n; ++i) w[i] = gauss(rng);
    Vector cand = z + sigma * w;
    if (d.contains(cand)) {
      z = cand;
      continue;
    }
    for (int i = 0; i < n; ++i) wp[i] = gauss(rng);
    bool placed = false;
    double aj = 1.0;  // (-a)^j, j starting at 0
    double ajp = walk.a;
    for (int j = 0; j <= walk.j_max; ++j) {
      cand = z - aj * sigma * w + ajp * sigma * wp;
      if (d.contains(cand)) {
        z = cand;
        placed = true;
        break;
      }
      aj *= -walk.a;
      ajp *= walk.a;
    }
    if (!placed && abandoned_steps) ++(*abandoned_steps);
  }
  return z;
}

/// Candidate cloud per Algorithm-style generation: n_c walk endpoints from
/// each member sample, sigma = d_chi/sqrt(T) (box diameter based before two
/// points exist). Walk streams are split per (seed point, candidate), so the
/// output is reproducible and walks could run concurrently. The n_c walks of
/// one seed point are stepped together so membership tests run batched; the
/// endpoints are identical to per-walk rrw_endpoint calls on the same streams.
inline std::vector<Vector> generate_candidates(const SampleSet& s, const WalkParams& walk,
                                               const ConstrainedDomain& d, std::uint64_t seed,
                                               std::optional<double> sigma_override = std::nullopt) {
  walk.validate();
  std::vector<std::size_t> seeds_idx;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (d.contains(s.point(i))) seeds_idx.push_back(i);
  if (seeds_idx.empty())
    throw std::domain_error("generate_candidates: no member sample to walk from");

  double sigma;
  if (sigma_override) {
    sigma = *sigma_override;
  } else if (seeds_idx.size() >= 2) {
    SampleSet members;
    for (std::size_t i : seeds_idx) members.append(s.point(i), s.value(i));
    sigma = max_nn_distance(members) / std::sqrt(static_cast<double>(walk.T));
  } else {
    sigma = d.box().diameter() / std::sqrt(static_cast<double>(walk.T));
  }

  const int n = d.dim();
  const auto nc = static_cast<std::size_t>(walk.n_c);
  const std::size_t total = seeds_idx.size() * nc;
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Rng> streams(total);
  Matrix z(total, n), gusts(total, n), proposal(total, n);
  Vector wp(n);
  for (std::size_t si = 0; si < seeds_idx.size(); ++si)
    for (std::size_t c = 0; c < nc; ++c) {
      streams[si * nc + c] = make_stream(seed, si, c);
      z.row(static_cast<Eigen::Index>(si * nc + c)) = s.point(seeds_idx[si]).transpose();
    }

  for (int t = 0; t < walk.T; ++t) {
    for (std::size_t r = 0; r < total; ++r)
      for (int i = 0; i < n; ++i) gusts(static_cast<Eigen::Index>(r), i) = gauss(streams[r]);
    proposal = z + sigma * gusts;
    auto ok = d.contains_batch(proposal);
    for (std::size_t r = 0; r < total; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      if (ok[r]) {
        z.row(ri) = proposal.row(ri);
        continue;
      }
      // Reflect this walk individually: damped alternating retries.
      for (int i = 0; i < n; ++i) wp[i] = gauss(streams[r]);
      double aj = 1.0;
      double ajp = walk.a;
      for (int j = 0; j <= walk.j_max; ++j) {
        Vector cand = z.row(ri).transpose() - aj * sigma * gusts.row(ri).transpose() +
                      ajp * sigma * wp;
        if (d.contains(cand)) {
          z.row(ri) = cand.transpose();
          break;
        }
        aj *= -walk.a;
        ajp *= walk.a;
      }
    }
  }

  std::vector<Vector> out;
  out.reserve(total);
  for (std::size_t r = 0; r < total; ++r) out.push_back(z.row(static_cast<Eigen::Index>(r)).transpose());
  return out;
}

/// Result of greedy farthest-point selection.
struct FarthestSelection {
  std::vector<Vector> points;
  std::vector<double> gains;  // maximized min-distances, nonincreasing
  bool short_count = false;
};

/// Greedily picks `count` candidates, each maximizing the min distance to the
/// samples plus everything already chosen. Incremental distance caching keeps
/// the total work at O(count * |candidates|).
inline FarthestSelection select_farthest(const SampleSet& s, const std::vector<Vector>& candidates,
                                         std::size_t count) {
  if (candidates.empty()) throw std::domain_error("select_farthest: empty candidate list");
  FarthestSelection sel;
  std::vector<double> mind(candidates.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (const auto& p : s.points()) mind[c] = std::min(mind[c], (candidates[c] - p).norm());
  std::vector<char> used(candidates.size(), 0);

  for (std::size_t k = 0; k < count; ++k) {
    std::size_t best = candidates.size();
    double best_gain = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (!used[c] && mind[c] > best_gain) {
        best_gain = mind[c];
        best = c;
      }
    if (best == candidates.size()) {
      sel.short_count = true;
      break;
    }
    used[best] = 1;
    sel.points.push_back(candidates[best]);
    sel.gains.push_back(best_gain);
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (!used[c]) mind[c] = std::min(mind[c], (candidates[c] - candidates[best]).norm());
  }
  return sel;
}

}  // namespace contropt
