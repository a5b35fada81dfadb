#pragma once

// Parameter-set geometry: axis-aligned boxes, the uniform cell-center grid,
// the sup-norm point-to-set distance and the dynamic zoom-in update.

#include <cstddef>
#include <optional>
#include <vector>

#include "supobs/linalg.hpp"

namespace supobs {

/// {p : |p_j - center_j| <= half_lengths_j for all j}.
struct ParamBox {
  Vec center;
  Vec half_lengths;

  ParamBox() = default;
  ParamBox(Vec center, Vec half_lengths);
  static ParamBox from_bounds(const Vec& lower, const Vec& upper);
  /// H(center, r): the sup-norm ball.
  static ParamBox hypercube(const Vec& center, double radius);

  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }
  Vec lower() const { return center - half_lengths; }
  Vec upper() const { return center + half_lengths; }
  double volume() const;

  bool contains(const Vec& p) const;
  /// Componentwise interval containment of `inner` in this box.
  bool contains(const ParamBox& inner) const;
  std::optional<ParamBox> intersect(const ParamBox& other) const;
};

struct SampledParamSet {
  std::vector<Vec> points;
  ParamBox parent;
  std::size_t m = 1;  // points per dimension

  std::size_t size() const { return points.size(); }
};

/// Partitions the box into m^n_p equal cells and returns their centers
/// (first dimension varies slowest). Every p in the box is within
/// max_j half_j / m of some center in the sup norm.
SampledParamSet grid_sample(const ParamBox& box, std::size_t m);

/// max_j half_j / m.
double grid_resolution(const ParamBox& box, std::size_t m);

struct Nearest {
  double distance = 0.0;
  std::size_t index = 0;  // lowest index among ties
};

double sup_distance(const Vec& a, const Vec& b);
Nearest distance_to_set(const Vec& p, const std::vector<Vec>& points);
Nearest distance_to_set(const Vec& p, const SampledParamSet& set);

struct ZoomRecord {
  std::size_t k = 0;
  double t = 0.0;
  Vec p_hat;
  ParamBox box;  // box after the update
};

struct ZoomState {
  std::size_t k = 0;
  ParamBox initial;
  ParamBox current_box;  // running intersection Theta(k) ∩ ... ∩ Theta(0)
  Vec half_lengths;      // alpha^k * initial half-lengths, before clipping
  double alpha = 0.5;
  std::vector<ZoomRecord> history;

  static ZoomState start(const ParamBox& theta, double alpha);
};

/// Shrinks the half-lengths by alpha, intersects H(p_hat, delta(k)) with the
/// running box and returns the new m-grid. Throws EmptyIntersection if p_hat
/// lies outside the current box (then the intersection may be empty).
SampledParamSet zoom_update(ZoomState& z, const Vec& p_hat_left_limit, std::size_t m, double t = 0.0);

}  // namespace supobs
