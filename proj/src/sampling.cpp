#include "supobs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "supobs/errors.hpp"

namespace supobs {

ParamBox::ParamBox(Vec c, Vec h) : center(std::move(c)), half_lengths(std::move(h)) {
  if (center.size() != half_lengths.size()) throw Error(Errc::DimensionMismatch, "center/half-length sizes differ");
  if (!center.allFinite() || !half_lengths.allFinite() || (half_lengths.array() < 0.0).any()) {
    throw Error(Errc::InvalidArgument, "half-lengths must be finite and >= 0");
  }
}

ParamBox ParamBox::from_bounds(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size()) throw Error(Errc::DimensionMismatch, "bound sizes differ");
  if ((upper.array() < lower.array()).any()) throw Error(Errc::InvalidArgument, "lower bound exceeds upper bound");
  return ParamBox(0.5 * (lower + upper), 0.5 * (upper - lower));
}

ParamBox ParamBox::hypercube(const Vec& c, double radius) {
  return ParamBox(c, Vec::Constant(c.size(), radius));
}

double ParamBox::volume() const {
  double v = 1.0;
  for (Eigen::Index j = 0; j < half_lengths.size(); ++j) v *= 2.0 * half_lengths(j);
  return v;
}

bool ParamBox::contains(const Vec& p) const {
  if (p.size() != center.size()) throw Error(Errc::DimensionMismatch, "point dimension differs from box");
  return ((p - center).cwiseAbs().array() <= half_lengths.array()).all();
}

bool ParamBox::contains(const ParamBox& inner) const {
  if (inner.dim() != dim()) throw Error(Errc::DimensionMismatch, "box dimensions differ");
  return (inner.lower().array() >= lower().array()).all() && (inner.upper().array() <= upper().array()).all();
}

std::optional<ParamBox> ParamBox::intersect(const ParamBox& other) const {
  if (other.dim() != dim()) throw Error(Errc::DimensionMismatch, "box dimensions differ");
  const Vec lo = lower().cwiseMax(other.lower());
  const Vec hi = upper().cwiseMin(other.upper());
  if ((hi.array() < lo.array()).any()) return std::nullopt;
  return ParamBox::from_bounds(lo, hi);
}

SampledParamSet grid_sample(const ParamBox& box, std::size_t m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be >= 1");
  const std::size_t np = box.dim();
  std::size_t count = 1;
  for (std::size_t j = 0; j < np; ++j) count *= m;

  // per-dimension centers c_j - d_j + (2i - 1) d_j / m, i = 1..m
  std::vector<std::vector<double>> axis(np);
  for (std::size_t j = 0; j < np; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = box.center(jj);
    const double d = box.half_lengths(jj);
    for (std::size_t i = 1; i <= m; ++i) {
      axis[j].push_back(c - d + static_cast<double>(2 * i - 1) * d / static_cast<double>(m));
    }
  }

  SampledParamSet out;
  out.parent = box;
  out.m = m;
  out.points.reserve(count);
  std::vector<std::size_t> idx(np, 0);
  for (std::size_t n = 0; n < count; ++n) {
    Vec p(static_cast<Eigen::Index>(np));
    for (std::size_t j = 0; j < np; ++j) p(static_cast<Eigen::Index>(j)) = axis[j][idx[j]];
    out.points.push_back(std::move(p));
    for (std::size_t j = np; j-- > 0;) {
      if (++idx[j] < m) break;
      idx[j] = 0;
    }
  }
  return out;
}

double grid_resolution(const ParamBox& box, std::size_t m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be >= 1");
  return box.half_lengths.size() ? box.half_lengths.maxCoeff() / static_cast<double>(m) : 0.0;
}

double sup_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "vector sizes differ");
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

Nearest distance_to_set(const Vec& p, const std::vector<Vec>& points) {
  if (points.empty()) throw Error(Errc::EmptySet, "sampled parameter set is empty");
  Nearest best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = sup_distance(p, points[i]);
    if (d < best.distance) best = {d, i};
  }
  return best;
}

Nearest distance_to_set(const Vec& p, const SampledParamSet& set) { return distance_to_set(p, set.points); }

ZoomState ZoomState::start(const ParamBox& theta, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "zoom factor alpha must lie in (0,1)");
  ZoomState z;
  z.initial = theta;
  z.current_box = theta;
  z.half_lengths = theta.half_lengths;
  z.alpha = alpha;
  return z;
}

SampledParamSet zoom_update(ZoomState& z, const Vec& p_hat, std::size_t m, double t) {
  z.half_lengths *= z.alpha;
  const ParamBox ball(p_hat, z.half_lengths);
  auto next = ball.intersect(z.current_box);
  if (!next) throw Error(Errc::EmptyIntersection, "zoomed box does not meet the running intersection");
  // clamp against round-off so nesting holds exactly
  const Vec lo = next->lower().cwiseMax(z.current_box.lower());
  const Vec hi = next->upper().cwiseMin(z.current_box.upper());
  ParamBox box = ParamBox::from_bounds(lo, hi);
  // the midpoint/half-length form can round outward by an ulp
  for (int i = 0; i < 8 && !z.current_box.contains(box); ++i) {
    box.half_lengths *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  }
  z.current_box = box;
  ++z.k;
  z.history.push_back(ZoomRecord{z.k, t, p_hat, box});
  return grid_sample(box, m);
}

}  // namespace supobs
