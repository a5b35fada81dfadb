#include "supobs/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "supobs/errors.hpp"

namespace supobs {

namespace {

void check_shape(const Mat& m, std::size_t rows, std::size_t cols, const char* name) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    std::ostringstream os;
    os << name << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols;
    throw Error(Errc::DimensionMismatch, os.str());
  }
}

}  // namespace

LinearPlant::LinearPlant(std::size_t nx, std::size_t nu, std::size_t ny, std::size_t np,
                         MatOfParam a_of_p, MatOfParam b_of_p, MatOfParam c_of_p)
    : nx_(nx), nu_(nu), ny_(ny), np_(np), a_(std::move(a_of_p)), b_(std::move(b_of_p)), c_(std::move(c_of_p)) {
  if (!a_ || !b_ || !c_) throw Error(Errc::InvalidArgument, "linear plant needs A, B and C callbacks");
}

Mat LinearPlant::A(const Vec& p) const {
  Mat m = a_(p);
  check_shape(m, nx_, nx_, "A(p)");
  return m;
}

Mat LinearPlant::B(const Vec& p) const {
  Mat m = b_(p);
  check_shape(m, nx_, nu_, "B(p)");
  return m;
}

Mat LinearPlant::C(const Vec& p) const {
  Mat m = c_(p);
  check_shape(m, ny_, nx_, "C(p)");
  return m;
}

void LinearPlant::f(const Vec& x, const Vec& p, const Vec& u, Vec& dx) const {
  dx.noalias() = a_(p) * x;
  dx.noalias() += b_(p) * u;
}

void LinearPlant::h(const Vec& x, const Vec& p, Vec& y) const { y.noalias() = c_(p) * x; }

LurePlant::LurePlant(Parts parts) : parts_(std::move(parts)) {
  if (!parts_.a_of_p || !parts_.g_of_p || !parts_.b_of_p || !parts_.c_of_p || !parts_.phi) {
    throw Error(Errc::InvalidArgument, "Lure plant needs A, G, B, C and phi callbacks");
  }
  check_shape(parts_.h, parts_.gamma.size(), parts_.nx, "H");
  for (const auto& g : parts_.gamma) {
    if (!g.fn) throw Error(Errc::InvalidArgument, "missing gamma component");
    if (!(g.lower <= g.upper)) throw Error(Errc::InvalidArgument, "sector lower bound exceeds upper bound");
  }
}

Vec LurePlant::gamma(const Vec& v) const {
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = parts_.gamma[static_cast<std::size_t>(k)].fn(v(k));
  return out;
}

Vec LurePlant::sector_upper() const {
  Vec b(static_cast<Eigen::Index>(parts_.gamma.size()));
  for (std::size_t k = 0; k < parts_.gamma.size(); ++k) b(static_cast<Eigen::Index>(k)) = parts_.gamma[k].upper;
  return b;
}

Vec LurePlant::sector_lower() const {
  Vec a(static_cast<Eigen::Index>(parts_.gamma.size()));
  for (std::size_t k = 0; k < parts_.gamma.size(); ++k) a(static_cast<Eigen::Index>(k)) = parts_.gamma[k].lower;
  return a;
}

void LurePlant::f(const Vec& x, const Vec& p, const Vec& u, Vec& dx) const {
  const Mat c = parts_.c_of_p(p);
  const Vec y = c * x;
  dx.noalias() = parts_.a_of_p(p) * x;
  dx.noalias() += parts_.g_of_p(p) * gamma(parts_.h * x);
  dx.noalias() += parts_.b_of_p(p) * parts_.phi(u, y);
}

void LurePlant::h(const Vec& x, const Vec& p, Vec& y) const { y.noalias() = parts_.c_of_p(p) * x; }

double sector_slope_violation(const LurePlant& plant, double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw Error(Errc::InvalidArgument, "need >= 2 points on a nonempty interval");
  double worst = 0.0;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (const auto& g : plant.gamma_components()) {
    for (std::size_t i = 0; i + 1 < points; ++i) {
      const double v = lo + step * static_cast<double>(i);
      const double slope = (g.fn(v + step) - g.fn(v)) / step;
      worst = std::max({worst, g.lower - slope, slope - g.upper});
    }
  }
  return worst;
}

void JansenRitParams::validate() const {
  for (double v : {a, b, c1, c2, c3, c4, e0, v0, r}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::ConfigError, "Jansen-Rit constants must be positive");
  }
}

double sigmoid(double v, const JansenRitParams& params) {
  return 2.0 * params.e0 / (1.0 + std::exp(params.r * (params.v0 - v)));
}

double sigmoid_max_slope(const JansenRitParams& params) { return 0.5 * params.e0 * params.r; }

std::shared_ptr<const LurePlant> jansen_rit_plant(const JansenRitParams& params) {
  params.validate();
  const JansenRitParams k = params;

  auto rate_block = [](double rate) {
    Mat blk(2, 2);
    blk << 0.0, 1.0, -rate * rate, -2.0 * rate;
    return blk;
  };
  Mat a = Mat::Zero(6, 6);
  a.block(0, 0, 2, 2) = rate_block(k.a);
  a.block(2, 2, 2, 2) = rate_block(k.a);
  a.block(4, 4, 2, 2) = rate_block(k.b);

  Mat c = Mat::Zero(1, 6);
  c(0, 2) = 1.0;
  c(0, 4) = -1.0;

  Mat h = Mat::Zero(2, 6);
  h(0, 0) = k.c1;
  h(1, 0) = k.c3;

  LurePlant::Parts parts;
  parts.nx = 6;
  parts.nu = 1;
  parts.ny = 1;
  parts.np = 2;
  parts.a_of_p = [a](const Vec&) { return a; };
  parts.c_of_p = [c](const Vec&) { return c; };
  parts.g_of_p = [k](const Vec& p) {
    Mat g = Mat::Zero(6, 2);
    g(3, 0) = p(0) * k.a * k.c2;
    g(5, 1) = p(1) * k.b * k.c4;
    return g;
  };
  parts.b_of_p = [k](const Vec& p) {
    Mat b = Mat::Zero(6, 2);
    b(1, 0) = p(0) * k.a;
    b(3, 1) = p(0) * k.a;
    return b;
  };
  parts.h = h;
  const double slope = sigmoid_max_slope(k);
  auto s = [k](double v) { return sigmoid(v, k); };
  parts.gamma = {SectorComponent{s, 0.0, slope}, SectorComponent{s, 0.0, slope}};
  parts.phi = [k](const Vec& u, const Vec& y) {
    Vec out(2);
    out << sigmoid(y(0), k), u(0);
    return out;
  };
  return std::make_shared<const LurePlant>(std::move(parts));
}

std::shared_ptr<const LinearPlant> scalar_linear_plant() {
  return std::make_shared<const LinearPlant>(
      1, 1, 1, 1, [](const Vec& p) { return Mat::Constant(1, 1, -p(0)); },
      [](const Vec&) { return Mat::Constant(1, 1, 1.0); }, [](const Vec&) { return Mat::Constant(1, 1, 1.0); });
}

void BoundednessMonitor::check(const Vec& x) {
  const double m = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  if (!(m <= threshold)) {
    std::ostringstream os;
    os << "|x|_inf = " << m << " exceeds guard " << threshold;
    throw Error(Errc::TrajectoryBlowUp, os.str());
  }
  max_abs_seen = std::max(max_abs_seen, m);
}

}  // namespace supobs
