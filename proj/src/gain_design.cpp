#include "supobs/gain_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "supobs/errors.hpp"
#include "supobs/sampling.hpp"

namespace supobs {

LureMatrices LureMatrices::of(const LurePlant& plant, const Vec& p) {
  return LureMatrices{plant.A(p), plant.G(p), plant.C(p), plant.H()};
}

namespace {

void check_dims(const CCLmiData& d, const Mat& a, const Mat& g, const Mat& c, const Mat& h) {
  const Eigen::Index nx = a.rows();
  const Eigen::Index ng = h.rows();
  const Eigen::Index ny = c.rows();
  const bool ok = a.cols() == nx && g.rows() == nx && g.cols() == ng && c.cols() == nx && h.cols() == nx &&
                  d.P.rows() == nx && d.P.cols() == nx && d.M.rows() == ng && d.M.cols() == ng &&
                  d.K.rows() == ng && d.K.cols() == ny && d.L.rows() == nx && d.L.cols() == ny &&
                  d.sector_upper.size() == ng;
  if (!ok) throw Error(Errc::DimensionMismatch, "LMI data and plant matrices have inconsistent shapes");
}

bool is_positive_diagonal(const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i == j ? !(m(i, j) > 0.0) : m(i, j) != 0.0) return false;
    }
  }
  return true;
}

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
double log_uniform(std::mt19937_64& gen, double lo_exp, double hi_exp) {
  return std::pow(10.0, lo_exp + (hi_exp - lo_exp) * uniform01(gen));
}
double standard_normal(std::mt19937_64& gen) {
  // Box-Muller on the portable uniform stream
  const double u1 = std::max(uniform01(gen), 0x1.0p-53);
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct Verdict {
  bool certified = false;
  double max_eig = 0.0;
  double equilibrated = 0.0;
  double tol = 0.0;
};

Verdict evaluate(const CCLmiData& d, const LureMatrices& mats, double min_margin) {
  Verdict v;
  if (!d.P.allFinite() || !d.M.allFinite() || !is_positive_diagonal(d.M)) return v;
  if (!(d.lmi_nu > 0.0) || !(d.lmi_mu > 0.0)) return v;
  Eigen::LLT<Mat> llt(d.P);
  if (llt.info() != Eigen::Success) return v;
  const Mat lmi = assemble_cc_lmi(d, mats);
  v.equilibrated = equilibrated_max_eigenvalue(lmi);
  if (!(v.equilibrated < -min_margin)) return v;
  v.max_eig = max_eigenvalue(lmi);
  v.tol = default_lmi_tolerance(lmi);
  v.certified = v.max_eig <= v.tol;
  return v;
}

std::optional<Mat> injection_for(const LureMatrices& mats, const CCSearchConfig& cfg, std::mt19937_64& gen,
                                 bool hurwitz, bool observable) {
  const Eigen::Index nx = mats.A.rows();
  const Eigen::Index ny = mats.C.rows();
  if (hurwitz) return Mat(Mat::Zero(nx, ny));
  if (!cfg.allow_output_injection || !observable) return std::nullopt;
  const CVec ev = eigenvalues(mats.A);
  const double radius = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double s = radius * log_uniform(gen, -0.5, 0.5);
  std::vector<Complex> targets;
  for (Eigen::Index j = 0; j < nx; ++j) {
    const double spread = 0.5 + static_cast<double>(j) / static_cast<double>(nx) + 0.1 * uniform01(gen);
    targets.emplace_back(-s * spread, 0.0);
  }
  try {
    return stabilizing_output_injection(mats.A, mats.C, targets);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

Mat assemble_cc_lmi(const CCLmiData& d, const Mat& a, const Mat& g, const Mat& c, const Mat& h) {
  check_dims(d, a, g, c, h);
  for (Eigen::Index k = 0; k < d.sector_upper.size(); ++k) {
    if (d.sector_upper(k) == 0.0) throw Error(Errc::ZeroSectorBound, "sector bound b_gamma must be nonzero");
  }
  const Eigen::Index nx = a.rows();
  const Eigen::Index ng = h.rows();
  const Mat acl = a + d.L * c;
  const Mat aa = d.P * acl + acl.transpose() * d.P + d.lmi_nu * Mat::Identity(nx, nx);
  const Mat bb = d.P * g + (h + d.K * c).transpose() * d.M;
  const Mat ee = -2.0 * d.M * d.sector_upper.cwiseInverse().asDiagonal();

  Mat s = Mat::Zero(2 * nx + ng, 2 * nx + ng);
  s.block(0, 0, nx, nx) = 0.5 * (aa + aa.transpose());
  s.block(0, nx, nx, ng) = bb;
  s.block(nx, 0, ng, nx) = bb.transpose();
  s.block(nx, nx, ng, ng) = 0.5 * (ee + ee.transpose());
  const Mat ps = 0.5 * (d.P + d.P.transpose());
  s.block(0, nx + ng, nx, nx) = ps;
  s.block(nx + ng, 0, nx, nx) = ps;
  s.block(nx + ng, nx + ng, nx, nx) = -d.lmi_mu * Mat::Identity(nx, nx);
  return s;
}

Mat assemble_cc_lmi(const CCLmiData& data, const LureMatrices& m) { return assemble_cc_lmi(data, m.A, m.G, m.C, m.H); }

double default_lmi_tolerance(const Mat& lmi) { return 1e-7 * std::max(1.0, max_abs(lmi)); }

Assumption2Certificate CCCertificate::assumption2() const {
  return Assumption2Certificate::from_quadratic(data.P, data.lmi_nu);
}

CCCertificate verify_cc_gains(const CCLmiData& data, const LureMatrices& mats, std::optional<double> tol) {
  if (data.P.rows() != data.P.cols() || !data.P.allFinite()) throw Error(Errc::BadP, "P must be square and finite");
  const double asym = max_abs(data.P - data.P.transpose());
  if (asym > 1e-12 * std::max(1.0, max_abs(data.P))) throw Error(Errc::BadP, "P is not symmetric");
  Eigen::LLT<Mat> llt(0.5 * (data.P + data.P.transpose()));
  if (llt.info() != Eigen::Success || !(min_eigenvalue(0.5 * (data.P + data.P.transpose())) > 0.0)) {
    throw Error(Errc::BadP, "P is not positive definite");
  }
  if (data.M.rows() != data.M.cols() || !is_positive_diagonal(data.M)) {
    throw Error(Errc::BadM, "M must be diagonal with positive entries");
  }
  if (!(data.lmi_nu > 0.0) || !(data.lmi_mu > 0.0)) throw Error(Errc::InvalidArgument, "nu and mu must be > 0");

  const Mat lmi = assemble_cc_lmi(data, mats);
  CCCertificate cert;
  cert.data = data;
  cert.tol = tol.value_or(default_lmi_tolerance(lmi));
  cert.max_eig = max_eigenvalue(lmi);
  cert.equilibrated_max_eig = equilibrated_max_eigenvalue(lmi);
  cert.source = "verified";
  if (!(cert.max_eig <= cert.tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "LMI max eigenvalue " << cert.max_eig << " exceeds tolerance " << cert.tol;
    throw Error(Errc::NotNSD, os.str());
  }
  return cert;
}

CCCertificate synthesize_cc_gains(const LureMatrices& mats, const Vec& sector_upper, const CCSearchConfig& cfg) {
  const Eigen::Index nx = mats.A.rows();
  const Eigen::Index ny = mats.C.rows();
  const Eigen::Index ng = mats.H.rows();
  if (sector_upper.size() != ng) throw Error(Errc::DimensionMismatch, "one sector bound per gamma component");
  for (Eigen::Index k = 0; k < ng; ++k) {
    if (sector_upper(k) == 0.0) throw Error(Errc::ZeroSectorBound, "sector bound b_gamma must be nonzero");
  }

  std::size_t index = 0;
  auto accept = [&](const CCLmiData& d, const char* source) -> std::optional<CCCertificate> {
    const Verdict v = evaluate(d, mats, cfg.min_margin);
    if (!v.certified) return std::nullopt;
    CCCertificate c;
    c.data = d;
    c.max_eig = v.max_eig;
    c.equilibrated_max_eig = v.equilibrated;
    c.tol = v.tol;
    c.source = source;
    c.candidate = index;
    return c;
  };

  for (const CCLmiData& w : cfg.warm_starts) {
    if (index >= cfg.budget) break;
    CCLmiData d = w;
    d.sector_upper = sector_upper;
    bool shapes = d.P.rows() == nx && d.M.rows() == ng && d.K.rows() == ng && d.K.cols() == ny &&
                  d.L.rows() == nx && d.L.cols() == ny;
    if (shapes) {
      if (auto c = accept(d, "warm-start")) return *c;
    }
    ++index;
  }

  std::mt19937_64 gen(cfg.seed);
  const bool hurwitz = is_hurwitz(mats.A);
  const bool observable = observability_rank(mats.A, mats.C) == static_cast<std::size_t>(nx);
  const std::optional<Mat> l0 = injection_for(mats, cfg, gen, hurwitz, observable);
  const Mat lgrid = l0.value_or(Mat::Zero(nx, ny));

  // fixed grid around unit scalings
  std::vector<Mat> p_grid{Mat::Identity(nx, nx)};
  try {
    p_grid.push_back(solve_lyapunov(mats.A + lgrid * mats.C, 1.0));
  } catch (const Error&) {
  }
  for (const Mat& p : p_grid) {
    for (double m : {1.0, 0.1, 10.0}) {
      for (double nu : {1.0, 0.1}) {
        for (double mu : {10.0, 100.0, 1000.0}) {
          if (index >= cfg.budget) break;
          CCLmiData d{p, m * Mat::Identity(ng, ng), Mat::Zero(ng, ny), lgrid, nu, mu, sector_upper};
          if (auto c = accept(d, "grid")) return *c;
          ++index;
        }
      }
    }
  }

  while (index < cfg.budget) {
    const std::optional<Mat> l = injection_for(mats, cfg, gen, hurwitz, observable);
    Vec w(nx);
    for (Eigen::Index j = 0; j < nx; ++j) w(j) = j == 0 ? 1.0 : log_uniform(gen, -14.0, 0.0);
    Vec m(ng);
    for (Eigen::Index k = 0; k < ng; ++k) m(k) = log_uniform(gen, -14.0, 0.0);
    const double mu_scale = log_uniform(gen, 0.0, 3.0);
    Mat k = Mat::Zero(ng, ny);
    if (cfg.allow_k && uniform01(gen) < 0.5) {
      const double ks = log_uniform(gen, -3.0, 0.0);
      for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = ks * standard_normal(gen);
    }
    if (l) {
      try {
        const Mat p = solve_lyapunov(mats.A + *l * mats.C, Mat(w.asDiagonal()));
        const double nu = 0.5 * w.minCoeff();
        const double lmax = max_eigenvalue(p);
        CCLmiData d{p, Mat(m.asDiagonal()), k, *l, nu, mu_scale * lmax * lmax / nu, sector_upper};
        if (auto c = accept(d, "random")) return *c;
      } catch (const Error&) {
      }
    }
    ++index;
  }

  std::ostringstream os;
  os << "no certified candidate in " << cfg.budget << " evaluations";
  throw Error(Errc::SynthesisBudgetExhausted, os.str());
}

LuenbergerDesign design_luenberger(const Mat& a, const Mat& c, std::span<const Complex> targets, double nu) {
  if (a.rows() != a.cols()) throw Error(Errc::NonSquare, "A must be square");
  if (c.cols() != a.rows()) throw Error(Errc::DimensionMismatch, "C columns must equal A rows");
  if (observability_rank(a, c) < static_cast<std::size_t>(a.rows())) {
    throw Error(Errc::NotObservable, "observability matrix is rank deficient");
  }
  LuenbergerDesign out;
  out.nu = nu;
  out.L = stabilizing_output_injection(a, c, targets);
  out.P = solve_lyapunov(a + out.L * c, nu);
  out.certificate = Assumption2Certificate::from_quadratic(out.P, nu);
  return out;
}

void GainTable::add(Vec p, CCLmiData d) {
  parameters.push_back(std::move(p));
  entries.push_back(std::move(d));
}

std::vector<std::size_t> GainTable::nearest_order(const Vec& p) const {
  std::vector<std::size_t> idx(entries.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> dist(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) dist[i] = sup_distance(p, parameters[i]);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  return idx;
}

}  // namespace supobs
