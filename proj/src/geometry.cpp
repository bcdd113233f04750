#include "nhrm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhrm/parallel.hpp"

namespace nhrm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLoopTol = 1e-9;

double wrap_2pi(double x) {
  x = std::fmod(x, kTwoPi);
  return x < 0.0 ? x + kTwoPi : x;
}

double segment_distance_to_origin(const std::array<double, 2>& a,
                                  const std::array<double, 2>& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(-(a[0] * dx + a[1] * dy) / len2, 0.0, 1.0);
  return std::hypot(a[0] + t * dx, a[1] + t * dy);
}

}  // namespace

PumpLoop PumpLoop::circle(double delta_c, double V_c, double r, int orientation,
                          int nq) {
  if (!(r > 0.0)) throw ConfigError("loop radius must be positive");
  if (orientation != 1 && orientation != -1)
    throw ConfigError("loop orientation must be +1 or -1");
  if (nq < 4) throw ConfigError("loop discretization nq must be at least 4");
  PumpLoop l;
  l.kind_ = Kind::circle;
  l.delta_c_ = delta_c;
  l.V_c_ = V_c;
  l.r_ = r;
  l.orient_ = orientation;
  l.nq_ = nq;
  return l;
}

PumpLoop PumpLoop::polyline(std::vector<std::array<double, 2>> vertices,
                            int nq) {
  if (vertices.size() >= 2 && vertices.front() == vertices.back())
    vertices.pop_back();
  if (vertices.size() < 3)
    throw ConfigError("polyline loop needs at least 3 distinct vertices");
  if (nq < 4) throw ConfigError("loop discretization nq must be at least 4");
  PumpLoop l;
  l.kind_ = Kind::polyline;
  l.verts_ = std::move(vertices);
  l.nq_ = nq;
  return l;
}

LoopPoint PumpLoop::at(double q) const {
  q = wrap_2pi(q);
  LoopPoint lp;
  if (kind_ == Kind::circle) {
    const double psi = orient_ * q;
    lp.delta = delta_c_ + r_ * std::cos(psi);
    lp.V = V_c_ + r_ * std::sin(psi);
    lp.ddelta_dq = -r_ * std::sin(psi) * orient_;
    lp.dV_dq = r_ * std::cos(psi) * orient_;
    return lp;
  }
  const int m = static_cast<int>(verts_.size());
  const double span = kTwoPi / m;
  const int i = std::min(static_cast<int>(q / span), m - 1);
  const double s = (q - i * span) / span;
  const auto& a = verts_[i];
  const auto& b = verts_[(i + 1) % m];
  lp.delta = a[0] + s * (b[0] - a[0]);
  lp.V = a[1] + s * (b[1] - a[1]);
  lp.ddelta_dq = (b[0] - a[0]) / span;
  lp.dV_dq = (b[1] - a[1]) / span;
  return lp;
}

double PumpLoop::min_distance_to_origin() const {
  if (kind_ == Kind::circle)
    return std::abs(std::hypot(delta_c_, V_c_) - r_);
  double d = std::numeric_limits<double>::infinity();
  const int m = static_cast<int>(verts_.size());
  for (int i = 0; i < m; ++i)
    d = std::min(d, segment_distance_to_origin(verts_[i], verts_[(i + 1) % m]));
  return d;
}

std::vector<PumpLoop::SeamCrossing> PumpLoop::seam_crossings() const {
  std::vector<SeamCrossing> out;
  if (kind_ == Kind::circle) {
    const double m = -V_c_ / r_;
    if (std::abs(m) >= 1.0 - 1e-12) return out;  // no transversal crossing
    const double psi1 = std::asin(m);
    for (double psi : {psi1, std::numbers::pi - psi1}) {
      SeamCrossing c;
      c.q = wrap_2pi(orient_ * psi);
      c.delta = delta_c_ + r_ * std::cos(psi);
      c.dV_dq = r_ * std::cos(psi) * orient_;
      out.push_back(c);
    }
    return out;
  }
  const int m = static_cast<int>(verts_.size());
  const double span = kTwoPi / m;
  for (int i = 0; i < m; ++i) {
    const auto& a = verts_[i];
    const auto& b = verts_[(i + 1) % m];
    if (a[1] == 0.0)
      throw ConfigError("polyline vertex lies exactly on the V = 0 seam");
    if (a[1] * b[1] < 0.0) {
      const double s = a[1] / (a[1] - b[1]);
      SeamCrossing c;
      c.q = (i + s) * span;
      c.delta = a[0] + s * (b[0] - a[0]);
      c.dV_dq = (b[1] - a[1]) / span;
      out.push_back(c);
    }
  }
  return out;
}

namespace {

// First derivatives of cos(theta) and Re phi = arg gamma at one point.
struct PointDerivs {
  double B = 0.0;
  double cos_theta = 0.0;
  double dcos_k = 0.0, dcos_q = 0.0;
  double dphi_k = 0.0, dphi_q = 0.0;
};

PointDerivs point_derivs(double k, const LoopPoint& lp) {
  const Complex g = gamma(k, lp.delta);
  const Complex gk = gamma_dk(k, lp.delta);
  const Complex gq = gamma_ddelta(k, lp.delta) * lp.ddelta_dq;
  const double ag2 = std::norm(g);
  PointDerivs d;
  d.B = std::sqrt(ag2 + lp.V * lp.V);
  if (d.B < kPoleTol) throw GapClosed("geometry: point at the band degeneracy");
  if (ag2 == 0.0)
    throw IndefinitePhase("geometry: arg gamma indefinite at gamma = 0");
  const double B3 = d.B * d.B * d.B;
  d.cos_theta = lp.V / d.B;
  const double re_gk = (std::conj(g) * gk).real();
  const double re_gq = (std::conj(g) * gq).real();
  d.dcos_k = -lp.V * re_gk / B3;
  d.dcos_q = (lp.dV_dq * ag2 - lp.V * re_gq) / B3;
  d.dphi_k = (std::conj(g) * gk).imag() / ag2;
  d.dphi_q = (std::conj(g) * gq).imag() / ag2;
  return d;
}

double connection_value(const PointDerivs& d, Band band, Gauge gauge,
                        LoopDirection dir) {
  const double dphi = (dir == LoopDirection::k) ? d.dphi_k : d.dphi_q;
  double coef = (band == Band::lower) ? 0.5 * (1.0 + d.cos_theta)
                                      : 0.5 * (1.0 - d.cos_theta);
  if (gauge == Gauge::II) coef -= 1.0;
  return coef * dphi;
}

ModelParams params_at(const ModelParams& p0, const LoopPoint& lp) {
  ModelParams p = p0;
  p.delta = lp.delta;
  p.V = lp.V;
  return p;
}

void check_loop(const PumpLoop& loop) {
  const double d = loop.min_distance_to_origin();
  if (d < kLoopTol)
    throw LoopThroughDegeneracy(
        "loop passes through the degeneracy point; min distance " +
        std::to_string(d));
}

}  // namespace

Complex berry_connection(double k, double q, const PumpLoop& loop,
                         const ModelParams& p0, Band band, Gauge gauge,
                         LoopDirection direction) {
  const LoopPoint lp = loop.at(q);
  (void)eigenpair(k, params_at(p0, lp), band, gauge);  // gauge/degeneracy guard
  return Complex(connection_value(point_derivs(k, lp), band, gauge, direction),
                 0.0);
}

Complex berry_curvature(double k, double q, const PumpLoop& loop,
                        const ModelParams& p0, Band band) {
  p0.validate_core();
  const LoopPoint lp = loop.at(q);
  const Complex g = gamma(k, lp.delta);
  const Complex gk = gamma_dk(k, lp.delta);
  const Complex gq = gamma_ddelta(k, lp.delta) * lp.ddelta_dq;
  const double B = std::sqrt(std::norm(g) + lp.V * lp.V);
  if (B < kPoleTol)
    throw GapClosed("berry_curvature: point at the band degeneracy");
  const double B3 = B * B * B;
  // d_k A_q - d_q A_k for the lower band; smooth in gamma even at the poles.
  const double lower = -(lp.V * (std::conj(gk) * gq).imag() +
                         lp.dV_dq * (std::conj(g) * gk).imag()) /
                       (2.0 * B3);
  return Complex(band == Band::lower ? lower : -lower, 0.0);
}

CurvatureGrid curvature_grid(const PumpLoop& loop, const ModelParams& p0,
                             Band band, int nk, int nq) {
  if (nk < 2 || nq < 2) throw ConfigError("curvature grid needs nk, nq >= 2");
  CurvatureGrid grid;
  grid.nk = nk;
  grid.nq = nq;
  grid.dk = kTwoPi / nk;
  grid.dq = kTwoPi / nq;
  grid.omega.resize(static_cast<size_t>(nk) * nq);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nq; ++j)
      grid.at(i, j) = berry_curvature(i * grid.dk, j * grid.dq, loop, p0, band);
  return grid;
}

ChernLineResult chern_line_integral(const PumpLoop& loop,
                                    const ModelParams& p0, Band band, int nq,
                                    int nk) {
  p0.validate_core();
  if (nk < 8) throw ConfigError("chern_line_integral needs nk >= 8");
  if (nq < 4) throw ConfigError("chern_line_integral needs nq >= 4");
  check_loop(loop);

  // The mismatch A_I - A_II integrated along each seam k-circle, weighted by
  // the crossing direction. Gauge I covers the half-plane avoiding its pole,
  // so the two bands orient the seam oppositely.
  const double dk = kTwoPi / nk;
  Complex total(0.0, 0.0);
  for (const auto& cr : loop.seam_crossings()) {
    LoopPoint lp;
    lp.delta = cr.delta;
    lp.V = 0.0;
    Complex seam(0.0, 0.0);
    for (int i = 0; i < nk; ++i) {
      const PointDerivs d = point_derivs(i * dk, lp);
      const double aI = connection_value(d, band, Gauge::I, LoopDirection::k);
      const double aII = connection_value(d, band, Gauge::II, LoopDirection::k);
      seam += Complex(aI - aII, 0.0) * dk;
    }
    total += (cr.dV_dq > 0.0 ? 1.0 : -1.0) * seam;
  }
  const double orient = (band == Band::upper) ? 1.0 : -1.0;
  ChernLineResult r;
  r.value = orient * total.real() / kTwoPi;
  r.imag_residual = std::abs(total.imag()) / kTwoPi;
  return r;
}

int chern_plaquette(const PumpLoop& loop, const ModelParams& p0, Band band,
                    int nk, int nq, int threads) {
  p0.validate_core();
  if (nk < 8 || nq < 8) throw ConfigError("chern_plaquette needs nk, nq >= 8");
  check_loop(loop);

  const double dk = kTwoPi / nk;
  const double dq = kTwoPi / nq;
  std::vector<Eigen::Vector2cd> rights(static_cast<size_t>(nk) * nq);
  std::vector<Eigen::Vector2cd> lefts(rights.size());
  parallel_for(nq, threads, [&](int j) {
    const LoopPoint lp = loop.at(j * dq);
    const ModelParams p = params_at(p0, lp);
    for (int i = 0; i < nk; ++i) {
      const BiorthPair bp = eigenpair_auto(i * dk, p, band);
      rights[static_cast<size_t>(i) * nq + j] = bp.right;
      lefts[static_cast<size_t>(i) * nq + j] = bp.left;
    }
  });

  auto link = [&](int i, int j, int i2, int j2) {
    const Complex u = lefts[static_cast<size_t>(i) * nq + j]
                          .dot(rights[static_cast<size_t>(i2) * nq + j2]);
    const double a = std::abs(u);
    if (a < 1e-10)
      throw GridTooCoarse("chern_plaquette: vanishing link variable");
    return u / a;
  };

  double sum = 0.0;
  for (int i = 0; i < nk; ++i) {
    const int i1 = (i + 1) % nk;
    for (int j = 0; j < nq; ++j) {
      const int j1 = (j + 1) % nq;
      const Complex w = link(i, j, i1, j) * link(i1, j, i1, j1) *
                        std::conj(link(i, j1, i1, j1)) *
                        std::conj(link(i, j, i, j1));
      const double F = std::arg(w);
      if (std::abs(F) > std::numbers::pi - 0.1)
        throw GridTooCoarse("chern_plaquette: plaquette phase near branch cut");
      sum += F;
    }
  }
  return static_cast<int>(std::llround(sum / kTwoPi));
}

double zak_phase(double delta, double V, const ModelParams& p0, Band band,
                 int nk) {
  if (nk < 8) throw ConfigError("zak_phase needs nk >= 8");
  ModelParams p = p0;
  p.delta = delta;
  p.V = V;
  p.validate_core();
  if (std::hypot(delta, V) < kPoleTol)
    throw GapClosed("zak_phase: gap closed at the degeneracy point");

  const double dk = kTwoPi / nk;
  std::vector<BiorthPair> pairs(nk);
  for (int j = 0; j < nk; ++j) pairs[j] = eigenpair_auto(j * dk, p, band);
  Complex prod(1.0, 0.0);
  for (int j = 0; j < nk; ++j)
    prod *= pairs[j].left.dot(pairs[(j + 1) % nk].right);
  double z = std::arg(prod) / kTwoPi;
  z -= std::floor(z);
  return z;
}

double bulk_pump_charge(const PumpLoop& loop, const ModelParams& p0, Band band,
                        int nt, int nk, int threads) {
  p0.validate_core();
  if (nk < 8 || nt < 8) throw ConfigError("bulk_pump_charge needs nt, nk >= 8");
  check_loop(loop);

  const double h = 1e-5;  // central-difference step
  const double dk = kTwoPi / nk;
  const double dq = kTwoPi / nt;
  std::vector<Complex> row_current(nt);

  parallel_for(nt, threads, [&](int j) {
    const double q = j * dq;
    const Gauge gauge = regular_gauge(loop.at(q).V, band);
    auto pair_at = [&](double k, double qq) {
      return eigenpair(k, params_at(p0, loop.at(qq)), band, gauge);
    };
    Complex row(0.0, 0.0);
    for (int i = 0; i < nk; ++i) {
      const double k = i * dk;
      const BiorthPair kp = pair_at(k + h, q), km = pair_at(k - h, q);
      const BiorthPair qp = pair_at(k, q + h), qm = pair_at(k, q - h);
      const Eigen::Vector2cd dphi_k = (kp.right - km.right) / (2.0 * h);
      const Eigen::Vector2cd deta_k = (kp.left - km.left) / (2.0 * h);
      const Eigen::Vector2cd dphi_q = (qp.right - qm.right) / (2.0 * h);
      const Eigen::Vector2cd deta_q = (qp.left - qm.left) / (2.0 * h);
      row += deta_q.dot(dphi_k) - deta_k.dot(dphi_q);
    }
    row_current[j] = Complex(0.0, 1.0) / kTwoPi * row * dk;
  });

  Complex c(0.0, 0.0);
  for (int j = 0; j < nt; ++j) c += row_current[j] * dq;
  return c.real();
}

}  // namespace nhrm
