#include "nhrm/bloch.hpp"

#include <algorithm>
#include <cmath>

namespace nhrm {

void ModelParams::validate_core() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda must be positive and finite");
  if (!std::isfinite(delta)) throw ConfigError("delta must be finite");
  if (!std::isfinite(V)) throw ConfigError("V must be finite");
  if (N < 1) throw ConfigError("N must be a positive integer");
}

void ModelParams::validate() const {
  validate_core();
  if (!(delta >= -1.0 && delta <= 1.0))
    throw ConfigError("delta must lie in [-1, 1]");
}

Complex gamma(double k, double delta) {
  return 0.5 * ((1.0 - delta) + (1.0 + delta) * std::exp(Complex(0.0, k)));
}

Complex gamma_dk(double k, double delta) {
  return 0.5 * (1.0 + delta) * Complex(0.0, 1.0) * std::exp(Complex(0.0, k));
}

Complex gamma_ddelta(double k, double /*delta*/) {
  return 0.5 * (std::exp(Complex(0.0, k)) - 1.0);
}

BlochMatrix bloch_matrix(double k, const ModelParams& p) {
  p.validate_core();
  BlochMatrix m;
  m.k = k;
  m.entries << Complex(p.V, 0.0), p.lambda * gamma(-k, p.delta),
      gamma(k, p.delta) / p.lambda, Complex(-p.V, 0.0);
  return m;
}

std::pair<double, double> dispersion(double k, const ModelParams& p) {
  const double e = std::hypot(std::abs(gamma(k, p.delta)), p.V);
  return {-e, +e};
}

FieldComponents field_components(double k, const ModelParams& p) {
  const Complex gk = gamma(k, p.delta);
  const Complex gm = gamma(-k, p.delta);
  FieldComponents f;
  f.Bx = 0.5 * (p.lambda * gm + gk / p.lambda);
  f.By = Complex(0.0, 0.5) * (p.lambda * gm - gk / p.lambda);
  f.Bz = p.V;
  f.B = std::hypot(std::abs(gk), p.V);
  return f;
}

Angles angles(double k, const ModelParams& p) {
  p.validate_core();
  const Complex g = gamma(k, p.delta);
  const double ag = std::abs(g);
  const double B = std::hypot(ag, p.V);
  if (ag < kPoleTol * std::max(1.0, std::abs(p.V))) {
    if (std::abs(p.V) < kPoleTol)
      throw GapClosed("angles: gap closed, |gamma| and |V| both vanish");
    throw IndefinitePhase("angles: phi indefinite at gamma = 0 with V != 0");
  }
  Angles a;
  a.theta = std::acos(std::clamp(p.V / B, -1.0, 1.0));
  a.phi = Complex(std::arg(g), std::log(p.lambda));
  return a;
}

namespace {

// Gauges singular at the north pole (gamma = 0, V > 0); the other two are
// singular at the south pole.
bool pole_is_north(Band band, Gauge gauge) {
  return (band == Band::lower) == (gauge == Gauge::I);
}

}  // namespace

Gauge regular_gauge(double V, Band band) {
  const bool avoid_north = V >= 0.0;
  if (band == Band::lower) return avoid_north ? Gauge::II : Gauge::I;
  return avoid_north ? Gauge::I : Gauge::II;
}

BiorthPair eigenpair(double k, const ModelParams& p, Band band, Gauge gauge) {
  p.validate_core();
  const Complex g = gamma(k, p.delta);
  const double ag = std::abs(g);
  const double B = std::hypot(ag, p.V);
  if (B < kPoleTol) throw GapClosed("eigenpair: band degeneracy");
  if (ag < kPoleTol * std::max(1.0, std::abs(p.V))) {
    if (pole_is_north(band, gauge) == (p.V > 0.0))
      throw GaugeSingular("eigenpair: requested gauge at its singular pole");
  }

  const double half = 0.5 * std::acos(std::clamp(p.V / B, -1.0, 1.0));
  const double c = std::cos(half);
  const double s = std::sin(half);
  // Unit phase of gamma; the arbitrary value at gamma = 0 multiplies an
  // exactly vanishing amplitude in the regular gauge.
  const Complex u = (ag > 0.0) ? g / ag : Complex(1.0, 0.0);
  const Complex eiphi = u / p.lambda;        // e^{i phi}
  const Complex eiphi_star = u * p.lambda;   // e^{i conj(phi)}

  BiorthPair bp;
  bp.band = band;
  bp.gauge = gauge;
  bp.eigenvalue = band_sign(band) * B;
  if (band == Band::upper) {
    bp.right << Complex(c, 0.0), s * eiphi;
    bp.left << Complex(c, 0.0), s * eiphi_star;
  } else {
    bp.right << Complex(-s, 0.0), c * eiphi;
    bp.left << Complex(-s, 0.0), c * eiphi_star;
  }
  if (gauge == Gauge::II) {
    const Complex ph = std::conj(u);  // e^{-i Re phi}
    bp.right *= ph;
    bp.left *= ph;
  }
  return bp;
}

BiorthPair eigenpair_auto(double k, const ModelParams& p, Band band) {
  return eigenpair(k, p, band, regular_gauge(p.V, band));
}

}  // namespace nhrm
