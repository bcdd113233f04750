#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nhrm/bloch.hpp"

using namespace nhrm;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937 rng(20240811);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ModelParams random_params() {
  ModelParams p;
  p.lambda = uniform(0.3, 3.0);
  p.delta = uniform(-0.95, 0.95);
  p.V = uniform(-1.5, 1.5);
  p.N = 4;
  return p;
}

}  // namespace

TEST_CASE("gamma closed form and conjugation symmetry") {
  CHECK(gamma(0.0, 0.3).real() == Approx(1.0).epsilon(1e-14));
  CHECK(gamma(0.0, 0.3).imag() == Approx(0.0).epsilon(1e-14));
  CHECK(gamma(kPi, 0.5).real() == Approx(-0.5).epsilon(1e-14));
  CHECK(std::abs(gamma(kPi, 0.5).imag()) < 1e-15);
  CHECK(gamma(kPi / 2, 0.0).real() == Approx(0.5));
  CHECK(gamma(kPi / 2, 0.0).imag() == Approx(0.5));
  for (int i = 0; i < 50; ++i) {
    const double k = uniform(-8.0, 8.0), d = uniform(-1.0, 1.0);
    CHECK(std::abs(std::conj(gamma(k, d)) - gamma(-k, d)) < 1e-15);
  }
}

TEST_CASE("gamma derivatives match central differences") {
  const double h = 1e-6;
  for (int i = 0; i < 30; ++i) {
    const double k = uniform(0.0, 2 * kPi), d = uniform(-0.9, 0.9);
    const Complex dk = (gamma(k + h, d) - gamma(k - h, d)) / (2 * h);
    const Complex dd = (gamma(k, d + h) - gamma(k, d - h)) / (2 * h);
    CHECK(std::abs(dk - gamma_dk(k, d)) < 1e-9);
    CHECK(std::abs(dd - gamma_ddelta(k, d)) < 1e-9);
  }
}

TEST_CASE("bloch matrix entries") {
  SUBCASE("Hermitian SSH limit") {
    const BlochMatrix m = bloch_matrix(0.0, {1.0, 0.0, 0.0, 4});
    CHECK(std::abs(m.entries(0, 0)) < 1e-15);
    CHECK(std::abs(m.entries(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(m.entries(1, 0) - 1.0) < 1e-15);
    CHECK(std::abs(m.entries(1, 1)) < 1e-15);
  }
  SUBCASE("entries follow the scalar formulas") {
    // independent scalar evaluation at k = pi, lambda = 2, delta = 0.5, V = 0.3
    const BlochMatrix m = bloch_matrix(kPi, {2.0, 0.5, 0.3, 4});
    CHECK(m.entries(0, 0).real() == Approx(0.3));
    CHECK(m.entries(1, 1).real() == Approx(-0.3));
    CHECK(m.entries(0, 1).real() == Approx(-1.0));   // lambda * gamma(-pi)
    CHECK(m.entries(1, 0).real() == Approx(-0.25));  // gamma(pi) / lambda
    CHECK(std::abs(m.entries(0, 1).imag()) < 1e-15);
    CHECK(std::abs(m.entries(1, 0).imag()) < 1e-15);
  }
  SUBCASE("non-Hermitian for lambda != 1") {
    const BlochMatrix m = bloch_matrix(1.0, {1.5, 0.2, 0.0, 4});
    CHECK(std::abs(m.entries(0, 1) - std::conj(m.entries(1, 0))) > 1e-3);
  }
}

TEST_CASE("dispersion values and reality") {
  const auto [lo0, hi0] = dispersion(kPi, {1.0, 0.0, 0.0, 4});
  CHECK(lo0 == Approx(0.0));
  CHECK(hi0 == Approx(0.0));
  const auto [lo1, hi1] = dispersion(0.0, {2.0, 0.7, 0.0, 4});
  CHECK(lo1 == Approx(-1.0));
  CHECK(hi1 == Approx(1.0));
  const auto [lo2, hi2] = dispersion(kPi, {1.0, 0.6, 0.8, 4});
  CHECK(lo2 == Approx(-1.0));
  CHECK(hi2 == Approx(1.0));

  // formula is real by construction; cross-check the numerically
  // diagonalized matrix stays real too
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const ModelParams p = random_params();
    const double k = uniform(0.0, 2 * kPi);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(bloch_matrix(k, p).entries);
    worst = std::max({worst, std::abs(es.eigenvalues()(0).imag()),
                      std::abs(es.eigenvalues()(1).imag())});
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("field components: identities, example, periodicity") {
  SUBCASE("Hermitian limit is real") {
    for (int i = 0; i < 20; ++i) {
      ModelParams p = random_params();
      p.lambda = 1.0;
      const auto f = field_components(uniform(0.0, 2 * kPi), p);
      CHECK(std::abs(f.Bx.imag()) < 1e-15);
      CHECK(std::abs(f.By.imag()) < 1e-15);
    }
  }
  SUBCASE("scalar example") {
    const auto f = field_components(kPi, {2.0, 0.5, 0.0, 4});
    CHECK(f.Bx.real() == Approx(-0.625));
    CHECK(std::abs(f.Bx.imag()) < 1e-15);
    CHECK(f.By.real() == Approx(0.0).epsilon(1e-14));
    CHECK(f.By.imag() == Approx(-0.375));
    CHECK(f.Bz == Approx(0.0));
  }
  SUBCASE("defining identities and periodicity") {
    for (int i = 0; i < 50; ++i) {
      const ModelParams p = random_params();
      const double k = uniform(0.0, 2 * kPi);
      const auto f = field_components(k, p);
      const Complex gk = gamma(k, p.delta);
      CHECK(std::abs(f.Bx + Complex(0, 1) * f.By - gk / p.lambda) < 1e-14);
      CHECK(std::abs(f.Bx - Complex(0, 1) * f.By -
                     p.lambda * gamma(-k, p.delta)) < 1e-14);
      const auto g = field_components(k + 2 * kPi, p);
      CHECK(std::abs(f.Bx - g.Bx) < 1e-13);
      CHECK(std::abs(f.By - g.By) < 1e-13);
    }
  }
}

TEST_CASE("angles: closed form, poles, derived identities") {
  SUBCASE("Im phi = ln lambda") {
    for (int i = 0; i < 50; ++i) {
      ModelParams p = random_params();
      p.lambda = 1.5;
      const double k = uniform(0.1, 2 * kPi - 0.1);
      if (std::abs(gamma(k, p.delta)) < 1e-3) continue;
      const Angles a = angles(k, p);
      CHECK(a.phi.imag() == Approx(std::log(1.5)).epsilon(1e-12));
      CHECK(a.phi.imag() == Approx(0.4054651081081644).epsilon(1e-12));
    }
  }
  SUBCASE("theta = pi/2 at V = 0") {
    for (int i = 0; i < 20; ++i) {
      ModelParams p = random_params();
      p.V = 0.0;
      const Angles a = angles(uniform(0.1, 2.0), p);
      CHECK(a.theta == Approx(kPi / 2).epsilon(1e-12));
    }
  }
  SUBCASE("pole and degeneracy errors") {
    CHECK_THROWS_AS((void)angles(kPi, {1.0, 0.0, 1.0, 4}), IndefinitePhase);
    CHECK_THROWS_AS((void)angles(kPi, {1.0, 0.0, 0.0, 4}), GapClosed);
  }
  SUBCASE("branch: e^{i phi} = gamma / (lambda B sin theta)") {
    for (int i = 0; i < 50; ++i) {
      const ModelParams p = random_params();
      const double k = uniform(0.0, 2 * kPi);
      const Complex g = gamma(k, p.delta);
      if (std::abs(g) < 1e-3) continue;
      const Angles a = angles(k, p);
      const double B = std::hypot(std::abs(g), p.V);
      const Complex lhs = std::exp(Complex(0, 1) * a.phi);
      const Complex rhs = g / p.lambda / (B * std::sin(a.theta));
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("eigenpair: Hermitian SSH reference point") {
  const BiorthPair bp =
      eigenpair(0.0, {1.0, 0.0, 0.0, 4}, Band::upper, Gauge::I);
  CHECK(bp.eigenvalue == Approx(1.0));
  const double isq = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(bp.right(0) - isq) < 1e-14);
  CHECK(std::abs(bp.right(1) - isq) < 1e-14);
}

TEST_CASE("eigenpair: eigen equations and biorthonormality") {
  for (int i = 0; i < 400; ++i) {
    const ModelParams p = random_params();
    const double k = uniform(0.0, 2 * kPi);
    if (std::abs(gamma(k, p.delta)) < 1e-6) continue;
    const Eigen::Matrix2cd h = bloch_matrix(k, p).entries;
    for (Band band : {Band::lower, Band::upper}) {
      const Gauge gauge = (i % 2 == 0) ? Gauge::I : Gauge::II;
      const BiorthPair bp = eigenpair(k, p, band, gauge);
      CHECK((h * bp.right - bp.eigenvalue * bp.right).norm() < 1e-12);
      CHECK((h.adjoint() * bp.left - bp.eigenvalue * bp.left).norm() < 1e-12);
      CHECK(std::abs(bp.left.dot(bp.right) - 1.0) < 1e-12);
      const double e = band_sign(band) *
                       std::hypot(std::abs(gamma(k, p.delta)), p.V);
      CHECK(bp.eigenvalue == Approx(e).epsilon(1e-12));
    }
    // cross-band orthogonality within one gauge
    const BiorthPair up = eigenpair(k, p, Band::upper, Gauge::I);
    const BiorthPair lo = eigenpair(k, p, Band::lower, Gauge::I);
    CHECK(std::abs(up.left.dot(lo.right)) < 1e-12);
    CHECK(std::abs(lo.left.dot(up.right)) < 1e-12);
  }
}

TEST_CASE("eigenpair: left vector is the right vector with conj(phi)") {
  for (int i = 0; i < 100; ++i) {
    const ModelParams p = random_params();
    const double k = uniform(0.0, 2 * kPi);
    if (std::abs(gamma(k, p.delta)) < 1e-6) continue;
    const Angles a = angles(k, p);
    const double half = a.theta / 2;
    const Complex eips = std::exp(Complex(0, 1) * std::conj(a.phi));
    for (Band band : {Band::lower, Band::upper}) {
      const BiorthPair bp = eigenpair(k, p, band, Gauge::I);
      Eigen::Vector2cd expected;
      if (band == Band::upper)
        expected << Complex(std::cos(half)), std::sin(half) * eips;
      else
        expected << Complex(-std::sin(half)), std::cos(half) * eips;
      CHECK((bp.left - expected).norm() < 1e-12);
    }
  }
}

TEST_CASE("completeness: sum of |phi><eta| is the identity") {
  for (int i = 0; i < 10000; ++i) {
    const ModelParams p = random_params();
    const double k = uniform(0.0, 2 * kPi);
    if (std::abs(gamma(k, p.delta)) < 1e-6) continue;
    const BiorthPair up = eigenpair_auto(k, p, Band::upper);
    const BiorthPair lo = eigenpair_auto(k, p, Band::lower);
    const Eigen::Matrix2cd sum = up.right * up.left.adjoint() +
                                 lo.right * lo.left.adjoint();
    CHECK((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("lambda similarity renders the Bloch block Hermitian") {
  for (int i = 0; i < 100; ++i) {
    const ModelParams p = random_params();
    const double k = uniform(0.0, 2 * kPi);
    Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
    D(0, 0) = 1.0;
    D(1, 1) = p.lambda;
    const Eigen::Matrix2cd h =
        D * bloch_matrix(k, p).entries * D.inverse();
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gauge II is e^{-i Re phi} times gauge I") {
  for (int i = 0; i < 100; ++i) {
    const ModelParams p = random_params();
    const double k = uniform(0.0, 2 * kPi);
    if (std::abs(gamma(k, p.delta)) < 1e-6) continue;
    const Complex ph =
        std::exp(Complex(0, -1) * std::arg(gamma(k, p.delta)));
    for (Band band : {Band::lower, Band::upper}) {
      const BiorthPair g1 = eigenpair(k, p, band, Gauge::I);
      const BiorthPair g2 = eigenpair(k, p, band, Gauge::II);
      CHECK((g2.right - ph * g1.right).norm() < 1e-14);
      CHECK((g2.left - ph * g1.left).norm() < 1e-14);
    }
  }
}

TEST_CASE("gauge poles raise GaugeSingular only in the singular gauge") {
  // gamma = 0 at k = pi, delta = 0; north pole when V > 0
  const ModelParams north{1.5, 0.0, 0.8, 4};
  CHECK_THROWS_AS((void)eigenpair(kPi, north, Band::lower, Gauge::I),
                  GaugeSingular);
  CHECK_THROWS_AS((void)eigenpair(kPi, north, Band::upper, Gauge::II),
                  GaugeSingular);
  CHECK_NOTHROW((void)eigenpair(kPi, north, Band::lower, Gauge::II));
  CHECK_NOTHROW((void)eigenpair(kPi, north, Band::upper, Gauge::I));

  const ModelParams south{1.5, 0.0, -0.8, 4};
  CHECK_THROWS_AS((void)eigenpair(kPi, south, Band::lower, Gauge::II),
                  GaugeSingular);
  CHECK_THROWS_AS((void)eigenpair(kPi, south, Band::upper, Gauge::I),
                  GaugeSingular);
  CHECK_NOTHROW((void)eigenpair(kPi, south, Band::lower, Gauge::I));
  CHECK_NOTHROW((void)eigenpair(kPi, south, Band::upper, Gauge::II));

  CHECK_THROWS_AS((void)eigenpair(kPi, {1.5, 0.0, 0.0, 4}, Band::lower,
                                  Gauge::I),
                  GapClosed);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((void)bloch_matrix(0.0, {-1.0, 0.0, 0.0, 4}), ConfigError);
  CHECK_THROWS_AS((void)bloch_matrix(0.0, {0.0, 0.0, 0.0, 4}), ConfigError);
  CHECK_THROWS_AS((void)bloch_matrix(0.0, {1.0, 0.0, 0.0, 0}), ConfigError);
  // the dimerization window applies to the full input contract only;
  // momentum-space forms accept loop sweeps beyond it
  CHECK_THROWS_AS((ModelParams{1.0, 1.5, 0.0, 4}.validate()), ConfigError);
  CHECK_NOTHROW((void)bloch_matrix(0.0, {1.0, 1.5, 0.0, 4}));
}
