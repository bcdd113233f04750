#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "nhrm/errors.hpp"

namespace nhrm {

using Complex = std::complex<double>;

/// Tolerance separating true eigenvector poles from round-off. A point is
/// treated as a pole when |gamma_k| < kPoleTol * max(1, |V|).
inline constexpr double kPoleTol = 1e-9;

enum class Band : int { lower = -1, upper = +1 };

/// Two smooth eigenvector phase choices. Gauge II multiplies both the right
/// and the left vector of gauge I by e^{-i Re phi}. Each gauge is singular
/// where gamma_k = 0 on one half of the parameter plane:
///   (lower, I) and (upper, II): V > 0 (north pole, theta = 0),
///   (lower, II) and (upper, I): V < 0 (south pole, theta = pi).
enum class Gauge { I, II };

inline int band_sign(Band b) { return static_cast<int>(b); }

/// Model parameters. The chain has 2N sites; sublattice A occupies odd
/// sites l = 2j-1, sublattice B even sites l = 2j (1-based).
struct ModelParams {
  double lambda = 1.0;  ///< hopping imbalance, > 0; sole source of non-Hermiticity
  double delta = 0.0;   ///< dimerization, in [-1, 1]
  double V = 0.0;       ///< staggered potential
  int N = 1;            ///< number of unit cells

  void validate() const;  ///< full input contract; throws ConfigError

  /// Everything except the dimerization window. The momentum-space forms
  /// stay valid for any real delta, and parameter loops may sweep beyond
  /// [-1, 1]; chains and user input enforce the window via validate().
  void validate_core() const;

  /// True at the gap-closing point (delta, V) = (0, 0) within tol.
  bool at_degeneracy(double tol = kPoleTol) const {
    return std::abs(delta) < tol && std::abs(V) < tol;
  }
};

/// gamma_k = [(1-delta) + (1+delta) e^{ik}] / 2; conj(gamma(k)) = gamma(-k).
Complex gamma(double k, double delta);
Complex gamma_dk(double k, double delta);      ///< d gamma / dk
Complex gamma_ddelta(double k, double delta);  ///< d gamma / d delta

/// Momentum-space 2x2 block [[V, lambda*gamma_{-k}], [gamma_k/lambda, -V]].
struct BlochMatrix {
  double k = 0.0;
  Eigen::Matrix2cd entries;
};
BlochMatrix bloch_matrix(double k, const ModelParams& p);

/// Band energies (lower, upper) = (-E, +E), E = sqrt(|gamma_k|^2 + V^2).
/// Real for every lambda > 0.
std::pair<double, double> dispersion(double k, const ModelParams& p);

/// Effective field with h_k = B . sigma. Bx + i By = gamma_k / lambda and
/// Bx - i By = lambda * gamma_{-k}; Bz = V and |B| are real.
struct FieldComponents {
  Complex Bx, By;
  double Bz = 0.0;
  double B = 0.0;
};
FieldComponents field_components(double k, const ModelParams& p);

/// Spherical angles of the effective field. theta is real; phi is complex
/// with Re phi = arg gamma_k and Im phi = ln lambda (constant in k, delta,
/// V), so that B sin(theta) e^{i phi} = gamma_k / lambda exactly.
struct Angles {
  double theta = 0.0;  ///< in [0, pi]
  Complex phi;
};

/// Throws IndefinitePhase at a pole (gamma = 0, V != 0) and GapClosed at the
/// degeneracy.
Angles angles(double k, const ModelParams& p);

/// Matched right/left eigenvectors of h_k and h_k^dagger with the shared
/// real eigenvalue. Biorthonormal: dot(left, right) = 1 (conjugating inner
/// product).
struct BiorthPair {
  Band band = Band::lower;
  double eigenvalue = 0.0;
  Eigen::Vector2cd right;  ///< |phi>
  Eigen::Vector2cd left;   ///< |eta>, components of |phi> with phi -> conj(phi)
  Gauge gauge = Gauge::I;
};

/// Closed-form eigenpair in the requested gauge. Gauge I is the spinor form
///   upper: (cos t/2, sin t/2 e^{i phi}),  lower: (-sin t/2, cos t/2 e^{i phi}),
/// identical (including phase) to (V + eps_rho, gamma_k/lambda) / Omega_rho
/// with the positive normalizer. Throws GaugeSingular at the requested
/// gauge's pole and GapClosed at the degeneracy.
BiorthPair eigenpair(double k, const ModelParams& p, Band band, Gauge gauge);

/// The gauge whose pole lies on the opposite V half-plane, i.e. the smooth
/// choice at this point.
Gauge regular_gauge(double V, Band band);

/// Eigenpair in the regular gauge for (V, band); never gauge-singular.
BiorthPair eigenpair_auto(double k, const ModelParams& p, Band band);

}  // namespace nhrm
