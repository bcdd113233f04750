#pragma once

#include <array>
#include <vector>

#include "nhrm/bloch.hpp"

namespace nhrm {

/// Loop sample: parameter values and their q-derivatives.
struct LoopPoint {
  double delta = 0.0, V = 0.0;
  double ddelta_dq = 0.0, dV_dq = 0.0;
};

/// Closed path (delta(q), V(q)) in the V-delta plane, q in [0, 2pi).
/// Circles follow delta = delta_c + r cos(q), V = V_c + r sin(q);
/// orientation -1 maps q -> -q. Polylines are traversed with a uniform
/// q-span per segment.
class PumpLoop {
 public:
  enum class Kind { circle, polyline };

  static PumpLoop circle(double delta_c, double V_c, double r,
                         int orientation = +1, int nq = 256);
  /// Vertices (delta, V); the closing edge back to the first vertex is
  /// implicit (a duplicated final vertex is accepted and dropped).
  static PumpLoop polyline(std::vector<std::array<double, 2>> vertices,
                           int nq = 256);

  LoopPoint at(double q) const;
  double min_distance_to_origin() const;

  /// Crossing of the V = 0 seam: position, dimerization there, V-slope.
  struct SeamCrossing {
    double q = 0.0, delta = 0.0, dV_dq = 0.0;
  };
  /// All transversal V = 0 crossings (tangencies are not crossings).
  std::vector<SeamCrossing> seam_crossings() const;

  Kind kind() const { return kind_; }
  int nq() const { return nq_; }

 private:
  PumpLoop() = default;
  Kind kind_ = Kind::circle;
  int nq_ = 256;
  double delta_c_ = 0.0, V_c_ = 0.0, r_ = 0.0;
  int orient_ = +1;
  std::vector<std::array<double, 2>> verts_;
};

enum class LoopDirection { k, q };

/// In every loop-based operation below, the loop supplies (delta, V) at the
/// parameter q and p0 supplies the imbalance lambda; p0's own delta and V
/// fields are ignored.

/// Biorthonormal Berry connection A_sigma = -i <eta| d_sigma |phi> from
/// analytic chain-rule derivatives of theta and phi = arg gamma + i ln lambda.
/// In gauge I the lower band gives A = (1 + cos theta)/2 * d_sigma phi and
/// the upper band A = (1 - cos theta)/2 * d_sigma phi; gauge II subtracts
/// d_sigma Re phi. lambda is constant along both directions, so the value
/// is real here; the complex return type carries the general form.
Complex berry_connection(double k, double q, const PumpLoop& loop,
                         const ModelParams& p0, Band band, Gauge gauge,
                         LoopDirection direction);

/// Gauge-invariant curvature Omega_kq = d_k A_q - d_q A_k, assembled from
/// first derivatives only (the mixed second derivatives of phi cancel).
Complex berry_curvature(double k, double q, const PumpLoop& loop,
                        const ModelParams& p0, Band band);

/// Curvature samples on the (k, q) torus.
struct CurvatureGrid {
  int nk = 0, nq = 0;
  double dk = 0.0, dq = 0.0;
  std::vector<Complex> omega;  ///< row-major, omega[i * nq + j] at (k_i, q_j)
  Complex& at(int i, int j) { return omega[i * nq + j]; }
  Complex at(int i, int j) const { return omega[i * nq + j]; }
};
CurvatureGrid curvature_grid(const PumpLoop& loop, const ModelParams& p0,
                             Band band, int nk, int nq);

struct ChernLineResult {
  double value = 0.0;          ///< real part; within 1e-3 of an integer
  double imag_residual = 0.0;  ///< |accumulated imaginary part| / 2pi
};

/// Chern number from the gauge-mismatch line integral along the V = 0 patch
/// seam. Each band uses each gauge on the half-plane avoiding that gauge's
/// pole, so the two bands traverse the seam with opposite orientation and
/// c_upper = -c_lower. nk discretizes each seam k-integral (trapezoid).
ChernLineResult chern_line_integral(const PumpLoop& loop,
                                    const ModelParams& p0, Band band, int nq,
                                    int nk);

/// Independent validator: link variables U_sigma = <eta(s)|phi(s + sigma)>
/// normalized to unit modulus on an nk x nq torus grid; plaquette phases
/// F = Im log of the oriented product sum to an exact multiple of 2pi.
/// Throws GridTooCoarse when any |F| > pi - 0.1.
int chern_plaquette(const PumpLoop& loop, const ModelParams& p0, Band band,
                    int nk = 256, int nq = 256, int threads = 1);

/// Zak phase from the Wilson-loop product of biorthonormal overlaps over a
/// closed k-grid, reported in units of 2pi as a value in [0, 1).
double zak_phase(double delta, double V, const ModelParams& p0, Band band,
                 int nk);

/// Pumped charge of all k channels over one loop period: the biorthonormal
/// adiabatic current integrated in time, with the state derivatives taken
/// by central differences of the eigenvectors in a per-row regular gauge.
/// Equals the loop's Chern number within discretization error.
double bulk_pump_charge(const PumpLoop& loop, const ModelParams& p0, Band band,
                        int nt = 256, int nk = 256, int threads = 1);

}  // namespace nhrm
