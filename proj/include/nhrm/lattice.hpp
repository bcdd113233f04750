#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nhrm/bloch.hpp"

namespace nhrm {

enum class BoundaryKind { ring, open, weak_link };

struct Boundary {
  BoundaryKind kind = BoundaryKind::ring;
  double kappa = 0.0;  ///< end-bond scale, weak_link only

  static Boundary ring() { return {BoundaryKind::ring, 1.0}; }
  static Boundary open() { return {BoundaryKind::open, 0.0}; }
  static Boundary weak_link(double kappa) {
    return {BoundaryKind::weak_link, kappa};
  }
};

/// Single-particle Hamiltonian on 2N sites. Formulas index sites 1-based
/// (l = 1..2N); storage is 0-based (site l at row l-1). Bond l couples sites
/// (l, l+1) with forward hop kappa_{l,l+1} = (1 + (-1)^l delta)/2 *
/// lambda^{(-1)^{l+1}} and backward hop with the inverse lambda power;
/// diagonal is -V(-1)^l. All entries real.
struct RealSpaceModel {
  ModelParams params;
  Boundary boundary;
  Eigen::MatrixXd matrix;

  int sites() const { return static_cast<int>(matrix.rows()); }

  /// Diagonal similarity d_l (1 on odd sites, lambda on even) rendering
  /// D H D^{-1} real symmetric; exists for open chains and even-site rings.
  Eigen::VectorXd balance() const;

  /// D H D^{-1}; symmetric, independent of lambda.
  Eigen::MatrixXd balanced() const;
};

RealSpaceModel build_hamiltonian(const ModelParams& p, Boundary boundary);

/// Real eigenvalues, ascending, via the balancing similarity and a
/// Hermitian solver.
std::vector<double> spectrum(const RealSpaceModel& m);

/// Fallback: dense non-Hermitian solve on the raw matrix. Guards parameter
/// regimes with complex spectra (|Im| > 1e-6 throws ComplexSpectrum).
/// Used by tests as an independent oracle.
std::vector<double> spectrum_general(const RealSpaceModel& m);

enum class Side { L, R };

/// Exponentially localized open-chain mode with amplitude ratio
/// r = (delta - 1)/(delta + 1) and normalizer
/// Omega = (1 - r^{2N}) / (1 - r^2). The L mode lives on even sites with
/// amplitude r^{N-j}/sqrt(Omega) at site 2j; the R mode on odd sites with
/// r^{j-1}/sqrt(Omega) at site 2j-1. Amplitudes are real, independent of
/// lambda and V, and each mode is simultaneously the matching left
/// eigenvector of H^dagger.
struct EdgeMode {
  Side side = Side::L;
  Eigen::VectorXd amplitude;  ///< 2N real entries
  double ratio = 0.0;         ///< r
  double norm_factor = 1.0;   ///< Omega

  int cells() const { return static_cast<int>(amplitude.size()) / 2; }
};

/// Closed-form (L, R) pair. Throws RatioPole at delta = -1.
std::pair<EdgeMode, EdgeMode> edge_modes(const ModelParams& p);

/// Closed-form site probability P(l), 1-based l; equals |amplitude[l]|^2.
double edge_probability(const EdgeMode& mode, int l);

/// || (H -+ (-+V)) amplitude ||: residual of the edge eigen-equation
/// H v_L = -V v_L, H v_R = +V v_R on the open chain. The finite-size
/// leakage sits on the far boundary site and scales as |r|^{N-1}.
double commutator_residual(const EdgeMode& mode, const RealSpaceModel& m);

/// Bulk band edges |eps| in [inner, outer] from the dispersion:
/// inner = sqrt(V^2 + delta^2), outer = sqrt(V^2 + 1).
struct BandEdges {
  double inner = 0.0, outer = 0.0;
};
BandEdges bulk_band_edges(const ModelParams& p);

/// Eigenvalues farther than 3x the finite-size level spacing from both
/// inner band edges.
int midgap_count(const ModelParams& p, const std::vector<double>& eigs);

}  // namespace nhrm
