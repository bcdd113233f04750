#pragma once

#include <stdexcept>

namespace nhrm {

/// Base class for numerical guard failures. The CLI maps these to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// arg(gamma_k) has no limit at a Bloch-sphere pole (gamma = 0, V != 0).
struct IndefinitePhase : Error {
  using Error::Error;
};

/// Band degeneracy: |gamma_k| and |V| both vanish.
struct GapClosed : Error {
  using Error::Error;
};

/// Requested gauge evaluated within tolerance of its singular pole.
struct GaugeSingular : Error {
  using Error::Error;
};

/// Parameter loop passes through the degeneracy point (delta, V) = (0, 0).
struct LoopThroughDegeneracy : Error {
  using Error::Error;
};

/// A plaquette phase came too close to the branch cut of Im log.
struct GridTooCoarse : Error {
  using Error::Error;
};

/// Edge-mode amplitude ratio (delta-1)/(delta+1) diverges at delta = -1.
struct RatioPole : Error {
  using Error::Error;
};

/// The dense fallback eigensolver found eigenvalues with |Im| above tolerance.
struct ComplexSpectrum : Error {
  using Error::Error;
};

/// Biorthogonal norm left its conserved value, or the time mesh cannot
/// resolve the drive.
struct NormDrift : Error {
  using Error::Error;
};

/// Bond index 2N requested on an open chain.
struct BondAbsent : Error {
  using Error::Error;
};

/// Invalid configuration or arguments. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nhrm
