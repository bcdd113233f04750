#include "nhrm/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace nhrm {

namespace {

// Forward/backward hops of bond l (1-based).
std::pair<double, double> bond_hops(const ModelParams& p, int l) {
  const double sgn = (l % 2 == 0) ? +1.0 : -1.0;  // (-1)^l
  const double t = 0.5 * (1.0 + sgn * p.delta);
  const double e = -sgn;  // (-1)^{l+1}
  return {t * std::pow(p.lambda, e), t * std::pow(p.lambda, -e)};
}

}  // namespace

Eigen::VectorXd RealSpaceModel::balance() const {
  const int n = sites();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = (i % 2 == 0) ? 1.0 : params.lambda;
  return d;
}

Eigen::MatrixXd RealSpaceModel::balanced() const {
  // Built from the symmetric bond strengths t_l = (1 + (-1)^l delta)/2
  // directly, so the result carries no lambda round-off at all and
  // spectra of lambda-scans agree bit for bit.
  const int n = sites();
  Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(n, n);
  hb.diagonal() = matrix.diagonal();
  for (int l = 1; l < n; ++l) {
    const double sgn = (l % 2 == 0) ? +1.0 : -1.0;
    const double t = 0.5 * (1.0 + sgn * params.delta);
    hb(l - 1, l) = hb(l, l - 1) = t;
  }
  if (boundary.kind != BoundaryKind::open) {
    const double scale =
        (boundary.kind == BoundaryKind::ring) ? 1.0 : boundary.kappa;
    hb(n - 1, 0) = hb(0, n - 1) = scale * 0.5 * (1.0 + params.delta);
  }
  return hb;
}

RealSpaceModel build_hamiltonian(const ModelParams& p, Boundary boundary) {
  p.validate();
  if (p.N < 2) throw ConfigError("real-space chain needs N >= 2");
  if (boundary.kind == BoundaryKind::weak_link && boundary.kappa < 0.0)
    throw ConfigError("weak-link kappa must be non-negative");
  const int n = 2 * p.N;
  RealSpaceModel m;
  m.params = p;
  m.boundary = boundary;
  m.matrix = Eigen::MatrixXd::Zero(n, n);
  for (int l = 1; l <= n; ++l)
    m.matrix(l - 1, l - 1) = -p.V * ((l % 2 == 0) ? 1.0 : -1.0);
  for (int l = 1; l < n; ++l) {
    const auto [f, b] = bond_hops(p, l);
    m.matrix(l - 1, l) = f;
    m.matrix(l, l - 1) = b;
  }
  if (boundary.kind != BoundaryKind::open) {
    const auto [f, b] = bond_hops(p, n);
    const double scale =
        (boundary.kind == BoundaryKind::ring) ? 1.0 : boundary.kappa;
    m.matrix(n - 1, 0) = scale * f;  // kappa_{2N,1}
    m.matrix(0, n - 1) = scale * b;  // kappa_{1,2N}
  }
  return m;
}

std::vector<double> spectrum(const RealSpaceModel& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.balanced(),
                                                    Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> spectrum_general(const RealSpaceModel& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
      m.matrix.cast<Complex>(), /*computeEigenvectors=*/false);
  std::vector<double> out;
  out.reserve(m.sites());
  for (int i = 0; i < m.sites(); ++i) {
    const Complex e = es.eigenvalues()(i);
    if (std::abs(e.imag()) > 1e-6)
      throw ComplexSpectrum("spectrum_general: eigenvalue with |Im| = " +
                            std::to_string(std::abs(e.imag())));
    out.push_back(e.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<EdgeMode, EdgeMode> edge_modes(const ModelParams& p) {
  p.validate();
  if (std::abs(p.delta + 1.0) < 1e-12)
    throw RatioPole("edge_modes: amplitude ratio diverges at delta = -1");
  const int N = p.N;
  const double r = (p.delta - 1.0) / (p.delta + 1.0);
  // Geometric sum 1 + r^2 + ... + r^{2(N-1)}; N in the r^2 -> 1 limit.
  const double r2 = r * r;
  const double omega =
      (std::abs(1.0 - r2) < 1e-12)
          ? static_cast<double>(N)
          : (1.0 - std::pow(r2, N)) / (1.0 - r2);
  const double norm = 1.0 / std::sqrt(omega);

  EdgeMode L, R;
  L.side = Side::L;
  R.side = Side::R;
  L.ratio = R.ratio = r;
  L.norm_factor = R.norm_factor = omega;
  L.amplitude = Eigen::VectorXd::Zero(2 * N);
  R.amplitude = Eigen::VectorXd::Zero(2 * N);
  for (int j = 1; j <= N; ++j) {
    L.amplitude(2 * j - 1) = std::pow(r, N - j) * norm;  // site 2j
    R.amplitude(2 * j - 2) = std::pow(r, j - 1) * norm;  // site 2j-1
  }
  return {L, R};
}

double edge_probability(const EdgeMode& mode, int l) {
  const int n = static_cast<int>(mode.amplitude.size());
  if (l < 1 || l > n) throw ConfigError("edge_probability: site out of range");
  const bool even = (l % 2 == 0);
  if (mode.side == Side::L) {
    if (!even) return 0.0;
    return std::pow(mode.ratio, 2 * mode.cells() - l) / mode.norm_factor;
  }
  if (even) return 0.0;
  return std::pow(mode.ratio, l - 1) / mode.norm_factor;
}

double commutator_residual(const EdgeMode& mode, const RealSpaceModel& m) {
  if (m.boundary.kind != BoundaryKind::open)
    throw ConfigError("commutator_residual expects an open chain");
  if (m.sites() != mode.amplitude.size())
    throw ConfigError("commutator_residual: size mismatch");
  const double eps = (mode.side == Side::L) ? -m.params.V : +m.params.V;
  return (m.matrix * mode.amplitude - eps * mode.amplitude).norm();
}

BandEdges bulk_band_edges(const ModelParams& p) {
  return {std::hypot(p.V, p.delta), std::hypot(p.V, 1.0)};
}

int midgap_count(const ModelParams& p, const std::vector<double>& eigs) {
  const BandEdges be = bulk_band_edges(p);
  const double spacing = (be.outer - be.inner) / std::max(1, p.N - 1);
  int count = 0;
  for (double e : eigs)
    if (std::abs(e) < be.inner - 3.0 * spacing) ++count;
  return count;
}

}  // namespace nhrm
