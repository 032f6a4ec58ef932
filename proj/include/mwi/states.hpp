#pragma once

#include <array>
#include <utility>

#include "mwi/grid.hpp"

namespace mwi {

/// Physical parameters in units hbar = m = 1.
struct SystemParams {
  int particles = 100;
  double lambda0 = -0.04;        // contact strength, negative is attractive
  double gamma = 1.0;            // soliton inverse width
  double trapCoefficient = 0.1;  // V(x) = a x^2

  /// Mean-field coupling lambda0 (N - 1).
  double gpNonlinearity() const { return lambda0 * (particles - 1); }
  /// omega with a x^2 = omega^2 x^2 / 2.
  double trapFrequency() const;

  void validate() const;
};

/// Static harmonic trap a x^2.
struct Potential {
  double trapCoefficient = 0.0;

  double operator()(double x) const { return trapCoefficient * x * x; }
  RealField sample(const Grid1D& g) const;
};

Potential trapOf(const SystemParams& params);

struct GPState {
  Field orbital;
  double time = 0.0;
};

/// Two orbitals plus CI coefficients C_m over Fock states |N-m, m>.
struct MB2State {
  std::array<Field, 2> orbitals;
  std::vector<cplx> coefficients;
  double time = 0.0;

  int particles() const { return static_cast<int>(coefficients.size()) - 1; }
};

/// sqrt(gamma/2) sech(gamma x), renormalized on the grid.
GPState sechSoliton(const SystemParams& params, const Grid1D& grid);

/// tanh(gamma x) sech(gamma x), the default odd partner orbital.
Field oddPartnerSeed(double gamma, const Grid1D& grid);

/// Condensed |N,0> state with phi_1 = gp orbital and phi_2 the Gram-Schmidt
/// orthonormalized seed.
MB2State mb2FromGP(const GPState& gp, const Field& seed, int particles,
                   const Grid1D& grid);

/// Gerade/ungerade two-hump solitons with hump centers at +-d/2.
struct TwoHump {
  Field ungerade;
  Field gerade;
};
TwoHump twoHumpOrbitals(double gamma, double separation, const Grid1D& grid);

/// Single Fock state |n1, n2> over orthonormal orbitals.
MB2State fockState(int n1, int n2, const Field& phi1, const Field& phi2,
                   const Grid1D& grid);

/// Scales f to unit norm; throws if its norm is not positive.
void normalize(Field& f, const Grid1D& grid);

void validate(const GPState& s, const Grid1D& grid, double tol = 1e-9);
void validate(const MB2State& s, const Grid1D& grid, double tol = 1e-9);

}  // namespace mwi
