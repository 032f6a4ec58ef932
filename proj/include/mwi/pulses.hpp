#pragma once

#include <string>

#include "mwi/grid.hpp"
#include "mwi/states.hpp"

namespace mwi {

enum class PulseForm { Splitter, Boost };

/// Sudden momentum imprint. Splitter multiplies by
/// exp(ikx) + exp(-ikx - i chi); Boost multiplies by exp(ikx).
struct Pulse {
  double k = 5.0;
  double chi = 0.0;
  PulseForm form = PulseForm::Splitter;

  cplx multiplier(double x) const;
};

/// True when k is an integer multiple of the grid's momentum spacing.
bool onMomentumGrid(const Pulse& p, const Grid1D& grid, double tol = 1e-9);

GPState applyPulseGP(const GPState& s, const Pulse& p, const Grid1D& grid);

/// Multiplies both orbitals, Gram-Schmidt re-orthonormalizes (phi_1 first)
/// and renormalizes C. Throws if the multiplied orbitals overlap by more
/// than 0.5, where keeping C fixed is not meaningful.
MB2State applyPulseMB(const MB2State& s, const Pulse& p, const Grid1D& grid,
                      double* gramSchmidtCorrection = nullptr);

/// Normalized populations of the -2k, 0k, +2k channels produced by the
/// product of two splitter multipliers with phases chi1 and chi2.
struct ChannelWeights {
  double minus2k = 0.0;
  double zero = 0.0;
  double plus2k = 0.0;
};
ChannelWeights pulseChannelAlgebra(double chi1, double chi2);

std::string toString(PulseForm f);
PulseForm pulseFormFromString(const std::string& s);

}  // namespace mwi
