#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "mwi/grid.hpp"
#include "mwi/states.hpp"

namespace mwi {

struct Trajectory;

RealField density(const GPState& s);
/// rho(x) / N = sum_jk rho_jk conj(phi_j) phi_k / N.
RealField density(const MB2State& s);

/// Momentum-space analogue of density(), in FFT ordering.
RealField momentumDensity(const GPState& s, const Grid1D& grid);
RealField momentumDensity(const MB2State& s, const Grid1D& grid);

/// One-body density matrix in the orbital basis, trace N.
Eigen::Matrix2cd rdm(const MB2State& s);

struct NaturalOccupations {
  double n1 = 1.0;  // largest fraction
  double n2 = 0.0;
};
NaturalOccupations naturalOccupations(const GPState& s);
NaturalOccupations naturalOccupations(const MB2State& s);

enum class ChannelMode { PositionWindows, MomentumBins };

struct ChannelPopulations {
  double minus2k = 0.0;
  double zero = 0.0;
  double plus2k = 0.0;
  ChannelMode mode = ChannelMode::PositionWindows;
  double boundary = 0.0;  // x_b or k, whichever the mode used
};

/// Splits the position density at +-x_b, x_b being half the centroid of the
/// density restricted to x > 2/gamma. Throws if the density at +-x_b exceeds
/// 1e-3 of its peak.
ChannelPopulations channelsFromPositionDensity(const RealField& rho,
                                               const Grid1D& grid, double gamma);
/// Bins the momentum density at +-k.
ChannelPopulations channelsFromMomentumDensity(const RealField& rhoP,
                                               const Grid1D& grid, double k);

template <class State>
ChannelPopulations channelPopulations(const State& s, const Grid1D& grid,
                                      double k, double gamma, ChannelMode mode) {
  if (mode == ChannelMode::MomentumBins)
    return channelsFromMomentumDensity(momentumDensity(s, grid), grid, k);
  return channelsFromPositionDensity(density(s), grid, gamma);
}

/// nu = N^{0k} / N
double visibility(const ChannelPopulations& c);

/// Interferometric fragmentation n2/N = 1 - 3 nu / 2. Throws for nu outside
/// [0, 2/3] beyond a 1e-9 slack.
double fragFromVisibility(double nu);

/// Fraction of the density outside |x| < 2/gamma.
double splitCompleteness(const RealField& rho, const Grid1D& grid, double gamma);

/// <x> of a density normalized to one.
double centroid(const RealField& rho, const Grid1D& grid);
/// Mass inside |x| < halfWidth.
double centralMass(const RealField& rho, const Grid1D& grid, double halfWidth);

/// Time in [j pi/omega - 0.5, j pi/omega + 0.5] at which the trajectory's
/// central density peaks, refined by a parabola through the best snapshot
/// and its neighbours.
double detectRecollision(const Trajectory& traj, int j, double omega,
                         double halfWindow = 0.5);

std::string toString(ChannelMode m);
ChannelMode channelModeFromString(const std::string& s);

}  // namespace mwi
