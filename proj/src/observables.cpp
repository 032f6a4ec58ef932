#include "mwi/observables.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mwi/fock.hpp"
#include "mwi/propagators.hpp"

namespace mwi {

RealField density(const GPState& s) {
  RealField rho(s.orbital.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(s.orbital[i]);
  return rho;
}

namespace {

RealField mixDensity(const Eigen::Matrix2cd& rho, const Field& f0, const Field& f1) {
  const double trace = rho.trace().real();
  RealField out(f0.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = rho(0, 0).real() * std::norm(f0[i]) +
                     rho(1, 1).real() * std::norm(f1[i]) +
                     2.0 * (rho(0, 1) * std::conj(f0[i]) * f1[i]).real();
    out[i] = std::max(d, 0.0) / trace;
  }
  return out;
}

}  // namespace

RealField density(const MB2State& s) {
  return mixDensity(rdm(s), s.orbitals[0], s.orbitals[1]);
}

RealField momentumDensity(const GPState& s, const Grid1D& grid) {
  return fourierDensity(s.orbital, grid);
}

RealField momentumDensity(const MB2State& s, const Grid1D& grid) {
  return mixDensity(rdm(s), momentumAmplitude(s.orbitals[0], grid),
                    momentumAmplitude(s.orbitals[1], grid));
}

Eigen::Matrix2cd rdm(const MB2State& s) {
  return fock::oneBodyDensity(s.coefficients);
}

NaturalOccupations naturalOccupations(const GPState&) { return {1.0, 0.0}; }

NaturalOccupations naturalOccupations(const MB2State& s) {
  const Eigen::Matrix2cd rho = rdm(s);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho, Eigen::EigenvaluesOnly);
  const double trace = rho.trace().real();
  const double lo = es.eigenvalues()(0) / trace;
  const double hi = es.eigenvalues()(1) / trace;
  return {std::max(lo, hi), std::min(lo, hi)};
}

namespace {

// Fraction of the cell [x - dx/2, x + dx/2] that lies inside (lo, hi).
double cellWeight(double x, double dx, double lo, double hi) {
  const double a = std::max(x - 0.5 * dx, lo), b = std::min(x + 0.5 * dx, hi);
  return std::clamp((b - a) / dx, 0.0, 1.0);
}

}  // namespace

ChannelPopulations channelsFromPositionDensity(const RealField& rho,
                                               const Grid1D& grid, double gamma) {
  const double inner = 2.0 / gamma;
  double mass = 0.0, moment = 0.0;
  const double far = grid.length();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = cellWeight(grid.x(i), grid.dx(), inner, far);
    mass += w * rho[i];
    moment += w * rho[i] * grid.x(i);
  }
  if (!(mass > 0.0))
    throw std::runtime_error("channelPopulations: no density beyond x = 2/gamma");
  const double xb = 0.5 * moment / mass;

  const double peak = *std::max_element(rho.begin(), rho.end());
  auto sampleAt = [&](double x) {
    const double u = (x - grid.x(0)) / grid.dx();
    const auto i = static_cast<std::size_t>(std::floor(u));
    const double frac = u - std::floor(u);
    return (1.0 - frac) * rho[i] + frac * rho[std::min(i + 1, grid.size() - 1)];
  };
  const double edge = std::max(sampleAt(xb), sampleAt(-xb));
  if (edge > 1e-3 * peak)
    throw std::runtime_error("channelPopulations: clouds not separated, density at x_b=" +
                             std::to_string(xb) + " is " + std::to_string(edge / peak) +
                             " of peak");

  double left = 0.0, mid = 0.0, right = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    if (x <= -xb) left += rho[i];
    else if (x < xb) mid += rho[i];
    else right += rho[i];
  }
  const double total = left + mid + right;
  return {left / total, mid / total, right / total, ChannelMode::PositionWindows, xb};
}

ChannelPopulations channelsFromMomentumDensity(const RealField& rhoP,
                                               const Grid1D& grid, double k) {
  double left = 0.0, mid = 0.0, right = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = grid.p(i);
    if (p <= -k) left += rhoP[i];
    else if (p < k) mid += rhoP[i];
    else right += rhoP[i];
  }
  const double total = left + mid + right;
  return {left / total, mid / total, right / total, ChannelMode::MomentumBins, k};
}

double visibility(const ChannelPopulations& c) { return c.zero; }

double fragFromVisibility(double nu) {
  constexpr double kSlack = 1e-9;
  if (nu < -kSlack || nu > 2.0 / 3.0 + kSlack)
    throw std::domain_error("fragFromVisibility: nu=" + std::to_string(nu) +
                            " outside the two-mode range [0, 2/3]");
  return std::clamp(1.0 - 1.5 * nu, 0.0, 1.0);
}

double splitCompleteness(const RealField& rho, const Grid1D& grid, double gamma) {
  const double total = integrate(rho, grid);
  return 1.0 - centralMass(rho, grid, 2.0 / gamma) / total;
}

double centroid(const RealField& rho, const Grid1D& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += rho[i] * grid.x(i);
  return s * grid.dx();
}

double centralMass(const RealField& rho, const Grid1D& grid, double halfWidth) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += cellWeight(grid.x(i), grid.dx(), -halfWidth, halfWidth) * rho[i];
  return s * grid.dx();
}

double detectRecollision(const Trajectory& traj, int j, double omega,
                         double halfWindow) {
  if (j < 1 || !(omega > 0.0))
    throw std::invalid_argument("detectRecollision: need j >= 1 and omega > 0");
  const double center = j * std::numbers::pi / omega;
  const double lo = center - halfWindow, hi = center + halfWindow;
  const auto& snaps = traj.snapshots;
  if (snaps.empty() || snaps.front().t > lo + 1e-9 || snaps.back().t < hi - 1e-9)
    throw std::invalid_argument("detectRecollision: trajectory does not cover [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  std::size_t best = snaps.size();
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    if (snaps[i].t < lo - 1e-9 || snaps[i].t > hi + 1e-9) continue;
    if (best == snaps.size() || snaps[i].centralDensity > snaps[best].centralDensity)
      best = i;
  }
  double t = snaps[best].t;
  if (best > 0 && best + 1 < snaps.size()) {
    const double y0 = snaps[best - 1].centralDensity;
    const double y1 = snaps[best].centralDensity;
    const double y2 = snaps[best + 1].centralDensity;
    const double h0 = snaps[best].t - snaps[best - 1].t;
    const double h1 = snaps[best + 1].t - snaps[best].t;
    const double curvature = y0 - 2.0 * y1 + y2;
    if (curvature < 0.0 && std::abs(h0 - h1) < 1e-9 * std::max(h0, h1)) {
      const double shift = 0.5 * h0 * (y0 - y2) / curvature;
      t += std::clamp(shift, -0.5 * h0, 0.5 * h0);
    }
  }
  return std::clamp(t, lo, hi);
}

std::string toString(ChannelMode m) {
  return m == ChannelMode::MomentumBins ? "momentum" : "position";
}

ChannelMode channelModeFromString(const std::string& s) {
  if (s == "position") return ChannelMode::PositionWindows;
  if (s == "momentum") return ChannelMode::MomentumBins;
  throw std::invalid_argument("unknown channel mode '" + s + "'");
}

}  // namespace mwi
