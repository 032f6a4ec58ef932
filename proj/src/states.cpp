#include "mwi/states.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mwi {

double SystemParams::trapFrequency() const {
  return std::sqrt(2.0 * trapCoefficient);
}

void SystemParams::validate() const {
  if (particles < 2) throw std::invalid_argument("params: need N >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("params: gamma must be > 0");
  if (trapCoefficient < 0.0)
    throw std::invalid_argument("params: trap coefficient must be >= 0");
  if (!std::isfinite(lambda0))
    throw std::invalid_argument("params: lambda0 must be finite");
}

RealField Potential::sample(const Grid1D& g) const {
  RealField v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = (*this)(g.x(i));
  return v;
}

Potential trapOf(const SystemParams& params) {
  return Potential{params.trapCoefficient};
}

void normalize(Field& f, const Grid1D& grid) {
  const double n = norm2(f, grid);
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::invalid_argument("normalize: field has zero or invalid norm");
  const double s = 1.0 / std::sqrt(n);
  for (auto& v : f) v *= s;
}

GPState sechSoliton(const SystemParams& params, const Grid1D& grid) {
  const double g = params.gamma;
  if (!(g > 0.0)) throw std::invalid_argument("sechSoliton: gamma must be > 0");
  if (g * grid.length() < 20.0)
    throw std::invalid_argument("sechSoliton: gamma*L < 20, tails not contained");
  GPState s;
  s.orbital.resize(grid.size());
  const double amp = std::sqrt(0.5 * g);
  for (std::size_t i = 0; i < grid.size(); ++i)
    s.orbital[i] = amp / std::cosh(g * grid.x(i));
  normalize(s.orbital, grid);
  return s;
}

Field oddPartnerSeed(double gamma, const Grid1D& grid) {
  Field f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = gamma * grid.x(i);
    f[i] = std::tanh(u) / std::cosh(u);
  }
  return f;
}

MB2State mb2FromGP(const GPState& gp, const Field& seed, int particles,
                   const Grid1D& grid) {
  if (particles < 2) throw std::invalid_argument("mb2FromGP: need N >= 2");
  if (seed.size() != grid.size() || gp.orbital.size() != grid.size())
    throw std::invalid_argument("mb2FromGP: field size mismatch");
  MB2State s;
  s.orbitals[0] = gp.orbital;
  normalize(s.orbitals[0], grid);
  Field phi2 = seed;
  const cplx ov = inner(s.orbitals[0], phi2, grid);
  for (std::size_t i = 0; i < phi2.size(); ++i) phi2[i] -= ov * s.orbitals[0][i];
  if (std::sqrt(norm2(phi2, grid)) < 1e-8)
    throw std::invalid_argument("mb2FromGP: seed is degenerate with phi_1");
  normalize(phi2, grid);
  s.orbitals[1] = std::move(phi2);
  s.coefficients.assign(static_cast<std::size_t>(particles) + 1, 0.0);
  s.coefficients[0] = 1.0;
  s.time = gp.time;
  return s;
}

TwoHump twoHumpOrbitals(double gamma, double separation, const Grid1D& grid) {
  if (!(gamma * separation > 8.0))
    throw std::invalid_argument("twoHumpOrbitals: humps not well separated (d*gamma <= 8)");
  TwoHump out;
  out.gerade.resize(grid.size());
  out.ungerade.resize(grid.size());
  const double h = 0.5 * separation;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double right = 1.0 / std::cosh(gamma * (x - h));
    const double left = 1.0 / std::cosh(gamma * (x + h));
    out.gerade[i] = right + left;
    out.ungerade[i] = right - left;
  }
  normalize(out.gerade, grid);
  normalize(out.ungerade, grid);
  return out;
}

MB2State fockState(int n1, int n2, const Field& phi1, const Field& phi2,
                   const Grid1D& grid) {
  if (n1 < 0 || n2 < 0 || n1 + n2 < 2)
    throw std::invalid_argument("fockState: occupations must be >= 0 with N >= 2");
  MB2State s;
  s.orbitals = {phi1, phi2};
  s.coefficients.assign(static_cast<std::size_t>(n1 + n2) + 1, 0.0);
  s.coefficients[static_cast<std::size_t>(n2)] = 1.0;
  validate(s, grid, 1e-9);
  return s;
}

void validate(const GPState& s, const Grid1D& grid, double tol) {
  if (s.orbital.size() != grid.size())
    throw std::invalid_argument("GPState: orbital size does not match grid");
  const double n = norm2(s.orbital, grid);
  if (!std::isfinite(n) || std::abs(n - 1.0) > tol)
    throw std::invalid_argument("GPState: norm " + std::to_string(n) + " != 1");
}

void validate(const MB2State& s, const Grid1D& grid, double tol) {
  for (const auto& o : s.orbitals)
    if (o.size() != grid.size())
      throw std::invalid_argument("MB2State: orbital size does not match grid");
  if (s.coefficients.size() < 3)
    throw std::invalid_argument("MB2State: need N >= 2");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const cplx ov = inner(s.orbitals[i], s.orbitals[j], grid);
      const double target = i == j ? 1.0 : 0.0;
      if (!(std::abs(ov - target) <= tol))
        throw std::invalid_argument("MB2State: orbitals not orthonormal, <" +
                                    std::to_string(i + 1) + "|" +
                                    std::to_string(j + 1) + "> off by " +
                                    std::to_string(std::abs(ov - target)));
    }
  double c = 0.0;
  for (const auto& v : s.coefficients) c += std::norm(v);
  if (!(std::abs(c - 1.0) <= tol))
    throw std::invalid_argument("MB2State: CI norm " + std::to_string(c) + " != 1");
}

}  // namespace mwi
