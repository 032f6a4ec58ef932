#include "mwi/pulses.hpp"

#include <cmath>
#include <stdexcept>

namespace mwi {

cplx Pulse::multiplier(double x) const {
  const cplx forward = std::polar(1.0, k * x);
  if (form == PulseForm::Boost) return forward;
  return forward + std::polar(1.0, -k * x - chi);
}

bool onMomentumGrid(const Pulse& p, const Grid1D& grid, double tol) {
  const double ratio = p.k / grid.dp();
  return std::abs(ratio - std::round(ratio)) <= tol * std::max(1.0, std::abs(ratio));
}

GPState applyPulseGP(const GPState& s, const Pulse& p, const Grid1D& grid) {
  GPState out = s;
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.orbital[i] *= p.multiplier(grid.x(i));
  normalize(out.orbital, grid);
  return out;
}

MB2State applyPulseMB(const MB2State& s, const Pulse& p, const Grid1D& grid,
                      double* gramSchmidtCorrection) {
  MB2State out = s;
  for (auto& orb : out.orbitals)
    for (std::size_t i = 0; i < grid.size(); ++i) orb[i] *= p.multiplier(grid.x(i));

  normalize(out.orbitals[0], grid);
  normalize(out.orbitals[1], grid);
  const cplx ov = inner(out.orbitals[0], out.orbitals[1], grid);
  if (std::abs(ov) > 0.5)
    throw std::runtime_error(
        "applyPulseMB: pulsed orbitals overlap by " + std::to_string(std::abs(ov)) +
        "; fixed CI coefficients are not valid for this pulse");
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.orbitals[1][i] -= ov * out.orbitals[0][i];
  normalize(out.orbitals[1], grid);
  if (gramSchmidtCorrection) *gramSchmidtCorrection = std::abs(ov);

  double c = 0.0;
  for (const auto& v : out.coefficients) c += std::norm(v);
  const double scale = 1.0 / std::sqrt(c);
  for (auto& v : out.coefficients) v *= scale;
  return out;
}

ChannelWeights pulseChannelAlgebra(double chi1, double chi2) {
  // (e^{ikx} + e^{-ikx-i chi1})(e^{ikx} + e^{-ikx-i chi2})
  //   = e^{2ikx} + (e^{-i chi1} + e^{-i chi2}) + e^{-2ikx - i(chi1+chi2)}
  const double plus = 1.0;
  const double zero = std::norm(std::polar(1.0, -chi1) + std::polar(1.0, -chi2));
  const double minus = 1.0;
  const double total = plus + zero + minus;
  return {minus / total, zero / total, plus / total};
}

std::string toString(PulseForm f) {
  return f == PulseForm::Boost ? "boost" : "splitter";
}

PulseForm pulseFormFromString(const std::string& s) {
  if (s == "splitter") return PulseForm::Splitter;
  if (s == "boost") return PulseForm::Boost;
  throw std::invalid_argument("unknown pulse form '" + s + "'");
}

}  // namespace mwi
