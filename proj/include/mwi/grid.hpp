#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mwi {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;
using RealField = std::vector<double>;

struct FftPlans;

/// Uniform periodic grid on [-L/2, L/2) with its discrete conjugate momentum
/// grid in FFT ordering. Immutable; copies share the transform plans.
class Grid1D {
 public:
  Grid1D(double length, std::size_t points);

  double length() const { return length_; }
  std::size_t size() const { return points_; }
  double dx() const { return dx_; }
  double dp() const;
  double maxMomentum() const;

  double x(std::size_t i) const { return x_[i]; }
  double p(std::size_t i) const { return p_[i]; }
  const RealField& positions() const { return x_; }
  const RealField& momenta() const { return p_; }

  /// Unnormalized DFT, out_j = sum_i in_i exp(-2 pi i ij/n).
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  /// Inverse of forward(), including the 1/n factor.
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

  /// Throws if pulses of momentum k cannot be resolved for a soliton of
  /// inverse width gamma: requires pi/dx > 2k + 10/gamma.
  void checkResolution(double k, double gamma) const;

 private:
  double length_;
  std::size_t points_;
  double dx_;
  RealField x_;
  RealField p_;
  std::shared_ptr<const FftPlans> plans_;
};

Grid1D makeGrid(double length, std::size_t points);

/// dx * sum f_i
double integrate(std::span<const double> f, const Grid1D& g);
cplx integrate(std::span<const cplx> f, const Grid1D& g);

/// dx * sum |f_i|^2
double norm2(std::span<const cplx> f, const Grid1D& g);
/// <f|g> = dx * sum conj(f_i) g_i
cplx inner(std::span<const cplx> f, std::span<const cplx> g, const Grid1D& grid);

/// -1/2 f'' evaluated spectrally.
Field kineticApply(std::span<const cplx> f, const Grid1D& g);

/// Continuous-normalized momentum amplitude
/// f~(p_j) = dx/sqrt(2 pi) sum_i f_i exp(-i p_j x_i), in FFT ordering.
Field momentumAmplitude(std::span<const cplx> f, const Grid1D& g);

/// |f~(p)|^2 in FFT ordering; dp * sum equals dx * sum |f|^2.
RealField fourierDensity(std::span<const cplx> f, const Grid1D& g);

}  // namespace mwi
