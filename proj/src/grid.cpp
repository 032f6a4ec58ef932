#include "mwi/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mwi {

namespace {
// FFTW's planner is not reentrant; execution with the new-array interface is.
std::mutex& plannerMutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftPlans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit FftPlans(std::size_t n) {
    std::lock_guard lock(plannerMutex());
    auto* buf = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags);
    bwd = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    if (!fwd || !bwd) throw std::runtime_error("grid: FFTW planning failed");
  }
  ~FftPlans() {
    std::lock_guard lock(plannerMutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

Grid1D::Grid1D(double length, std::size_t points)
    : length_(length), points_(points), dx_(0.0) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("grid: length must be positive and finite");
  if (points < 8)
    throw std::invalid_argument("grid: need at least 8 points");
  if ((points & (points - 1)) != 0)
    throw std::invalid_argument("grid: point count " + std::to_string(points) +
                                " is not a power of two");
  dx_ = length / static_cast<double>(points);
  x_.resize(points);
  p_.resize(points);
  const double dp = 2.0 * std::numbers::pi / length;
  const auto n = static_cast<long>(points);
  for (long i = 0; i < n; ++i) {
    x_[i] = -0.5 * length + static_cast<double>(i) * dx_;
    const long j = i < n / 2 ? i : i - n;
    p_[i] = dp * static_cast<double>(j);
  }
  plans_ = std::make_shared<const FftPlans>(points);
}

double Grid1D::dp() const { return 2.0 * std::numbers::pi / length_; }

double Grid1D::maxMomentum() const { return std::numbers::pi / dx_; }

void Grid1D::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != points_ || out.size() != points_)
    throw std::invalid_argument("grid: transform size mismatch");
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plans_->fwd, p, p);
}

void Grid1D::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != points_ || out.size() != points_)
    throw std::invalid_argument("grid: transform size mismatch");
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plans_->bwd, p, p);
  const double scale = 1.0 / static_cast<double>(points_);
  for (auto& v : out) v *= scale;
}

void Grid1D::checkResolution(double k, double gamma) const {
  const double needed = 2.0 * std::abs(k) + 10.0 / gamma;
  if (!(maxMomentum() > needed))
    throw std::invalid_argument(
        "grid: momentum cutoff " + std::to_string(maxMomentum()) +
        " does not exceed 2k + 10/gamma = " + std::to_string(needed));
}

Grid1D makeGrid(double length, std::size_t points) {
  return Grid1D(length, points);
}

double integrate(std::span<const double> f, const Grid1D& g) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * g.dx();
}

cplx integrate(std::span<const cplx> f, const Grid1D& g) {
  cplx s = 0.0;
  for (const auto& v : f) s += v;
  return s * g.dx();
}

double norm2(std::span<const cplx> f, const Grid1D& g) {
  double s = 0.0;
  for (const auto& v : f) s += std::norm(v);
  return s * g.dx();
}

cplx inner(std::span<const cplx> f, std::span<const cplx> g,
           const Grid1D& grid) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * g[i];
  return s * grid.dx();
}

Field kineticApply(std::span<const cplx> f, const Grid1D& g) {
  Field out(f.begin(), f.end());
  g.forward(out, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= 0.5 * g.p(i) * g.p(i);
  g.inverse(out, out);
  return out;
}

Field momentumAmplitude(std::span<const cplx> f, const Grid1D& g) {
  Field out(f.begin(), f.end());
  g.forward(out, out);
  // x_0 = -L/2 contributes the phase exp(i p L/2).
  const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
  const double x0 = g.x(0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= scale * std::polar(1.0, -g.p(i) * x0);
  return out;
}

RealField fourierDensity(std::span<const cplx> f, const Grid1D& g) {
  const Field amp = momentumAmplitude(f, g);
  RealField out(amp.size());
  for (std::size_t i = 0; i < amp.size(); ++i) out[i] = std::norm(amp[i]);
  return out;
}

}  // namespace mwi
