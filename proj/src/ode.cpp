#include "mwi/ode.hpp"

#include <algorithm>
#include <string>

namespace mwi {

namespace {
// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// error coefficients: 5th minus embedded 4th order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;  // PI controller memory
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
}  // namespace

void DormandPrince::ensureWorkspace(std::size_t n) {
  for (State* s : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &fsal_, &ly_})
    if (s->size() != n) s->assign(n, 0.0);
}

void DormandPrince::stage(double t, double c, double h, State& v, State& k) {
  const bool lin = static_cast<bool>(linear_.flow);
  if (lin && c != 0.0) linear_.flow(v, c * h);
  rhs_(t + c * h, v, k);
  ++stats_.evaluations;
  if (!lin) return;
  linear_.generator(v, ly_);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] -= ly_[i];
  if (c != 0.0) linear_.flow(k, -c * h);
}

void DormandPrince::integrate(double& t, State& y, double tTarget,
                              long maxSteps) {
  const std::size_t n = y.size();
  if (!blocks_.empty()) {
    std::size_t total = 0;
    for (auto b : blocks_) total += b;
    if (total != n) throw std::invalid_argument("DormandPrince: block sizes do not cover the state");
  }
  const bool lin = static_cast<bool>(linear_.flow);
  if (lin && (!linear_.freeze || !linear_.generator))
    throw std::invalid_argument("DormandPrince: incomplete linear part");
  ensureWorkspace(n);
  haveF_ = false;
  long steps = 0;
  while (t < tTarget) {
    if (++steps > maxSteps)
      throw std::runtime_error("DormandPrince: step limit exceeded at t=" +
                               std::to_string(t));
    const double remaining = tTarget - t;
    bool last = false;
    double h = h_;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      last = true;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("DormandPrince: step size underflow at t=" +
                               std::to_string(t));

    if (lin) linear_.freeze(t, y);
    if (!haveF_) {
      rhs_(t, y, fsal_);
      ++stats_.evaluations;
      haveF_ = true;
    }
    k1_ = fsal_;
    if (lin) {
      linear_.generator(y, ly_);
      for (std::size_t i = 0; i < n; ++i) k1_[i] -= ly_[i];
    }

    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * a21 * k1_[i];
    stage(t, c2, h, ytmp_, k2_);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    stage(t, c3, h, ytmp_, k3_);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    stage(t, c4, h, ytmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] +
                             a54 * k4_[i]);
    stage(t, c5, h, ytmp_, k5_);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] +
                             a64 * k4_[i] + a65 * k5_[i]);
    stage(t, 1.0, h, ytmp_, k6_);
    // 5th-order solution in the frame of the step start
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] +
                             a75 * k5_[i] + a76 * k6_[i]);
    ytmp_ = ynew_;
    stage(t, 1.0, h, ytmp_, k7_);  // ytmp_ now holds the propagated solution

    double err = 0.0;
    std::size_t begin = 0;
    for (std::size_t b = 0; b < std::max<std::size_t>(blocks_.size(), 1); ++b) {
      const std::size_t end = blocks_.empty() ? n : begin + blocks_[b];
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] +
                            e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        const double scale =
            atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(ynew_[i]));
        acc += std::norm(e) / (scale * scale);
      }
      // written so a NaN block is not dropped by the comparison
      if (end > begin) {
        const double blockErr = std::sqrt(acc / static_cast<double>(end - begin));
        if (!(blockErr <= err)) err = blockErr;
      }
      begin = end;
    }
    // an overflowing trial step is rejected like any other; the underflow
    // check above ends the retries if the problem is not the step size
    if (!std::isfinite(err)) {
      ++stats_.rejected;
      h_ = h * kMinFactor;
      continue;
    }

    if (err <= 1.0) {
      ++stats_.accepted;
      t = last ? tTarget : t + h;
      y.swap(ytmp_);
      // f at the new point: k7 + L y, rotated back from the start frame
      if (lin) {
        linear_.flow(k7_, h);
        linear_.generator(y, ly_);
        for (std::size_t i = 0; i < n; ++i) fsal_[i] = k7_[i] + ly_[i];
      } else {
        fsal_.swap(k7_);
      }
      haveF_ = true;
      if (projection_) projection_(y);
      const double e = std::max(err, 1e-10);
      double factor = kSafety * std::pow(e, -(0.2 - 0.75 * kBeta)) *
                      std::pow(errOld_, kBeta);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      errOld_ = e;
      // a truncated final step says nothing about the natural step size
      if (!last) h_ = h * factor;
    } else {
      ++stats_.rejected;
      const double factor =
          std::max(kMinFactor, kSafety * std::pow(err, -0.2));
      h_ = h * factor;
    }
  }
}

}  // namespace mwi
