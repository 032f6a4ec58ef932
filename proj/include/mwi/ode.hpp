#pragma once

// Adaptive Dormand-Prince 5(4) for complex-valued first-order systems, with
// an optional integrating factor (Lawson form) for a linear part L frozen at
// the start of each step.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mwi {

class DormandPrince {
 public:
  using State = std::vector<std::complex<double>>;
  using Rhs = std::function<void(double t, const State& y, State& dydt)>;

  /// The stepper integrates y' = f(y) as y' = L y + (f(y) - L y), treating
  /// exp(tau L) exactly. freeze(t, y) fixes L for the coming step; flow
  /// applies exp(tau L) in place; generator writes L y.
  struct LinearPart {
    std::function<void(double t, const State& y)> freeze;
    std::function<void(State& v, double tau)> flow;
    std::function<void(const State& y, State& ly)> generator;
  };

  struct Stats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
  };

  DormandPrince(Rhs rhs, double rtol, double atol, double initialStep)
      : rhs_(std::move(rhs)), rtol_(rtol), atol_(atol), h_(initialStep) {
    if (!(rtol > 0.0) || !(atol > 0.0) || !(initialStep > 0.0))
      throw std::invalid_argument("DormandPrince: tolerances and step must be positive");
  }

  /// Advances y from t to tTarget exactly. Throws if the step size
  /// collapses or maxSteps is exceeded.
  void integrate(double& t, State& y, double tTarget, long maxSteps = 100'000'000);

  /// Splits the state into consecutive blocks; the step error is the largest
  /// per-block RMS. Sizes must sum to the state length. Empty: one block.
  void setBlocks(std::vector<std::size_t> sizes) { blocks_ = std::move(sizes); }

  void setLinearPart(LinearPart lp) { linear_ = std::move(lp); }

  /// Applied to y after every accepted step, e.g. to restore invariants the
  /// scheme only keeps to truncation error. The stored f(y) is not refreshed.
  void setProjection(std::function<void(State& y)> p) { projection_ = std::move(p); }

  const Stats& stats() const { return stats_; }
  double stepSize() const { return h_; }

 private:
  void ensureWorkspace(std::size_t n);
  // k <- exp(-c h L) (f(Y) - L Y) where Y = exp(c h L) v; v is overwritten by Y
  void stage(double t, double c, double h, State& v, State& k);

  Rhs rhs_;
  double rtol_;
  double atol_;
  double h_;
  double errOld_ = 1e-4;
  bool haveF_ = false;  // fsal_ holds f(y) for the current (t, y)
  Stats stats_;
  std::vector<std::size_t> blocks_;
  LinearPart linear_;
  std::function<void(State&)> projection_;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, fsal_, ly_;
};

}  // namespace mwi
