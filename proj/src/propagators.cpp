#include "mwi/propagators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "mwi/fock.hpp"
#include "mwi/observables.hpp"
#include "mwi/ode.hpp"

namespace mwi {

namespace {

bool allFinite(std::span<const cplx> f) {
  for (const auto& v : f)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

std::string at(double t) { return " at t=" + std::to_string(t); }

// Output times t0 < t1 < ... <= tEnd on the stride lattice, tEnd always last.
std::vector<double> outputTimes(double t0, double tEnd, double stride) {
  std::vector<double> times;
  for (long j = 1;; ++j) {
    const double t = t0 + static_cast<double>(j) * stride;
    if (t >= tEnd - 1e-9 * stride) break;
    times.push_back(t);
  }
  times.push_back(tEnd);
  return times;
}

}  // namespace

void PropagatorConfig::validate(const Grid1D& grid, double maxPotential) const {
  if (!(dt > 0.0)) throw std::invalid_argument("propagator: dt must be > 0");
  if (!(snapshotStride > 0.0))
    throw std::invalid_argument("propagator: snapshot stride must be > 0");
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw std::invalid_argument("propagator: tolerances must be > 0");
  if (!(epsReg > 0.0))
    throw std::invalid_argument("propagator: regularization must be > 0");
  const double kineticPhase = 0.5 * grid.maxMomentum() * grid.maxMomentum() * dt;
  if (!(kineticPhase < std::numbers::pi))
    throw std::invalid_argument("propagator: dt*max kinetic phase " +
                                std::to_string(kineticPhase) + " >= pi");
  if (!(maxPotential * dt < std::numbers::pi))
    throw std::invalid_argument("propagator: dt*max potential >= pi");
}

double centralDensity(const RealField& rho, const Grid1D& grid, double gamma) {
  const double half = 1.0 / gamma;
  return centralMass(rho, grid, half) / (2.0 * half);
}

// ---------------------------------------------------------------------------
// Gross-Pitaevskii

double energy(const GPState& s, const Potential& v, const SystemParams& params,
              const Grid1D& grid) {
  const Field kin = kineticApply(s.orbital, grid);
  const double lam = params.gpNonlinearity();
  double e = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::norm(s.orbital[i]);
    e += (std::conj(s.orbital[i]) * kin[i]).real() + v(grid.x(i)) * d +
         0.5 * lam * d * d;
  }
  return e * grid.dx() / norm2(s.orbital, grid);
}

namespace {

class SplitStep {
 public:
  SplitStep(const Grid1D& grid, const Potential& v, double lambda, bool imaginary)
      : grid_(grid), pot_(v.sample(grid)), lambda_(lambda), imaginary_(imaginary) {}

  void step(Field& phi, double h) {
    if (h != hKin_) {
      kin_.resize(grid_.size());
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double w = 0.5 * grid_.p(i) * grid_.p(i) * h;
        kin_[i] = imaginary_ ? cplx(std::exp(-w), 0.0) : std::polar(1.0, -w);
      }
      hKin_ = h;
    }
    halfPotential(phi, h);
    grid_.forward(phi, phi);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] *= kin_[i];
    grid_.inverse(phi, phi);
    halfPotential(phi, h);
  }

 private:
  void halfPotential(Field& phi, double h) const {
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double w = 0.5 * h * (pot_[i] + lambda_ * std::norm(phi[i]));
      phi[i] *= imaginary_ ? cplx(std::exp(-w), 0.0) : std::polar(1.0, -w);
    }
  }

  const Grid1D& grid_;
  RealField pot_;
  double lambda_;
  bool imaginary_;
  double hKin_ = -1.0;
  Field kin_;
};

Snapshot gpSnapshot(const GPState& s, const Potential& v,
                    const SystemParams& params, const Grid1D& grid,
                    bool storeDensity) {
  Snapshot snap;
  snap.t = s.time;
  RealField rho = density(s);
  snap.norm = integrate(rho, grid);
  snap.energy = energy(s, v, params, grid);
  snap.n1 = 1.0;
  snap.n2 = 0.0;
  snap.centroid = centroid(rho, grid) / snap.norm;
  snap.centralDensity = centralDensity(rho, grid, params.gamma) / snap.norm;
  if (storeDensity) snap.density = std::move(rho);
  return snap;
}

}  // namespace

std::pair<GPState, Trajectory> gpPropagate(const GPState& s, const Potential& v,
                                           const SystemParams& params,
                                           const Grid1D& grid,
                                           const PropagatorConfig& cfg) {
  validate(s, grid, 1e-9);
  const double vmax = std::max(v(grid.x(0)), v(-grid.x(0)));
  cfg.validate(grid, vmax);
  if (cfg.tEnd < s.time)
    throw std::invalid_argument("gpPropagate: tEnd precedes state time");

  GPState cur = s;
  Trajectory traj;
  traj.snapshots.push_back(gpSnapshot(cur, v, params, grid, cfg.storeDensity));
  if (cfg.tEnd == s.time) return {cur, traj};

  SplitStep stepper(grid, v, params.gpNonlinearity(), false);
  double tPrev = s.time;
  for (double tNext : outputTimes(s.time, cfg.tEnd, cfg.snapshotStride)) {
    const double span = tNext - tPrev;
    const long n = std::max(1L, static_cast<long>(std::ceil(span / cfg.dt - 1e-9)));
    const double h = span / static_cast<double>(n);
    for (long i = 0; i < n; ++i) stepper.step(cur.orbital, h);
    traj.steps += n;
    cur.time = tNext;
    tPrev = tNext;
    if (!allFinite(cur.orbital))
      throw PropagationError("gpPropagate: non-finite wavefunction" + at(tNext));
    Snapshot snap = gpSnapshot(cur, v, params, grid, cfg.storeDensity);
    if (std::abs(snap.norm - 1.0) > cfg.normDriftLimit)
      throw PropagationError("gpPropagate: norm drift " +
                             std::to_string(snap.norm - 1.0) + at(tNext));
    traj.snapshots.push_back(std::move(snap));
  }
  return {cur, traj};
}

RelaxResult gpRelax(const GPState& seed, const Potential& v,
                    const SystemParams& params, const Grid1D& grid,
                    const PropagatorConfig& cfg) {
  const double vmax = std::max(v(grid.x(0)), v(-grid.x(0)));
  cfg.validate(grid, vmax);
  GPState cur = seed;
  normalize(cur.orbital, grid);
  SplitStep stepper(grid, v, params.gpNonlinearity(), true);

  constexpr long kCheckEvery = 100;
  const double dtau = cfg.dt;
  double ePrev = energy(cur, v, params, grid);
  for (long step = 1; step <= cfg.maxRelaxSteps; ++step) {
    stepper.step(cur.orbital, dtau);
    normalize(cur.orbital, grid);
    if (step % kCheckEvery != 0) continue;
    if (!allFinite(cur.orbital))
      throw PropagationError("gpRelax: non-finite wavefunction");
    const double e = energy(cur, v, params, grid);
    const double rate = std::abs(e - ePrev) / (kCheckEvery * dtau);
    ePrev = e;
    if (rate < cfg.relaxTolerance) return {cur, e, step};
  }
  throw PropagationError("gpRelax: no convergence after " +
                         std::to_string(cfg.maxRelaxSteps) + " steps");
}

// ---------------------------------------------------------------------------
// Two-orbital many-body dynamics

namespace {

struct OrbitalIntegrals {
  Eigen::Matrix2cd h;
  fock::Tensor4 w;
};

Eigen::Matrix2cd regularizedInverse(const Eigen::Matrix2cd& rho, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
  Eigen::Vector2d inv;
  for (int i = 0; i < 2; ++i) inv(i) = 1.0 / std::max(es.eigenvalues()(i), floor);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

// Evaluates the right-hand side and the quantities it is built from. Holds
// scratch buffers; one instance per propagation.
class MB2System {
 public:
  MB2System(const Grid1D& grid, const Potential& v, const SystemParams& params,
            double epsReg)
      : grid_(grid),
        pot_(v.sample(grid)),
        lambda0_(params.lambda0),
        particles_(params.particles),
        epsReg_(epsReg) {
    for (auto& b : hphi_) b.resize(grid.size());
    for (auto& b : mean_) b.resize(grid.size());
  }

  std::size_t n() const { return grid_.size(); }

  OrbitalIntegrals integrals(const cplx* phi0, const cplx* phi1) {
    const std::array<const cplx*, 2> phi = {phi0, phi1};
    applyOneBody(phi);
    OrbitalIntegrals out;
    for (int k = 0; k < 2; ++k)
      for (int q = k; q < 2; ++q) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < n(); ++i) s += std::conj(phi[k][i]) * hphi_[q][i];
        out.h(k, q) = s * grid_.dx();
      }
    out.h(0, 0) = out.h(0, 0).real();
    out.h(1, 1) = out.h(1, 1).real();
    out.h(1, 0) = std::conj(out.h(0, 1));
    // W_ksql = lambda0 dx sum conj(phi_k phi_s) phi_q phi_l; symmetric in
    // (k,s) and (q,l) so three pair products suffice.
    std::array<cplx, 9> acc{};
    for (std::size_t i = 0; i < n(); ++i) {
      const std::array<cplx, 3> pair = {phi0[i] * phi0[i], phi0[i] * phi1[i],
                                        phi1[i] * phi1[i]};
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) acc[a * 3 + b] += std::conj(pair[a]) * pair[b];
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < a; ++b) acc[a * 3 + b] = std::conj(acc[b * 3 + a]);
    auto pairIndex = [](int i, int j) { return i + j; };  // 00->0, 01/10->1, 11->2
    const double scale = lambda0_ * grid_.dx();
    for (int k = 0; k < 2; ++k)
      for (int s = 0; s < 2; ++s)
        for (int q = 0; q < 2; ++q)
          for (int l = 0; l < 2; ++l)
            out.w(k, s, q, l) = scale * acc[pairIndex(k, s) * 3 + pairIndex(q, l)];
    return out;
  }

  void operator()(const std::vector<cplx>& y, std::vector<cplx>& dy) {
    const std::size_t ng = n();
    const cplx* phi0 = y.data();
    const cplx* phi1 = y.data() + ng;
    const std::span<const cplx> c(y.data() + 2 * ng, y.size() - 2 * ng);

    const OrbitalIntegrals ints = integrals(phi0, phi1);
    const Eigen::Matrix2cd rho1 = fock::oneBodyDensity(c);
    const fock::Tensor4 rho2 = fock::twoBodyDensity(c);
    const Eigen::Matrix2cd rinv =
        regularizedInverse(rho1, epsReg_ * static_cast<double>(particles_));

    // lambda0 sum_k rinv_jk G_k with G_k = sum_sql rho_ksql conj(phi_s) phi_q phi_l,
    // folded into m[j][s][pair] over the pair products phi0^2, phi0 phi1, phi1^2
    cplx m[2][2][3];
    for (int j = 0; j < 2; ++j)
      for (int s = 0; s < 2; ++s) {
        cplx a0 = 0.0, a1 = 0.0, a2 = 0.0;
        for (int k = 0; k < 2; ++k) {
          const cplx r = lambda0_ * rinv(j, k);
          a0 += r * rho2(k, s, 0, 0);
          a1 += r * (rho2(k, s, 0, 1) + rho2(k, s, 1, 0));
          a2 += r * rho2(k, s, 1, 1);
        }
        m[j][s][0] = a0;
        m[j][s][1] = a1;
        m[j][s][2] = a2;
      }
    const std::array<const cplx*, 2> phi = {phi0, phi1};
    for (std::size_t i = 0; i < ng; ++i) {
      const cplx f0 = phi0[i], f1 = phi1[i];
      const cplx p0 = f0 * f0, p1 = f0 * f1, p2 = f1 * f1;
      const cplx c0 = std::conj(f0), c1 = std::conj(f1);
      for (int j = 0; j < 2; ++j)
        mean_[j][i] = hphi_[j][i] +
                      c0 * (m[j][0][0] * p0 + m[j][0][1] * p1 + m[j][0][2] * p2) +
                      c1 * (m[j][1][0] * p0 + m[j][1][1] * p1 + m[j][1][2] * p2);
    }

    // projector onto the orthogonal complement of the orbital space
    for (int j = 0; j < 2; ++j) {
      std::array<cplx, 2> ov{};
      for (int m = 0; m < 2; ++m) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < ng; ++i) s += std::conj(phi[m][i]) * mean_[j][i];
        ov[m] = s * grid_.dx();
      }
      cplx* out = dy.data() + static_cast<std::size_t>(j) * ng;
      const cplx minusI(0.0, -1.0);
      for (std::size_t i = 0; i < ng; ++i)
        out[i] = minusI * (mean_[j][i] - ov[0] * phi0[i] - ov[1] * phi1[i]);
    }

    const auto hc = fock::applyHamiltonian(c, ints.h, ints.w);
    for (std::size_t m = 0; m < hc.size(); ++m)
      dy[2 * ng + m] = cplx(0.0, -1.0) * hc[m];
  }

  // <N-m, m| H |N-m, m> for the orbitals in y
  void ciDiagonal(const std::vector<cplx>& y, std::vector<double>& d) {
    const std::size_t ng = n();
    const OrbitalIntegrals ints = integrals(y.data(), y.data() + ng);
    const double h0 = ints.h(0, 0).real(), h1 = ints.h(1, 1).real();
    const double w00 = ints.w(0, 0, 0, 0).real(), w11 = ints.w(1, 1, 1, 1).real();
    const double w01 = (ints.w(0, 1, 0, 1) + ints.w(0, 1, 1, 0) + ints.w(1, 0, 0, 1) +
                        ints.w(1, 0, 1, 0)).real();
    const double nn = static_cast<double>(particles_);
    d.resize(y.size() - 2 * ng);
    for (std::size_t m = 0; m < d.size(); ++m) {
      const double b = static_cast<double>(m), a = nn - b;
      d[m] = a * h0 + b * h1 + 0.5 * (a * (a - 1.0) * w00 + b * (b - 1.0) * w11 + a * b * w01);
    }
  }

  double energyPerParticle(const MB2State& s) {
    const OrbitalIntegrals ints = integrals(s.orbitals[0].data(), s.orbitals[1].data());
    const double e = fock::energy(fock::oneBodyDensity(s.coefficients),
                                  fock::twoBodyDensity(s.coefficients), ints.h, ints.w);
    double cn = 0.0;
    for (const auto& v : s.coefficients) cn += std::norm(v);
    return e / (static_cast<double>(particles_) * cn);
  }

 private:
  void applyOneBody(const std::array<const cplx*, 2>& phi) {
    for (int j = 0; j < 2; ++j) {
      Field& b = hphi_[j];
      std::copy(phi[j], phi[j] + n(), b.begin());
      grid_.forward(b, b);
      for (std::size_t i = 0; i < n(); ++i) b[i] *= 0.5 * grid_.p(i) * grid_.p(i);
      grid_.inverse(b, b);
      for (std::size_t i = 0; i < n(); ++i) b[i] += pot_[i] * phi[j][i];
    }
  }

  const Grid1D& grid_;
  RealField pot_;
  double lambda0_;
  int particles_;
  double epsReg_;
  std::array<Field, 2> hphi_;
  std::array<Field, 2> mean_;
};

std::vector<cplx> pack(const MB2State& s) {
  std::vector<cplx> y;
  y.reserve(2 * s.orbitals[0].size() + s.coefficients.size());
  for (const auto& o : s.orbitals) y.insert(y.end(), o.begin(), o.end());
  y.insert(y.end(), s.coefficients.begin(), s.coefficients.end());
  return y;
}

void unpack(const std::vector<cplx>& y, MB2State& s) {
  const std::size_t ng = s.orbitals[0].size();
  std::copy(y.begin(), y.begin() + ng, s.orbitals[0].begin());
  std::copy(y.begin() + ng, y.begin() + 2 * ng, s.orbitals[1].begin());
  std::copy(y.begin() + 2 * ng, y.end(), s.coefficients.begin());
}

double orthoError(const MB2State& s, const Grid1D& grid) {
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const cplx ov = inner(s.orbitals[i], s.orbitals[j], grid);
      worst = std::max(worst, std::abs(ov - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

Snapshot mb2Snapshot(const MB2State& s, MB2System& sys, const SystemParams& params,
                     const Grid1D& grid, bool storeDensity) {
  Snapshot snap;
  snap.t = s.time;
  double cn = 0.0;
  for (const auto& v : s.coefficients) cn += std::norm(v);
  snap.norm = cn;
  snap.energy = sys.energyPerParticle(s);
  const auto occ = naturalOccupations(s);
  snap.n1 = occ.n1;
  snap.n2 = occ.n2;
  RealField rho = density(s);
  const double mass = integrate(rho, grid);
  snap.centroid = centroid(rho, grid) / mass;
  snap.centralDensity = centralDensity(rho, grid, params.gamma) / mass;
  snap.orthoError = orthoError(s, grid);
  if (storeDensity) snap.density = std::move(rho);
  return snap;
}

}  // namespace

double energy(const MB2State& s, const Potential& v, const SystemParams& params,
              const Grid1D& grid) {
  MB2System sys(grid, v, params, 1e-8);
  return sys.energyPerParticle(s);
}

MB2Derivative mb2Derivative(const MB2State& s, const Potential& v,
                            const SystemParams& params, const Grid1D& grid,
                            double epsReg) {
  MB2System sys(grid, v, params, epsReg);
  const auto y = pack(s);
  std::vector<cplx> dy(y.size());
  sys(y, dy);
  MB2Derivative d;
  const std::size_t ng = grid.size();
  d.orbitals[0].assign(dy.begin(), dy.begin() + ng);
  d.orbitals[1].assign(dy.begin() + ng, dy.begin() + 2 * ng);
  d.coefficients.assign(dy.begin() + 2 * ng, dy.end());
  return d;
}

std::pair<MB2State, Trajectory> mb2Propagate(const MB2State& s,
                                             const Potential& v,
                                             const SystemParams& params,
                                             const Grid1D& grid,
                                             const PropagatorConfig& cfg) {
  // a state handed over from an earlier leg may carry drift up to the limits
  validate(s, grid, std::max(cfg.normDriftLimit, cfg.orthoDriftLimit));
  if (s.particles() != params.particles)
    throw std::invalid_argument("mb2Propagate: CI length does not match N");
  if (cfg.tEnd < s.time)
    throw std::invalid_argument("mb2Propagate: tEnd precedes state time");
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0) || !(cfg.snapshotStride > 0.0))
    throw std::invalid_argument("mb2Propagate: invalid tolerances or stride");

  MB2System sys(grid, v, params, cfg.epsReg);
  MB2State cur = s;
  Trajectory traj;
  traj.snapshots.push_back(mb2Snapshot(cur, sys, params, grid, cfg.storeDensity));
  if (cfg.tEnd == s.time) return {cur, traj};

  const double e0 = traj.snapshots.front().energy;
  const double eScale = std::max(std::abs(e0), 1e-3);
  DormandPrince ode(
      [&sys](double, const std::vector<cplx>& y, std::vector<cplx>& dy) { sys(y, dy); },
      cfg.rtol, cfg.atol, std::min(cfg.dt, cfg.snapshotStride));
  ode.setBlocks({2 * grid.size(), cur.coefficients.size()});
  // the CI diagonal spans hundreds in frequency once the orbitals differ in
  // kinetic energy; it is applied exactly over each step
  const std::size_t ciOffset = 2 * grid.size();
  std::vector<double> diag;
  ode.setLinearPart(
      {[&](double, const std::vector<cplx>& y) { sys.ciDiagonal(y, diag); },
       [&](std::vector<cplx>& v, double tau) {
         for (std::size_t m = 0; m < diag.size(); ++m)
           v[ciOffset + m] *= std::polar(1.0, -diag[m] * tau);
       },
       [&](const std::vector<cplx>& y, std::vector<cplx>& ly) {
         std::fill(ly.begin(), ly.begin() + static_cast<std::ptrdiff_t>(ciOffset), cplx(0.0));
         for (std::size_t m = 0; m < diag.size(); ++m)
           ly[ciOffset + m] = cplx(0.0, -diag[m]) * y[ciOffset + m];
       }});
  // Restore sum |C|^2 = 1 and orthonormal orbitals (symmetric
  // orthonormalization) after each step; the removed defect is monitored.
  const std::size_t n = grid.size();
  ode.setProjection([&](std::vector<cplx>& y) {
    Eigen::Matrix2cd S;
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::conj(y[a * n + i]) * y[b * n + i];
        S(a, b) = acc * grid.dx();
        if (a != b) S(b, a) = std::conj(S(a, b));
      }
    double c2 = 0.0;
    for (std::size_t m = ciOffset; m < y.size(); ++m) c2 += std::norm(y[m]);
    const double orthoDefect = (S - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    const double normDefect = std::abs(c2 - 1.0);
    traj.maxStepDefect = std::max({traj.maxStepDefect, orthoDefect, normDefect});
    if (normDefect > cfg.normDriftLimit || orthoDefect > cfg.orthoDriftLimit)
      throw PropagationError("step defect " + std::to_string(std::max(normDefect, orthoDefect)));

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(S);
    const Eigen::Matrix2cd X = es.eigenvectors() *
                               es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                               es.eigenvectors().adjoint();
    for (std::size_t i = 0; i < n; ++i) {
      const cplx u = y[i], w = y[n + i];
      y[i] = u * X(0, 0) + w * X(1, 0);
      y[n + i] = u * X(0, 1) + w * X(1, 1);
    }
    const double inv = 1.0 / std::sqrt(c2);
    for (std::size_t m = ciOffset; m < y.size(); ++m) y[m] *= inv;
  });

  std::vector<cplx> y = pack(cur);
  double t = cur.time;
  for (double tNext : outputTimes(s.time, cfg.tEnd, cfg.snapshotStride)) {
    try {
      ode.integrate(t, y, tNext, cfg.maxSteps);
    } catch (const std::runtime_error& e) {
      throw PropagationError(std::string("mb2Propagate: ") + e.what());
    }
    unpack(y, cur);
    cur.time = tNext;
    if (!allFinite(y))
      throw PropagationError("mb2Propagate: non-finite state" + at(tNext));
    Snapshot snap = mb2Snapshot(cur, sys, params, grid, cfg.storeDensity);
    if (std::abs(snap.norm - 1.0) > cfg.normDriftLimit)
      throw PropagationError("mb2Propagate: CI norm drift " +
                             std::to_string(snap.norm - 1.0) + at(tNext));
    if (snap.orthoError > cfg.orthoDriftLimit)
      throw PropagationError("mb2Propagate: orbital orthonormality drift " +
                             std::to_string(snap.orthoError) + at(tNext));
    if (std::abs(snap.energy - e0) / eScale > cfg.energyDriftLimit)
      throw PropagationError("mb2Propagate: energy drift " +
                             std::to_string(snap.energy - e0) + at(tNext));
    traj.snapshots.push_back(std::move(snap));
  }
  traj.steps = ode.stats().accepted;
  traj.rejected = ode.stats().rejected;
  return {cur, traj};
}

}  // namespace mwi
