#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mwi/grid.hpp"
#include "mwi/states.hpp"

namespace mwi {

struct PropagatorConfig {
  double dt = 5e-4;          // split-step size (GP); initial step (MB2)
  double tEnd = 0.0;         // absolute target time
  double rtol = 1e-8;
  double atol = 1e-10;
  double epsReg = 1e-8;      // density-matrix eigenvalue floor, times N
  double snapshotStride = 0.05;
  bool storeDensity = true;  // keep full density per snapshot

  double normDriftLimit = 1e-6;
  double orthoDriftLimit = 1e-6;
  double energyDriftLimit = 1e-5;  // relative, MB2 only
  long maxSteps = 50'000'000;

  // imaginary time
  double relaxTolerance = 1e-10;  // |dE| per unit imaginary time
  long maxRelaxSteps = 2'000'000;

  void validate(const Grid1D& grid, double maxPotential) const;
};

struct Snapshot {
  double t = 0.0;
  double norm = 1.0;
  double energy = 0.0;
  double n1 = 1.0;
  double n2 = 0.0;
  double centroid = 0.0;
  double centralDensity = 0.0;
  double orthoError = 0.0;
  RealField density;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  long steps = 0;     // accepted integrator steps
  long rejected = 0;  // adaptive solver only
  // MB2: largest CI-norm or orbital-overlap defect removed after one step
  double maxStepDefect = 0.0;
  double t0() const { return snapshots.empty() ? 0.0 : snapshots.front().t; }
};

/// Raised by propagators when an invariant monitor trips.
class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Window-averaged density over |x| < 1/gamma.
double centralDensity(const RealField& rho, const Grid1D& grid, double gamma);

double energy(const GPState& s, const Potential& v, const SystemParams& params,
              const Grid1D& grid);
/// Energy per particle.
double energy(const MB2State& s, const Potential& v, const SystemParams& params,
              const Grid1D& grid);

/// Strang split-step evolution of i phi_t = [-1/2 d_xx + V + Lambda |phi|^2] phi
/// from s.time to cfg.tEnd.
std::pair<GPState, Trajectory> gpPropagate(const GPState& s, const Potential& v,
                                           const SystemParams& params,
                                           const Grid1D& grid,
                                           const PropagatorConfig& cfg);

struct RelaxResult {
  GPState state;
  double energy = 0.0;
  long steps = 0;
};
/// Imaginary-time split-step with renormalization until |dE/dtau| falls
/// below cfg.relaxTolerance.
RelaxResult gpRelax(const GPState& seed, const Potential& v,
                    const SystemParams& params, const Grid1D& grid,
                    const PropagatorConfig& cfg);

/// Coupled orbital + CI integration of the two-orbital equations of motion in
/// the gauge <phi_j | d_t phi_k> = 0, by adaptive Dormand-Prince 5(4). The
/// diagonal of the CI Hamiltonian is integrated exactly across each step.
std::pair<MB2State, Trajectory> mb2Propagate(const MB2State& s,
                                             const Potential& v,
                                             const SystemParams& params,
                                             const Grid1D& grid,
                                             const PropagatorConfig& cfg);

/// Time derivative of an MB2 state (orbitals then CI), exposed for gauge and
/// consistency checks.
struct MB2Derivative {
  std::array<Field, 2> orbitals;
  std::vector<cplx> coefficients;
};
MB2Derivative mb2Derivative(const MB2State& s, const Potential& v,
                            const SystemParams& params, const Grid1D& grid,
                            double epsReg = 1e-8);

}  // namespace mwi
