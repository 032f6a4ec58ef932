#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwi/grid.hpp"
#include "mwi/observables.hpp"
#include "mwi/propagators.hpp"
#include "mwi/pulses.hpp"
#include "mwi/states.hpp"

namespace mwi {

enum class Solver { GP, MB2 };

std::string toString(Solver s);
Solver solverFromString(const std::string& s);

struct ProtocolConfig {
  SystemParams system;
  double gridLength = 128.0;
  std::size_t gridPoints = 1024;
  Solver solver = Solver::GP;
  Pulse pulse1{5.0, std::numbers::pi, PulseForm::Splitter};
  Pulse pulse2{5.0, std::numbers::pi, PulseForm::Splitter};
  bool pulse2Enabled = true;
  int recollisionIndex = 1;
  double recollisionWindow = 0.1;  // width of the t_rc uncertainty band
  double tSep = 4.0;
  PropagatorConfig integrator;
  std::string outputDir;  // empty: no files written

  Grid1D makeGrid() const;
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

struct ProtocolReport {
  Solver solver = Solver::GP;
  int recollisionIndex = 1;
  double tRecollision = 0.0;
  std::optional<NaturalOccupations> occupations;  // at t_rc, MB2 only
  ChannelPopulations channels;          // position windows after t_sep
  ChannelPopulations momentumChannels;  // momentum bins right after pulse 2
  double visibility = 0.0;
  std::optional<double> n2Interferometric;  // absent when nu is out of model
  std::optional<double> discrepancy;        // |n2_intf - n2|, MB2 only
  std::map<std::string, std::string> files;
};

/// Split at t = 0, evolve to the detected j-th re-collision, recombine,
/// separate for t_sep and measure the momentum channels.
ProtocolReport runFullProtocol(const ProtocolConfig& cfg);

/// Channel populations and visibility of the Fock state |n1, n2> over an
/// (ungerade, gerade) pair after a recombining pulse with phase chi2.
struct FockOracleResult {
  ChannelWeights populations;
  double visibility = 0.0;
  double n2Interferometric = 0.0;  // from the inversion; meaningful for chi2 = pi
};
FockOracleResult fockChannelOracle(int n1, int n2, double chi2);

struct SplitScanRow {
  double k = 0.0;
  double completeness = 0.0;
};
struct SplitScan {
  std::vector<SplitScanRow> rows;
  std::optional<double> threshold;  // interpolated 0.99 crossing
  double measureTime = 2.0;
};
/// Stage-1 run per k; completeness measured measureTime after the pulse.
SplitScan scanSplitMomentum(const ProtocolConfig& cfg, const std::vector<double>& kGrid,
                            double measureTime = 2.0);

struct PhaseSweepRow {
  double chi2 = 0.0;
  int j = 1;
  double tRecollision = 0.0;  // time the recombining pulse was applied
  bool atDetected = false;    // true for the detected re-collision time
  double visibility = 0.0;
  double n2 = 0.0;            // natural occupation at pulse time
};
/// For each j, detects t_rc and repeats recombination for every chi2 at
/// windowPoints times evenly covering [t_rc - w/2, t_rc + w/2].
std::vector<PhaseSweepRow> sweepRecombinePhase(const ProtocolConfig& cfg,
                                               const std::vector<double>& chi2Grid,
                                               const std::vector<int>& jSet,
                                               double window, int windowPoints = 3);

/// [1 - cos chi2] / [2 - cos chi2]
double coherentVisibility(double chi2);

struct SplitPhaseCurve {
  double chi1 = 0.0;
  std::vector<double> t;
  std::vector<double> n1;
  std::vector<double> n2;
};
/// MB2 evolution after a split with each chi1, recording occupations up to tEnd.
std::vector<SplitPhaseCurve> sweepSplitPhase(const ProtocolConfig& cfg,
                                             const std::vector<double>& chi1Set,
                                             double tEnd);

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. The
/// first exception thrown by any job is rethrown.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mwi
