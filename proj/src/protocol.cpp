#include "mwi/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mwi/io.hpp"

namespace mwi {

std::string toString(Solver s) { return s == Solver::MB2 ? "mb2" : "gp"; }

Solver solverFromString(const std::string& s) {
  if (s == "gp") return Solver::GP;
  if (s == "mb2") return Solver::MB2;
  throw std::invalid_argument("unknown solver '" + s + "' (expected gp or mb2)");
}

Grid1D ProtocolConfig::makeGrid() const { return Grid1D(gridLength, gridPoints); }

void ProtocolConfig::validate() const {
  system.validate();
  const Grid1D grid = makeGrid();
  grid.checkResolution(pulse1.k, system.gamma);
  if (pulse2Enabled) grid.checkResolution(pulse2.k, system.gamma);
  if (!(system.trapCoefficient > 0.0))
    throw std::invalid_argument("protocol: re-collisions need a trap (trap_a > 0)");
  if (recollisionIndex < 1)
    throw std::invalid_argument("protocol: re-collision index must be >= 1");
  if (!(tSep > 0.0)) throw std::invalid_argument("protocol: t_sep must be > 0");
  if (recollisionWindow < 0.0)
    throw std::invalid_argument("protocol: re-collision window must be >= 0");
  const Potential v = trapOf(system);
  integrator.validate(grid, v(grid.x(0)));
}

namespace {

constexpr double kDetectHalfWindow = 0.5;

struct Context {
  Grid1D grid;
  Potential potential;
  SystemParams params;
  PropagatorConfig prop;

  explicit Context(const ProtocolConfig& cfg)
      : grid(cfg.makeGrid()),
        potential(trapOf(cfg.system)),
        params(cfg.system),
        prop(cfg.integrator) {}
};

GPState evolve(const GPState& s, double tEnd, const Context& ctx, Trajectory* traj) {
  PropagatorConfig pc = ctx.prop;
  pc.tEnd = tEnd;
  pc.storeDensity = traj != nullptr;
  auto [out, tr] = gpPropagate(s, ctx.potential, ctx.params, ctx.grid, pc);
  if (traj) *traj = std::move(tr);
  return out;
}

MB2State evolve(const MB2State& s, double tEnd, const Context& ctx, Trajectory* traj) {
  PropagatorConfig pc = ctx.prop;
  pc.tEnd = tEnd;
  pc.storeDensity = traj != nullptr;
  auto [out, tr] = mb2Propagate(s, ctx.potential, ctx.params, ctx.grid, pc);
  if (traj) *traj = std::move(tr);
  return out;
}

GPState pulsed(const GPState& s, const Pulse& p, const Context& ctx) {
  return applyPulseGP(s, p, ctx.grid);
}

MB2State pulsed(const MB2State& s, const Pulse& p, const Context& ctx) {
  return applyPulseMB(s, p, ctx.grid);
}

template <class S>
S initialState(const Context& ctx);

template <>
GPState initialState<GPState>(const Context& ctx) {
  return sechSoliton(ctx.params, ctx.grid);
}

template <>
MB2State initialState<MB2State>(const Context& ctx) {
  const GPState gp = sechSoliton(ctx.params, ctx.grid);
  return mb2FromGP(gp, oddPartnerSeed(ctx.params.gamma, ctx.grid),
                   ctx.params.particles, ctx.grid);
}

template <class F>
auto inStage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage ") + stage + ": " + e.what());
  }
}

void append(Trajectory& into, Trajectory&& from, bool skipFirst) {
  auto& src = from.snapshots;
  const std::size_t start = skipFirst && !src.empty() ? 1 : 0;
  for (std::size_t i = start; i < src.size(); ++i)
    into.snapshots.push_back(std::move(src[i]));
}

template <class S>
struct RecollisionSearch {
  S split;          // right after pulse 1
  S beforeWindow;   // at tLo
  double tLo = 0.0;
  double tRc = 0.0;
  Trajectory traj;  // 0 .. tHi
};

template <class S>
RecollisionSearch<S> findRecollision(const S& split, int j, const Context& ctx,
                                     bool keepDensity) {
  const double omega = ctx.params.trapFrequency();
  const double center = j * std::numbers::pi / omega;
  RecollisionSearch<S> r;
  r.split = split;
  // on the snapshot lattice, so the stored stage-2 frames stay uniformly spaced
  const double stride = ctx.prop.snapshotStride;
  r.tLo = std::max(split.time, std::floor((center - kDetectHalfWindow) / stride) * stride);
  const double tHi = center + kDetectHalfWindow;
  Trajectory head, window;
  r.beforeWindow = evolve(split, r.tLo, ctx, &head);
  evolve(r.beforeWindow, tHi, ctx, &window);
  r.traj = std::move(head);
  append(r.traj, std::move(window), true);
  r.tRc = detectRecollision(r.traj, j, omega, kDetectHalfWindow);
  if (!keepDensity)
    for (auto& s : r.traj.snapshots) s.density = {};
  return r;
}

template <class S>
S stateAt(const RecollisionSearch<S>& r, double t, const Context& ctx,
          Trajectory* traj = nullptr) {
  if (t >= r.tLo) return evolve(r.beforeWindow, t, ctx, traj);
  return evolve(r.split, t, ctx, traj);
}

struct Recombination {
  ChannelPopulations channels;
  ChannelPopulations momentumChannels;
  Trajectory traj;
};

template <class S>
Recombination recombine(const S& atRc, const ProtocolConfig& cfg, const Context& ctx,
                        bool keepTrajectory) {
  Recombination out;
  const S hit = cfg.pulse2Enabled ? pulsed(atRc, cfg.pulse2, ctx) : atRc;
  const double kBin = cfg.pulse2Enabled ? cfg.pulse2.k : cfg.pulse1.k;
  out.momentumChannels = channelPopulations(hit, ctx.grid, kBin, ctx.params.gamma,
                                            ChannelMode::MomentumBins);
  Trajectory traj;
  const S separated =
      evolve(hit, hit.time + cfg.tSep, ctx, keepTrajectory ? &out.traj : &traj);
  out.channels = channelPopulations(separated, ctx.grid, kBin, ctx.params.gamma,
                                    ChannelMode::PositionWindows);
  return out;
}

NaturalOccupations occupationsOf(const GPState& s) { return naturalOccupations(s); }
NaturalOccupations occupationsOf(const MB2State& s) { return naturalOccupations(s); }

void writeOutputs(const ProtocolConfig& cfg, const Trajectory& stage2,
                  const Trajectory& stage3, ProtocolReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.outputDir);
  fs::create_directories(dir);

  std::vector<Snapshot> all;
  for (const auto& s : stage2.snapshots)
    if (s.t <= report.tRecollision + 1e-12) all.push_back(s);
  for (std::size_t i = 1; i < stage3.snapshots.size(); ++i)
    all.push_back(stage3.snapshots[i]);
  io::writeObservablesCsv(dir / "observables.csv", all);
  report.files["observables"] = (dir / "observables.csv").string();

  const double stride = cfg.integrator.snapshotStride;
  // stage 2 on the uniform stride lattice from t = 0
  std::vector<Snapshot> lattice;
  for (const auto& s : stage2.snapshots) {
    const double k = s.t / stride;
    if (std::abs(k - std::round(k)) < 1e-6) lattice.push_back(s);
  }
  io::writeDensityBinary(dir / "density.bin", dir / "density.meta.json", lattice,
                         cfg.gridLength, stride);
  report.files["density"] = (dir / "density.bin").string();
  report.files["density_meta"] = (dir / "density.meta.json").string();

  std::vector<Snapshot> post;
  for (const auto& s : stage3.snapshots) {
    const double k = (s.t - stage3.t0()) / stride;
    if (std::abs(k - std::round(k)) < 1e-6) post.push_back(s);
  }
  io::writeDensityBinary(dir / "density_recombine.bin",
                         dir / "density_recombine.meta.json", post, cfg.gridLength,
                         stride);
  report.files["density_recombine"] = (dir / "density_recombine.bin").string();
  report.files["density_recombine_meta"] =
      (dir / "density_recombine.meta.json").string();
  report.files["report"] = (dir / "report.json").string();
  io::writeReport(dir / "report.json", report);
}

template <class S>
ProtocolReport runProtocolWith(const ProtocolConfig& cfg) {
  const Context ctx(cfg);
  const bool writing = !cfg.outputDir.empty();
  ProtocolReport report;
  report.solver = cfg.solver;
  report.recollisionIndex = cfg.recollisionIndex;

  const S split = inStage("1 (split)", [&] {
    return pulsed(initialState<S>(ctx), cfg.pulse1, ctx);
  });
  auto search = inStage("2 (trap evolution)", [&] {
    return findRecollision(split, cfg.recollisionIndex, ctx, writing);
  });
  report.tRecollision = search.tRc;
  Trajectory tail;
  const S atRc = inStage("2 (trap evolution)", [&] {
    return stateAt(search, search.tRc, ctx, writing ? &tail : nullptr);
  });
  if (writing) {
    // replace the window part of the trajectory by the run ending at t_rc
    Trajectory stage2;
    for (auto& s : search.traj.snapshots)
      if (s.t <= search.tLo + 1e-12) stage2.snapshots.push_back(std::move(s));
    append(stage2, std::move(tail), true);
    search.traj = std::move(stage2);
  }
  if constexpr (std::is_same_v<S, MB2State>) report.occupations = occupationsOf(atRc);

  Recombination rec = inStage("3 (recombination)", [&] {
    return recombine(atRc, cfg, ctx, writing);
  });
  report.channels = rec.channels;
  report.momentumChannels = rec.momentumChannels;
  report.visibility = visibility(rec.channels);
  try {
    report.n2Interferometric = fragFromVisibility(report.visibility);
  } catch (const std::domain_error&) {
    report.n2Interferometric.reset();
  }
  if (report.occupations && report.n2Interferometric)
    report.discrepancy = std::abs(*report.n2Interferometric - report.occupations->n2);

  if (writing)
    inStage("output", [&] {
      writeOutputs(cfg, search.traj, rec.traj, report);
      return 0;
    });
  return report;
}

}  // namespace

ProtocolReport runFullProtocol(const ProtocolConfig& cfg) {
  inStage("config", [&] {
    cfg.validate();
    return 0;
  });
  if (cfg.solver == Solver::MB2) return runProtocolWith<MB2State>(cfg);
  return runProtocolWith<GPState>(cfg);
}

FockOracleResult fockChannelOracle(int n1, int n2, double chi2) {
  if (n1 < 0 || n2 < 0 || n1 + n2 < 1)
    throw std::invalid_argument("fockChannelOracle: occupations must be >= 0, N >= 1");
  const double total = static_cast<double>(n1 + n2);
  const double wu = n1 / total;  // ungerade: split with chi1 = pi
  const double wg = n2 / total;  // gerade: split with chi1 = 0
  const ChannelWeights u = pulseChannelAlgebra(std::numbers::pi, chi2);
  const ChannelWeights g = pulseChannelAlgebra(0.0, chi2);
  FockOracleResult r;
  r.populations = {wu * u.minus2k + wg * g.minus2k, wu * u.zero + wg * g.zero,
                   wu * u.plus2k + wg * g.plus2k};
  r.visibility = r.populations.zero;
  r.n2Interferometric = fragFromVisibility(r.visibility);
  return r;
}

double coherentVisibility(double chi2) {
  const double c = std::cos(chi2);
  return (1.0 - c) / (2.0 - c);
}

void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failureMutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

template <class S>
double splitCompletenessFor(const ProtocolConfig& cfg, double k, double measureTime) {
  const Context ctx(cfg);
  Pulse p = cfg.pulse1;
  p.k = k;
  const S split = pulsed(initialState<S>(ctx), p, ctx);
  const S later = evolve(split, split.time + measureTime, ctx, nullptr);
  return splitCompleteness(density(later), ctx.grid, ctx.params.gamma);
}

}  // namespace

SplitScan scanSplitMomentum(const ProtocolConfig& cfg, const std::vector<double>& kGrid,
                            double measureTime) {
  if (!std::is_sorted(kGrid.begin(), kGrid.end()))
    throw std::invalid_argument("scanSplitMomentum: k grid must be ascending");
  if (measureTime < 2.0)
    throw std::invalid_argument("scanSplitMomentum: measure at least 2 time units after the pulse");
  cfg.system.validate();
  SplitScan scan;
  scan.measureTime = measureTime;
  scan.rows.resize(kGrid.size());
  parallelFor(kGrid.size(), [&](std::size_t i) {
    const double c = cfg.solver == Solver::MB2
                         ? splitCompletenessFor<MB2State>(cfg, kGrid[i], measureTime)
                         : splitCompletenessFor<GPState>(cfg, kGrid[i], measureTime);
    scan.rows[i] = {kGrid[i], c};
  });
  constexpr double kFull = 0.99;
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    if (scan.rows[i].completeness <= kFull) continue;
    if (i == 0) break;  // complete already at the smallest k: not bracketed
    const auto& a = scan.rows[i - 1];
    const auto& b = scan.rows[i];
    const double f = (kFull - a.completeness) / (b.completeness - a.completeness);
    scan.threshold = a.k + f * (b.k - a.k);
    break;
  }
  return scan;
}

namespace {

template <class S>
std::vector<PhaseSweepRow> sweepWith(const ProtocolConfig& cfg,
                                     const std::vector<double>& chi2Grid,
                                     const std::vector<int>& jSet, double window,
                                     int windowPoints) {
  const Context ctx(cfg);
  const S split = pulsed(initialState<S>(ctx), cfg.pulse1, ctx);

  struct Job {
    int j;
    double t;
    bool detected;
    const S* state;
  };
  std::vector<RecollisionSearch<S>> searches(jSet.size());
  std::vector<std::vector<S>> states(jSet.size());
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < jSet.size(); ++a) {
    searches[a] = findRecollision(split, jSet[a], ctx, false);
    const double tRc = searches[a].tRc;
    std::vector<double> times;
    if (windowPoints <= 1 || window <= 0.0) {
      times.push_back(tRc);
    } else {
      for (int i = 0; i < windowPoints; ++i)
        times.push_back(tRc - 0.5 * window + window * i / (windowPoints - 1));
      if (windowPoints % 2 == 0) times.push_back(tRc);
    }
    std::sort(times.begin(), times.end());
    states[a].reserve(times.size());
    for (double t : times) states[a].push_back(stateAt(searches[a], t, ctx));
    for (std::size_t i = 0; i < times.size(); ++i)
      jobs.push_back({jSet[a], times[i], std::abs(times[i] - tRc) < 1e-12,
                      &states[a][i]});
  }

  std::vector<PhaseSweepRow> rows(jobs.size() * chi2Grid.size());
  parallelFor(rows.size(), [&](std::size_t idx) {
    const Job& job = jobs[idx / chi2Grid.size()];
    const double chi2 = chi2Grid[idx % chi2Grid.size()];
    ProtocolConfig local = cfg;
    local.pulse2.chi = chi2;
    local.pulse2Enabled = true;
    const Recombination rec = recombine(*job.state, local, ctx, false);
    rows[idx] = {chi2, job.j, job.t, job.detected, visibility(rec.channels),
                 occupationsOf(*job.state).n2};
  });
  return rows;
}

}  // namespace

std::vector<PhaseSweepRow> sweepRecombinePhase(const ProtocolConfig& cfg,
                                               const std::vector<double>& chi2Grid,
                                               const std::vector<int>& jSet,
                                               double window, int windowPoints) {
  cfg.validate();
  if (chi2Grid.empty() || jSet.empty())
    throw std::invalid_argument("sweepRecombinePhase: empty sweep");
  for (int j : jSet)
    if (j < 1) throw std::invalid_argument("sweepRecombinePhase: j must be >= 1");
  if (cfg.solver == Solver::MB2)
    return sweepWith<MB2State>(cfg, chi2Grid, jSet, window, windowPoints);
  return sweepWith<GPState>(cfg, chi2Grid, jSet, window, windowPoints);
}

std::vector<SplitPhaseCurve> sweepSplitPhase(const ProtocolConfig& cfg,
                                             const std::vector<double>& chi1Set,
                                             double tEnd) {
  if (cfg.solver != Solver::MB2)
    throw std::invalid_argument("sweepSplitPhase: requires the mb2 solver");
  if (!(tEnd > 0.0)) throw std::invalid_argument("sweepSplitPhase: tEnd must be > 0");
  cfg.system.validate();
  std::vector<SplitPhaseCurve> curves(chi1Set.size());
  parallelFor(chi1Set.size(), [&](std::size_t i) {
    const Context ctx(cfg);
    Pulse p = cfg.pulse1;
    p.chi = chi1Set[i];
    const MB2State split = pulsed(initialState<MB2State>(ctx), p, ctx);
    Trajectory traj;
    evolve(split, tEnd, ctx, &traj);
    SplitPhaseCurve c;
    c.chi1 = chi1Set[i];
    for (const auto& s : traj.snapshots) {
      c.t.push_back(s.t);
      c.n1.push_back(s.n1);
      c.n2.push_back(s.n2);
    }
    curves[i] = std::move(c);
  });
  return curves;
}

}  // namespace mwi
