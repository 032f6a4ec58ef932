// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// With --expect-fail the exit status instead says whether the failing set is
// exactly the listed one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dense_fock.hpp"
#include "mwi/protocol.hpp"

using namespace mwi;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::set<int> failed;

void report(int id, const Outcome& o) {
  std::printf("%s %d %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) failed.insert(id);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

// ---------------------------------------------------------------------------
// properties

Outcome properties() {
  std::vector<std::string> broken;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) broken.push_back(what);
  };
  const Grid1D g = makeGrid(128.0, 1024);
  const SystemParams params;
  const Potential v = trapOf(params);

  // Parseval and Hermiticity of the kinetic operator
  std::mt19937 gen(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    Field f(g.size()), h(g.size());
    const double c1 = 5 * nd(gen), c2 = 5 * nd(gen), k1 = nd(gen), k2 = nd(gen);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      f[i] = std::exp(-(x - c1) * (x - c1)) * std::polar(1.0, k1 * x);
      h[i] = std::exp(-0.5 * (x - c2) * (x - c2)) * std::polar(1.0, k2 * x);
    }
    double pn = 0.0;
    for (double p : fourierDensity(f, g)) pn += p * g.dp();
    need(std::abs(pn - norm2(f, g)) < 1e-12 * norm2(f, g), "Parseval");
    const cplx a = inner(f, kineticApply(h, g), g), b = inner(h, kineticApply(f, g), g);
    need(std::abs(a - std::conj(b)) < 1e-12 * std::max(1.0, std::abs(a)), "kinetic Hermiticity");
  }

  // reduced densities against brute force
  for (int n = 2; n <= 8; ++n) {
    const auto c = dense::randomCi(n, 1000 + n);
    need((fock::oneBodyDensity(c) - dense::rho1(c)).norm() < 1e-12, "rho1 brute force");
    const auto r2 = fock::twoBodyDensity(c), d2 = dense::rho2(c);
    double worst = 0.0;
    for (int i = 0; i < 16; ++i)
      worst = std::max(worst, std::abs(r2(i >> 3, (i >> 2) & 1, (i >> 1) & 1, i & 1) -
                                       d2(i >> 3, (i >> 2) & 1, (i >> 1) & 1, i & 1)));
    need(worst < 1e-12, "rho2 brute force");
  }

  PropagatorConfig cfg;
  cfg.storeDensity = false;
  auto l2 = [&](const RealField& a, const RealField& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc * g.dx());
  };

  // mean-field conservation over t = 21 and step halving, default settings
  const GPState split = applyPulseGP(sechSoliton(params, g), Pulse{5.0, pi}, g);
  cfg.tEnd = 21.0;
  const auto gpRun = gpPropagate(split, v, params, g, cfg);
  const double gpE0 = gpRun.second.snapshots.front().energy;
  double gpEnergyDrift = 0.0;
  for (const auto& s : gpRun.second.snapshots) {
    need(std::abs(s.norm - 1.0) < 1e-9 * std::max(1.0, s.t), "GP norm");
    gpEnergyDrift = std::max(gpEnergyDrift, std::abs(s.energy - gpE0) / std::abs(gpE0));
  }
  need(gpEnergyDrift < 1e-6, "GP energy");
  PropagatorConfig full = cfg;
  full.tEnd = 2.0;
  PropagatorConfig half = full;
  half.dt = full.dt / 2;
  double diff = 0.0;
  for (const GPState& s0 : {sechSoliton(params, g), split})
    diff = std::max(diff, l2(density(gpPropagate(s0, v, params, g, full).first),
                             density(gpPropagate(s0, v, params, g, half).first)));
  need(diff < 1e-6, "GP step halving");

  // two-orbital conservation over t = 21
  const MB2State mb = applyPulseMB(
      mb2FromGP(sechSoliton(params, g), oddPartnerSeed(params.gamma, g), params.particles, g),
      Pulse{5.0, pi}, g);
  cfg.tEnd = 21.0;
  const auto mbRun = mb2Propagate(mb, v, params, g, cfg).second;
  const double mbE0 = mbRun.snapshots.front().energy;
  double mbEnergyDrift = 0.0, orthoWorst = 0.0;
  for (const auto& s : mbRun.snapshots) {
    need(std::abs(s.norm - 1.0) < 1e-9 * std::max(1.0, s.t), "MB2 CI norm");
    orthoWorst = std::max(orthoWorst, s.orthoError);
    mbEnergyDrift = std::max(mbEnergyDrift, std::abs(s.energy - mbE0) / std::abs(mbE0));
  }
  need(orthoWorst < 1e-8, "MB2 orthonormality");
  need(mbEnergyDrift < 1e-5, "MB2 energy");

  // occupations without interactions
  SystemParams free = params;
  free.lambda0 = 0.0;
  free.particles = 20;
  MB2State mixed = mb2FromGP(sechSoliton(free, g), oddPartnerSeed(1.0, g), 20, g);
  double norm = 0.0;
  for (int m = 0; m <= 20; ++m) {
    mixed.coefficients[m] = std::polar(std::exp(-0.3 * m), 0.7 * m);
    norm += std::norm(mixed.coefficients[m]);
  }
  for (auto& c : mixed.coefficients) c /= std::sqrt(norm);
  mixed = applyPulseMB(mixed, Pulse{5.0, pi}, g);
  const double n20 = naturalOccupations(mixed).n2;
  cfg.tEnd = 2.0;
  const auto freeRun = mb2Propagate(mixed, v, free, g, cfg).second;
  for (const auto& s : freeRun.snapshots) need(std::abs(s.n2 - n20) < 1e-8, "free occupations");

  std::sort(broken.begin(), broken.end());
  broken.erase(std::unique(broken.begin(), broken.end()), broken.end());
  std::string detail = "property suite";
  if (!broken.empty()) {
    detail += ", broken:";
    for (const auto& s : broken) detail += " " + s + ";";
  } else {
    detail += fmt(": GP halving L2 %.2e, GP energy %.2e, MB2 energy %.2e, MB2 overlap %.2e, "
                  "MB2 step defect %.2e",
                  diff, gpEnergyDrift, mbEnergyDrift, orthoWorst, mbRun.maxStepDefect);
  }
  return {broken.empty(), detail};
}

// ---------------------------------------------------------------------------
// criteria

Outcome gpInPhase() {
  const auto t0 = std::chrono::steady_clock::now();
  const ProtocolReport r = runFullProtocol(ProtocolConfig{});
  const double el = seconds(t0);
  const auto& c = r.channels;
  const bool nuOk = r.visibility >= 0.60 && r.visibility <= 2.0 / 3.0;
  const bool popOk = std::abs(c.minus2k - 1.0 / 6) <= 0.05 && std::abs(c.zero - 4.0 / 6) <= 0.05 &&
                     std::abs(c.plus2k - 1.0 / 6) <= 0.05;
  return {nuOk && popOk && el < 60.0,
          fmt("GP pi+pi: nu=%.5f (need [0.60, 0.66667]), channels (%.4f, %.4f, %.4f), %.1f s", r.visibility,
              c.minus2k, c.zero, c.plus2k, el)};
}

Outcome gpAntiPhase() {
  ProtocolConfig cfg;
  cfg.pulse1.chi = 0.0;
  const ProtocolReport r = runFullProtocol(cfg);
  const auto& c = r.channels;
  const bool ok = r.visibility < 0.02 && std::abs(c.minus2k - 0.5) <= 0.03 && std::abs(c.plus2k - 0.5) <= 0.03;
  return {ok, fmt("GP 0+pi: nu=%.5f, side channels %.4f / %.4f", r.visibility, c.minus2k, c.plus2k)};
}

Outcome gpSweep() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> chi2;
  for (int i = 0; i < 16; ++i) chi2.push_back(2.0 * pi * i / 15.0);
  const auto rows = sweepRecombinePhase(ProtocolConfig{}, chi2, {1}, 0.0, 1);
  double ss = 0.0;
  for (const auto& r : rows) ss += std::pow(r.visibility - coherentVisibility(r.chi2), 2);
  const double rms = std::sqrt(ss / static_cast<double>(rows.size()));
  const double el = seconds(t0);
  return {rms < 0.03 && el < 900.0, fmt("GP chi2 sweep: RMS %.4f over %zu points, %.1f s", rms, rows.size(), el)};
}

Outcome splitThreshold() {
  const std::vector<double> ks = {3.0, 3.5, 4.0, 4.5, 5.0};
  std::string detail;
  bool ok = true;
  for (Solver s : {Solver::GP, Solver::MB2}) {
    ProtocolConfig cfg;
    cfg.solver = s;
    const SplitScan scan = scanSplitMomentum(cfg, ks, 2.0);
    detail += toString(s) + " completeness";
    for (const auto& r : scan.rows) detail += fmt(" %.5f", r.completeness);
    if (scan.threshold) {
      detail += fmt(", crossing k=%.3f; ", *scan.threshold);
      ok = ok && *scan.threshold >= 3.5 && *scan.threshold <= 4.5;
    } else {
      detail += ", crossing not bracketed; ";
      ok = false;
    }
  }
  return {ok, "split scan: " + detail};
}

struct Mb2Runs {
  std::vector<ProtocolReport> reports;  // j = 1, 2, 3
};

Outcome recollisionTiming(const Mb2Runs& runs) {
  // non-interacting control: split, trap evolution, detection; no second pulse
  SystemParams free;
  free.lambda0 = 0.0;
  const Grid1D g = makeGrid(128.0, 1024);
  const double omega = free.trapFrequency(), ideal = pi / omega;
  PropagatorConfig cfg;
  cfg.storeDensity = false;
  cfg.tEnd = ideal + 0.5;
  const GPState split = applyPulseGP(sechSoliton(free, g), Pulse{5.0, pi}, g);
  const double tFree = detectRecollision(gpPropagate(split, trapOf(free), free, g, cfg).second, 1, omega, 0.5);
  const double t1 = runs.reports.at(0).tRecollision, t2 = runs.reports.at(1).tRecollision;
  const bool ok = std::abs(tFree - ideal) <= 0.05 && t1 >= 6.9 && t1 <= 7.2 && t2 >= 13.9 && t2 <= 14.3;
  return {ok, fmt("re-collision: free %.4f vs %.4f; MB2 t1=%.4f t2=%.4f", tFree, ideal, t1, t2)};
}

Outcome fragmentationGrowth(const Mb2Runs& runs) {
  const double n1 = runs.reports.at(0).occupations->n2;
  const double n2 = runs.reports.at(1).occupations->n2;
  const double n3 = runs.reports.at(2).occupations->n2;
  const bool ok = std::abs(n1 - 0.264) <= 0.04 && std::abs(n2 - 0.437) <= 0.05 && n1 < n2 && n2 < n3;
  return {ok, fmt("MB2 n2 at re-collisions: %.4f, %.4f, %.4f (targets 0.264+-0.04, 0.437+-0.05, increasing)",
                  n1, n2, n3)};
}

Outcome selfConsistency(const Mb2Runs& runs) {
  bool ok = true;
  std::string detail = "interferometric vs diagonalized n2:";
  for (const auto& r : runs.reports) {
    const bool have = r.n2Interferometric && r.occupations;
    const double d = have ? std::abs(*r.n2Interferometric - r.occupations->n2) : 1.0;
    ok = ok && have && d <= 0.02;
    detail += fmt(" j=%d %.4f/%.4f (|d|=%.4f);", r.recollisionIndex,
                  r.n2Interferometric.value_or(-1.0), r.occupations->n2, d);
  }
  return {ok, detail};
}

Outcome fockOracle() {
  double worst = 0.0;
  for (int n2 = 0; n2 <= 100; ++n2) {
    const auto r = fockChannelOracle(100 - n2, n2, pi);
    worst = std::max(worst, std::abs(r.visibility - 2.0 / 3.0 * (1.0 - n2 / 100.0)));
    worst = std::max(worst, std::abs(fragFromVisibility(r.visibility) - n2 / 100.0));
  }
  const auto e0 = fockChannelOracle(100, 0, pi).populations;
  const auto e1 = fockChannelOracle(50, 50, pi).populations;
  const double endErr = std::max({std::abs(e0.minus2k - 1.0 / 6), std::abs(e0.zero - 4.0 / 6),
                                  std::abs(e0.plus2k - 1.0 / 6), std::abs(e1.minus2k - 1.0 / 3),
                                  std::abs(e1.zero - 1.0 / 3), std::abs(e1.plus2k - 1.0 / 3)});

  // grid check: pulsed Fock states of N = 10 measured in momentum bins
  const Grid1D g = makeGrid(128.0, 1024);
  Field u(g.size()), e(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = 1.0 / std::cosh(g.x(i));
    u[i] = std::sin(5.0 * g.x(i)) * s;
    e[i] = std::cos(5.0 * g.x(i)) * s;
  }
  normalize(u, g);
  normalize(e, g);
  double gridErr = 0.0;
  for (int n2 = 0; n2 <= 10; ++n2) {
    const MB2State hit = applyPulseMB(fockState(10 - n2, n2, u, e, g), Pulse{5.0, pi}, g);
    const auto m = channelPopulations(hit, g, 5.0, 1.0, ChannelMode::MomentumBins);
    const auto x = fockChannelOracle(10 - n2, n2, pi).populations;
    gridErr = std::max({gridErr, std::abs(m.minus2k - x.minus2k), std::abs(m.zero - x.zero),
                        std::abs(m.plus2k - x.plus2k)});
  }
  return {worst <= 1e-12 && endErr <= 1e-12 && gridErr <= 1e-4,
          fmt("Fock oracle: inversion error %.1e, endpoint error %.1e, N=10 grid error %.1e", worst, endErr,
              gridErr)};
}

Outcome splitPhaseOrdering() {
  ProtocolConfig cfg;
  cfg.solver = Solver::MB2;
  const auto curves = sweepSplitPhase(cfg, {0.0, pi}, 10.0);
  const double a = curves.at(0).n2.back(), b = curves.at(1).n2.back();
  return {a < b, fmt("n2(t=10): chi1=0 %.6f, chi1=pi %.6f", a, b)};
}

int verdict(const std::set<int>& expected, bool checkExpected) {
  std::printf("%zu of 10 criteria failed\n", failed.size());
  if (!checkExpected) return failed.empty() ? 0 : 1;
  if (failed == expected) {
    std::printf("failing set matches the expected one\n");
    return 0;
  }
  std::printf("failing set differs from the expected one\n");
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> expectFail;
  auto* opt = app.add_option("--expect-fail", expectFail, "criteria known to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> expected(expectFail.begin(), expectFail.end());
  const bool checkExpected = opt->count() > 0;

  const Outcome props = guarded(properties);
  report(9, props);

  if (!props.pass) {
    for (int id : {1, 2, 3, 4, 5, 6, 7, 8, 10})
      report(id, {false, "not evaluated: property suite failed"});
    return verdict(expected, checkExpected);
  }

  report(1, guarded(gpInPhase));
  report(2, guarded(gpAntiPhase));
  report(3, guarded(gpSweep));
  report(4, guarded(splitThreshold));

  Mb2Runs runs;
  const Outcome mbRuns = guarded([&] {
    for (int j = 1; j <= 3; ++j) {
      ProtocolConfig cfg;
      cfg.solver = Solver::MB2;
      cfg.recollisionIndex = j;
      runs.reports.push_back(runFullProtocol(cfg));
    }
    return Outcome{true, ""};
  });
  if (mbRuns.pass) {
    report(5, guarded([&] { return recollisionTiming(runs); }));
    report(6, guarded([&] { return fragmentationGrowth(runs); }));
    report(7, guarded([&] { return selfConsistency(runs); }));
  } else {
    for (int id : {5, 6, 7}) report(id, mbRuns);
  }
  report(8, guarded(fockOracle));
  report(10, guarded(splitPhaseOrdering));

  return verdict(expected, checkExpected);
}
