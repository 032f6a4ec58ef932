// Command-line driver for the interferometric protocol and its sweeps.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwi/io.hpp"
#include "mwi/protocol.hpp"

namespace fs = std::filesystem;
using namespace mwi;

namespace {

struct CommonOptions {
  std::string configPath;
  std::string outDir;
  std::string solver;
};

void addCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.configPath, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.outDir, "output directory (overrides output_dir)");
  cmd->add_option("--solver", o.solver, "gp or mb2 (overrides config)")
      ->check(CLI::IsMember({"gp", "mb2"}));
}

ProtocolConfig resolve(const CommonOptions& o) {
  ProtocolConfig cfg = o.configPath.empty() ? ProtocolConfig{} : io::loadConfig(o.configPath);
  if (!o.outDir.empty()) cfg.outputDir = o.outDir;
  if (!o.solver.empty()) cfg.solver = solverFromString(o.solver);
  const Grid1D grid = cfg.makeGrid();
  for (const Pulse* p : {&cfg.pulse1, &cfg.pulse2}) {
    if (p == &cfg.pulse2 && p->k == cfg.pulse1.k) break;
    if (!onMomentumGrid(*p, grid, 1e-6))
      std::cerr << "warning: pulse momentum " << p->k << " is not a multiple of 2pi/L = "
                << grid.dp() << "\n";
  }
  return cfg;
}

fs::path outputDir(const ProtocolConfig& cfg) {
  const fs::path dir = cfg.outputDir.empty() ? fs::path(".") : fs::path(cfg.outputDir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> evenly(double lo, double hi, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i)
    v.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return v;
}

int runCmd(const CommonOptions& o) {
  const ProtocolConfig cfg = resolve(o);
  const ProtocolReport r = runFullProtocol(cfg);
  std::cout << std::setprecision(6) << "t_rc=" << r.tRecollision << " channels=("
            << r.channels.minus2k << ", " << r.channels.zero << ", " << r.channels.plus2k
            << ") nu=" << r.visibility;
  if (r.n2Interferometric) std::cout << " n2_intf=" << *r.n2Interferometric;
  if (r.occupations) std::cout << " n2=" << r.occupations->n2;
  std::cout << '\n';
  if (cfg.outputDir.empty()) std::cout << io::toJson(r).dump(2) << '\n';
  return 0;
}

int scanCmd(const CommonOptions& o, std::vector<double> ks, double measureTime) {
  const ProtocolConfig cfg = resolve(o);
  if (ks.empty()) ks = {3.0, 3.5, 4.0, 4.5, 5.0};
  const SplitScan scan = scanSplitMomentum(cfg, ks, measureTime);
  const fs::path dir = outputDir(cfg);
  std::ofstream out(dir / "scan_k.csv");
  out << "k,completeness\n" << std::setprecision(12);
  for (const auto& row : scan.rows) {
    out << row.k << ',' << row.completeness << '\n';
    std::cout << "k=" << row.k << " completeness=" << row.completeness << '\n';
  }
  if (scan.threshold)
    std::cout << "threshold k=" << *scan.threshold << '\n';
  else
    std::cout << "threshold not bracketed by the k grid\n";
  return 0;
}

int sweepChi2Cmd(const CommonOptions& o, int points, std::vector<int> js, int windowPoints) {
  const ProtocolConfig cfg = resolve(o);
  if (js.empty()) js = {cfg.recollisionIndex};
  const auto chi2 = evenly(0.0, 2.0 * std::numbers::pi, points);
  const auto rows = sweepRecombinePhase(cfg, chi2, js, cfg.recollisionWindow, windowPoints);
  const fs::path dir = outputDir(cfg);
  std::ofstream out(dir / "sweep_chi2.csv");
  out << "chi2,j,t_rc,detected,nu,nu_coherent,n2\n" << std::setprecision(12);
  for (const auto& r : rows)
    out << r.chi2 << ',' << r.j << ',' << r.tRecollision << ',' << (r.atDetected ? 1 : 0)
        << ',' << r.visibility << ',' << coherentVisibility(r.chi2) << ',' << r.n2 << '\n';
  std::cout << "wrote " << rows.size() << " rows to " << (dir / "sweep_chi2.csv").string() << '\n';
  return 0;
}

int sweepChi1Cmd(const CommonOptions& o, std::vector<double> chi1, double tEnd) {
  ProtocolConfig cfg = resolve(o);
  if (o.solver.empty() && o.configPath.empty()) cfg.solver = Solver::MB2;
  if (chi1.empty()) chi1 = {0.0, std::numbers::pi / 1000.0, std::numbers::pi};
  const auto curves = sweepSplitPhase(cfg, chi1, tEnd);
  const fs::path dir = outputDir(cfg);
  std::ofstream out(dir / "sweep_chi1.csv");
  out << "chi1,t,n1_frac,n2_frac\n" << std::setprecision(12);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.t.size(); ++i)
      out << c.chi1 << ',' << c.t[i] << ',' << c.n1[i] << ',' << c.n2[i] << '\n';
  for (const auto& c : curves)
    std::cout << "chi1=" << c.chi1 << " n2(t_end)=" << c.n2.back() << '\n';
  return 0;
}

int oracleCmd(const CommonOptions& o, double chi2) {
  const ProtocolConfig cfg = resolve(o);
  const int n = cfg.system.particles;
  const fs::path dir = outputDir(cfg);
  std::ofstream out(dir / "fock_oracle.csv");
  out << "n1,n2,minus2k,zero,plus2k,nu,n2_intf_frac\n" << std::setprecision(15);
  for (int n2 = 0; n2 <= n; ++n2) {
    const auto r = fockChannelOracle(n - n2, n2, chi2);
    out << n - n2 << ',' << n2 << ',' << r.populations.minus2k << ',' << r.populations.zero
        << ',' << r.populations.plus2k << ',' << r.visibility << ',' << r.n2Interferometric
        << '\n';
  }
  std::cout << "wrote " << (dir / "fock_oracle.csv").string() << '\n';
  return 0;
}

int relaxCmd(const CommonOptions& o) {
  const ProtocolConfig cfg = resolve(o);
  const Grid1D grid = cfg.makeGrid();
  const auto result = gpRelax(sechSoliton(cfg.system, grid), trapOf(cfg.system), cfg.system,
                              grid, cfg.integrator);
  const fs::path dir = outputDir(cfg);
  std::ofstream out(dir / "ground_state.csv");
  out << "x,re,im,density\n" << std::setprecision(15);
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << grid.x(i) << ',' << result.state.orbital[i].real() << ','
        << result.state.orbital[i].imag() << ',' << std::norm(result.state.orbital[i]) << '\n';
  std::cout << std::setprecision(10) << "energy per particle=" << result.energy
            << " steps=" << result.steps << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matter-wave interferometry with attractive Bose gases"};
  app.require_subcommand(1);

  CommonOptions runOpts, scanOpts, chi2Opts, chi1Opts, oracleOpts, relaxOpts;

  auto* run = app.add_subcommand("run", "full split / re-collide / recombine protocol");
  addCommon(run, runOpts);

  auto* scan = app.add_subcommand("scan-k", "split completeness versus pulse momentum");
  addCommon(scan, scanOpts);
  std::vector<double> ks;
  double measureTime = 2.0;
  scan->add_option("--k", ks, "momenta to scan (ascending)");
  scan->add_option("--measure-time", measureTime, "time after the pulse (>= 2)");

  auto* chi2 = app.add_subcommand("sweep-chi2", "visibility versus recombining phase");
  addCommon(chi2, chi2Opts);
  int points = 16;
  std::vector<int> js;
  int windowPoints = 3;
  chi2->add_option("--points", points, "chi2 samples over [0, 2pi]");
  chi2->add_option("--j", js, "re-collision indices");
  chi2->add_option("--window-points", windowPoints, "samples across the t_rc window");

  auto* chi1 = app.add_subcommand("sweep-chi1", "n2(t) for several split phases (mb2)");
  addCommon(chi1, chi1Opts);
  std::vector<double> chi1Set;
  double tEnd = 21.5;
  chi1->add_option("--chi1", chi1Set, "split phases");
  chi1->add_option("--t-end", tEnd, "final time");

  auto* oracle = app.add_subcommand("oracle", "Fock-state channel algebra table");
  addCommon(oracle, oracleOpts);
  double oracleChi2 = std::numbers::pi;
  oracle->add_option("--chi2", oracleChi2, "recombining phase");

  auto* relax = app.add_subcommand("relax", "GP ground state by imaginary time");
  addCommon(relax, relaxOpts);

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "run") return runCmd(runOpts);
    if (name == "scan-k") return scanCmd(scanOpts, ks, measureTime);
    if (name == "sweep-chi2") return sweepChi2Cmd(chi2Opts, points, js, windowPoints);
    if (name == "sweep-chi1") return sweepChi1Cmd(chi1Opts, chi1Set, tEnd);
    if (name == "oracle") return oracleCmd(oracleOpts, oracleChi2);
    if (name == "relax") return relaxCmd(relaxOpts);
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return 2;
  }
  return 1;
}
