#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mwi/protocol.hpp"

using namespace mwi;
using std::numbers::pi;

namespace {

// ungerade and gerade orbitals made by the two splitters acting on sech
std::pair<Field, Field> splitOrbitals(double k, const Grid1D& g) {
  Field u(g.size()), e(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = 1.0 / std::cosh(g.x(i));
    u[i] = std::sin(k * g.x(i)) * s;
    e[i] = std::cos(k * g.x(i)) * s;
  }
  normalize(u, g);
  normalize(e, g);
  return {u, e};
}

}  // namespace

TEST_CASE("Fock-state channel oracle") {
  const auto a = fockChannelOracle(100, 0, pi);
  CHECK(a.populations.zero == doctest::Approx(2.0 / 3));
  CHECK(a.populations.minus2k == doctest::Approx(1.0 / 6));
  CHECK(a.n2Interferometric == doctest::Approx(0.0).epsilon(1e-15));

  const auto b = fockChannelOracle(50, 50, pi);
  CHECK(b.visibility == doctest::Approx(1.0 / 3));
  CHECK(b.n2Interferometric == doctest::Approx(0.5));

  const auto c = fockChannelOracle(74, 26, pi);
  CHECK(c.visibility == doctest::Approx(2.0 / 3 * 0.74));
  CHECK(c.n2Interferometric == doctest::Approx(0.26));

  // linear in the occupation split and exactly invertible at chi2 = pi
  for (int n2 = 0; n2 <= 100; ++n2) {
    const auto r = fockChannelOracle(100 - n2, n2, pi);
    CHECK(r.n2Interferometric == doctest::Approx(n2 / 100.0).epsilon(1e-12));
    CHECK(r.populations.minus2k + r.populations.zero + r.populations.plus2k == doctest::Approx(1.0));
  }
  for (double chi2 : {0.3, 1.7, 4.0}) {
    const auto lo = fockChannelOracle(100, 0, chi2), hi = fockChannelOracle(0, 100, chi2);
    const auto mid = fockChannelOracle(30, 70, chi2);
    CHECK(mid.visibility == doctest::Approx(0.3 * lo.visibility + 0.7 * hi.visibility));
  }
  CHECK_THROWS_AS(fockChannelOracle(-1, 3, pi), std::invalid_argument);
}

TEST_CASE("oracle matches a pulsed Fock state on the grid") {
  const Grid1D g = makeGrid(128.0, 1024);
  const double k = 5.0;
  const auto [u, e] = splitOrbitals(k, g);
  for (double chi2 : {0.0, pi})
    for (int n2 : {0, 3, 5, 10}) {
      const MB2State s = fockState(10 - n2, n2, u, e, g);
      double correction = -1.0;
      const MB2State hit = applyPulseMB(s, Pulse{k, chi2}, g, &correction);
      CHECK(correction < 1e-10);
      const auto measured = channelPopulations(hit, g, k, 1.0, ChannelMode::MomentumBins);
      const auto expect = fockChannelOracle(10 - n2, n2, chi2).populations;
      CHECK(measured.zero == doctest::Approx(expect.zero).epsilon(1e-4));
      CHECK(measured.minus2k == doctest::Approx(expect.minus2k).epsilon(1e-4));
      CHECK(measured.plus2k == doctest::Approx(expect.plus2k).epsilon(1e-4));
    }
}

TEST_CASE("coherent visibility curve") {
  CHECK(coherentVisibility(pi) == doctest::Approx(2.0 / 3));
  CHECK(coherentVisibility(0.0) == 0.0);
  CHECK(coherentVisibility(pi / 2) == doctest::Approx(0.5));
  for (double chi = 0.0; chi < 2 * pi; chi += 0.3)
    CHECK(coherentVisibility(chi) == doctest::Approx(pulseChannelAlgebra(pi, chi).zero));
}

TEST_CASE("mean-field protocol") {
  ProtocolConfig cfg;
  const ProtocolReport pp = runFullProtocol(cfg);
  CHECK(pp.tRecollision == doctest::Approx(pi / cfg.system.trapFrequency()).epsilon(0.01));
  CHECK(pp.channels.minus2k == doctest::Approx(pp.channels.plus2k).epsilon(1e-6));
  CHECK(pp.visibility > 0.6);
  CHECK(pp.visibility < 0.7);
  CHECK_FALSE(pp.occupations.has_value());
  CHECK_FALSE(pp.discrepancy.has_value());
  // the inversion is only defined up to nu = 2/3
  CHECK(pp.n2Interferometric.has_value() == (pp.visibility <= 2.0 / 3 + 1e-9));

  ProtocolConfig zp = cfg;
  zp.pulse1.chi = 0.0;
  const ProtocolReport r = runFullProtocol(zp);
  CHECK(r.visibility < 0.02);
  CHECK(r.channels.minus2k == doctest::Approx(0.5).epsilon(0.02));

  // deterministic
  const ProtocolReport again = runFullProtocol(cfg);
  CHECK(again.visibility == pp.visibility);
  CHECK(again.tRecollision == pp.tRecollision);
  CHECK(again.channels.minus2k == pp.channels.minus2k);
}

TEST_CASE("mean-field phase sweep follows the coherent curve") {
  ProtocolConfig cfg;
  const auto rows = sweepRecombinePhase(cfg, {0.0, pi / 2, pi}, {1}, 0.0, 1);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.atDetected);
    CHECK(std::abs(r.visibility - coherentVisibility(r.chi2)) < 0.03);
    CHECK(r.n2 == 0.0);
  }
  const auto windowed = sweepRecombinePhase(cfg, {pi}, {1}, 0.1, 3);
  CHECK(windowed.size() == 3);
  CHECK_THROWS_AS(sweepRecombinePhase(cfg, {}, {1}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sweepRecombinePhase(cfg, {pi}, {0}, 0.1), std::invalid_argument);
}

TEST_CASE("two-orbital visibility drops from the first to the second re-collision") {
  ProtocolConfig cfg;
  cfg.solver = Solver::MB2;
  const ProtocolReport first = runFullProtocol(cfg);
  cfg.recollisionIndex = 2;
  const ProtocolReport second = runFullProtocol(cfg);
  CHECK(second.visibility < first.visibility);
  REQUIRE(first.occupations.has_value());
  REQUIRE(second.occupations.has_value());
  CHECK(second.occupations->n2 > first.occupations->n2);
  REQUIRE(first.discrepancy.has_value());
}

TEST_CASE("split scan arguments") {
  ProtocolConfig cfg;
  CHECK_THROWS_AS(scanSplitMomentum(cfg, {4.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(scanSplitMomentum(cfg, {3.0, 4.0}, 1.0), std::invalid_argument);
  const auto scan = scanSplitMomentum(cfg, {1.0, 5.0}, 2.0);
  REQUIRE(scan.rows.size() == 2);
  CHECK(scan.rows[0].completeness < 0.99);
  CHECK(scan.rows[1].completeness > 0.99);
  REQUIRE(scan.threshold.has_value());
  CHECK(*scan.threshold > 1.0);
  CHECK(*scan.threshold < 5.0);
  CHECK_THROWS_AS(sweepSplitPhase(cfg, {0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("configuration validation") {
  ProtocolConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [&](auto mutate) {
    ProtocolConfig c = cfg;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](ProtocolConfig& c) { c.system.trapCoefficient = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ProtocolConfig& c) { c.recollisionIndex = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ProtocolConfig& c) { c.tSep = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ProtocolConfig& c) { c.pulse1.k = 9.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ProtocolConfig& c) { c.gridPoints = 1000; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ProtocolConfig& c) { c.integrator.dt = 0.05; }).validate(), std::invalid_argument);
  CHECK((solverFromString("mb2") == Solver::MB2));
  CHECK(mwi::toString(Solver::GP) == std::string("gp"));
  CHECK_THROWS_AS(solverFromString("mctdh"), std::invalid_argument);
}

TEST_CASE("errors carry the stage that raised them") {
  ProtocolConfig cfg;
  cfg.tSep = 0.05;
  try {
    runFullProtocol(cfg);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("stage 3 (recombination)") == 0);
  }
  cfg = {};
  cfg.system.trapCoefficient = 0.0;
  try {
    runFullProtocol(cfg);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("stage config") == 0);
  }
}

TEST_CASE("parallel loop") {
  std::vector<int> hits(50, 0);
  parallelFor(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallelFor(5, [](std::size_t i) {
                    if (i == 3) throw std::logic_error("boom");
                  }),
                  std::logic_error);
}
