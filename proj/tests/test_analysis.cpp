#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bwcrn/analysis.hpp"
#include "bwcrn/compiler.hpp"
#include "bwcrn/hmm.hpp"
#include "bwcrn/sim.hpp"

using namespace bwcrn;

namespace {

Hmm tiny_model() {
  Hmm m;
  m.hidden_states = {"H1", "H2"};
  m.visible_states = {"V1", "V2"};
  m.pi = {0.6, 0.4};
  m.theta.entries = Mat(2, 2);
  m.theta.entries(0, 0) = 0.6;
  m.theta.entries(0, 1) = 0.4;
  m.theta.entries(1, 0) = 0.3;
  m.theta.entries(1, 1) = 0.7;
  m.psi.entries = Mat(2, 2, 0.5);
  return m;
}

ObservationSequence long_seq() {
  ObservationSequence o;
  o.symbols = {0, 0, 0, 1, 0, 0, 1, 1, 1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 1};
  return o;
}

ObservationSequence tiny_obs() {
  ObservationSequence o;
  o.symbols = {0, 1, 1, 0};
  return o;
}

std::vector<double> sorted_reals(std::vector<std::complex<double>> evs) {
  std::vector<double> out;
  for (const auto& e : evs) {
    CHECK(std::fabs(e.imag()) < 1e-10);
    out.push_back(e.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("kernel reduction on the symmetric pair") {
  MonomolecularSystem sys;
  sys.n = 2;
  sys.r = 1;
  sys.species_ids = {0, 1};
  sys.A = Eigen::MatrixXd(2, 2);
  sys.A << -1, 1, 1, -1;
  sys.Wprime = Eigen::MatrixXd::Ones(1, 1);
  sys.strongly_connected = true;

  auto evs = reduced_spectrum(sys);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].real() == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(spectral_abscissa(sys) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("kernel reduction matches the full spectrum on a block union") {
  double al = 1.5, be = 0.5, ga = 2.0, de = 3.0;
  MonomolecularSystem sys;
  sys.n = 4;
  sys.r = 2;
  sys.species_ids = {0, 1, 2, 3};
  sys.A = Eigen::MatrixXd::Zero(4, 4);
  // two independent pairs, non-centers (0, 1) first, centers (2, 3) last
  sys.A(0, 0) = -al;
  sys.A(2, 0) = al;
  sys.A(0, 2) = be;
  sys.A(2, 2) = -be;
  sys.A(1, 1) = -ga;
  sys.A(3, 1) = ga;
  sys.A(1, 3) = de;
  sys.A(3, 3) = -de;
  sys.Wprime = Eigen::MatrixXd::Identity(2, 2);

  std::vector<double> reduced = sorted_reals(reduced_spectrum(sys));
  REQUIRE(reduced.size() == 2);
  CHECK(reduced[0] == doctest::Approx(-(ga + de)).epsilon(1e-12));
  CHECK(reduced[1] == doctest::Approx(-(al + be)).epsilon(1e-12));

  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A);
  std::vector<double> full;
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(std::fabs(es.eigenvalues()[i].imag()) < 1e-10);
    full.push_back(es.eigenvalues()[i].real());
  }
  std::sort(full.begin(), full.end());
  CHECK(full[0] == doctest::Approx(-(ga + de)).epsilon(1e-10));
  CHECK(full[1] == doctest::Approx(-(al + be)).epsilon(1e-10));
  CHECK(std::fabs(full[2]) < 1e-12);
  CHECK(std::fabs(full[3]) < 1e-12);
}

TEST_CASE("a bad kernel is rejected") {
  MonomolecularSystem sys;
  sys.n = 2;
  sys.r = 1;
  sys.species_ids = {0, 1};
  sys.A = Eigen::MatrixXd(2, 2);
  sys.A << -1, 1, 0, -1;
  sys.Wprime = Eigen::MatrixXd::Ones(1, 1);
  CHECK_THROWS_AS(reduced_spectrum(sys), std::invalid_argument);
}

TEST_CASE("flower extraction reads effective rates off the state") {
  ReactionNetwork net;
  std::size_t X = net.add_species(SpeciesKind::Alpha, {0, 0});
  std::size_t Y = net.add_species(SpeciesKind::Alpha, {0, 1});
  std::size_t C = net.add_species(SpeciesKind::E, {0, 0});
  Petal p0;
  p0.id = 0;
  p0.flower = 0;
  p0.center_species = Y;
  p0.petal_species = X;
  p0.key = "fwd";
  Petal p1 = p0;
  p1.id = 1;
  p1.key = "rev";
  net.petals = {p0, p1};
  net.add_reaction({{X, 1}, {C, 1}}, {{Y, 1}, {C, 1}}, 0, Family::ForwardInit);
  net.add_reaction({{Y, 1}, {C, 1}}, {{X, 1}, {C, 1}}, 1, Family::ForwardInit);
  net.petals[0].reactions = {0};
  net.petals[1].reactions = {1};
  Flower f;
  f.id = 0;
  f.center_species = Y;
  f.members = {Y, X};
  f.petals = {0, 1};
  net.flowers = {f};
  RateAssignment ra;
  ra.rates = {2.0, 1.0};

  MonomolecularSystem sys = extract_monomolecular(net, ra, {0.4, 0.6, 3.0}, 0);
  REQUIRE(sys.n == 2);
  CHECK(sys.species_ids.front() == X);
  CHECK(sys.species_ids.back() == Y);
  CHECK(sys.A(0, 0) == doctest::Approx(-6.0));
  CHECK(sys.A(1, 0) == doctest::Approx(6.0));
  CHECK(sys.A(0, 1) == doctest::Approx(3.0));
  CHECK(sys.A(1, 1) == doctest::Approx(-3.0));
  CHECK(sys.strongly_connected);
  CHECK(spectral_abscissa(sys) == doctest::Approx(-9.0).epsilon(1e-12));

  MonomolecularSystem dead = extract_monomolecular(net, ra, {0.4, 0.6, 0.0}, 0);
  CHECK_FALSE(dead.strongly_connected);
  CHECK(spectral_abscissa(dead) == doctest::Approx(0.0));
}

TEST_CASE("rate fitting recovers a synthetic exponential") {
  Trajectory traj;
  Concentration ref = {1.0, 2.0};
  for (int i = 0; i <= 100; ++i) {
    double t = 0.05 * i;
    traj.times.push_back(t);
    traj.states.push_back({ref[0] + 0.3 * std::exp(-2.0 * t), ref[1] - 0.2 * std::exp(-2.0 * t)});
  }
  RateFit fit = fit_convergence_rate(traj, ref);
  CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.r_squared > 1.0 - 1e-12);
  CHECK(fit.points_used == 61);
  CHECK_FALSE(fit.window_shrunk);
}

TEST_CASE("rate fitting rejects unusable inputs") {
  Trajectory tiny;
  tiny.times = {0.0, 1.0};
  tiny.states = {{1.0}, {1.0}};
  CHECK_THROWS_AS(fit_convergence_rate(tiny, {1.0}), std::invalid_argument);

  Trajectory flat;
  Concentration ref = {1.0};
  for (int i = 0; i <= 20; ++i) {
    flat.times.push_back(0.1 * i);
    flat.states.push_back(ref);
  }
  CHECK_THROWS_AS(fit_convergence_rate(flat, ref), std::invalid_argument);
}

TEST_CASE("the embedded classical fixed point is a network fixed point") {
  Hmm m = tiny_model();
  ObservationSequence obs = long_seq();
  BaumWelchResult trained = baum_welch(m, obs, 1e-13, 5000);
  REQUIRE(trained.converged);
  Hmm fixed = m;
  fixed.theta = trained.theta;
  fixed.psi = trained.psi;

  CompiledNetwork cn = compile(2, 2, CompilerConfig{0, 0, obs.length()});
  RateAssignment rates = default_rates(cn.net);
  Concentration x = embed_classical_state(fixed, obs, cn.layout);
  FixedPointReport rep = check_fixed_point(fixed, obs, cn, rates, x);

  CHECK(rep.classification == FixedPointClass::BothFixed);
  CHECK(rep.bw_residual < 1e-9);
  CHECK(rep.crn_rhs_norm < 1e-9);
  for (std::size_t i = 0; i < 7; ++i) {
    CAPTURE(kFamilyLabels[i]);
    CHECK(rep.family_residuals[i] < 1e-9);
  }
}

TEST_CASE("embedding a non-fixed model is not a fixed point") {
  Hmm m = tiny_model();
  ObservationSequence obs = tiny_obs();
  CompiledNetwork cn = compile(2, 2, CompilerConfig{0, 0, obs.length()});
  RateAssignment rates = default_rates(cn.net);
  Concentration x = embed_classical_state(m, obs, cn.layout);
  FixedPointReport rep = check_fixed_point(m, obs, cn, rates, x);
  CHECK(rep.classification != FixedPointClass::BothFixed);
  CHECK(rep.crn_rhs_norm > 1e-4);
}

TEST_CASE("a seeded initial state is far from fixed") {
  Hmm m = tiny_model();
  ObservationSequence obs = tiny_obs();
  CompiledNetwork cn = compile(2, 2, CompilerConfig{0, 0, obs.length()});
  RateAssignment rates = default_rates(cn.net);
  Concentration x0 = initial_concentrations(cn.layout, m, obs, 5);
  FixedPointReport rep = check_fixed_point(m, obs, cn, rates, x0);
  CHECK(rep.classification == FixedPointClass::Neither);
  CHECK(rep.bw_residual > 1e-3);
  CHECK(rep.crn_rhs_norm > 1e-3);
}

TEST_CASE("a converged chemical run lands on a both-fixed state") {
  Hmm m;
  m.hidden_states = {"H1"};
  m.visible_states = {"V1", "V2"};
  m.pi = {1.0};
  m.theta.entries = Mat(1, 1, 1.0);
  m.psi.entries = Mat(1, 2, 0.5);
  ObservationSequence obs;
  obs.symbols = {0, 1, 1, 0};

  SimConfig cfg;
  ChemicalRunResult res = run_chemical_baum_welch(m, obs, cfg, 7);
  REQUIRE(res.traj.converged);

  CompiledNetwork cn = compile(1, 2, CompilerConfig{0, 0, obs.length()});
  RateAssignment rates = default_rates(cn.net);
  FixedPointReport rep = check_fixed_point(m, obs, cn, rates, res.final_state);
  CHECK(rep.classification == FixedPointClass::BothFixed);
  CHECK(rep.positive);
  CHECK(rep.bw_residual < 1e-5);
  CHECK(res.bw_residual == doctest::Approx(rep.bw_residual).epsilon(1e-9));

  // With one hidden state the gamma species are inert, so the emission
  // estimate is the symbol frequency weighted by the initial gamma values.
  Concentration x0 = initial_concentrations(cn.layout, m, obs, 7);
  double num = 0.0, den = 0.0;
  for (std::size_t l = 0; l < obs.length(); ++l) {
    double g0 = x0[cn.layout.gamma(l, 0)];
    den += g0;
    if (obs.symbols[l] == 0) num += g0;
  }
  CHECK(res.psi_hat(0, 0) == doctest::Approx(num / den).epsilon(1e-5));
}

TEST_CASE("a stuck two-state run is crn-fixed but off the update equations") {
  Hmm m = tiny_model();
  ObservationSequence obs = tiny_obs();
  SimConfig cfg;
  ChemicalRunResult res = run_chemical_baum_welch(m, obs, cfg, 7);
  REQUIRE(res.traj.converged);

  CompiledNetwork cn = compile(2, 2, CompilerConfig{0, 0, obs.length()});
  RateAssignment rates = default_rates(cn.net);
  FixedPointReport rep = check_fixed_point(m, obs, cn, rates, res.final_state);
  CHECK(rep.classification == FixedPointClass::CrnOnly);
  CHECK_FALSE(rep.positive);
  CHECK(res.final_readout.boundary);
  CHECK(rep.bw_residual > 1e-2);
}

TEST_CASE("classification names are stable") {
  CHECK(std::string(classification_name(FixedPointClass::BothFixed)) == "both-fixed");
  CHECK(std::string(classification_name(FixedPointClass::CrnOnly)) == "crn-only");
  CHECK(std::string(classification_name(FixedPointClass::BwOnly)) == "bw-only");
  CHECK(std::string(classification_name(FixedPointClass::Neither)) == "neither");
}
