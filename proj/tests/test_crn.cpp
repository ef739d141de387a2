#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "bwcrn/crn.hpp"

using namespace bwcrn;

namespace {

// X <-> Y with catalyst C on both directions, one petal per direction so the
// two rates can differ in kinetics checks.
struct TwoStateFixture {
  ReactionNetwork net;
  std::size_t X, Y, C;

  TwoStateFixture() {
    X = net.add_species(SpeciesKind::Alpha, {0, 0});
    Y = net.add_species(SpeciesKind::Alpha, {0, 1});
    C = net.add_species(SpeciesKind::E, {0, 0});
    Petal p0;
    p0.id = 0;
    p0.flower = 0;
    p0.center_species = Y;
    p0.petal_species = X;
    p0.key = "alpha_1_1_fwd";
    Petal p1 = p0;
    p1.id = 1;
    p1.key = "alpha_1_1_rev";
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
  }
};

}  // namespace

TEST_CASE("species print structured 1-based names") {
  ReactionNetwork net;
  std::size_t a = net.add_species(SpeciesKind::Alpha, {2, 0});
  std::size_t p = net.add_species(SpeciesKind::Pi, {0});
  std::size_t x = net.add_species(SpeciesKind::Xi, {0, 1, 0});
  std::size_t e = net.add_species(SpeciesKind::E, {3, 1});
  CHECK(net.species[a].name() == "alpha_3_1");
  CHECK(net.species[p].name() == "pi_1");
  CHECK(net.species[x].name() == "xi_1_2_1");
  CHECK(net.species[e].name() == "E_4_2");
}

TEST_CASE("null reactions are dropped") {
  TwoStateFixture f;
  std::size_t before = f.net.reactions.size();
  bool added = f.net.add_reaction({{f.X, 1}, {f.C, 1}}, {{f.X, 1}, {f.C, 1}}, 0,
                                  Family::ForwardInit);
  CHECK_FALSE(added);
  CHECK(f.net.reactions.size() == before);
}

TEST_CASE("non-monomolecular reactions are rejected") {
  TwoStateFixture f;
  CHECK_THROWS_AS(f.net.add_reaction({{f.X, 1}, {f.Y, 1}}, {{f.C, 2}}, 0, Family::ForwardInit),
                  std::invalid_argument);
  CHECK_THROWS_AS(f.net.add_reaction({{f.X, 2}}, {{f.Y, 2}}, 0, Family::ForwardInit),
                  std::invalid_argument);
}

TEST_CASE("reactions derive their transformed pair") {
  TwoStateFixture f;
  const Reaction& r0 = f.net.reactions[0];
  CHECK(r0.from == f.X);
  CHECK(r0.to == f.Y);
  const Reaction& r1 = f.net.reactions[1];
  CHECK(r1.from == f.Y);
  CHECK(r1.to == f.X);
}

TEST_CASE("mass action kinetics on the two-state fixture") {
  TwoStateFixture f;
  RateAssignment ra;
  ra.rates = {2.0, 1.0};
  Concentration x = {0.5, 0.25, 3.0};
  Concentration dx = mass_action_rhs(f.net, ra, x);
  // forward flux 2*0.5*3 = 3, backward flux 1*0.25*3 = 0.75
  CHECK(dx[f.X] == doctest::Approx(-3.0 + 0.75).epsilon(1e-14));
  CHECK(dx[f.Y] == doctest::Approx(3.0 - 0.75).epsilon(1e-14));
  CHECK(dx[f.C] == 0.0);
  CHECK(dx[f.X] + dx[f.Y] == 0.0);
}

TEST_CASE("kinetics validates its inputs") {
  TwoStateFixture f;
  RateAssignment ra;
  ra.rates = {2.0, 1.0};
  Concentration wrong_size = {1.0, 2.0};
  CHECK_THROWS_AS(mass_action_rhs(f.net, ra, wrong_size), std::invalid_argument);
  RateAssignment short_rates;
  short_rates.rates = {2.0};
  Concentration x = {0.5, 0.25, 3.0};
  CHECK_THROWS_AS(mass_action_rhs(f.net, short_rates, x), std::invalid_argument);
  RateAssignment bad;
  bad.rates = {1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("flower totals are read off the state") {
  TwoStateFixture f;
  Concentration x = {0.5, 0.25, 3.0};
  std::vector<double> sums = conserved_sums(f.net, x);
  REQUIRE(sums.size() == 1);
  CHECK(sums[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("positivity report flags near-zero species") {
  Concentration x = {1.0, 1e-9, 0.0};
  PositivityReport rep = is_positive(x, 1e-8);
  CHECK_FALSE(rep.positive);
  CHECK(rep.near_zero == std::vector<std::size_t>{1, 2});
  PositivityReport ok = is_positive({1.0, 2.0}, 1e-8);
  CHECK(ok.positive);
  CHECK(ok.near_zero.empty());
  CHECK_THROWS_AS(is_positive(x, -1.0), std::invalid_argument);
}

TEST_CASE("export lists every reaction with rate and family") {
  TwoStateFixture f;
  std::string text = f.net.export_text({2.0, 1.0});
  CHECK(text.find("1 alpha_1_1 + 1 E_1_1 -> 1 alpha_1_2 + 1 E_1_1") != std::string::npos);
  CHECK(text.find("rate_key=k_alpha_1_1_fwd") != std::string::npos);
  CHECK(text.find("rate=2") != std::string::npos);
  CHECK(text.find("family=forward-init") != std::string::npos);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == f.net.reactions.size());
}
