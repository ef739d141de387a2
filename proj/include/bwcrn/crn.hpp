#ifndef BWCRN_CRN_HPP
#define BWCRN_CRN_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bwcrn {

enum class SpeciesKind : uint8_t { Pi, Alpha, Beta, Gamma, Xi, Theta, Psi, E };

const char* kind_name(SpeciesKind k);

// Structured species label: kind plus up to three 0-based indices.
// Printed 1-based, e.g. alpha_3_1 is the alpha species for l=3, h=1.
struct Species {
  std::size_t id = 0;
  SpeciesKind kind = SpeciesKind::Pi;
  std::array<std::size_t, 3> idx = {0, 0, 0};
  std::size_t n_idx = 0;

  std::string name() const;
};

enum class Family : uint8_t {
  ForwardInit,
  ForwardRecursion,
  Backward,
  GammaStep,
  XiStep,
  MaximizationTheta,
  MaximizationPsi,
};

const char* family_name(Family f);

struct Term {
  std::size_t species;
  std::size_t coef;
};

struct Reaction {
  std::vector<Term> reactants;
  std::vector<Term> products;
  std::size_t rate_key = 0;  // petal index
  Family family = Family::ForwardInit;

  // Derived: the single transformed source/target species (monomolecular
  // transformation; all other participants are catalysts).
  std::size_t from = 0;
  std::size_t to = 0;
};

struct Petal {
  std::size_t id = 0;
  std::size_t flower = 0;
  std::size_t center_species = 0;
  std::size_t petal_species = 0;
  std::string key;  // structured name of the non-center species
  std::vector<std::size_t> reactions;
};

struct Flower {
  std::size_t id = 0;
  std::size_t center_species = 0;
  std::vector<std::size_t> members;  // center first, then petal species
  std::vector<std::size_t> petals;
};

struct ReactionNetwork {
  std::vector<Species> species;
  std::vector<Reaction> reactions;
  std::vector<Petal> petals;
  std::vector<Flower> flowers;

  std::size_t add_species(SpeciesKind kind, std::initializer_list<std::size_t> idx);
  // Derives from/to and drops null reactions (returns false for those).
  bool add_reaction(std::vector<Term> reactants, std::vector<Term> products,
                    std::size_t rate_key, Family family);

  std::string export_text(const std::vector<double>& rates) const;
};

struct RateAssignment {
  std::vector<double> rates;  // one per petal, all > 0

  void validate() const;
};

using Concentration = std::vector<double>;

// xdot_i = sum over reactions of k * (prod_i - react_i) * prod_j x_j^coef_j.
// Each reaction's flux is applied as one subtraction and one addition of the
// same value, so flower totals are conserved to roundoff.
Concentration mass_action_rhs(const ReactionNetwork& net, const RateAssignment& rates,
                              const Concentration& x);

// Per-flower totals, indexed by flower id.
std::vector<double> conserved_sums(const ReactionNetwork& net, const Concentration& x);

struct PositivityReport {
  bool positive = true;
  std::vector<std::size_t> near_zero;  // species ids at or below eps
};

PositivityReport is_positive(const Concentration& x, double eps);

}  // namespace bwcrn

#endif
