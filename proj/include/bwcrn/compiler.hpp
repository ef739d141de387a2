#ifndef BWCRN_COMPILER_HPP
#define BWCRN_COMPILER_HPP

#include <cstddef>

#include "bwcrn/crn.hpp"
#include "bwcrn/hmm.hpp"

namespace bwcrn {

struct CompilerConfig {
  std::size_t h_star = 0;
  std::size_t v_star = 0;
  std::size_t L = 2;
};

// Dense species ids for the compiled network, ordered pi, alpha, beta,
// gamma, xi, theta, psi, E. All position indices are 0-based here;
// species names print them 1-based.
struct SpeciesLayout {
  std::size_t H = 0, V = 0, L = 0;
  std::size_t h_star = 0, v_star = 0;

  std::size_t pi(std::size_t h) const { return h; }
  std::size_t alpha(std::size_t l, std::size_t h) const { return H + l * H + h; }
  std::size_t beta(std::size_t l, std::size_t h) const { return H + L * H + l * H + h; }
  std::size_t gamma(std::size_t l, std::size_t h) const { return H + 2 * L * H + l * H + h; }
  std::size_t xi(std::size_t l, std::size_t g, std::size_t h) const {
    return H + 3 * L * H + l * H * H + g * H + h;
  }
  std::size_t theta(std::size_t g, std::size_t h) const {
    return H + 3 * L * H + (L - 1) * H * H + g * H + h;
  }
  std::size_t psi(std::size_t h, std::size_t w) const {
    return H + 3 * L * H + L * H * H + h * V + w;
  }
  std::size_t E(std::size_t l, std::size_t w) const {
    return H + 3 * L * H + L * H * H + H * V + l * V + w;
  }
  std::size_t total() const { return H + 3 * L * H + L * H * H + H * V + L * V; }

  // Flower ids follow construction order.
  std::size_t alpha_flower(std::size_t l) const { return l; }
  std::size_t beta_flower(std::size_t l) const { return L + l; }
  std::size_t gamma_flower(std::size_t l) const { return 2 * L - 1 + l; }
  std::size_t xi_flower(std::size_t l) const { return 3 * L - 1 + l; }
  std::size_t theta_flower(std::size_t g) const { return 4 * L - 2 + g; }
  std::size_t psi_flower(std::size_t h) const { return 4 * L - 2 + H + h; }
  std::size_t flower_count() const { return 4 * L - 2 + 2 * H; }
};

struct CompiledNetwork {
  ReactionNetwork net;
  SpeciesLayout layout;
};

CompiledNetwork compile(std::size_t n_hidden, std::size_t n_visible,
                        const CompilerConfig& cfg);

RateAssignment default_rates(const ReactionNetwork& net);

// E species from obs; beta at the last position set to 1; pi, theta, psi
// from the model; every remaining species drawn uniformly from [0.5, 1.5)
// with a deterministic seeded generator.
Concentration initial_concentrations(const SpeciesLayout& layout, const Hmm& hmm,
                                     const ObservationSequence& obs, std::uint64_t seed);

}  // namespace bwcrn

#endif
