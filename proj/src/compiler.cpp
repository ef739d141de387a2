#include "bwcrn/compiler.hpp"

#include <random>
#include <stdexcept>

namespace bwcrn {

namespace {

// One petal per non-center member, center first in the member list.
void add_flower(ReactionNetwork& net, std::size_t center,
                const std::vector<std::size_t>& others) {
  Flower f;
  f.id = net.flowers.size();
  f.center_species = center;
  f.members.push_back(center);
  for (std::size_t sp : others) {
    Petal p;
    p.id = net.petals.size();
    p.flower = f.id;
    p.center_species = center;
    p.petal_species = sp;
    p.key = net.species[sp].name();
    f.members.push_back(sp);
    f.petals.push_back(p.id);
    net.petals.push_back(p);
  }
  net.flowers.push_back(f);
}

}  // namespace

CompiledNetwork compile(std::size_t n_hidden, std::size_t n_visible,
                        const CompilerConfig& cfg) {
  const std::size_t H = n_hidden, V = n_visible, L = cfg.L;
  if (H == 0 || V == 0) throw std::invalid_argument("empty state sets");
  if (cfg.h_star >= H) throw std::invalid_argument("h_star out of range");
  if (cfg.v_star >= V) throw std::invalid_argument("v_star out of range");
  if (L < 2) throw std::invalid_argument("sequence length must be at least 2");
  const std::size_t hs = cfg.h_star, vs = cfg.v_star;

  CompiledNetwork out;
  ReactionNetwork& net = out.net;
  SpeciesLayout& lay = out.layout;
  lay.H = H;
  lay.V = V;
  lay.L = L;
  lay.h_star = hs;
  lay.v_star = vs;

  for (std::size_t h = 0; h < H; ++h) net.add_species(SpeciesKind::Pi, {h});
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t h = 0; h < H; ++h) net.add_species(SpeciesKind::Alpha, {l, h});
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t h = 0; h < H; ++h) net.add_species(SpeciesKind::Beta, {l, h});
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t h = 0; h < H; ++h) net.add_species(SpeciesKind::Gamma, {l, h});
  for (std::size_t l = 0; l + 1 < L; ++l)
    for (std::size_t g = 0; g < H; ++g)
      for (std::size_t h = 0; h < H; ++h) net.add_species(SpeciesKind::Xi, {l, g, h});
  for (std::size_t g = 0; g < H; ++g)
    for (std::size_t h = 0; h < H; ++h) net.add_species(SpeciesKind::Theta, {g, h});
  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t w = 0; w < V; ++w) net.add_species(SpeciesKind::Psi, {h, w});
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t w = 0; w < V; ++w) net.add_species(SpeciesKind::E, {l, w});

  auto others_h = [&](auto id_of) {
    std::vector<std::size_t> v;
    for (std::size_t h = 0; h < H; ++h)
      if (h != hs) v.push_back(id_of(h));
    return v;
  };

  for (std::size_t l = 0; l < L; ++l)
    add_flower(net, lay.alpha(l, hs), others_h([&](std::size_t h) { return lay.alpha(l, h); }));
  for (std::size_t l = 0; l + 1 < L; ++l)
    add_flower(net, lay.beta(l, hs), others_h([&](std::size_t h) { return lay.beta(l, h); }));
  for (std::size_t l = 0; l < L; ++l)
    add_flower(net, lay.gamma(l, hs), others_h([&](std::size_t h) { return lay.gamma(l, h); }));
  for (std::size_t l = 0; l + 1 < L; ++l) {
    std::vector<std::size_t> members;
    for (std::size_t g = 0; g < H; ++g)
      for (std::size_t h = 0; h < H; ++h)
        if (!(g == hs && h == hs)) members.push_back(lay.xi(l, g, h));
    add_flower(net, lay.xi(l, hs, hs), members);
  }
  for (std::size_t g = 0; g < H; ++g)
    add_flower(net, lay.theta(g, hs), others_h([&](std::size_t h) { return lay.theta(g, h); }));
  for (std::size_t h = 0; h < H; ++h) {
    std::vector<std::size_t> members;
    for (std::size_t w = 0; w < V; ++w)
      if (w != vs) members.push_back(lay.psi(h, w));
    add_flower(net, lay.psi(h, vs), members);
  }

  // Petal lookup by its non-center species id.
  std::vector<std::size_t> petal_of(net.species.size(), SIZE_MAX);
  for (const Petal& p : net.petals) petal_of[p.petal_species] = p.id;

  auto pair_up = [&](std::size_t a, std::size_t b, std::vector<Term> cat_fwd,
                     std::vector<Term> cat_bwd, std::size_t key, Family fam) {
    std::vector<Term> r1{{a, 1}}, p1{{b, 1}};
    for (const Term& t : cat_fwd) {
      r1.push_back(t);
      p1.push_back(t);
    }
    net.add_reaction(r1, p1, key, fam);
    std::vector<Term> r2{{b, 1}}, p2{{a, 1}};
    for (const Term& t : cat_bwd) {
      r2.push_back(t);
      p2.push_back(t);
    }
    net.add_reaction(r2, p2, key, fam);
  };

  for (std::size_t h = 0; h < H; ++h) {
    if (h == hs) continue;
    std::size_t key = petal_of[lay.alpha(0, h)];
    for (std::size_t w = 0; w < V; ++w)
      pair_up(lay.alpha(0, h), lay.alpha(0, hs),
              {{lay.pi(hs), 1}, {lay.psi(hs, w), 1}, {lay.E(0, w), 1}},
              {{lay.pi(h), 1}, {lay.psi(h, w), 1}, {lay.E(0, w), 1}},
              key, Family::ForwardInit);
  }

  for (std::size_t l = 1; l < L; ++l)
    for (std::size_t h = 0; h < H; ++h) {
      if (h == hs) continue;
      std::size_t key = petal_of[lay.alpha(l, h)];
      for (std::size_t g = 0; g < H; ++g)
        for (std::size_t w = 0; w < V; ++w)
          pair_up(lay.alpha(l, h), lay.alpha(l, hs),
                  {{lay.alpha(l - 1, g), 1}, {lay.theta(g, hs), 1}, {lay.psi(hs, w), 1}, {lay.E(l, w), 1}},
                  {{lay.alpha(l - 1, g), 1}, {lay.theta(g, h), 1}, {lay.psi(h, w), 1}, {lay.E(l, w), 1}},
                  key, Family::ForwardRecursion);
    }

  for (std::size_t l = 0; l + 1 < L; ++l)
    for (std::size_t h = 0; h < H; ++h) {
      if (h == hs) continue;
      std::size_t key = petal_of[lay.beta(l, h)];
      for (std::size_t g = 0; g < H; ++g)
        for (std::size_t w = 0; w < V; ++w)
          pair_up(lay.beta(l, h), lay.beta(l, hs),
                  {{lay.beta(l + 1, g), 1}, {lay.theta(hs, g), 1}, {lay.psi(g, w), 1}, {lay.E(l + 1, w), 1}},
                  {{lay.beta(l + 1, g), 1}, {lay.theta(h, g), 1}, {lay.psi(g, w), 1}, {lay.E(l + 1, w), 1}},
                  key, Family::Backward);
    }

  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t h = 0; h < H; ++h) {
      if (h == hs) continue;
      pair_up(lay.gamma(l, h), lay.gamma(l, hs),
              {{lay.alpha(l, hs), 1}, {lay.beta(l, hs), 1}},
              {{lay.alpha(l, h), 1}, {lay.beta(l, h), 1}},
              petal_of[lay.gamma(l, h)], Family::GammaStep);
    }

  for (std::size_t l = 0; l + 1 < L; ++l)
    for (std::size_t g = 0; g < H; ++g)
      for (std::size_t h = 0; h < H; ++h) {
        if (g == hs && h == hs) continue;
        std::size_t key = petal_of[lay.xi(l, g, h)];
        for (std::size_t w = 0; w < V; ++w)
          pair_up(lay.xi(l, g, h), lay.xi(l, hs, hs),
                  {{lay.alpha(l, hs), 1}, {lay.theta(hs, hs), 1}, {lay.beta(l + 1, hs), 1},
                   {lay.psi(hs, w), 1}, {lay.E(l + 1, w), 1}},
                  {{lay.alpha(l, g), 1}, {lay.theta(g, h), 1}, {lay.beta(l + 1, h), 1},
                   {lay.psi(h, w), 1}, {lay.E(l + 1, w), 1}},
                  key, Family::XiStep);
      }

  for (std::size_t g = 0; g < H; ++g)
    for (std::size_t h = 0; h < H; ++h) {
      if (h == hs) continue;
      std::size_t key = petal_of[lay.theta(g, h)];
      for (std::size_t l = 0; l + 1 < L; ++l)
        pair_up(lay.theta(g, h), lay.theta(g, hs),
                {{lay.xi(l, g, hs), 1}}, {{lay.xi(l, g, h), 1}},
                key, Family::MaximizationTheta);
    }

  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t w = 0; w < V; ++w) {
      if (w == vs) continue;
      std::size_t key = petal_of[lay.psi(h, w)];
      for (std::size_t l = 0; l < L; ++l)
        pair_up(lay.psi(h, w), lay.psi(h, vs),
                {{lay.gamma(l, h), 1}, {lay.E(l, vs), 1}},
                {{lay.gamma(l, h), 1}, {lay.E(l, w), 1}},
                key, Family::MaximizationPsi);
    }

  for (std::size_t ri = 0; ri < net.reactions.size(); ++ri)
    net.petals[net.reactions[ri].rate_key].reactions.push_back(ri);

  return out;
}

RateAssignment default_rates(const ReactionNetwork& net) {
  RateAssignment ra;
  ra.rates.assign(net.petals.size(), 1.0);
  return ra;
}

Concentration initial_concentrations(const SpeciesLayout& lay, const Hmm& hmm,
                                     const ObservationSequence& obs, std::uint64_t seed) {
  if (hmm.n_hidden() != lay.H || hmm.n_visible() != lay.V)
    throw std::invalid_argument("model dimensions do not match the layout");
  if (obs.length() != lay.L)
    throw std::invalid_argument("sequence length does not match the layout");

  std::mt19937_64 rng(seed);
  auto draw = [&rng]() { return 0.5 + (rng() >> 11) * 0x1.0p-53; };

  Concentration x(lay.total(), 0.0);
  for (std::size_t h = 0; h < lay.H; ++h) x[lay.pi(h)] = hmm.pi[h];
  for (std::size_t l = 0; l < lay.L; ++l)
    for (std::size_t h = 0; h < lay.H; ++h) x[lay.alpha(l, h)] = draw();
  for (std::size_t l = 0; l + 1 < lay.L; ++l)
    for (std::size_t h = 0; h < lay.H; ++h) x[lay.beta(l, h)] = draw();
  for (std::size_t h = 0; h < lay.H; ++h) x[lay.beta(lay.L - 1, h)] = 1.0;
  for (std::size_t l = 0; l < lay.L; ++l)
    for (std::size_t h = 0; h < lay.H; ++h) x[lay.gamma(l, h)] = draw();
  for (std::size_t l = 0; l + 1 < lay.L; ++l)
    for (std::size_t g = 0; g < lay.H; ++g)
      for (std::size_t h = 0; h < lay.H; ++h) x[lay.xi(l, g, h)] = draw();
  for (std::size_t g = 0; g < lay.H; ++g)
    for (std::size_t h = 0; h < lay.H; ++h) x[lay.theta(g, h)] = hmm.theta(g, h);
  for (std::size_t h = 0; h < lay.H; ++h)
    for (std::size_t w = 0; w < lay.V; ++w) x[lay.psi(h, w)] = hmm.psi(h, w);
  for (std::size_t l = 0; l < lay.L; ++l)
    x[lay.E(l, obs.symbols[l])] = 1.0;
  return x;
}

}  // namespace bwcrn
